//! File formats: density matrices, channel specs and maximizers as JSON with separate real and
//! imaginary arrays (row-major), experiment and convergence data as CSV.

use std::fs;
use std::io::Write;
use std::path::Path;

use qtl_core::channels::{ChannelSpec, CorrectionFamily, Protocol};
use qtl_core::metrics::{ExperimentRecord, FefReport};
use qtl_core::optimizer::{RunTrace, TracePoint};
use qtl_core::{ComplexMatrix, DensityMatrix};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Significant digits of CSV and report numbers.
pub const SIG_DIGITS: usize = 12;

pub const EXPERIMENT_HEADER: [&str; 9] = ["n", "seed", "F1", "F2", "dF", "f1_opt", "f2_opt", "iters_f1", "iters_f2"];

pub const TRACE_HEADER: [&str; 4] = ["restart", "iteration", "value", "grad_norm"];

/// `x` rounded to [`SIG_DIGITS`] significant digits, printed in its shortest form.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return format!("{}", x);
    }
    let rounded: f64 = format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x);
    let a = rounded.abs();
    if rounded == 0.0 {
        "0".to_string()
    } else if (1e-4..1e15).contains(&a) {
        format!("{}", rounded)
    } else {
        format!("{:e}", rounded)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&qtl_core::C64) -> f64| (0..m.rows()).map(|i| m.row(i).iter().map(f).collect()).collect();
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    /// `what` names the matrix in error messages.
    pub fn to_matrix(&self, what: &str) -> Result<ComplexMatrix> {
        let rows = self.re.len();
        if rows == 0 {
            return Err(CliError::Validation(format!("field `{}.re`: empty matrix", what)));
        }
        let cols = self.re[0].len();
        for (name, part) in [("re", &self.re), ("im", &self.im)] {
            if part.len() != rows {
                return Err(CliError::Validation(format!(
                    "field `{}.{}`: {} rows, expected {}",
                    what,
                    name,
                    part.len(),
                    rows
                )));
            }
            if let Some((i, r)) = part.iter().enumerate().find(|(_, r)| r.len() != cols) {
                return Err(CliError::Validation(format!(
                    "field `{}.{}`: row {} has {} entries, expected {}",
                    what,
                    name,
                    i,
                    r.len(),
                    cols
                )));
            }
        }
        let re: Vec<f64> = self.re.concat();
        let im: Vec<f64> = self.im.concat();
        Ok(ComplexMatrix::from_parts(rows, cols, &re, &im)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityJson {
    pub dims: Vec<usize>,
    #[serde(flatten)]
    pub matrix: MatrixJson,
}

impl DensityJson {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        Self {
            dims: rho.dims().to_vec(),
            matrix: MatrixJson::from_matrix(rho.matrix()),
        }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let m = self.matrix.to_matrix("density")?;
        let total: usize = self.dims.iter().product();
        if self.dims.is_empty() || total != m.rows() || !m.is_square() {
            return Err(CliError::Validation(format!(
                "field `dims`: {:?} does not match a {}x{} matrix",
                self.dims,
                m.rows(),
                m.cols()
            )));
        }
        Ok(DensityMatrix::new(m, self.dims.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpecJson {
    pub protocol: String,
    pub n: usize,
    pub w: MatrixJson,
    pub v: MatrixJson,
    pub corrections: Vec<MatrixJson>,
}

impl ChannelSpecJson {
    pub fn from_spec(spec: &ChannelSpec) -> Self {
        Self {
            protocol: spec.protocol().name().to_string(),
            n: spec.n(),
            w: MatrixJson::from_matrix(spec.w()),
            v: MatrixJson::from_matrix(spec.v()),
            corrections: spec.corrections().ops().iter().map(MatrixJson::from_matrix).collect(),
        }
    }

    pub fn to_spec(&self) -> Result<ChannelSpec> {
        let protocol = Protocol::from_name(&self.protocol).ok_or_else(|| {
            CliError::Validation(format!("field `protocol`: unknown protocol `{}`", self.protocol))
        })?;
        let ops = self
            .corrections
            .iter()
            .enumerate()
            .map(|(k, m)| m.to_matrix(&format!("corrections[{}]", k)))
            .collect::<Result<Vec<_>>>()?;
        let corrections = match protocol {
            Protocol::TwoChannelGhz => CorrectionFamily::ghz(self.n, ops)?,
            _ => CorrectionFamily::bell(self.n, ops)?,
        };
        Ok(ChannelSpec::new(
            protocol,
            self.n,
            self.w.to_matrix("w")?,
            self.v.to_matrix("v")?,
            corrections,
        )?)
    }
}

/// Optimizer output of `qtl fef`, including the channel that attains `value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximizerJson {
    pub kind: String,
    pub n: usize,
    pub value: f64,
    pub optimal_fidelity: f64,
    pub useful: bool,
    pub converged: bool,
    pub iterations: usize,
    pub maximizers: Vec<MatrixJson>,
    pub channel: ChannelSpecJson,
}

impl MaximizerJson {
    pub fn from_report(r: &FefReport) -> Result<Self> {
        Ok(Self {
            kind: r.kind.tag.name().to_string(),
            n: r.kind.n,
            value: r.value,
            optimal_fidelity: r.optimal_fidelity,
            useful: r.useful,
            converged: r.converged,
            iterations: r.iterations,
            maximizers: r.maximizers.iter().map(MatrixJson::from_matrix).collect(),
            channel: ChannelSpecJson::from_spec(&r.channel_spec()?),
        })
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| CliError::Validation(format!("parse error: {}", e)))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json(&read_text(path)?).map_err(|e| e.in_file(path))
}

pub fn load_density(path: &Path) -> Result<DensityMatrix> {
    read_json::<DensityJson>(path)?.to_density().map_err(|e| e.in_file(path))
}

pub fn save_density(path: &Path, rho: &DensityMatrix) -> Result<()> {
    write_text(path, &to_json(&DensityJson::from_density(rho)))
}

/// Accepts a channel-spec file or a maximizer file (its `channel` field).
pub fn load_spec(path: &Path) -> Result<ChannelSpec> {
    let mut value: serde_json::Value = read_json(path)?;
    if let Some(channel) = value.get_mut("channel") {
        value = channel.take();
    }
    let spec: ChannelSpecJson =
        serde_json::from_value(value).map_err(|e| CliError::Validation(format!("{}: parse error: {}", path.display(), e)))?;
    spec.to_spec().map_err(|e| e.in_file(path))
}

pub fn save_spec(path: &Path, spec: &ChannelSpec) -> Result<()> {
    write_text(path, &to_json(&ChannelSpecJson::from_spec(spec)))
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Validation(format!("csv: {}", e))
}

fn csv_finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

pub fn experiments_csv(records: &[ExperimentRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(EXPERIMENT_HEADER).expect("in-memory csv");
    for r in records {
        w.write_record([
            r.n.to_string(),
            r.seed.to_string(),
            fmt_sig(r.f1),
            fmt_sig(r.f2),
            fmt_sig(r.df),
            fmt_sig(r.f1_opt),
            fmt_sig(r.f2_opt),
            r.iters_f1.to_string(),
            r.iters_f2.to_string(),
        ])
        .expect("in-memory csv");
    }
    csv_finish(w)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, line: usize, col: usize, header: &[&str]) -> Result<T> {
    rec.get(col)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| CliError::Validation(format!("csv row {}: field `{}` is missing or malformed", line, header[col])))
}

fn check_header(r: &mut csv::Reader<&[u8]>, want: &[&str]) -> Result<()> {
    let got = r.headers().map_err(csv_error)?;
    if got.iter().ne(want.iter().copied()) {
        return Err(CliError::Validation(format!("csv header {:?}, expected {:?}", got, want)));
    }
    Ok(())
}

pub fn parse_experiments_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let h = &EXPERIMENT_HEADER;
    check_header(&mut r, h)?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = i + 2;
        out.push(ExperimentRecord {
            n: field(&rec, line, 0, h)?,
            seed: field(&rec, line, 1, h)?,
            f1: field(&rec, line, 2, h)?,
            f2: field(&rec, line, 3, h)?,
            df: field(&rec, line, 4, h)?,
            f1_opt: field(&rec, line, 5, h)?,
            f2_opt: field(&rec, line, 6, h)?,
            iters_f1: field(&rec, line, 7, h)?,
            iters_f2: field(&rec, line, 8, h)?,
        });
    }
    Ok(out)
}

pub fn traces_csv(traces: &[RunTrace]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER).expect("in-memory csv");
    for t in traces {
        for p in &t.points {
            w.write_record([
                t.restart.to_string(),
                p.iteration.to_string(),
                fmt_sig(p.value),
                fmt_sig(p.grad_norm),
            ])
            .expect("in-memory csv");
        }
    }
    csv_finish(w)
}

/// Rows grouped back into runs by `restart`; per-run convergence flags are not stored and are
/// returned as `false`.
pub fn parse_traces_csv(text: &str) -> Result<Vec<RunTrace>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let h = &TRACE_HEADER;
    check_header(&mut r, h)?;
    let mut out: Vec<RunTrace> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = i + 2;
        let restart: usize = field(&rec, line, 0, h)?;
        let point = TracePoint {
            iteration: field(&rec, line, 1, h)?,
            value: field(&rec, line, 2, h)?,
            grad_norm: field(&rec, line, 3, h)?,
        };
        match out.last_mut() {
            Some(t) if t.restart == restart => t.points.push(point),
            _ => out.push(RunTrace {
                restart,
                points: vec![point],
                converged: false,
            }),
        }
    }
    Ok(out)
}
