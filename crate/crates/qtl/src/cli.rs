//! Argument grammar and subcommand implementations.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use qtl_core::bases::{self, GhzIndex, WeylIndex};
use qtl_core::channels::{
    apply_channel_linear, average_fidelity_mc, entangled_fraction, fidelity_closed_form, ChannelSpec, Protocol,
};
use qtl_core::metrics::{self, df_experiment, trace_norm, FefTag};
use qtl_core::optimizer::OptimizerConfig;
use qtl_core::random::{random_density, DEFAULT_SEED};
use qtl_core::{ComplexMatrix, DensityMatrix, PureState, QtlRng, C64};
use serde_json::json;

use crate::error::{CliError, Result};
use crate::io::{self, fmt_sig, MatrixJson, MaximizerJson};
use crate::verify::{self, Fixture, Level};

pub const DEFAULT_N: usize = 2;
pub const DEFAULT_COUNT: usize = 100;
pub const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Debug, Parser)]
#[command(name = "qtl", version, about = "Two-channel quantum teleportation laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Local dimension (default 2).
    #[arg(long, global = true)]
    pub n: Option<usize>,

    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Number of random states (df-scatter, default 100).
    #[arg(long, global = true)]
    pub count: Option<usize>,

    /// Monte-Carlo samples (simulate, default 10000).
    #[arg(long, global = true)]
    pub samples: Option<usize>,

    /// Optimizer starts per maximization.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,

    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Input files.
    #[arg(long = "in", global = true, num_args = 1.., action = clap::ArgAction::Append)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Bell,
    Ghz,
    Weyl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    F1,
    #[value(name = "f2lower")]
    F2Lower,
    #[value(name = "f2full")]
    F2Full,
    #[value(name = "f2ghz")]
    F2Ghz,
}

impl KindArg {
    pub fn tag(self) -> FefTag {
        match self {
            KindArg::F1 => FefTag::F1,
            KindArg::F2Lower => FefTag::F2Lower,
            KindArg::F2Full => FefTag::F2Full,
            KindArg::F2Ghz => FefTag::F2Ghz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    MaxEntangled,
    MaximallyMixed,
    Isotropic,
    Random,
    /// Single-system state for `simulate`.
    RandomInput,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    OneChannelBell,
    TwoChannelBell,
    TwoChannelGhz,
}

impl ProtocolArg {
    fn protocol(self) -> Protocol {
        match self {
            ProtocolArg::OneChannelBell => Protocol::OneChannelBell,
            ProtocolArg::TwoChannelBell => Protocol::TwoChannelBell,
            ProtocolArg::TwoChannelGhz => Protocol::TwoChannelGhz,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Dump a basis family with its orthogonality residuals.
    Basis { family: Family },
    /// Apply a channel: `--in SPEC CHI RHO`.
    Simulate,
    /// Maximize an entangled-fraction form of the resource `--in CHI`.
    Fef {
        kind: KindArg,
        /// Convergence trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// F1 and the F2 lower bound of random resources, as CSV.
    DfScatter,
    /// Run the invariant suites.
    Verify {
        #[arg(default_value = "quick")]
        level: LevelArg,
    },
    /// Write a resource state.
    State {
        kind: StateKind,
        /// Weight of the maximally entangled component (isotropic).
        #[arg(long)]
        p: Option<f64>,
    },
    /// Write the ideal channel spec of a protocol.
    Spec { protocol: ProtocolArg },
}

/// Parsed flags with defaults applied and paths made absolute.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub n: usize,
    pub n_given: bool,
    pub seed: u64,
    pub count: usize,
    pub samples: usize,
    pub restarts: Option<usize>,
    pub inputs: Vec<PathBuf>,
    pub out: Option<PathBuf>,
}

fn resolve(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).map_err(|e| CliError::io(p, e))
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let mut command = cli.command;
        if let Command::Fef { trace: Some(t), .. } = &mut command {
            *t = resolve(t)?;
        }
        Ok(Self {
            command,
            n: cli.n.unwrap_or(DEFAULT_N),
            n_given: cli.n.is_some(),
            seed: cli.seed,
            count: cli.count.unwrap_or(DEFAULT_COUNT),
            samples: cli.samples.unwrap_or(DEFAULT_SAMPLES),
            restarts: cli.restarts,
            inputs: cli.inputs.iter().map(|p| resolve(p)).collect::<Result<_>>()?,
            out: cli.out.as_deref().map(resolve).transpose()?,
        })
    }

    pub fn optimizer(&self) -> Result<OptimizerConfig> {
        let mut cfg = OptimizerConfig {
            seed: self.seed,
            ..OptimizerConfig::default()
        };
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn inputs_exactly(&self, k: usize, what: &str) -> Result<&[PathBuf]> {
        if self.inputs.len() != k {
            return Err(CliError::Usage(format!(
                "expected {} input file(s) via --in ({}), got {}",
                k,
                what,
                self.inputs.len()
            )));
        }
        Ok(&self.inputs)
    }
}

/// Writes `text` to `--out` or to `stdout`.
fn emit(cfg: &RunConfig, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &cfg.out {
        Some(p) => io::write_text(p, text),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn line(w: &mut dyn Write, key: &str, value: impl std::fmt::Display) -> Result<()> {
    writeln!(w, "{} {}", key, value).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn cost_warning(n: usize, err: &mut dyn Write) {
    if n >= 4 {
        let _ = writeln!(
            err,
            "warning: n={} optimizes over U({}); expect long runtimes",
            n,
            n * n
        );
    }
}

/// Parses the process arguments and runs the command.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    run_config(&RunConfig::from_cli(cli)?, stdout, stderr)
}

pub fn run_config(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match &cfg.command {
        Command::Basis { family } => cmd_basis(cfg, *family, stdout),
        Command::Simulate => cmd_simulate(cfg, stdout),
        Command::Fef { kind, trace } => cmd_fef(cfg, *kind, trace.as_deref(), stdout, stderr),
        Command::DfScatter => cmd_df_scatter(cfg, stdout, stderr),
        Command::Verify { level } => cmd_verify(
            match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            },
            &Fixture::default(),
            stdout,
        ),
        Command::State { kind, p } => cmd_state(cfg, *kind, *p, stdout),
        Command::Spec { protocol } => {
            let spec = ChannelSpec::ideal(protocol.protocol(), cfg.n)?;
            emit(cfg, &io::to_json(&io::ChannelSpecJson::from_spec(&spec)), stdout)
        }
    }
}

fn gram(vectors: &[Vec<C64>]) -> ComplexMatrix {
    let k = vectors.len();
    ComplexMatrix::from_fn(k, k, |a, b| vectors[a].iter().zip(&vectors[b]).map(|(x, y)| x.conj() * y).sum())
}

fn vector_json(v: &[C64]) -> serde_json::Value {
    json!({
        "re": v.iter().map(|z| z.re).collect::<Vec<_>>(),
        "im": v.iter().map(|z| z.im).collect::<Vec<_>>(),
    })
}

/// JSON dump of a basis family: elements, Gram matrix (trace inner products for Weyl
/// operators) and the largest deviation from the ideal Gram matrix.
pub fn basis_dump(family: Family, n: usize) -> Result<serde_json::Value> {
    bases::weyl_h(n)?;
    let (elements, vectors, norm): (Vec<serde_json::Value>, Vec<Vec<C64>>, f64) = match family {
        Family::Bell => {
            let (els, vs) = WeylIndex::all(n)
                .map(|i| {
                    let b = bases::bell_state(i);
                    let mut e = vector_json(b.amplitudes());
                    e["s"] = json!(i.s);
                    e["t"] = json!(i.t);
                    (e, b.amplitudes().to_vec())
                })
                .unzip();
            (els, vs, 1.0)
        }
        Family::Ghz => {
            let (els, vs) = GhzIndex::all(n)
                .map(|i| {
                    let b = bases::ghz_state(i);
                    let mut e = vector_json(b.amplitudes());
                    e["r"] = json!(i.r);
                    e["m"] = json!(i.m);
                    e["s"] = json!(i.s);
                    (e, b.amplitudes().to_vec())
                })
                .unzip();
            (els, vs, 1.0)
        }
        Family::Weyl => {
            let (els, vs) = WeylIndex::all(n)
                .map(|i| {
                    let u = bases::weyl_u(i);
                    let m = MatrixJson::from_matrix(&u);
                    let e = json!({"s": i.s, "t": i.t, "re": m.re, "im": m.im});
                    (e, u.into_data())
                })
                .unzip();
            (els, vs, n as f64)
        }
    };
    let g = gram(&vectors);
    let residual = g.max_abs_diff(&ComplexMatrix::identity(g.rows()).scale_real(norm));
    let g = MatrixJson::from_matrix(&g);
    let name = match family {
        Family::Bell => "bell",
        Family::Ghz => "ghz",
        Family::Weyl => "weyl",
    };
    Ok(json!({
        "family": name,
        "n": n,
        "count": elements.len(),
        "elements": elements,
        "gram": {"re": g.re, "im": g.im},
        "orthogonality_residual": residual,
    }))
}

fn cmd_basis(cfg: &RunConfig, family: Family, stdout: &mut dyn Write) -> Result<()> {
    let dump = basis_dump(family, cfg.n)?;
    emit(cfg, &io::to_json(&dump), stdout)?;
    if cfg.out.is_some() {
        line(stdout, "elements", &dump["count"])?;
        line(stdout, "orthogonality_residual", fmt_sig(dump["orthogonality_residual"].as_f64().unwrap_or(f64::NAN)))?;
    }
    Ok(())
}

/// Output and diagnostics of `qtl simulate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub output: DensityMatrix,
    pub trace_residual: f64,
    pub hermiticity_residual: f64,
    pub positivity_residual: f64,
    /// `‖Λ(ρ) − ρ‖₁ / 2`
    pub distance_to_input: f64,
    pub entangled_fraction: f64,
    pub fidelity_closed_form: f64,
    pub fidelity_mc: f64,
    pub fidelity_mc_se: f64,
}

pub fn simulate(
    spec: &ChannelSpec,
    chi: &DensityMatrix,
    rho: &DensityMatrix,
    samples: usize,
    seed: u64,
) -> Result<SimulationReport> {
    let raw = apply_channel_linear(spec, chi, rho.matrix())?;
    let herm = raw.hermitian_part();
    let trace_residual = (raw.trace() - C64::new(1.0, 0.0)).norm();
    let hermiticity_residual = raw.hermiticity_residual();
    let positivity_residual = (-herm.min_eigenvalue()?).max(0.0);
    let distance_to_input = trace_norm(&(&herm - rho.matrix()))? / 2.0;
    let f = entangled_fraction(spec, chi)?;
    let (mc, se) = average_fidelity_mc(spec, chi, samples, seed)?;
    Ok(SimulationReport {
        output: DensityMatrix::new(herm, vec![spec.n()])?,
        trace_residual,
        hermiticity_residual,
        positivity_residual,
        distance_to_input,
        entangled_fraction: f,
        fidelity_closed_form: fidelity_closed_form(f.clamp(0.0, 1.0), spec.n())?,
        fidelity_mc: mc,
        fidelity_mc_se: se,
    })
}

fn cmd_simulate(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let inputs = cfg.inputs_exactly(3, "spec, resource, input state")?;
    let spec = io::load_spec(&inputs[0])?;
    let chi = io::load_density(&inputs[1])?;
    let rho = io::load_density(&inputs[2])?;
    let r = simulate(&spec, &chi, &rho, cfg.samples, cfg.seed)?;
    match &cfg.out {
        Some(p) => io::save_density(p, &r.output)?,
        None => stdout
            .write_all(io::to_json(&io::DensityJson::from_density(&r.output)).as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e))?,
    }
    line(stdout, "protocol", spec.protocol().name())?;
    line(stdout, "n", spec.n())?;
    line(stdout, "trace_residual", fmt_sig(r.trace_residual))?;
    line(stdout, "hermiticity_residual", fmt_sig(r.hermiticity_residual))?;
    line(stdout, "positivity_residual", fmt_sig(r.positivity_residual))?;
    line(stdout, "distance_to_input", fmt_sig(r.distance_to_input))?;
    line(stdout, "entangled_fraction", fmt_sig(r.entangled_fraction))?;
    line(stdout, "fidelity_closed_form", fmt_sig(r.fidelity_closed_form))?;
    line(stdout, "fidelity_mc", fmt_sig(r.fidelity_mc))?;
    line(stdout, "fidelity_mc_se", fmt_sig(r.fidelity_mc_se))?;
    line(stdout, "samples", cfg.samples)
}

fn cmd_fef(
    cfg: &RunConfig,
    kind: KindArg,
    trace: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    let inputs = cfg.inputs_exactly(1, "resource state")?;
    let chi = io::load_density(&inputs[0])?;
    let n = chi.dims()[0];
    if cfg.n_given && cfg.n != n {
        return Err(CliError::Validation(format!(
            "--n {} does not match the resource's local dimension {}",
            cfg.n, n
        )));
    }
    cost_warning(n, stderr);
    let report = metrics::compute(kind.tag(), &chi, &cfg.optimizer()?)?;
    if let Some(p) = &cfg.out {
        io::write_text(p, &io::to_json(&MaximizerJson::from_report(&report)?))?;
    }
    if let Some(p) = trace {
        io::write_text(p, &io::traces_csv(&report.traces))?;
    }
    line(stdout, "kind", report.kind.tag.name())?;
    line(stdout, "n", n)?;
    line(stdout, "value", fmt_sig(report.value))?;
    line(stdout, "optimal_fidelity", fmt_sig(report.optimal_fidelity))?;
    line(stdout, "useful", report.useful)?;
    line(stdout, "converged", report.converged)?;
    line(stdout, "iterations", report.iterations)?;
    if let Some(p) = &cfg.out {
        line(stdout, "maximizers", p.display())?;
    }
    if !report.converged {
        return Err(CliError::NonConvergence(format!(
            "{} did not reach the gradient tolerance; value is a lower bound",
            report.kind.tag.name()
        )));
    }
    Ok(())
}

fn cmd_df_scatter(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    cost_warning(cfg.n, stderr);
    let records = df_experiment(cfg.n, cfg.count, &cfg.optimizer()?, cfg.seed)?;
    emit(cfg, &io::experiments_csv(&records), stdout)?;
    if cfg.out.is_some() {
        let min = records.iter().map(|r| r.df).fold(f64::INFINITY, f64::min);
        let max = records.iter().map(|r| r.df).fold(f64::NEG_INFINITY, f64::max);
        line(stdout, "rows", records.len())?;
        if !records.is_empty() {
            line(stdout, "min_dF", fmt_sig(min))?;
            line(stdout, "max_dF", fmt_sig(max))?;
            line(stdout, "dF_above_1e-3", records.iter().filter(|r| r.df > 1e-3).count())?;
        }
    }
    Ok(())
}

/// Runs the suites and prints one line per suite; fails iff any suite fails.
pub fn cmd_verify(level: Level, fixture: &Fixture, stdout: &mut dyn Write) -> Result<()> {
    let results = verify::run(level, fixture);
    let mut failed = 0;
    for r in &results {
        if !r.passed {
            failed += 1;
        }
        writeln!(
            stdout,
            "{} {} residual {} tolerance {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            fmt_sig(r.residual),
            fmt_sig(r.tolerance)
        )
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    }
    if failed > 0 {
        return Err(CliError::VerifyFailed(failed));
    }
    Ok(())
}

fn cmd_state(cfg: &RunConfig, kind: StateKind, p: Option<f64>, stdout: &mut dyn Write) -> Result<()> {
    let n = cfg.n;
    bases::weyl_h(n)?;
    let chi = match kind {
        StateKind::MaxEntangled => PureState::maximally_entangled(n).density(),
        StateKind::MaximallyMixed => DensityMatrix::maximally_mixed(vec![n, n]),
        StateKind::Isotropic => {
            let p = p.ok_or_else(|| CliError::Usage("isotropic states need --p".into()))?;
            DensityMatrix::isotropic(n, p)?
        }
        StateKind::Random => random_density(&[n, n], &mut QtlRng::from_seed(cfg.seed)),
        StateKind::RandomInput => random_density(&[n], &mut QtlRng::from_seed(cfg.seed)),
    };
    emit(cfg, &io::to_json(&io::DensityJson::from_density(&chi)), stdout)
}
