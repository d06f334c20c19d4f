//! Fully entangled fraction (`F1`) and two-channel fractions (`F2` full, its `V = I` lower
//! bound, and the GHZ variant), maximized over unitaries, plus analytic oracles and probes.
//!
//! Every reported value is the best value the optimizer found, i.e. a lower bound of the
//! supremum. Slot conventions: the resource pairs are `(1,2)` and `(3,4)`, indexed `0..4` in
//! a four-factor space.
//!
//! | form | maximizer | channel |
//! |------|-----------|---------|
//! | `F1(u) = ⟨Φ|(1⊗u†)χ(1⊗u)|Φ⟩` | `u` | one-channel, `T_st = U_st u†` |
//! | lower: `tr[Ω₂₃(χ₁₂⊗I)Ω₂₃†(Φ₁₂⊗ρ₃*)]`, `ρ = tr₂ χ` | `Ω` | `W = Ωᵀ`, `V = I` |
//! | full: `⟨Φ|tr₃₄[Ω₁₃V₂₄ χχ Ω†V†]|Φ⟩` | `Ω, V` | `W = Ω`, `V` |
//! | GHZ: `(1/n) Σ_{rms,i} ⟨ΦΦ|Z χχ Z†|ΦΦ⟩`, `Z = Ω₂₄ (h^r g^(−s) ⊗ h^m)₂₄ (E_i)₂₄ (T^s_rm)₂₄` | `Ω, T` | `W = Ωᵀ`, `T` |

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::bases::{self, GhzIndex, WeylIndex};
use crate::channels::{fidelity_closed_form, ChannelSpec, CorrectionFamily, Protocol};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ZERO};
use crate::optimizer::{maximize_from, OptimizerConfig, OptimizerResult, QuadraticObjective, RunTrace};
use crate::par;
use crate::random::{random_density, QtlRng};
use crate::state::{DensityMatrix, PureState};
use crate::tensor;

/// Joint improvement below which block ascent stops.
pub const BLOCK_TOL: f64 = 1e-9;
/// Upper bound on block-ascent sweeps.
pub const MAX_SWEEPS: usize = 50;
/// Margin added to `1/n` in [`usefulness`].
pub const USEFUL_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FefTag {
    F1,
    F2Full,
    F2Lower,
    F2Ghz,
}

impl FefTag {
    pub fn name(self) -> &'static str {
        match self {
            FefTag::F1 => "f1",
            FefTag::F2Full => "f2full",
            FefTag::F2Lower => "f2lower",
            FefTag::F2Ghz => "f2ghz",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [FefTag::F1, FefTag::F2Full, FefTag::F2Lower, FefTag::F2Ghz]
            .into_iter()
            .find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FefKind {
    pub tag: FefTag,
    pub n: usize,
}

impl FefKind {
    /// Dimension of each unitary factor the optimizer works on.
    pub fn optimizer_dim(&self) -> usize {
        match self.tag {
            FefTag::F1 => self.n,
            _ => self.n * self.n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FefReport {
    pub kind: FefKind,
    /// Lower bound of the supremum.
    pub value: f64,
    /// `[u]` for F1, `[Ω]` for the lower bound, `[Ω, V]` for F2 full, `[Ω, T_0, …]` for GHZ
    /// (corrections in [`GhzIndex::linear`] order).
    pub maximizers: Vec<ComplexMatrix>,
    /// `(n·value + 1)/(n + 1)`
    pub optimal_fidelity: f64,
    pub useful: bool,
    /// Total accepted iterations over all optimizer calls.
    pub iterations: usize,
    pub converged: bool,
    /// Every optimizer run in call order; `restart` is renumbered to the run's position.
    pub traces: Vec<RunTrace>,
}

fn append_traces(dst: &mut Vec<RunTrace>, src: Vec<RunTrace>) {
    for mut t in src {
        t.restart = dst.len();
        dst.push(t);
    }
}

impl FefReport {
    fn build(
        tag: FefTag,
        n: usize,
        value: f64,
        maximizers: Vec<ComplexMatrix>,
        iterations: usize,
        converged: bool,
        traces: Vec<RunTrace>,
    ) -> Result<Self> {
        let optimal_fidelity = fidelity_closed_form(value, n)?;
        Ok(Self {
            kind: FefKind { tag, n },
            value,
            maximizers,
            optimal_fidelity,
            useful: value > 1.0 / n as f64 + USEFUL_MARGIN,
            iterations,
            converged,
            traces,
        })
    }

    /// The channel whose entanglement fidelity equals `value`.
    pub fn channel_spec(&self) -> Result<ChannelSpec> {
        let n = self.kind.n;
        let m = &self.maximizers;
        let id = ComplexMatrix::identity(n * n);
        match self.kind.tag {
            FefTag::F1 => {
                let ud = m[0].dagger();
                let ops = WeylIndex::all(n).map(|i| bases::weyl_u(i).matmul(&ud)).collect();
                ChannelSpec::new(Protocol::OneChannelBell, n, id.clone(), id, CorrectionFamily::bell(n, ops)?)
            }
            FefTag::F2Lower => ChannelSpec::new(
                Protocol::TwoChannelBell,
                n,
                m[0].transpose(),
                id,
                CorrectionFamily::bell_default(n)?,
            ),
            FefTag::F2Full => ChannelSpec::new(
                Protocol::TwoChannelBell,
                n,
                m[0].clone(),
                m[1].clone(),
                CorrectionFamily::bell_default(n)?,
            ),
            FefTag::F2Ghz => ChannelSpec::new(
                Protocol::TwoChannelGhz,
                n,
                m[0].transpose(),
                id,
                CorrectionFamily::ghz(n, m[1..].to_vec())?,
            ),
        }
    }
}

/// `value > 1/n`: the resource beats classical measure-and-prepare.
pub fn usefulness(report: &FefReport) -> bool {
    report.value > 1.0 / report.kind.n as f64 + USEFUL_MARGIN
}

fn local_dimension(chi: &DensityMatrix) -> Result<usize> {
    chi.validate()?;
    let d = chi.dim();
    let n = (d as f64).sqrt().round() as usize;
    if n < 2 || n * n != d {
        return Err(Error::DimensionMismatch(format!(
            "resource of dimension {} is not n² with n ≥ 2",
            d
        )));
    }
    Ok(n)
}

fn phi_projector(n: usize) -> ComplexMatrix {
    PureState::maximally_entangled(n).density().into_matrix()
}

fn chi_chi(chi: &DensityMatrix) -> ComplexMatrix {
    chi.matrix().kron(chi.matrix())
}

/// `ρ = tr₂ χ`
fn first_marginal(chi: &DensityMatrix, n: usize) -> ComplexMatrix {
    tensor::partial_trace(chi.matrix(), &[n, n], &[0]).expect("n² resource")
}

/// `F1(u) = ⟨Φ|(1⊗u†)χ(1⊗u)|Φ⟩` on `U(n)`.
pub fn f1_objective(chi: &DensityMatrix) -> Result<QuadraticObjective> {
    let n = local_dimension(chi)?;
    QuadraticObjective::new(chi.matrix(), &phi_projector(n), &[n, n], &[1])
}

/// The `V = I` form on `U(n²)`, with `Ω` on factors `(2,3)` of `H⊗H⊗H`.
pub fn f2_lower_objective(chi: &DensityMatrix) -> Result<QuadraticObjective> {
    let n = local_dimension(chi)?;
    let p = phi_projector(n).kron(&first_marginal(chi, n).conj());
    let s = chi.matrix().kron(&ComplexMatrix::identity(n));
    QuadraticObjective::new(&p, &s, &[n, n, n], &[1, 2])
}

/// The full form as a function of `Ω` with `V` fixed.
pub fn f2_full_omega_objective(chi: &DensityMatrix, v: &ComplexMatrix) -> Result<QuadraticObjective> {
    let n = local_dimension(chi)?;
    let x = tensor::embed(v, &[n; 4], &[1, 3])?;
    let moved = x.matmul(&chi_chi(chi)).matmul(&x.dagger());
    let s = tensor::partial_trace(&moved, &[n; 4], &[0, 1, 2])?;
    let p = phi_projector(n).kron(&ComplexMatrix::identity(n));
    QuadraticObjective::new(&p, &s, &[n, n, n], &[0, 2])
}

/// The full form as a function of `V` with `Ω` fixed.
pub fn f2_full_v_objective(chi: &DensityMatrix, omega: &ComplexMatrix) -> Result<QuadraticObjective> {
    let n = local_dimension(chi)?;
    let x = tensor::embed(omega, &[n; 4], &[0, 2])?;
    let base = phi_projector(n).kron(&ComplexMatrix::identity(n * n));
    let p = x.dagger().matmul(&base).matmul(&x);
    QuadraticObjective::new(&p, &chi_chi(chi), &[n; 4], &[1, 3])
}

/// `⟨Φ|tr₃₄[Ω₁₃V₂₄ χχ Ω₁₃†V₂₄†]|Φ⟩`
pub fn f2_full_value(chi: &DensityMatrix, omega: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    let n = local_dimension(chi)?;
    let x = tensor::embed(omega, &[n; 4], &[0, 2])?.matmul(&tensor::embed(v, &[n; 4], &[1, 3])?);
    let moved = x.matmul(&chi_chi(chi)).matmul(&x.dagger());
    let p = phi_projector(n).kron(&ComplexMatrix::identity(n * n));
    Ok(p.trace_of_product(&moved).re)
}

/// `h^r g^(−s) ⊗ h^m`
fn ghz_frame(idx: GhzIndex) -> ComplexMatrix {
    let n = idx.n;
    let g_inv = bases::weyl_u(WeylIndex { s: (n - idx.s) % n, t: 0, n });
    bases::shift_power(n, idx.r as i64)
        .matmul(&g_inv)
        .kron(&bases::shift_power(n, idx.m as i64))
}

fn phi_phi(n: usize) -> Vec<C64> {
    let phi = PureState::maximally_entangled(n);
    let a = phi.amplitudes();
    let mut out = vec![ZERO; n * n * n * n];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in a.iter().enumerate() {
            out[i * n * n + j] = x * y;
        }
    }
    out
}

fn e_ops(n: usize) -> Vec<ComplexMatrix> {
    (0..n).map(|i| bases::e_i(n, i).expect("i < n")).collect()
}

/// The GHZ form as a function of the correction `T` of outcome `idx`, with `Ω` fixed.
pub fn ghz_correction_objective(
    chi: &DensityMatrix,
    omega: &ComplexMatrix,
    idx: GhzIndex,
) -> Result<QuadraticObjective> {
    let n = local_dimension(chi)?;
    ghz_correction_objective_inner(chi, omega, idx, n)
}

fn ghz_correction_objective_inner(
    chi: &DensityMatrix,
    omega: &ComplexMatrix,
    idx: GhzIndex,
    n: usize,
) -> Result<QuadraticObjective> {
    let dims = [n; 4];
    let target = phi_phi(n);
    let frame = omega.matmul(&ghz_frame(idx));
    let d = n.pow(4);
    let mut p = ComplexMatrix::zeros(d, d);
    let weight = C64::new(1.0 / n as f64, 0.0);
    for e in e_ops(n) {
        let k = tensor::embed(&frame.matmul(&e), &dims, &[1, 3])?;
        let y = k.dagger().matvec(&target);
        p.add_scaled(&ComplexMatrix::outer(&y, &y), weight);
    }
    QuadraticObjective::new(&p, &chi_chi(chi), &dims, &[1, 3])
}

/// The GHZ form as a function of `Ω` with the corrections fixed.
pub fn ghz_omega_objective(chi: &DensityMatrix, corrections: &[ComplexMatrix]) -> Result<QuadraticObjective> {
    let n = local_dimension(chi)?;
    check_ghz_corrections(corrections, n)?;
    let dims = [n; 4];
    let cc = chi_chi(chi);
    let d = n.pow(4);
    let mut s = ComplexMatrix::zeros(d, d);
    let weight = C64::new(1.0 / n as f64, 0.0);
    let es = e_ops(n);
    for (idx, t) in GhzIndex::all(n).zip(corrections) {
        let frame = ghz_frame(idx);
        for e in &es {
            let k = tensor::embed(&frame.matmul(e).matmul(t), &dims, &[1, 3])?;
            s.add_scaled(&k.matmul(&cc).matmul(&k.dagger()), weight);
        }
    }
    let target = phi_phi(n);
    QuadraticObjective::new(&ComplexMatrix::outer(&target, &target), &s, &dims, &[1, 3])
}

fn check_ghz_corrections(corrections: &[ComplexMatrix], n: usize) -> Result<()> {
    if corrections.len() != n * n * n {
        return Err(Error::DimensionMismatch(format!(
            "{} GHZ corrections for n={} (need {})",
            corrections.len(),
            n,
            n * n * n
        )));
    }
    Ok(())
}

/// The GHZ form evaluated term by term.
pub fn f2_ghz_value(chi: &DensityMatrix, omega: &ComplexMatrix, corrections: &[ComplexMatrix]) -> Result<f64> {
    let n = local_dimension(chi)?;
    check_ghz_corrections(corrections, n)?;
    let dims = [n; 4];
    let cc = chi_chi(chi);
    let target = phi_phi(n);
    let mut total = 0.0;
    for (idx, t) in GhzIndex::all(n).zip(corrections) {
        let frame = omega.matmul(&ghz_frame(idx));
        for e in e_ops(n) {
            let z = tensor::embed(&frame.matmul(&e).matmul(t), &dims, &[1, 3])?;
            let y = z.dagger().matvec(&target);
            let cy = cc.matvec(&y);
            let v: C64 = y.iter().zip(&cy).map(|(a, b)| a.conj() * b).sum();
            total += v.re;
        }
    }
    Ok(total / n as f64)
}

fn single(obj: &QuadraticObjective, config: &OptimizerConfig, warm: &[ComplexMatrix]) -> Result<OptimizerResult> {
    maximize_from(obj, config, warm)
}

/// One warm-started run: used for block sweeps after the first.
fn refine_config(config: &OptimizerConfig, seed: u64) -> OptimizerConfig {
    OptimizerConfig {
        restarts: 1,
        seed,
        ..config.clone()
    }
}

fn block_seed(config: &OptimizerConfig, sweep: usize, block: usize) -> u64 {
    config
        .seed
        .wrapping_add((sweep as u64).wrapping_mul(0x9E37_79B9))
        .wrapping_add(block as u64)
}

/// `F1 = max_u ⟨Φ|(1⊗u†)χ(1⊗u)|Φ⟩`.
pub fn fef_f1(chi: &DensityMatrix, config: &OptimizerConfig) -> Result<FefReport> {
    let n = local_dimension(chi)?;
    let r = single(&f1_objective(chi)?, config, &[])?;
    FefReport::build(FefTag::F1, n, r.best_value, vec![r.maximizer], r.iterations, r.converged, r.traces)
}

/// The `V = I` lower bound of `F2`; always tried from the `F1` maximizer `u` as `Ω = u†⊗I`.
pub fn tfef_f2_lower(chi: &DensityMatrix, config: &OptimizerConfig) -> Result<FefReport> {
    let n = local_dimension(chi)?;
    let f1 = single(&f1_objective(chi)?, config, &[])?;
    let mut report = tfef_f2_lower_with_starts(chi, config, &[lift_f1(&f1.maximizer, n)])?;
    report.iterations += f1.iterations;
    report.converged &= f1.converged;
    let mut traces = Vec::new();
    append_traces(&mut traces, f1.traces);
    append_traces(&mut traces, core::mem::take(&mut report.traces));
    report.traces = traces;
    Ok(report)
}

/// `Ω = u†⊗I`: the lower-bound form at this `Ω` equals `F1(u)`.
pub fn lift_f1(u: &ComplexMatrix, n: usize) -> ComplexMatrix {
    u.dagger().kron(&ComplexMatrix::identity(n))
}

/// [`tfef_f2_lower`] with explicit extra starting points and no implicit `F1` start.
pub fn tfef_f2_lower_with_starts(
    chi: &DensityMatrix,
    config: &OptimizerConfig,
    starts: &[ComplexMatrix],
) -> Result<FefReport> {
    let n = local_dimension(chi)?;
    let r = single(&f2_lower_objective(chi)?, config, starts)?;
    FefReport::build(FefTag::F2Lower, n, r.best_value, vec![r.maximizer], r.iterations, r.converged, r.traces)
}

/// Block-coordinate ascent of the full form over `(Ω, V)`, started from the lower-bound
/// maximizer (`Ω = Ω_lowerᵀ`, `V = I`).
pub fn tfef_f2_full(chi: &DensityMatrix, config: &OptimizerConfig) -> Result<FefReport> {
    let n = local_dimension(chi)?;
    let mut lower = tfef_f2_lower(chi, config)?;
    let mut traces = core::mem::take(&mut lower.traces);
    let mut omega = lower.maximizers[0].transpose();
    let mut v = ComplexMatrix::identity(n * n);
    let mut value = f2_full_value(chi, &omega, &v)?;
    let mut iterations = lower.iterations;
    let mut converged = false;
    for sweep in 0..MAX_SWEEPS {
        let cfg_o = if sweep == 0 {
            OptimizerConfig {
                seed: block_seed(config, sweep, 0),
                ..config.clone()
            }
        } else {
            refine_config(config, block_seed(config, sweep, 0))
        };
        let ro = single(&f2_full_omega_objective(chi, &v)?, &cfg_o, &[omega.clone()])?;
        omega = ro.maximizer;
        let cfg_v = OptimizerConfig {
            seed: block_seed(config, sweep, 1),
            ..cfg_o.clone()
        };
        let rv = single(&f2_full_v_objective(chi, &omega)?, &cfg_v, &[v.clone()])?;
        v = rv.maximizer;
        iterations += ro.iterations + rv.iterations;
        append_traces(&mut traces, ro.traces);
        append_traces(&mut traces, rv.traces);
        let next = f2_full_value(chi, &omega, &v)?;
        let gain = next - value;
        value = value.max(next);
        if gain < BLOCK_TOL {
            converged = ro.converged && rv.converged;
            break;
        }
    }
    FefReport::build(FefTag::F2Full, n, value, vec![omega, v], iterations, converged, traces)
}

/// Block-coordinate ascent of the GHZ form over `Ω` and the `n³` corrections, starting from
/// identities.
pub fn tfef_f2_ghz(chi: &DensityMatrix, config: &OptimizerConfig) -> Result<FefReport> {
    let n = local_dimension(chi)?;
    let d = n * n;
    let mut omega = ComplexMatrix::identity(d);
    let mut ts: Vec<ComplexMatrix> = (0..n * n * n).map(|_| ComplexMatrix::identity(d)).collect();
    let mut value = f2_ghz_value(chi, &omega, &ts)?;
    let mut iterations = 0;
    let mut converged = false;
    let mut traces = Vec::new();
    let indices: Vec<GhzIndex> = GhzIndex::all(n).collect();
    for sweep in 0..MAX_SWEEPS {
        let cfg = |block: usize| {
            let seed = block_seed(config, sweep, block);
            if sweep == 0 {
                OptimizerConfig {
                    seed,
                    ..config.clone()
                }
            } else {
                refine_config(config, seed)
            }
        };
        let results = par::map_indexed(indices.len(), |k| {
            let obj = ghz_correction_objective_inner(chi, &omega, indices[k], n)?;
            single(&obj, &cfg(k + 1), core::slice::from_ref(&ts[k]))
        });
        let mut all_converged = true;
        for (k, r) in results.into_iter().enumerate() {
            let r = r?;
            iterations += r.iterations;
            all_converged &= r.converged;
            append_traces(&mut traces, r.traces);
            ts[k] = r.maximizer;
        }
        let ro = single(&ghz_omega_objective(chi, &ts)?, &cfg(0), &[omega.clone()])?;
        omega = ro.maximizer;
        iterations += ro.iterations;
        append_traces(&mut traces, ro.traces);
        let next = f2_ghz_value(chi, &omega, &ts)?;
        let gain = next - value;
        value = value.max(next);
        if gain < BLOCK_TOL {
            converged = all_converged && ro.converged;
            break;
        }
    }
    let mut maximizers = Vec::with_capacity(1 + ts.len());
    maximizers.push(omega);
    maximizers.extend(ts);
    FefReport::build(FefTag::F2Ghz, n, value, maximizers, iterations, converged, traces)
}

/// Dispatch on `tag`.
pub fn compute(tag: FefTag, chi: &DensityMatrix, config: &OptimizerConfig) -> Result<FefReport> {
    match tag {
        FefTag::F1 => fef_f1(chi, config),
        FefTag::F2Lower => tfef_f2_lower(chi, config),
        FefTag::F2Full => tfef_f2_full(chi, config),
        FefTag::F2Ghz => tfef_f2_ghz(chi, config),
    }
}

/// `F1` of the isotropic state `p|Φ⟩⟨Φ| + (1−p)I/n²`.
pub fn isotropic_fef(n: usize, p: f64) -> f64 {
    p + (1.0 - p) / (n * n) as f64
}

/// `F1` of a pure state with Schmidt coefficients `λ` (squared amplitudes): `(Σ√λ)²/n`.
pub fn pure_state_fef(schmidt: &[f64]) -> f64 {
    let s: f64 = schmidt.iter().map(|l| l.max(0.0).sqrt()).sum();
    s * s / schmidt.len() as f64
}

/// Two-qubit `F1` as the largest eigenvalue of `Re(Q†χQ)` in the magic basis
/// `{Φ⁺, iΦ⁻, iΨ⁺, Ψ⁻}`.
pub fn magic_basis_fef(chi: &DensityMatrix) -> Result<f64> {
    if chi.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "magic basis needs a two-qubit state, got dimension {}",
            chi.dim()
        )));
    }
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let r = C64::new(s, 0.0);
    let i = C64::new(0.0, s);
    // Columns: |00⟩,|01⟩,|10⟩,|11⟩ components of each basis vector.
    let cols: [[C64; 4]; 4] = [
        [r, ZERO, ZERO, r],
        [i, ZERO, ZERO, -i],
        [ZERO, i, i, ZERO],
        [ZERO, r, -r, ZERO],
    ];
    let q = ComplexMatrix::from_fn(4, 4, |row, col| cols[col][row]);
    let m = q.dagger().matmul(chi.matrix()).matmul(&q);
    let re = ComplexMatrix::from_fn(4, 4, |a, b| C64::new(m[(a, b)].re, 0.0));
    let (vals, _) = re.eigh()?;
    Ok(*vals.last().expect("four eigenvalues"))
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    let (vals, _) = m.hermitian_part().eigh()?;
    Ok(vals.iter().map(|v| v.abs()).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityPoint {
    pub xi: f64,
    pub f_a: f64,
    pub f_b: f64,
    pub f_mix: f64,
    /// `ξF(a) + (1−ξ)F(b) − F(mix)`
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityReport {
    pub points: Vec<ConvexityPoint>,
    pub min_slack: f64,
}

fn check_same_n(a: &DensityMatrix, b: &DensityMatrix) -> Result<usize> {
    let n = local_dimension(a)?;
    let nb = local_dimension(b)?;
    if n != nb {
        return Err(Error::DimensionMismatch(format!("states with n={} and n={}", n, nb)));
    }
    Ok(n)
}

/// Convexity slacks of the lower-bound form along `ξχ_a + (1−ξ)χ_b`. Each endpoint is also
/// tried from the mixture's maximizer, so a negative slack is a property of the form rather
/// than of the optimizer.
pub fn convexity_probe(
    chi_a: &DensityMatrix,
    chi_b: &DensityMatrix,
    xi_grid: &[f64],
    config: &OptimizerConfig,
) -> Result<ConvexityReport> {
    check_same_n(chi_a, chi_b)?;
    if let Some(x) = xi_grid.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::InvalidArgument(format!("mixing weight {} outside [0, 1]", x)));
    }
    let base_a = tfef_f2_lower(chi_a, config)?;
    let base_b = tfef_f2_lower(chi_b, config)?;
    let mut points = Vec::with_capacity(xi_grid.len());
    for &xi in xi_grid {
        let mix = DensityMatrix::mix(xi, chi_a, chi_b)?;
        let f_mix = tfef_f2_lower(&mix, config)?;
        let warm = [f_mix.maximizers[0].clone(), base_a.maximizers[0].clone(), base_b.maximizers[0].clone()];
        let f_a = tfef_f2_lower_with_starts(chi_a, config, &warm)?.value.max(base_a.value);
        let f_b = tfef_f2_lower_with_starts(chi_b, config, &warm)?.value.max(base_b.value);
        let slack = xi * f_a + (1.0 - xi) * f_b - f_mix.value;
        points.push(ConvexityPoint {
            xi,
            f_a,
            f_b,
            f_mix: f_mix.value,
            slack,
        });
    }
    let min_slack = points.iter().map(|p| p.slack).fold(f64::INFINITY, f64::min);
    Ok(ConvexityReport { points, min_slack })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityPoint {
    pub eps: f64,
    /// `‖χ_ε − χ_a‖₁` with `χ_ε = (1−ε)χ_a + εχ_b`.
    pub distance: f64,
    /// `|F(χ_ε) − F(χ_a)|`
    pub change: f64,
    /// `(2 + ‖Δ‖₁)‖Δ‖₁`
    pub bound: f64,
}

/// Change of the lower-bound form under small mixtures toward `χ_b`, against the bilinear
/// bound `(2 + ‖Δ‖₁)‖Δ‖₁`. Both ends are cross warm-started.
pub fn continuity_probe(
    chi_a: &DensityMatrix,
    chi_b: &DensityMatrix,
    eps_grid: &[f64],
    config: &OptimizerConfig,
) -> Result<Vec<ContinuityPoint>> {
    check_same_n(chi_a, chi_b)?;
    let base = tfef_f2_lower(chi_a, config)?;
    let mut out = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidArgument(format!("perturbation weight {} outside [0, 1]", eps)));
        }
        let pert = DensityMatrix::mix(1.0 - eps, chi_a, chi_b)?;
        let fp = tfef_f2_lower(&pert, config)?;
        let fp2 = tfef_f2_lower_with_starts(&pert, config, &[base.maximizers[0].clone()])?;
        let fa2 = tfef_f2_lower_with_starts(chi_a, config, &[fp.maximizers[0].clone()])?;
        let f_pert = fp.value.max(fp2.value);
        let f_a = base.value.max(fa2.value);
        let distance = trace_norm(&(pert.matrix() - chi_a.matrix()))?;
        out.push(ContinuityPoint {
            eps,
            distance,
            change: (f_pert - f_a).abs(),
            bound: (2.0 + distance) * distance,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariancePoint {
    pub original: f64,
    pub transformed: f64,
    pub drift: f64,
}

/// Lower-bound value before and after `χ → (u⊗v)χ(u⊗v)†`. Maximizers are carried across by
/// `Ω' = (ū⊗ū) Ω (v†⊗I)` and its inverse, and used as warm starts on both sides.
pub fn lu_invariance_probe(
    chi: &DensityMatrix,
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    config: &OptimizerConfig,
) -> Result<InvariancePoint> {
    let n = local_dimension(chi)?;
    let local = u.kron(v);
    let moved = chi.conjugate_by(&local)?;
    let ubar = u.conj();
    let left = ubar.kron(&ubar);
    let right = v.dagger().kron(&ComplexMatrix::identity(n));
    let forward = |om: &ComplexMatrix| left.matmul(om).matmul(&right);
    let backward = |om: &ComplexMatrix| left.dagger().matmul(om).matmul(&right.dagger());
    let a = tfef_f2_lower(chi, config)?;
    let b = tfef_f2_lower(&moved, config)?;
    let a2 = tfef_f2_lower_with_starts(chi, config, &[backward(&b.maximizers[0])])?;
    let b2 = tfef_f2_lower_with_starts(&moved, config, &[forward(&a.maximizers[0])])?;
    let original = a.value.max(a2.value);
    let transformed = b.value.max(b2.value);
    Ok(InvariancePoint {
        original,
        transformed,
        drift: (original - transformed).abs(),
    })
}

/// One row of the `F2_lower − F1` scatter.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub n: usize,
    pub seed: u64,
    pub f1: f64,
    pub f2: f64,
    pub df: f64,
    pub f1_opt: f64,
    pub f2_opt: f64,
    pub iters_f1: usize,
    pub iters_f2: usize,
}

/// Random resource number `index` of a scatter run.
pub fn experiment_state(n: usize, seed: u64, index: usize) -> DensityMatrix {
    let mut rng = QtlRng::from_seed(seed.wrapping_add(index as u64));
    random_density(&[n, n], &mut rng)
}

/// `F1` and `F2_lower` for `count` Hilbert–Schmidt random resources. State `i` is drawn from
/// seed `seed + i`, which also seeds its optimizer runs.
pub fn df_experiment(
    n: usize,
    count: usize,
    config: &OptimizerConfig,
    seed: u64,
) -> Result<Vec<ExperimentRecord>> {
    if !(2..=4).contains(&n) {
        return Err(Error::InvalidArgument(format!("scatter dimension {} not in 2..=4", n)));
    }
    config.validate()?;
    par::map_indexed(count, |i| {
        let s = seed.wrapping_add(i as u64);
        let chi = experiment_state(n, seed, i);
        experiment_record(&chi, n, s, config)
    })
    .into_iter()
    .collect()
}

/// Scatter row for a given resource.
pub fn experiment_record(
    chi: &DensityMatrix,
    n: usize,
    seed: u64,
    config: &OptimizerConfig,
) -> Result<ExperimentRecord> {
    let cfg = OptimizerConfig {
        seed,
        ..config.clone()
    };
    let f1 = fef_f1(chi, &cfg)?;
    let f2 = tfef_f2_lower_with_starts(chi, &cfg, &[lift_f1(&f1.maximizers[0], n)])?;
    Ok(ExperimentRecord {
        n,
        seed,
        f1: f1.value,
        f2: f2.value,
        df: f2.value - f1.value,
        f1_opt: f1.optimal_fidelity,
        f2_opt: f2.optimal_fidelity,
        iters_f1: f1.iterations,
        iters_f2: f2.iterations,
    })
}
