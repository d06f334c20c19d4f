//! Riemannian conjugate-gradient ascent on the unitary group `U(d)`.
//!
//! Directions live in the Lie algebra (left trivialization): an iterate moves as
//! `U ← exp(η D) U` with `D` skew-Hermitian. Conjugation uses the Polak–Ribière coefficient
//! clamped at zero, the step comes from Armijo backtracking with an expansion phase, and the
//! direction resets to the gradient every `d²` iterations or whenever it stops being an
//! ascent direction.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::{exp_skew_hermitian, ComplexMatrix, C64, ZERO};
use crate::par;
use crate::random::{haar_unitary, random_skew_hermitian, QtlRng, DEFAULT_SEED};
use crate::tensor::{self, SlotSplit};

/// Largest imaginary part tolerated in an objective value.
pub const NON_REAL_TOL: f64 = 1e-9;
/// Largest `‖U†U − I‖_F` accepted by [`riemannian_grad`].
pub const UNITARY_INPUT_TOL: f64 = 1e-8;
/// Finite-difference step used by [`grad_check`].
pub const FD_STEP: f64 = 1e-6;

const MAX_BACKTRACKS: usize = 60;
const MAX_EXPANSIONS: usize = 30;
/// Caps the rotation angle of a single step.
const MAX_ANGLE: f64 = core::f64::consts::PI;

/// Smooth real function on `U(d)`.
///
/// `euclidean_gradient` returns `Γ = ∂f/∂Ū`, scaled so that
/// `f(U + εΔ) ≈ f(U) + 2ε Re tr(Δ†Γ)`.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    /// Raw value; the imaginary part must vanish on unitary input.
    fn value(&self, u: &ComplexMatrix) -> C64;

    fn euclidean_gradient(&self, u: &ComplexMatrix) -> ComplexMatrix;

    fn value_and_gradient(&self, u: &ComplexMatrix) -> (C64, ComplexMatrix) {
        (self.value(u), self.euclidean_gradient(u))
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, u: &ComplexMatrix) -> C64 {
        (**self).value(u)
    }
    fn euclidean_gradient(&self, u: &ComplexMatrix) -> ComplexMatrix {
        (**self).euclidean_gradient(u)
    }
    fn value_and_gradient(&self, u: &ComplexMatrix) -> (C64, ComplexMatrix) {
        (**self).value_and_gradient(u)
    }
}

/// `f(U) = Re tr(P X S X†)` with `X` the embedding of `U` on `slots` of a space with factor
/// dimensions `dims`. `P` and `S` must be Hermitian.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    d: usize,
    rest: usize,
    p: ComplexMatrix,
    s: ComplexMatrix,
}

impl QuadraticObjective {
    pub fn new(p: &ComplexMatrix, s: &ComplexMatrix, dims: &[usize], slots: &[usize]) -> Result<Self> {
        let split = SlotSplit::new(dims, slots)?;
        let total = tensor::total_dim(dims);
        for (m, name) in [(p, "P"), (s, "S")] {
            if !m.is_square() || m.rows() != total {
                return Err(Error::DimensionMismatch(format!(
                    "{} of size {}x{} on factors {:?}",
                    name,
                    m.rows(),
                    m.cols(),
                    dims
                )));
            }
        }
        Ok(Self {
            d: split.slot_dim(),
            rest: split.rest_dim(),
            p: tensor::move_to_front(p, &split),
            s: tensor::move_to_front(s, &split),
        })
    }

    fn xs(&self, u: &ComplexMatrix) -> ComplexMatrix {
        tensor::left_apply_front(u, &self.s, self.rest)
    }

    fn value_from_xs(&self, u: &ComplexMatrix, xs: &ComplexMatrix) -> C64 {
        let z = tensor::right_apply_dagger_front(xs, u, self.rest);
        self.p.trace_of_product(&z)
    }

    fn gradient_from_xs(&self, xs: &ComplexMatrix) -> ComplexMatrix {
        // Γ = tr_rest(P X S)
        let (d, rest) = (self.d, self.rest);
        let total = d * rest;
        let mut g = ComplexMatrix::zeros(d, d);
        for a in 0..d {
            for r in 0..rest {
                let prow = self.p.row(a * rest + r);
                for b in 0..d {
                    let col = b * rest + r;
                    let mut acc = ZERO;
                    for k in 0..total {
                        acc += prow[k] * xs[(k, col)];
                    }
                    g[(a, b)] += acc;
                }
            }
        }
        g
    }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.d
    }

    fn value(&self, u: &ComplexMatrix) -> C64 {
        self.value_from_xs(u, &self.xs(u))
    }

    fn euclidean_gradient(&self, u: &ComplexMatrix) -> ComplexMatrix {
        self.gradient_from_xs(&self.xs(u))
    }

    fn value_and_gradient(&self, u: &ComplexMatrix) -> (C64, ComplexMatrix) {
        let xs = self.xs(u);
        (self.value_from_xs(u, &xs), self.gradient_from_xs(&xs))
    }
}

/// Sum of objectives on the same `U(d)`.
pub struct SumObjective<O> {
    pub terms: Vec<O>,
}

impl<O: Objective> Objective for SumObjective<O> {
    fn dim(&self) -> usize {
        self.terms.first().map_or(0, |t| t.dim())
    }

    fn value(&self, u: &ComplexMatrix) -> C64 {
        self.terms.iter().map(|t| t.value(u)).sum()
    }

    fn euclidean_gradient(&self, u: &ComplexMatrix) -> ComplexMatrix {
        self.value_and_gradient(u).1
    }

    fn value_and_gradient(&self, u: &ComplexMatrix) -> (C64, ComplexMatrix) {
        let d = self.dim();
        let mut v = ZERO;
        let mut g = ComplexMatrix::zeros(d, d);
        for t in &self.terms {
            let (tv, tg) = t.value_and_gradient(u);
            v += tv;
            g.add_scaled(&tg, C64::new(1.0, 0.0));
        }
        (v, g)
    }
}

/// `factor · f`; used to check that positive rescaling leaves the maximizer unchanged.
pub struct ScaledObjective<O> {
    pub inner: O,
    pub factor: f64,
}

impl<O: Objective> Objective for ScaledObjective<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, u: &ComplexMatrix) -> C64 {
        self.inner.value(u) * self.factor
    }
    fn euclidean_gradient(&self, u: &ComplexMatrix) -> ComplexMatrix {
        self.inner.euclidean_gradient(u).scale_real(self.factor)
    }
    fn value_and_gradient(&self, u: &ComplexMatrix) -> (C64, ComplexMatrix) {
        let (v, g) = self.inner.value_and_gradient(u);
        (v * self.factor, g.scale_real(self.factor))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Stop once the Riemannian gradient norm falls below this.
    pub grad_tol: f64,
    /// Total number of runs, including fixed starting points.
    pub restarts: usize,
    pub armijo_c: f64,
    pub armijo_shrink: f64,
    /// First trial step, as a rotation angle `η‖D‖_F`.
    pub initial_step: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            grad_tol: 1e-8,
            restarts: 10,
            armijo_c: 1e-4,
            armijo_shrink: 0.5,
            initial_step: 1.0,
            seed: DEFAULT_SEED,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grad_tol", self.grad_tol),
            ("armijo_c", self.armijo_c),
            ("initial_step", self.initial_step),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidArgument(format!("{} must be positive, got {}", name, v)));
            }
        }
        if self.armijo_c.is_nan() || self.armijo_c >= 1.0 {
            return Err(Error::InvalidArgument(format!("armijo_c {} must be below 1", self.armijo_c)));
        }
        if !(self.armijo_shrink > 0.0 && self.armijo_shrink < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "armijo_shrink {} must lie in (0, 1)",
                self.armijo_shrink
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iteration: usize,
    pub value: f64,
    pub grad_norm: f64,
}

/// Accepted iterates of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub restart: usize,
    pub points: Vec<TracePoint>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerResult {
    pub best_value: f64,
    pub maximizer: ComplexMatrix,
    /// Iterations of the best run.
    pub iterations: usize,
    /// Whether the best run met the stopping criterion.
    pub converged: bool,
    pub best_restart: usize,
    pub traces: Vec<RunTrace>,
}

/// `⟨X, Y⟩ = Re tr(X†Y)`
fn real_inner(x: &ComplexMatrix, y: &ComplexMatrix) -> f64 {
    x.data().iter().zip(y.data()).map(|(a, b)| (a.conj() * b).re).sum()
}

fn real_value(v: C64) -> Result<f64> {
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::InvalidArgument("objective returned a non-finite value".into()));
    }
    if v.im.abs() > NON_REAL_TOL {
        return Err(Error::NonRealObjective(v.im));
    }
    Ok(v.re)
}

fn tangent(gamma: &ComplexMatrix, u: &ComplexMatrix) -> ComplexMatrix {
    let a = gamma.matmul(&u.dagger());
    &a - &a.dagger()
}

/// Riemannian gradient `G = Γu† − uΓ†` (skew-Hermitian); `exp(εG)u` is steepest ascent and
/// `d/dε f(exp(εG)u)|₀ = ‖G‖²_F`.
pub fn riemannian_grad<O: Objective + ?Sized>(obj: &O, u: &ComplexMatrix) -> Result<ComplexMatrix> {
    let d = obj.dim();
    if !u.is_square() || u.rows() != d {
        return Err(Error::DimensionMismatch(format!(
            "point of size {}x{} for an objective on U({})",
            u.rows(),
            u.cols(),
            d
        )));
    }
    let res = u.unitarity_residual();
    if res.is_nan() || res > UNITARY_INPUT_TOL {
        return Err(Error::Validation {
            field: "unitarity",
            residual: res,
            tolerance: UNITARY_INPUT_TOL,
        });
    }
    Ok(tangent(&obj.euclidean_gradient(u), u))
}

/// Maximizes from the identity followed by Haar-random starts.
pub fn maximize<O: Objective + ?Sized>(obj: &O, config: &OptimizerConfig) -> Result<OptimizerResult> {
    maximize_from(obj, config, &[])
}

/// Like [`maximize`], with `warm_starts` run right after the identity. Haar-random starts fill
/// the remaining `config.restarts` slots; every start in the list is always run.
pub fn maximize_from<O: Objective + ?Sized>(
    obj: &O,
    config: &OptimizerConfig,
    warm_starts: &[ComplexMatrix],
) -> Result<OptimizerResult> {
    config.validate()?;
    let d = obj.dim();
    if d == 0 {
        return Err(Error::InvalidArgument("objective dimension must be at least 1".into()));
    }
    for w in warm_starts {
        if !w.is_square() || w.rows() != d {
            return Err(Error::DimensionMismatch(format!(
                "warm start of size {}x{} for U({})",
                w.rows(),
                w.cols(),
                d
            )));
        }
        let res = w.unitarity_residual();
        if res.is_nan() || res > UNITARY_INPUT_TOL {
            return Err(Error::Validation {
                field: "unitarity",
                residual: res,
                tolerance: UNITARY_INPUT_TOL,
            });
        }
    }
    let fixed = 1 + warm_starts.len();
    let runs = config.restarts.max(fixed);
    let root = QtlRng::from_seed(config.seed);
    let outcomes = par::map_indexed(runs, |k| {
        let start = if k == 0 {
            ComplexMatrix::identity(d)
        } else if k < fixed {
            warm_starts[k - 1].clone()
        } else {
            let mut rng = root.fork(k as u64);
            haar_unitary(d, &mut rng)
        };
        run(obj, config, start, k)
    });
    let mut best: Option<(f64, ComplexMatrix, RunTrace)> = None;
    let mut traces = Vec::with_capacity(runs);
    for outcome in outcomes {
        let (value, u, trace) = outcome?;
        let better = match &best {
            None => true,
            Some((bv, _, _)) => value > *bv,
        };
        if better {
            best = Some((value, u, trace.clone()));
        }
        traces.push(trace);
    }
    let (_, maximizer, trace) = best.expect("at least one run");
    let best_value = real_value(obj.value(&maximizer))?;
    Ok(OptimizerResult {
        best_value,
        maximizer,
        iterations: trace.points.last().map_or(0, |p| p.iteration),
        converged: trace.converged,
        best_restart: trace.restart,
        traces,
    })
}

fn run<O: Objective + ?Sized>(
    obj: &O,
    cfg: &OptimizerConfig,
    start: ComplexMatrix,
    restart: usize,
) -> Result<(f64, ComplexMatrix, RunTrace)> {
    let d = obj.dim();
    let restart_every = (d * d).max(1);
    let mut u = start;
    let (v0, gamma) = obj.value_and_gradient(&u);
    let mut f = real_value(v0)?;
    let mut g = tangent(&gamma, &u);
    let mut gn2 = real_inner(&g, &g);
    let mut points = vec![TracePoint {
        iteration: 0,
        value: f,
        grad_norm: gn2.sqrt(),
    }];
    let mut dir = g.clone();
    let mut since_reset = 0usize;
    let mut prev: Option<(f64, f64)> = None; // (η, ⟨G, D⟩) of the last accepted step
    let mut converged = false;

    for iter in 1..=cfg.max_iters {
        if gn2.sqrt() < cfg.grad_tol {
            converged = true;
            break;
        }
        let mut slope = real_inner(&g, &dir);
        if slope.is_nan() || slope <= 0.0 {
            dir = g.clone();
            slope = gn2;
            since_reset = 0;
            prev = None;
        }
        let step = line_search(obj, cfg, &u, f, &dir, slope, prev)?;
        let (eta, u_new, f_new) = match step {
            Some(s) => s,
            None if since_reset > 0 => {
                // Conjugate direction failed; retry along the gradient.
                dir = g.clone();
                slope = gn2;
                since_reset = 0;
                match line_search(obj, cfg, &u, f, &dir, slope, None)? {
                    Some(s) => s,
                    None => {
                        converged = stationary(gn2, f);
                        break;
                    }
                }
            }
            None => {
                converged = stationary(gn2, f);
                break;
            }
        };
        u = u_new;
        f = f_new;
        let gamma = obj.euclidean_gradient(&u);
        let g_new = tangent(&gamma, &u);
        let gn2_new = real_inner(&g_new, &g_new);
        since_reset += 1;
        let beta = if since_reset >= restart_every || gn2 == 0.0 {
            since_reset = 0;
            0.0
        } else {
            ((gn2_new - real_inner(&g_new, &g)) / gn2).max(0.0)
        };
        let mut next = g_new.clone();
        if beta > 0.0 {
            next.add_scaled(&dir, C64::new(beta, 0.0));
        }
        dir = next;
        prev = Some((eta, slope));
        g = g_new;
        gn2 = gn2_new;
        points.push(TracePoint {
            iteration: iter,
            value: f,
            grad_norm: gn2.sqrt(),
        });
    }
    if !converged && gn2.sqrt() < cfg.grad_tol {
        converged = true;
    }
    Ok((
        f,
        u,
        RunTrace {
            restart,
            points,
            converged,
        },
    ))
}

/// The first-order gain of a unit step is at rounding level: no further ascent is resolvable.
fn stationary(gn2: f64, f: f64) -> bool {
    gn2 <= 1e3 * f64::EPSILON * f.abs().max(1.0)
}

#[allow(clippy::type_complexity)]
fn line_search<O: Objective + ?Sized>(
    obj: &O,
    cfg: &OptimizerConfig,
    u: &ComplexMatrix,
    f: f64,
    dir: &ComplexMatrix,
    slope: f64,
    prev: Option<(f64, f64)>,
) -> Result<Option<(f64, ComplexMatrix, f64)>> {
    let dnorm = dir.frobenius_norm();
    if dnorm.is_nan() || dnorm <= 0.0 {
        return Ok(None);
    }
    let eta_max = MAX_ANGLE / dnorm;
    let mut eta = match prev {
        Some((e, s)) if s > 0.0 => e * s / slope,
        _ => cfg.initial_step / dnorm,
    }
    .min(eta_max);
    let trial = |eta: f64| -> Result<(ComplexMatrix, f64)> {
        let step = exp_skew_hermitian(&dir.scale_real(eta))?;
        let un = step.matmul(u);
        let fv = real_value(obj.value(&un))?;
        Ok((un, fv))
    };
    let armijo = |eta: f64, fv: f64| fv >= f + cfg.armijo_c * eta * slope;

    let (mut un, mut fv) = trial(eta)?;
    if armijo(eta, fv) {
        for _ in 0..MAX_EXPANSIONS {
            let e2 = (eta * 2.0).min(eta_max);
            if e2 <= eta {
                break;
            }
            let (u2, f2) = trial(e2)?;
            if armijo(e2, f2) && f2 > fv {
                eta = e2;
                un = u2;
                fv = f2;
            } else {
                break;
            }
        }
        return Ok(Some((eta, un, fv)));
    }
    for _ in 0..MAX_BACKTRACKS {
        eta *= cfg.armijo_shrink;
        let (u2, f2) = trial(eta)?;
        if armijo(eta, f2) {
            return Ok(Some((eta, u2, f2)));
        }
    }
    Ok(None)
}

/// Largest relative error between the analytic directional derivative
/// `2 Re tr((ΔU)†Γ)` and a central difference along `exp(±hΔ)U`, over `samples` random
/// unitaries and unit skew-Hermitian directions.
pub fn grad_check<O: Objective + ?Sized>(obj: &O, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidArgument("grad_check needs at least one sample".into()));
    }
    let d = obj.dim();
    let mut rng = QtlRng::from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let u = haar_unitary(d, &mut rng);
        let mut delta = random_skew_hermitian(d, &mut rng);
        let norm = delta.frobenius_norm();
        if norm > 0.0 {
            delta = delta.scale_real(1.0 / norm);
        }
        let gamma = obj.euclidean_gradient(&u);
        let analytic = 2.0 * real_inner(&delta.matmul(&u), &gamma);
        let plus = exp_skew_hermitian(&delta.scale_real(FD_STEP))?.matmul(&u);
        let minus = exp_skew_hermitian(&delta.scale_real(-FD_STEP))?.matmul(&u);
        let fd = (real_value(obj.value(&plus))? - real_value(obj.value(&minus))?) / (2.0 * FD_STEP);
        let scale = analytic.abs().max(fd.abs());
        let err = if scale > 1e-10 {
            (analytic - fd).abs() / scale
        } else {
            (analytic - fd).abs()
        };
        worst = worst.max(err);
    }
    Ok(worst)
}
