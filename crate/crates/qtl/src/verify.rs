//! Invariant suites behind `qtl verify`.

use qtl_core::bases::{self, GhzIndex, WeylIndex};
use qtl_core::channels::{apply_channel, apply_channel_oracle, ChannelSpec, CorrectionFamily, Protocol};
use qtl_core::metrics::{f1_objective, f2_full_omega_objective, f2_full_v_objective, f2_lower_objective};
use qtl_core::optimizer::grad_check;
use qtl_core::random::{haar_unitary, random_density, random_matrix};
use qtl_core::{ComplexMatrix, DensityMatrix, QtlRng, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

/// Replaceable building blocks, so that a deliberately broken basis can be checked to fail.
#[derive(Clone, Copy)]
pub struct Fixture {
    pub weyl_g: fn(usize) -> qtl_core::Result<ComplexMatrix>,
}

impl Default for Fixture {
    fn default() -> Self {
        Self {
            weyl_g: bases::weyl_g,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl SuiteResult {
    fn new(name: String, residual: f64, tolerance: f64) -> Self {
        Self {
            name,
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
        }
    }

    fn failed(name: String, tolerance: f64) -> Self {
        Self {
            name,
            residual: f64::INFINITY,
            tolerance,
            passed: false,
        }
    }
}

const SEED: u64 = 7;

fn dims(level: Level) -> &'static [usize] {
    match level {
        Level::Quick => &[2],
        Level::Full => &[2, 3],
    }
}

fn max_dev(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.max_abs_diff(b)
}

fn pow(m: &ComplexMatrix, k: usize) -> ComplexMatrix {
    (0..k).fold(ComplexMatrix::identity(m.rows()), |acc, _| acc.matmul(m))
}

/// `max |tr(U_st† U_s't') − n δ|` with `U_st = h^t g^s` built from the fixture's `g`.
pub fn weyl_orthogonality(n: usize, fixture: &Fixture) -> qtl_core::Result<f64> {
    let h = bases::weyl_h(n)?;
    let g = (fixture.weyl_g)(n)?;
    let us: Vec<ComplexMatrix> = WeylIndex::all(n).map(|i| pow(&h, i.t).matmul(&pow(&g, i.s))).collect();
    let mut worst = 0.0f64;
    for (a, ua) in us.iter().enumerate() {
        for (b, ub) in us.iter().enumerate() {
            let want = if a == b { n as f64 } else { 0.0 };
            worst = worst.max((ua.dagger().matmul(ub).trace() - C64::new(want, 0.0)).norm());
        }
    }
    Ok(worst)
}

fn gram_residual(states: &[Vec<C64>]) -> f64 {
    let mut worst = 0.0f64;
    for (a, x) in states.iter().enumerate() {
        for (b, y) in states.iter().enumerate() {
            let ip: C64 = x.iter().zip(y).map(|(p, q)| p.conj() * q).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((ip - C64::new(want, 0.0)).norm());
        }
    }
    worst
}

pub fn bell_orthonormality(n: usize) -> f64 {
    let states: Vec<Vec<C64>> = WeylIndex::all(n).map(|i| bases::bell_state(i).amplitudes().to_vec()).collect();
    gram_residual(&states)
}

pub fn ghz_orthonormality(n: usize) -> f64 {
    let states: Vec<Vec<C64>> = GhzIndex::all(n).map(|i| bases::ghz_state(i).amplitudes().to_vec()).collect();
    gram_residual(&states)
}

/// `ŨŨ† = I` and `Ũ†Ũ = (1⊗h^(m−r)) D (1⊗h^(m−r))†` with `D = Σ_j |jj⟩⟨jj|`.
pub fn utilde_relations(n: usize) -> f64 {
    let mut diag = ComplexMatrix::zeros(n * n, n * n);
    for j in 0..n {
        diag[(j * n + j, j * n + j)] = C64::new(1.0, 0.0);
    }
    let mut worst = 0.0f64;
    for idx in GhzIndex::all(n) {
        let u = bases::utilde(idx);
        worst = worst.max(max_dev(&u.matmul(&u.dagger()), &ComplexMatrix::identity(n)));
        let shift = ComplexMatrix::identity(n).kron(&bases::shift_power(n, idx.m as i64 - idx.r as i64));
        let want = shift.matmul(&diag).matmul(&shift.dagger());
        worst = worst.max(max_dev(&u.dagger().matmul(&u), &want));
    }
    worst
}

/// `Σ U_st†AU_st = n tr(A) I` and `Σ Ũ†AŨ = n tr(A) I⊗I` on random `A`.
pub fn depolarizing(n: usize, count: usize, seed: u64) -> f64 {
    let mut rng = QtlRng::from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let a = random_matrix(n, n, &mut rng);
        let tr = a.trace();
        let mut sum = ComplexMatrix::zeros(n, n);
        for idx in WeylIndex::all(n) {
            let u = bases::weyl_u(idx);
            sum = &sum + &u.dagger().matmul(&a).matmul(&u);
        }
        worst = worst.max(max_dev(&sum, &ComplexMatrix::identity(n).scale(tr * n as f64)));
        let mut sum = ComplexMatrix::zeros(n * n, n * n);
        for idx in GhzIndex::all(n) {
            let ud = bases::utilde_dagger(idx);
            sum = &sum + &ud.matmul(&a).matmul(&ud.dagger());
        }
        worst = worst.max(max_dev(&sum, &ComplexMatrix::identity(n * n).scale(tr * n as f64)));
    }
    worst
}

/// Largest per-entry deviation, in standard errors, of the Haar average of `(u⊗u)†σ(u⊗u)` from
/// the closed-form twirl.
pub fn twirl_mc_zscore(n: usize, samples: usize, seed: u64) -> qtl_core::Result<f64> {
    let mut rng = QtlRng::from_seed(seed);
    let d = n * n;
    let sigma = random_matrix(d, d, &mut rng);
    let closed = bases::schur_twirl(&sigma)?;
    let mut sum = vec![[0.0f64; 4]; d * d];
    for _ in 0..samples {
        let u = haar_unitary(n, &mut rng);
        let uu = u.kron(&u);
        let t = uu.dagger().matmul(&sigma).matmul(&uu);
        for (k, z) in t.data().iter().enumerate() {
            sum[k][0] += z.re;
            sum[k][1] += z.re * z.re;
            sum[k][2] += z.im;
            sum[k][3] += z.im * z.im;
        }
    }
    let nf = samples as f64;
    let mut worst = 0.0f64;
    for (k, s) in sum.iter().enumerate() {
        let (mr, mi) = (s[0] / nf, s[2] / nf);
        let vr = (s[1] / nf - mr * mr).max(0.0) * nf / (nf - 1.0);
        let vi = (s[3] / nf - mi * mi).max(0.0) * nf / (nf - 1.0);
        let se = ((vr + vi) / nf).sqrt();
        let dev = (C64::new(mr, mi) - closed.data()[k]).norm();
        let z = if se > 0.0 {
            dev / se
        } else if dev < 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z);
    }
    Ok(worst)
}

fn haar_family(count: usize, d: usize, rng: &mut QtlRng) -> Vec<ComplexMatrix> {
    (0..count).map(|_| haar_unitary(d, rng)).collect()
}

/// A channel spec with Haar-random local operations and corrections.
pub fn random_spec(protocol: Protocol, n: usize, rng: &mut QtlRng) -> qtl_core::Result<ChannelSpec> {
    let d = n * n;
    let id = ComplexMatrix::identity(d);
    match protocol {
        Protocol::OneChannelBell => {
            ChannelSpec::new(protocol, n, id.clone(), id, CorrectionFamily::bell(n, haar_family(d, n, rng))?)
        }
        Protocol::TwoChannelBell => ChannelSpec::new(
            protocol,
            n,
            haar_unitary(d, rng),
            haar_unitary(d, rng),
            CorrectionFamily::bell(n, haar_family(d, n, rng))?,
        ),
        Protocol::TwoChannelGhz => ChannelSpec::new(
            protocol,
            n,
            haar_unitary(d, rng),
            id,
            CorrectionFamily::ghz(n, haar_family(n * d, d, rng))?,
        ),
    }
}

pub const PROTOCOLS: [Protocol; 3] = [Protocol::OneChannelBell, Protocol::TwoChannelBell, Protocol::TwoChannelGhz];

fn resource(n: usize, rng: &mut QtlRng) -> DensityMatrix {
    random_density(&[n, n], rng)
}

/// `|tr Λ(ρ) − 1|` over random `(χ, spec, ρ)`.
pub fn trace_preservation(protocol: Protocol, n: usize, count: usize, seed: u64) -> qtl_core::Result<f64> {
    let mut rng = QtlRng::from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let spec = random_spec(protocol, n, &mut rng)?;
        let chi = resource(n, &mut rng);
        let rho = random_density(&[n], &mut rng);
        let out = qtl_core::channels::apply_channel_linear(&spec, &chi, rho.matrix())?;
        worst = worst.max((out.trace() - C64::new(1.0, 0.0)).norm());
    }
    Ok(worst)
}

/// Two-channel Bell with `W = V = I` against the one-channel protocol, elementwise.
pub fn reduction(n: usize, count: usize, seed: u64) -> qtl_core::Result<f64> {
    let mut rng = QtlRng::from_seed(seed);
    let d = n * n;
    let mut worst = 0.0f64;
    for _ in 0..count {
        let ts = haar_family(d, n, &mut rng);
        let id = ComplexMatrix::identity(d);
        let two = ChannelSpec::new(
            Protocol::TwoChannelBell,
            n,
            id.clone(),
            id.clone(),
            CorrectionFamily::bell(n, ts.clone())?,
        )?;
        let one = ChannelSpec::new(Protocol::OneChannelBell, n, id.clone(), id, CorrectionFamily::bell(n, ts)?)?;
        let chi = resource(n, &mut rng);
        let rho = random_density(&[n], &mut rng);
        let a = apply_channel(&two, &chi, &rho)?;
        let b = apply_channel(&one, &chi, &rho)?;
        worst = worst.max(max_dev(a.matrix(), b.matrix()));
    }
    Ok(worst)
}

/// Branch enumeration against the explicit five-particle simulation.
pub fn oracle_equivalence(protocol: Protocol, n: usize, count: usize, seed: u64) -> qtl_core::Result<f64> {
    let mut rng = QtlRng::from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let spec = random_spec(protocol, n, &mut rng)?;
        let chi = resource(n, &mut rng);
        let rho = random_density(&[n], &mut rng);
        let a = apply_channel(&spec, &chi, &rho)?;
        let b = apply_channel_oracle(&spec, &chi, &rho)?;
        worst = worst.max(max_dev(a.matrix(), b.matrix()));
    }
    Ok(worst)
}

/// Ideal protocols on a maximally entangled resource return the input.
pub fn ideal_teleportation(protocol: Protocol, n: usize, count: usize, seed: u64) -> qtl_core::Result<f64> {
    let mut rng = QtlRng::from_seed(seed);
    let spec = ChannelSpec::ideal(protocol, n)?;
    let chi = qtl_core::PureState::maximally_entangled(n).density();
    let mut worst = 0.0f64;
    for _ in 0..count {
        let rho = random_density(&[n], &mut rng);
        worst = worst.max(max_dev(apply_channel(&spec, &chi, &rho)?.matrix(), rho.matrix()));
    }
    Ok(worst)
}

/// Worst relative gradient error over the F1, lower-bound and both full-form block objectives
/// at random resources.
pub fn grad_checks(n: usize, points: usize, seed: u64) -> qtl_core::Result<f64> {
    let mut rng = QtlRng::from_seed(seed);
    let chi = resource(n, &mut rng);
    let d = n * n;
    let other = haar_unitary(d, &mut rng);
    let errs = [
        grad_check(&f1_objective(&chi)?, points, seed + 1)?,
        grad_check(&f2_lower_objective(&chi)?, points, seed + 2)?,
        grad_check(&f2_full_omega_objective(&chi, &other)?, points, seed + 3)?,
        grad_check(&f2_full_v_objective(&chi, &other)?, points, seed + 4)?,
    ];
    Ok(errs.into_iter().fold(0.0, f64::max))
}

fn record(out: &mut Vec<SuiteResult>, name: String, tol: f64, r: qtl_core::Result<f64>) {
    out.push(match r {
        Ok(v) => SuiteResult::new(name, v, tol),
        Err(_) => SuiteResult::failed(name, tol),
    });
}

/// Runs every suite at `level`; `Full` adds `n = 3` and larger samples.
pub fn run(level: Level, fixture: &Fixture) -> Vec<SuiteResult> {
    let full = level == Level::Full;
    let mut out = Vec::new();
    for &n in dims(level) {
        record(&mut out, format!("weyl-orthogonality n={}", n), 1e-12, weyl_orthogonality(n, fixture));
        record(&mut out, format!("bell-orthonormality n={}", n), 1e-12, Ok(bell_orthonormality(n)));
        record(&mut out, format!("ghz-orthonormality n={}", n), 1e-12, Ok(ghz_orthonormality(n)));
        record(&mut out, format!("utilde-relations n={}", n), 1e-12, Ok(utilde_relations(n)));
        record(&mut out, format!("depolarizing n={}", n), 1e-11, Ok(depolarizing(n, 50, SEED)));
        for p in PROTOCOLS {
            let count = if full { 50 } else { 10 };
            record(
                &mut out,
                format!("trace-preservation {} n={}", p.name(), n),
                1e-10,
                trace_preservation(p, n, count, SEED),
            );
            record(
                &mut out,
                format!("ideal-teleportation {} n={}", p.name(), n),
                1e-10,
                ideal_teleportation(p, n, 5, SEED),
            );
            let count = if n == 2 { 10 } else { 2 };
            record(
                &mut out,
                format!("oracle-equivalence {} n={}", p.name(), n),
                1e-9,
                oracle_equivalence(p, n, count, SEED),
            );
        }
        record(&mut out, format!("reduction n={}", n), 1e-10, reduction(n, 10, SEED));
    }
    let points = if full { 20 } else { 5 };
    record(&mut out, "grad-check n=2".into(), 1e-5, grad_checks(2, points, SEED));
    let samples = if full { 100_000 } else { 20_000 };
    record(&mut out, format!("twirl-mc n=2 samples={}", samples), 3.0, twirl_mc_zscore(2, samples, SEED));
    out
}
