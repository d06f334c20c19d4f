//! The three teleportation channels and their fidelities.
//!
//! `W` is Alice's joint unitary on particles `(1, 3)` and `V` is Bob's on `(2, 4)`, both with
//! factor order as written. After Alice's measurement the surviving state lives on Bob's
//! particles; the branch formulas carry `W` over to `(2, 4)` as `Wᵀ` and replace each resource
//! eigenvector `|ψ⟩ = Σ a_ij |ij⟩` by Bob's operator `B = √p Aᵀ`, `A_ij = a_ij`, so that
//! `|ψ⟩ = √n (1 ⊗ B)|Φ⟩`.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::bases::{self, GhzIndex, WeylIndex};
use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ZERO};
use crate::par;
use crate::random::{random_pure_state, QtlRng};
use crate::state::DensityMatrix;
use crate::tensor;

/// Eigenvalues of the resource at or below this are dropped.
pub const EIGEN_CUTOFF: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;
/// Largest `n` accepted by [`apply_channel_oracle`].
pub const ORACLE_MAX_N: usize = 3;
/// Samples per independently seeded Monte-Carlo chunk.
const MC_CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    OneChannelBell,
    TwoChannelBell,
    TwoChannelGhz,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::OneChannelBell => "one-channel-bell",
            Protocol::TwoChannelBell => "two-channel-bell",
            Protocol::TwoChannelGhz => "two-channel-ghz",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "one-channel-bell" => Some(Protocol::OneChannelBell),
            "two-channel-bell" => Some(Protocol::TwoChannelBell),
            "two-channel-ghz" => Some(Protocol::TwoChannelGhz),
            _ => None,
        }
    }

    fn is_bell(self) -> bool {
        !matches!(self, Protocol::TwoChannelGhz)
    }
}

/// Bob's outcome-dependent corrections: `T_st` on `H` (ordered by `WeylIndex::linear`) for
/// Bell measurements, `T^s_rm` on `H ⊗ H` (ordered by `GhzIndex::linear`) for GHZ measurements.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrectionFamily {
    Bell { n: usize, ops: Vec<ComplexMatrix> },
    Ghz { n: usize, ops: Vec<ComplexMatrix> },
}

impl CorrectionFamily {
    pub fn bell(n: usize, ops: Vec<ComplexMatrix>) -> Result<Self> {
        check_family(n, &ops, n * n, n)?;
        Ok(CorrectionFamily::Bell { n, ops })
    }

    pub fn ghz(n: usize, ops: Vec<ComplexMatrix>) -> Result<Self> {
        check_family(n, &ops, n * n * n, n * n)?;
        Ok(CorrectionFamily::Ghz { n, ops })
    }

    /// `T_st = U_st`.
    pub fn bell_default(n: usize) -> Result<Self> {
        bases::weyl_h(n)?;
        Ok(CorrectionFamily::Bell {
            n,
            ops: WeylIndex::all(n).map(bases::weyl_u).collect(),
        })
    }

    /// Corrections that make the GHZ protocol exact on the ideal resource with `W = I`:
    /// `T^s_rm = C (g^s h^(−r) ⊗ h^(−m))` where `C|a, b⟩ = |a, b − a⟩` disentangles particle 4.
    pub fn ghz_default(n: usize) -> Result<Self> {
        bases::weyl_h(n)?;
        let mut c = ComplexMatrix::zeros(n * n, n * n);
        for a in 0..n {
            for b in 0..n {
                c[(a * n + (b + n - a) % n, a * n + b)] = C64::new(1.0, 0.0);
            }
        }
        let ops = GhzIndex::all(n)
            .map(|idx| {
                let gs = bases::weyl_u(WeylIndex { s: idx.s, t: 0, n });
                let first = gs.matmul(&bases::shift_power(n, -(idx.r as i64)));
                c.matmul(&first.kron(&bases::shift_power(n, -(idx.m as i64))))
            })
            .collect();
        Ok(CorrectionFamily::Ghz { n, ops })
    }

    pub fn n(&self) -> usize {
        match self {
            CorrectionFamily::Bell { n, .. } | CorrectionFamily::Ghz { n, .. } => *n,
        }
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        match self {
            CorrectionFamily::Bell { ops, .. } | CorrectionFamily::Ghz { ops, .. } => ops,
        }
    }

    pub fn is_bell(&self) -> bool {
        matches!(self, CorrectionFamily::Bell { .. })
    }
}

fn check_family(n: usize, ops: &[ComplexMatrix], count: usize, dim: usize) -> Result<()> {
    bases::weyl_h(n)?;
    if ops.len() != count {
        return Err(Error::DimensionMismatch(format!(
            "{} corrections for {} outcomes",
            ops.len(),
            count
        )));
    }
    for t in ops {
        check_unitary(t, dim, "correction")?;
    }
    Ok(())
}

fn check_unitary(u: &ComplexMatrix, dim: usize, what: &str) -> Result<()> {
    if !u.is_square() || u.rows() != dim {
        return Err(Error::DimensionMismatch(format!(
            "{} of size {}x{}, expected {}x{}",
            what,
            u.rows(),
            u.cols(),
            dim,
            dim
        )));
    }
    let res = u.unitarity_residual();
    if res.is_nan() || res > UNITARY_TOL {
        return Err(Error::Validation {
            field: "unitarity",
            residual: res,
            tolerance: UNITARY_TOL,
        });
    }
    Ok(())
}

/// Protocol, local operations and corrections. One-channel specs carry identities for `W`, `V`;
/// GHZ specs carry the identity for `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    protocol: Protocol,
    n: usize,
    w: ComplexMatrix,
    v: ComplexMatrix,
    corrections: CorrectionFamily,
}

impl ChannelSpec {
    pub fn new(
        protocol: Protocol,
        n: usize,
        w: ComplexMatrix,
        v: ComplexMatrix,
        corrections: CorrectionFamily,
    ) -> Result<Self> {
        bases::weyl_h(n)?;
        check_unitary(&w, n * n, "W")?;
        check_unitary(&v, n * n, "V")?;
        if corrections.n() != n {
            return Err(Error::DimensionMismatch(format!(
                "corrections for n={} in a spec with n={}",
                corrections.n(),
                n
            )));
        }
        if corrections.is_bell() != protocol.is_bell() {
            return Err(Error::InvalidArgument(format!(
                "correction family does not match protocol {}",
                protocol.name()
            )));
        }
        let id = ComplexMatrix::identity(n * n);
        let ident_required = |m: &ComplexMatrix, what: &str| -> Result<()> {
            if m.max_abs_diff(&id) > UNITARY_TOL {
                return Err(Error::InvalidArgument(format!(
                    "{} must be the identity for protocol {}",
                    what,
                    protocol.name()
                )));
            }
            Ok(())
        };
        match protocol {
            Protocol::OneChannelBell => {
                ident_required(&w, "W")?;
                ident_required(&v, "V")?;
            }
            Protocol::TwoChannelGhz => ident_required(&v, "V")?,
            Protocol::TwoChannelBell => {}
        }
        Ok(Self {
            protocol,
            n,
            w,
            v,
            corrections,
        })
    }

    /// Default corrections with `W = V = I`; exact teleportation on a maximally entangled
    /// resource.
    pub fn ideal(protocol: Protocol, n: usize) -> Result<Self> {
        let corrections = match protocol {
            Protocol::TwoChannelGhz => CorrectionFamily::ghz_default(n)?,
            _ => CorrectionFamily::bell_default(n)?,
        };
        let id = ComplexMatrix::identity(n * n);
        Self::new(protocol, n, id.clone(), id, corrections)
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn w(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn corrections(&self) -> &CorrectionFamily {
        &self.corrections
    }
}

fn check_resource(spec: &ChannelSpec, chi: &DensityMatrix) -> Result<()> {
    let n = spec.n;
    if chi.dim() != n * n {
        return Err(Error::DimensionMismatch(format!(
            "resource of dimension {} for n={}",
            chi.dim(),
            n
        )));
    }
    Ok(())
}

fn check_input(n: usize, x: &ComplexMatrix) -> Result<()> {
    if !x.is_square() || x.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "input of size {}x{} for n={}",
            x.rows(),
            x.cols(),
            n
        )));
    }
    Ok(())
}

/// Bob-side operators `B_α = √p_α A_αᵀ` of the resource eigenvectors above the cutoff.
pub fn resource_operators(chi: &DensityMatrix, n: usize) -> Result<Vec<ComplexMatrix>> {
    Ok(chi
        .spectral_components(EIGEN_CUTOFF)?
        .into_iter()
        .map(|(p, psi)| {
            let s = p.sqrt();
            ComplexMatrix::from_fn(n, n, |i, j| psi[j * n + i] * s)
        })
        .collect())
}

/// `Λ(ρ)` by enumerating measurement outcomes and resource eigen-branches.
pub fn apply_channel(
    spec: &ChannelSpec,
    chi: &DensityMatrix,
    rho_in: &DensityMatrix,
) -> Result<DensityMatrix> {
    if rho_in.dim() != spec.n {
        return Err(Error::DimensionMismatch(format!(
            "input state of dimension {} for n={}",
            rho_in.dim(),
            spec.n
        )));
    }
    let out = apply_channel_linear(spec, chi, rho_in.matrix())?;
    DensityMatrix::new(out.hermitian_part(), alloc::vec![spec.n])
}

/// The channel as a linear map on arbitrary `n × n` operators (no state validation of `x`).
pub fn apply_channel_linear(
    spec: &ChannelSpec,
    chi: &DensityMatrix,
    x: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_resource(spec, chi)?;
    check_input(spec.n, x)?;
    let ops = resource_operators(chi, spec.n)?;
    Ok(branch_sum(spec, &ops, x))
}

fn branch_sum(spec: &ChannelSpec, ops: &[ComplexMatrix], x: &ComplexMatrix) -> ComplexMatrix {
    let n = spec.n;
    let inv_n = 1.0 / n as f64;
    let mut out = ComplexMatrix::zeros(n, n);
    match spec.protocol {
        Protocol::OneChannelBell => {
            for (idx, t) in WeylIndex::all(n).zip(spec.corrections.ops()) {
                let u = bases::weyl_u(idx);
                let y = u.dagger().matmul(x).matmul(&u);
                for b in ops {
                    let k = t.matmul(b);
                    out.add_scaled(&k.matmul(&y).matmul(&k.dagger()), C64::new(inv_n, 0.0));
                }
            }
        }
        Protocol::TwoChannelBell | Protocol::TwoChannelGhz => {
            let wt = spec.w.transpose();
            let pairs: Vec<ComplexMatrix> = ops
                .iter()
                .flat_map(|a| ops.iter().map(move |b| spec.v.matmul(&a.kron(b))))
                .collect();
            let id = ComplexMatrix::identity(n);
            let outcomes: Vec<ComplexMatrix> = if spec.protocol == Protocol::TwoChannelBell {
                WeylIndex::all(n)
                    .map(|idx| {
                        let u = bases::weyl_u(idx);
                        u.dagger().matmul(x).matmul(&u).kron(&id)
                    })
                    .collect()
            } else {
                GhzIndex::all(n)
                    .map(|idx| {
                        let ud = bases::utilde_dagger(idx);
                        ud.matmul(x).matmul(&ud.dagger())
                    })
                    .collect()
            };
            for (y, t) in outcomes.iter().zip(spec.corrections.ops()) {
                let t_full = if spec.protocol == Protocol::TwoChannelBell {
                    t.kron(&id)
                } else {
                    t.clone()
                };
                let z = wt.matmul(y).matmul(&wt.dagger());
                let mut acc = ComplexMatrix::zeros(n * n, n * n);
                for m in &pairs {
                    let k = t_full.matmul(m);
                    acc.add_scaled(&k.matmul(&z).matmul(&k.dagger()), C64::new(1.0, 0.0));
                }
                let reduced = tensor::partial_trace(&acc, &[n, n], &[0])
                    .expect("dimensions fixed by construction");
                out.add_scaled(&reduced, C64::new(inv_n, 0.0));
            }
        }
    }
    out
}

/// `Λ(ρ)` evaluated from Bell-basis matrix elements of the resource, independently of its
/// eigendecomposition. Cost grows like `n¹⁰`; refused for `n > 3`.
pub fn apply_channel_oracle(
    spec: &ChannelSpec,
    chi: &DensityMatrix,
    rho_in: &DensityMatrix,
) -> Result<DensityMatrix> {
    let n = spec.n;
    if n > ORACLE_MAX_N {
        return Err(Error::CostGuard {
            what: "apply_channel_oracle",
            n,
            limit: ORACLE_MAX_N,
        });
    }
    check_resource(spec, chi)?;
    if rho_in.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "input state of dimension {} for n={}",
            rho_in.dim(),
            n
        )));
    }
    let m = bases::bell_matrix_elements(chi.matrix(), n)?;
    let us: Vec<ComplexMatrix> = WeylIndex::all(n).map(bases::weyl_u).collect();
    let x = rho_in.matrix();
    let nf = n as f64;
    let mut out = ComplexMatrix::zeros(n, n);
    match spec.protocol {
        Protocol::OneChannelBell => {
            // Σ_α B_α Y B_α† = (1/n) Σ_{a,a'} M_{aa'} U_a Y U_a'†
            for (idx, t) in WeylIndex::all(n).zip(spec.corrections.ops()) {
                let u = &us[idx.linear()];
                let y = u.dagger().matmul(x).matmul(u);
                let mut acc = ComplexMatrix::zeros(n, n);
                for (a, ua) in us.iter().enumerate() {
                    let left = ua.matmul(&y);
                    for (a2, ua2) in us.iter().enumerate() {
                        acc.add_scaled(&left.matmul(&ua2.dagger()), m[(a, a2)]);
                    }
                }
                let k = t.matmul(&acc).matmul(&t.dagger());
                out.add_scaled(&k, C64::new(1.0 / (nf * nf), 0.0));
            }
        }
        Protocol::TwoChannelBell | Protocol::TwoChannelGhz => {
            let d = n * n;
            // R_ab = Σ_{a'b'} M_aa' M_bb' (U_a' ⊗ U_b')†, shared by every outcome.
            let pair_daggers: Vec<ComplexMatrix> = us
                .iter()
                .flat_map(|a| us.iter().map(move |b| a.kron(b).dagger()))
                .collect();
            let mut r = Vec::with_capacity(d * d);
            for a in 0..d {
                for b in 0..d {
                    let mut acc = ComplexMatrix::zeros(d, d);
                    for a2 in 0..d {
                        for b2 in 0..d {
                            let c = m[(a, a2)] * m[(b, b2)];
                            if c != ZERO {
                                acc.add_scaled(&pair_daggers[a2 * d + b2], c);
                            }
                        }
                    }
                    r.push(acc);
                }
            }
            let wt = spec.w.transpose();
            let id = ComplexMatrix::identity(n);
            let outcomes: Vec<ComplexMatrix> = if spec.protocol == Protocol::TwoChannelBell {
                us.iter()
                    .map(|u| u.dagger().matmul(x).matmul(u).kron(&id))
                    .collect()
            } else {
                GhzIndex::all(n)
                    .map(|idx| {
                        let ud = bases::utilde_dagger(idx);
                        ud.matmul(x).matmul(&ud.dagger())
                    })
                    .collect()
            };
            for (y, t) in outcomes.iter().zip(spec.corrections.ops()) {
                let z = wt.matmul(y).matmul(&wt.dagger());
                let mut acc = ComplexMatrix::zeros(d, d);
                for a in 0..d {
                    for b in 0..d {
                        let left = us[a].kron(&us[b]).matmul(&z);
                        acc.add_scaled(&left.matmul(&r[a * d + b]), C64::new(1.0, 0.0));
                    }
                }
                let t_full = if spec.protocol == Protocol::TwoChannelBell {
                    t.kron(&id)
                } else {
                    t.clone()
                };
                let k = t_full
                    .matmul(&spec.v)
                    .matmul(&acc)
                    .matmul(&spec.v.dagger())
                    .matmul(&t_full.dagger());
                let reduced = tensor::partial_trace(&k, &[n, n], &[0])?;
                out.add_scaled(&reduced, C64::new(1.0 / (nf * nf * nf), 0.0));
            }
        }
    }
    DensityMatrix::new(out.hermitian_part(), alloc::vec![n])
}

/// `(nF + 1)/(n + 1)`.
pub fn fidelity_closed_form(f: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n={} must be at least 2", n)));
    }
    if !(-1e-9..=1.0 + 1e-9).contains(&f) {
        return Err(Error::InvalidArgument(format!(
            "entangled fraction {} outside [0, 1]",
            f
        )));
    }
    let nf = n as f64;
    Ok((nf * f + 1.0) / (nf + 1.0))
}

/// Row-major superoperator: `S[(a,b),(c,d)]` is the `(a,b)` entry of `Λ(|c⟩⟨d|)`.
pub fn superoperator(spec: &ChannelSpec, chi: &DensityMatrix) -> Result<ComplexMatrix> {
    check_resource(spec, chi)?;
    let n = spec.n;
    let ops = resource_operators(chi, n)?;
    let images = par::map_indexed(n * n, |k| {
        let mut e = ComplexMatrix::zeros(n, n);
        e[(k / n, k % n)] = C64::new(1.0, 0.0);
        branch_sum(spec, &ops, &e)
    });
    Ok(ComplexMatrix::from_fn(n * n, n * n, |row, col| {
        images[col][(row / n, row % n)]
    }))
}

/// `⟨Φ|(id ⊗ Λ)(|Φ⟩⟨Φ|)|Φ⟩` for the spec as given (no maximization).
pub fn entangled_fraction(spec: &ChannelSpec, chi: &DensityMatrix) -> Result<f64> {
    let s = superoperator(spec, chi)?;
    let n = spec.n;
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += s[(i * n + j, i * n + j)];
        }
    }
    Ok(acc.re / (n * n) as f64)
}

/// Haar-averaged fidelity from the closed-form twirl of `σ = Σ_k K_k ⊗ K_k†`, read off as
/// `⟨00|α₁ I + α₂ P|00⟩`.
pub fn average_fidelity_twirl(spec: &ChannelSpec, chi: &DensityMatrix) -> Result<f64> {
    let s = superoperator(spec, chi)?;
    let n = spec.n;
    // σ[(i,i'),(j,j')] = S[(i,j'),(j,i')]
    let sigma = ComplexMatrix::from_fn(n * n, n * n, |row, col| {
        let (i, i2) = (row / n, row % n);
        let (j, j2) = (col / n, col % n);
        s[(i * n + j2, j * n + i2)]
    });
    let (a1, a2, _) = bases::schur_coefficients(&sigma)?;
    Ok((a1 + a2).re)
}

/// Monte-Carlo estimate of `∫ ⟨φ|Λ(|φ⟩⟨φ|)|φ⟩ dφ` over Haar-random pure inputs.
/// Returns `(mean, standard error)`; deterministic for a given seed.
pub fn average_fidelity_mc(
    spec: &ChannelSpec,
    chi: &DensityMatrix,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples < 100 {
        return Err(Error::InvalidArgument(format!(
            "at least 100 samples required, got {}",
            samples
        )));
    }
    let s = superoperator(spec, chi)?;
    let n = spec.n;
    let root = QtlRng::from_seed(seed);
    let chunks = samples.div_ceil(MC_CHUNK);
    let stats = par::map_indexed(chunks, |c| {
        let mut rng = root.fork(c as u64);
        let count = MC_CHUNK.min(samples - c * MC_CHUNK);
        let mut acc = Welford::default();
        let mut vec_rho = alloc::vec![ZERO; n * n];
        for _ in 0..count {
            let phi = random_pure_state(&[n], &mut rng);
            let a = phi.amplitudes();
            for i in 0..n {
                for j in 0..n {
                    vec_rho[i * n + j] = a[i] * a[j].conj();
                }
            }
            let out = s.matvec(&vec_rho);
            let mut f = ZERO;
            for i in 0..n {
                for j in 0..n {
                    f += a[i].conj() * out[i * n + j] * a[j];
                }
            }
            acc.push(f.re);
        }
        acc
    });
    let mut total = Welford::default();
    for st in &stats {
        total.merge(st);
    }
    let var = if total.count > 1 {
        total.m2 / (total.count - 1) as f64
    } else {
        0.0
    };
    Ok((total.mean, (var / total.count as f64).sqrt()))
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(&mut self, o: &Welford) {
        if o.count == 0 {
            return;
        }
        let total = self.count + o.count;
        let d = o.mean - self.mean;
        self.mean += d * o.count as f64 / total as f64;
        self.m2 += o.m2 + d * d * (self.count as f64) * (o.count as f64) / total as f64;
        self.count = total;
    }
}
