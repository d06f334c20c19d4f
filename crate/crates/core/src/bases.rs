//! Weyl–Heisenberg operators, generalized Bell and GHZ bases, and the related maps used by
//! the teleportation channels.
//!
//! Index arithmetic is always reduced mod `n`, and phases are taken as `w^(k mod n)` with
//! `w = exp(−2πi/n)` so that no error accumulates through repeated multiplication.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::state::PureState;

/// Indices `(s, t)` of `U_st = h^t g^s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeylIndex {
    pub s: usize,
    pub t: usize,
    pub n: usize,
}

impl WeylIndex {
    pub fn new(s: usize, t: usize, n: usize) -> Result<Self> {
        check_dimension(n)?;
        if s >= n || t >= n {
            return Err(Error::InvalidArgument(format!(
                "Weyl index (s={}, t={}) out of range for n={}",
                s, t, n
            )));
        }
        Ok(Self { s, t, n })
    }

    /// All `n²` indices ordered by `linear()`.
    pub fn all(n: usize) -> impl Iterator<Item = WeylIndex> {
        (0..n * n).map(move |k| WeylIndex {
            s: k / n,
            t: k % n,
            n,
        })
    }

    /// Position `s·n + t`.
    #[inline]
    pub fn linear(&self) -> usize {
        self.s * self.n + self.t
    }
}

/// Indices `(r, m, s)` of `U^s_rm = h^r g^s ⊗ h^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GhzIndex {
    pub r: usize,
    pub m: usize,
    pub s: usize,
    pub n: usize,
}

impl GhzIndex {
    pub fn new(r: usize, m: usize, s: usize, n: usize) -> Result<Self> {
        check_dimension(n)?;
        if r >= n || m >= n || s >= n {
            return Err(Error::InvalidArgument(format!(
                "GHZ index (r={}, m={}, s={}) out of range for n={}",
                r, m, s, n
            )));
        }
        Ok(Self { r, m, s, n })
    }

    /// All `n³` indices ordered by `linear()`.
    pub fn all(n: usize) -> impl Iterator<Item = GhzIndex> {
        (0..n * n * n).map(move |k| GhzIndex {
            r: k / (n * n),
            m: (k / n) % n,
            s: k % n,
            n,
        })
    }

    /// Position `(r·n + m)·n + s`.
    #[inline]
    pub fn linear(&self) -> usize {
        (self.r * self.n + self.m) * self.n + self.s
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("local dimension n={} must be at least 2", n)));
    }
    Ok(())
}

/// `w^k` with `w = exp(−2πi/n)`, reduced mod `n` before exponentiating.
pub fn omega_pow(n: usize, k: i64) -> C64 {
    let k = k.rem_euclid(n as i64) as f64;
    let theta = -2.0 * core::f64::consts::PI * k / n as f64;
    C64::new(theta.cos(), theta.sin())
}

/// Cyclic shift `h|j⟩ = |j+1 mod n⟩`.
pub fn weyl_h(n: usize) -> Result<ComplexMatrix> {
    check_dimension(n)?;
    Ok(shift_power(n, 1))
}

/// Clock `g|j⟩ = w^j|j⟩`.
pub fn weyl_g(n: usize) -> Result<ComplexMatrix> {
    check_dimension(n)?;
    let diag: Vec<C64> = (0..n).map(|j| omega_pow(n, j as i64)).collect();
    Ok(ComplexMatrix::from_diagonal(&diag))
}

/// `h^k` for any integer `k`.
pub fn shift_power(n: usize, k: i64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let to = (j as i64 + k).rem_euclid(n as i64) as usize;
        m[(to, j)] = ONE;
    }
    m
}

/// `U_st = h^t g^s`, i.e. `U_st|j⟩ = w^(js)|j+t⟩`.
pub fn weyl_u(idx: WeylIndex) -> ComplexMatrix {
    let n = idx.n;
    let mut m = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        m[((j + idx.t) % n, j)] = omega_pow(n, (j * idx.s) as i64);
    }
    m
}

/// `|Φ_st⟩ = (1 ⊗ U_st)|Φ⟩ = n^(−1/2) Σ_ij (U_st)_ji |ij⟩`.
pub fn bell_state(idx: WeylIndex) -> PureState {
    let n = idx.n;
    let u = weyl_u(idx);
    let norm = 1.0 / (n as f64).sqrt();
    let amps = (0..n * n)
        .map(|k| u[(k % n, k / n)] * norm)
        .collect();
    PureState::assume_valid(amps, vec![n, n])
}

/// Matrix of Bell-basis elements `⟨Φ_a|χ|Φ_b⟩` with `a, b` in `WeylIndex::linear` order.
pub fn bell_matrix_elements(chi: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    if chi.rows() != n * n || !chi.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {}x{} on H⊗H with n={}",
            chi.rows(),
            chi.cols(),
            n
        )));
    }
    let basis: Vec<PureState> = WeylIndex::all(n).map(bell_state).collect();
    let images: Vec<Vec<C64>> = basis.iter().map(|b| chi.matvec(b.amplitudes())).collect();
    Ok(ComplexMatrix::from_fn(n * n, n * n, |a, b| {
        basis[a]
            .amplitudes()
            .iter()
            .zip(&images[b])
            .map(|(x, y)| x.conj() * y)
            .sum()
    }))
}

/// Coefficients `a_st = tr(U_st† A)/n` of `A = Σ a_st U_st`, in `WeylIndex::linear` order.
pub fn weyl_coefficients(a: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = a.rows();
    check_dimension(n)?;
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("{}x{} operator", a.rows(), a.cols())));
    }
    Ok(WeylIndex::all(n)
        .map(|idx| weyl_u(idx).inner(a) / n as f64)
        .collect())
}

/// `U^s_rm = h^r g^s ⊗ h^m`.
pub fn ghz_u(idx: GhzIndex) -> ComplexMatrix {
    let n = idx.n;
    let first = weyl_u(WeylIndex {
        s: idx.s,
        t: idx.r,
        n,
    });
    first.kron(&shift_power(n, idx.m as i64))
}

/// `|Φ^s_rm⟩ = n^(−1/2) Σ_j w^(js) |j, j+r, j+m⟩`.
pub fn ghz_state(idx: GhzIndex) -> PureState {
    let n = idx.n;
    let mut amps = vec![ZERO; n * n * n];
    let norm = 1.0 / (n as f64).sqrt();
    for j in 0..n {
        let k = (j * n + (j + idx.r) % n) * n + (j + idx.m) % n;
        amps[k] = omega_pow(n, (j * idx.s) as i64) * norm;
    }
    PureState::assume_valid(amps, vec![n, n, n])
}

/// The `n² × n` map `Ũ^{s†}_rm = Σ_j w^(−js) |j+r, j+m⟩⟨j|` from `H` into `H ⊗ H`.
pub fn utilde_dagger(idx: GhzIndex) -> ComplexMatrix {
    let n = idx.n;
    let mut m = ComplexMatrix::zeros(n * n, n);
    for j in 0..n {
        let row = ((j + idx.r) % n) * n + (j + idx.m) % n;
        m[(row, j)] = omega_pow(n, -((j * idx.s) as i64));
    }
    m
}

/// The `n × n²` adjoint `Ũ^s_rm`, mapping `H ⊗ H` onto `H`.
pub fn utilde(idx: GhzIndex) -> ComplexMatrix {
    utilde_dagger(idx).dagger()
}

/// `E = Σ_i |ii⟩⟨i|` (an `n² × n` isometry).
pub fn e_isometry(n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n * n, n);
    for i in 0..n {
        m[(i * n + i, i)] = ONE;
    }
    m
}

/// `E_i = Σ_j |jj⟩⟨ji|` on `H ⊗ H`.
pub fn e_i(n: usize, i: usize) -> Result<ComplexMatrix> {
    check_dimension(n)?;
    if i >= n {
        return Err(Error::InvalidArgument(format!("E_i index {} out of range for n={}", i, n)));
    }
    let mut m = ComplexMatrix::zeros(n * n, n * n);
    for j in 0..n {
        m[(j * n + j, j * n + i)] = ONE;
    }
    Ok(m)
}

/// Flip operator `P|ij⟩ = |ji⟩`.
pub fn flip(n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            m[(j * n + i, i * n + j)] = ONE;
        }
    }
    m
}

/// Closed form of the Haar twirl `∫ (U†⊗U†) σ (U⊗U) dU = α₁ I⊗I + α₂ P`.
pub fn schur_twirl(sigma: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (a1, a2, n) = schur_coefficients(sigma)?;
    let mut out = ComplexMatrix::identity(n * n).scale(a1);
    out.add_scaled(&flip(n), a2);
    Ok(out)
}

/// `(α₁, α₂, n)` of the twirl of `σ` on `H ⊗ H`.
pub fn schur_coefficients(sigma: &ComplexMatrix) -> Result<(C64, C64, usize)> {
    let d = sigma.rows();
    let n = (d as f64).sqrt().round() as usize;
    if !sigma.is_square() || n * n != d {
        return Err(Error::DimensionMismatch(format!(
            "twirl of a {}x{} operator (need n² x n²)",
            sigma.rows(),
            sigma.cols()
        )));
    }
    check_dimension(n)?;
    let nf = n as f64;
    let tr = sigma.trace();
    let tr_p = sigma.trace_of_product(&flip(n));
    let denom = nf * nf * (nf * nf - 1.0);
    let a1 = (tr * (nf * nf) - tr_p * nf) / denom;
    let a2 = (tr_p * (nf * nf) - tr * nf) / denom;
    Ok((a1, a2, n))
}
