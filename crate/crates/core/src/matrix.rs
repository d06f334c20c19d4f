//! Dense complex matrices in row-major storage.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix with explicit dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries supplied for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            m.data[i * d + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let d = diag.len();
        let mut m = Self::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * d + i] = v;
        }
        m
    }

    /// Builds a matrix from separate real and imaginary row-major parts.
    pub fn from_parts(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != rows * cols || im.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "real/imaginary parts of length {}/{} for a {}x{} matrix",
                re.len(),
                im.len(),
                rows,
                cols
            )));
        }
        let data = re.iter().zip(im).map(|(&r, &i)| C64::new(r, i)).collect();
        Ok(Self { rows, cols, data })
    }

    /// Column vector `|v⟩`.
    pub fn column(v: &[C64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// Rank-one operator `|a⟩⟨b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, other: &Self, s: C64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius inner product `tr(self† other)`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = ZERO;
        for i in 0..self.rows {
            let r = self.row(i);
            for (k, &a) in r.iter().enumerate() {
                acc += a * other.data[k * other.cols + i];
            }
        }
        acc
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul: {}x{} times {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * p];
        for i in 0..n {
            let orow = &mut out[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * p..(k + 1) * p];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Self {
            rows: n,
            cols: p,
            data: out,
        }
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Kronecker product with standard ordering: block `(i, j)` equals `self[i, j] · other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        let mut out = Self::zeros(r1 * r2, c1 * c2);
        let oc = c1 * c2;
        for i in 0..r1 {
            for j in 0..c1 {
                let a = self.data[i * c1 + j];
                if a == ZERO {
                    continue;
                }
                for k in 0..r2 {
                    let row = (i * r2 + k) * oc + j * c2;
                    for l in 0..c2 {
                        out.data[row + l] = a * other.data[k * c2 + l];
                    }
                }
            }
        }
        out
    }

    /// `(M + M†)/2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Largest elementwise modulus of `M − M†`.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut r = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                r = r.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        r
    }

    /// `‖M†M − I‖_F`
    pub fn unitarity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let p = self.dagger().matmul(self);
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let target = if i == j { ONE } else { ZERO };
                acc += (p[(i, j)] - target).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    /// Eigendecomposition of a Hermitian matrix. Eigenvalues ascend; eigenvectors are the
    /// columns of the returned matrix. Only the Hermitian part of `self` is used.
    pub fn eigh(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "eigh on a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let d = self.rows;
        let eig = self.hermitian_part().to_nalgebra().symmetric_eigen();
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = Self::from_fn(d, d, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok((values, vectors))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (v, _) = self.eigh()?;
        Ok(v.first().copied().unwrap_or(0.0))
    }

    /// Householder QR decomposition `self = Q R`.
    pub fn qr(&self) -> (ComplexMatrix, ComplexMatrix) {
        let qr = self.to_nalgebra().qr();
        (Self::from_nalgebra(&qr.q()), Self::from_nalgebra(&qr.r()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant
/// (lower degrees for small norms).
pub fn mat_exp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "mat_exp on a {}x{} matrix",
            a.rows, a.cols
        )));
    }
    let d = a.rows;
    if d == 0 {
        return Ok(a.clone());
    }
    if !a.is_finite() {
        return Err(Error::InvalidArgument("mat_exp of a non-finite matrix".into()));
    }
    // Backward-error thresholds on the 1-norm for degrees 3, 5, 7, 9, 13.
    const THETA: [(usize, f64); 4] = [
        (3, 1.495_585_217_958_292e-2),
        (5, 2.539_398_330_063_23e-1),
        (7, 9.504_178_996_162_932e-1),
        (9, 2.097_847_961_257_068),
    ];
    const THETA13: f64 = 5.371_920_351_148_152;
    let norm = one_norm(a);
    for &(m, theta) in &THETA {
        if norm <= theta {
            return pade_low(a, m);
        }
    }
    let s = if norm > THETA13 {
        ((norm / THETA13).log2().ceil()).max(0.0) as i32
    } else {
        0
    };
    let scaled = a.scale_real(0.5f64.powi(s));
    let mut e = pade13(&scaled)?;
    for _ in 0..s {
        e = e.matmul(&e);
    }
    Ok(e)
}

fn one_norm(a: &ComplexMatrix) -> f64 {
    (0..a.cols)
        .map(|j| (0..a.rows).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn pade_solve(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<ComplexMatrix> {
    // exp(A) ≈ (V − U)⁻¹ (V + U)
    let p = v + u;
    let q = v - u;
    let lu = q.to_nalgebra().lu();
    let sol = lu
        .solve(&p.to_nalgebra())
        .ok_or_else(|| Error::InvalidArgument("singular Padé denominator".into()))?;
    Ok(ComplexMatrix::from_nalgebra(&sol))
}

fn pade_low(a: &ComplexMatrix, m: usize) -> Result<ComplexMatrix> {
    let b: &[f64] = match m {
        3 => &[120.0, 60.0, 12.0, 1.0],
        5 => &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0],
        7 => &[
            17_297_280.0, 8_648_640.0, 1_995_840.0, 277_200.0, 25_200.0, 1512.0, 56.0, 1.0,
        ],
        _ => &[
            17_643_225_600.0,
            8_821_612_800.0,
            2_075_673_600.0,
            302_702_400.0,
            30_270_240.0,
            2_162_160.0,
            110_880.0,
            3960.0,
            90.0,
            1.0,
        ],
    };
    let d = a.rows;
    let a2 = a.matmul(a);
    let mut powers = vec![ComplexMatrix::identity(d), a2.clone()];
    for k in 2..=m / 2 {
        let next = powers[k - 1].matmul(&a2);
        powers.push(next);
    }
    let mut u_inner = ComplexMatrix::zeros(d, d);
    let mut v = ComplexMatrix::zeros(d, d);
    for (k, pw) in powers.iter().enumerate() {
        u_inner.add_scaled(pw, C64::new(b[2 * k + 1], 0.0));
        v.add_scaled(pw, C64::new(b[2 * k], 0.0));
    }
    let u = a.matmul(&u_inner);
    pade_solve(&u, &v)
}

fn pade13(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    const B: [f64; 14] = [
        64_764_752_532_480_000.0,
        32_382_376_266_240_000.0,
        7_771_770_303_897_600.0,
        1_187_353_796_428_800.0,
        129_060_195_264_000.0,
        10_559_470_521_600.0,
        670_442_572_800.0,
        33_522_128_640.0,
        1_323_241_920.0,
        40_840_800.0,
        960_960.0,
        16_380.0,
        182.0,
        1.0,
    ];
    let d = a.rows;
    let id = ComplexMatrix::identity(d);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let c = |k: usize| C64::new(B[k], 0.0);

    let mut w1 = a6.scale(c(13));
    w1.add_scaled(&a4, c(11));
    w1.add_scaled(&a2, c(9));
    let mut w2 = a6.scale(c(7));
    w2.add_scaled(&a4, c(5));
    w2.add_scaled(&a2, c(3));
    w2.add_scaled(&id, c(1));
    let mut u = a6.matmul(&w1);
    u = &u + &w2;
    let u = a.matmul(&u);

    let mut z1 = a6.scale(c(12));
    z1.add_scaled(&a4, c(10));
    z1.add_scaled(&a2, c(8));
    let mut z2 = a6.scale(c(6));
    z2.add_scaled(&a4, c(4));
    z2.add_scaled(&a2, c(2));
    z2.add_scaled(&id, c(0));
    let mut v = a6.matmul(&z1);
    v = &v + &z2;
    pade_solve(&u, &v)
}

/// Exponential of a skew-Hermitian matrix through the eigendecomposition of `iA`.
/// The result is unitary up to the accuracy of the eigenvectors.
pub fn exp_skew_hermitian(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let i = C64::new(0.0, 1.0);
    // A = -i H with H = iA Hermitian, so exp(A) = V exp(-i Λ) V†.
    let h = a.scale(i);
    let (vals, vecs) = h.eigh()?;
    let d = a.rows;
    let phases: Vec<C64> = vals.iter().map(|&l| C64::new(0.0, -l).exp()).collect();
    let mut scaled = vecs.clone();
    for r in 0..d {
        for c in 0..d {
            scaled[(r, c)] *= phases[c];
        }
    }
    Ok(scaled.matmul(&vecs.dagger()))
}
