//! Validated quantum states.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::tensor;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Admits numerically rounded states produced by partial traces.
pub const PSD_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;

/// Hermitian, positive-semidefinite, unit-trace operator with its factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        let rho = Self { matrix, dims };
        rho.validate()?;
        Ok(rho)
    }

    /// Skips the eigenvalue check; used for operators that are states by construction.
    pub(crate) fn assume_valid(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(matrix.rows(), tensor::total_dim(&dims));
        Self { matrix, dims }
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        if !m.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix of size {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if self.dims.is_empty() || tensor::total_dim(&self.dims) != m.rows() {
            return Err(Error::DimensionMismatch(format!(
                "factor dimensions {:?} do not multiply to {}",
                self.dims,
                m.rows()
            )));
        }
        if !m.is_finite() {
            return Err(Error::Validation {
                field: "finiteness",
                residual: f64::INFINITY,
                tolerance: 0.0,
            });
        }
        let herm = m.hermiticity_residual();
        if herm > HERMITICITY_TOL {
            return Err(Error::Validation {
                field: "hermiticity",
                residual: herm,
                tolerance: HERMITICITY_TOL,
            });
        }
        let tr = (m.trace() - ONE).norm();
        if tr > TRACE_TOL {
            return Err(Error::Validation {
                field: "trace",
                residual: tr,
                tolerance: TRACE_TOL,
            });
        }
        let min = m.min_eigenvalue()?;
        if min < -PSD_TOL {
            return Err(Error::Validation {
                field: "positivity",
                residual: -min,
                tolerance: PSD_TOL,
            });
        }
        Ok(())
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d = tensor::total_dim(&dims);
        let m = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
        Self::assume_valid(m, dims)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let m = ComplexMatrix::outer(&psi.amplitudes, &psi.amplitudes);
        Self::assume_valid(m, psi.dims.clone())
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::assume_valid(self.matrix.kron(&other.matrix), dims)
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let m = tensor::partial_trace(&self.matrix, &self.dims, keep)?;
        let dims = keep.iter().map(|&k| self.dims[k]).collect();
        Ok(Self::assume_valid(m, dims))
    }

    /// `U ρ U†` for a unitary `U` on the full space.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.dim() || !u.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "unitary of size {}x{} on a state of dimension {}",
                u.rows(),
                u.cols(),
                self.dim()
            )));
        }
        let m = u.matmul(&self.matrix).matmul(&u.dagger()).hermitian_part();
        Ok(Self::assume_valid(m, self.dims.clone()))
    }

    /// `ξ a + (1 − ξ) b`
    pub fn mix(xi: f64, a: &Self, b: &Self) -> Result<Self> {
        if a.dims != b.dims {
            return Err(Error::DimensionMismatch(format!(
                "mixing states on {:?} and {:?}",
                a.dims, b.dims
            )));
        }
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::InvalidArgument(format!("mixing weight {} outside [0, 1]", xi)));
        }
        let mut m = a.matrix.scale_real(xi);
        m.add_scaled(&b.matrix, C64::new(1.0 - xi, 0.0));
        Ok(Self::assume_valid(m, a.dims.clone()))
    }

    /// Eigenpairs `(p, |ψ⟩)` with `p > cutoff`, largest first.
    pub fn spectral_components(&self, cutoff: f64) -> Result<Vec<(f64, Vec<C64>)>> {
        let (vals, vecs) = self.matrix.eigh()?;
        let d = self.dim();
        let mut out: Vec<(f64, Vec<C64>)> = (0..d)
            .rev()
            .filter(|&k| vals[k] > cutoff)
            .map(|k| (vals[k], (0..d).map(|i| vecs[(i, k)]).collect()))
            .collect();
        out.shrink_to_fit();
        Ok(out)
    }

    /// `p |Φ⟩⟨Φ| + (1 − p) I/n²` on `H ⊗ H`.
    pub fn isotropic(n: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("isotropic weight {} outside [0, 1]", p)));
        }
        let phi = PureState::maximally_entangled(n);
        let mut m = ComplexMatrix::outer(phi.amplitudes(), phi.amplitudes()).scale_real(p);
        let d = n * n;
        for i in 0..d {
            m[(i, i)] += C64::new((1.0 - p) / d as f64, 0.0);
        }
        Ok(Self::assume_valid(m, alloc::vec![n, n]))
    }
}

/// Unit vector with factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        if tensor::total_dim(&dims) != amplitudes.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for factors {:?}",
                amplitudes.len(),
                dims
            )));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation {
                field: "normalization",
                residual: (norm - 1.0).abs(),
                tolerance: NORM_TOL,
            });
        }
        Ok(Self { amplitudes, dims })
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(mut amplitudes: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Self::new(amplitudes, dims)
    }

    pub(crate) fn assume_valid(amplitudes: Vec<C64>, dims: Vec<usize>) -> Self {
        Self { amplitudes, dims }
    }

    /// `|Φ⟩ = Σ_i |ii⟩/√n`
    pub fn maximally_entangled(n: usize) -> Self {
        let mut a = alloc::vec![ZERO; n * n];
        let v = C64::new(1.0 / (n as f64).sqrt(), 0.0);
        for i in 0..n {
            a[i * n + i] = v;
        }
        Self::assume_valid(a, alloc::vec![n, n])
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}
