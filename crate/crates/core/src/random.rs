//! Seeded randomness: a splittable generator plus Haar and Ginibre ensembles.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::matrix::{ComplexMatrix, C64};
use crate::state::{DensityMatrix, PureState};

/// Seed used whenever a caller does not supply one.
pub const DEFAULT_SEED: u64 = 42;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha-based generator that can be forked into independent, reproducible children
/// without advancing its own stream.
#[derive(Debug, Clone)]
pub struct QtlRng {
    inner: ChaCha20Rng,
    key: u64,
}

impl QtlRng {
    pub fn from_seed(seed: u64) -> Self {
        let key = splitmix64(seed);
        Self {
            inner: ChaCha20Rng::seed_from_u64(key),
            key,
        }
    }

    /// Child generator number `index`. The same `(parent, index)` always yields the same child.
    pub fn fork(&self, index: u64) -> Self {
        let key = splitmix64(self.key ^ splitmix64(index ^ 0xD1B5_4A32_D192_ED03));
        Self {
            inner: ChaCha20Rng::seed_from_u64(key),
            key,
        }
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Complex Gaussian with `E|z|² = 1`.
    pub fn complex_normal(&mut self) -> C64 {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        C64::new(self.normal() * s, self.normal() * s)
    }
}

impl RngCore for QtlRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Square matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(d: usize, rng: &mut QtlRng) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| rng.complex_normal())
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of `diag(R)` removed.
pub fn haar_unitary(d: usize, rng: &mut QtlRng) -> ComplexMatrix {
    let g = ginibre(d, rng);
    let (mut q, r) = g.qr();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Hilbert–Schmidt random state `GG†/tr(GG†)`.
pub fn random_density(dims: &[usize], rng: &mut QtlRng) -> DensityMatrix {
    let d: usize = dims.iter().product();
    let g = ginibre(d, rng);
    let m = g.matmul(&g.dagger());
    let tr = m.trace().re;
    DensityMatrix::assume_valid(m.scale_real(1.0 / tr).hermitian_part(), dims.to_vec())
}

/// Haar-random pure state.
pub fn random_pure_state(dims: &[usize], rng: &mut QtlRng) -> PureState {
    let d: usize = dims.iter().product();
    let mut v: Vec<C64> = (0..d).map(|_| rng.complex_normal()).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    PureState::assume_valid(v, dims.to_vec())
}

/// Random skew-Hermitian matrix with Gaussian entries.
pub fn random_skew_hermitian(d: usize, rng: &mut QtlRng) -> ComplexMatrix {
    let g = ginibre(d, rng);
    let mut s = &g - &g.dagger();
    for z in s.data_mut() {
        *z *= 0.5;
    }
    s
}

/// Arbitrary (non-Hermitian) complex matrix for identity checks.
pub fn random_matrix(rows: usize, cols: usize, rng: &mut QtlRng) -> ComplexMatrix {
    let mut data = vec![C64::new(0.0, 0.0); rows * cols];
    for z in &mut data {
        *z = rng.complex_normal();
    }
    ComplexMatrix::new(rows, cols, data).expect("sized by construction")
}
