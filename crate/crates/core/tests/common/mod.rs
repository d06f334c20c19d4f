//! Test-only oracles: a brute-force simulation of the physical protocols on the full
//! five-particle space, and small helpers shared by the integration tests.
#![allow(dead_code)]

use qtl_core::bases::{self, GhzIndex, WeylIndex};
use qtl_core::random::{haar_unitary, random_density};
use qtl_core::tensor::{embed, partial_trace, permute_factors};
use qtl_core::{ComplexMatrix, DensityMatrix, QtlRng, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `(⟨b| ⊗ I) m (|b⟩ ⊗ I)` for `b` on the leading factors.
pub fn project_leading(m: &ComplexMatrix, b: &[C64]) -> ComplexMatrix {
    let lead = b.len();
    let rest = m.rows() / lead;
    ComplexMatrix::from_fn(rest, rest, |x, y| {
        let mut acc = c(0.0, 0.0);
        for (i, bi) in b.iter().enumerate() {
            if *bi == c(0.0, 0.0) {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if *bj == c(0.0, 0.0) {
                    continue;
                }
                acc += bi.conj() * m[(i * rest + x, j * rest + y)] * bj;
            }
        }
        acc
    })
}

/// Measuring `(1⊗U_st)|Φ⟩` on (0,1) leaves `conj(U_st) ∝ U_(s,−t)†` on Bob's side, so the
/// branch formulas label that outcome `(s, −t)`; physical outcome `idx` uses this correction.
pub fn correction_for(idx: WeylIndex, ts: &[ComplexMatrix]) -> &ComplexMatrix {
    let n = idx.n;
    &ts[WeylIndex::new(idx.s, (n - idx.t) % n, n).unwrap().linear()]
}

fn conj_by(u: &ComplexMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    u.matmul(m).matmul(&u.dagger())
}

/// Input on particle 0, one pair on (1,2): Bell measurement on (0,1), correction on 2.
pub fn physical_one_channel(rho: &ComplexMatrix, chi: &ComplexMatrix, ts: &[ComplexMatrix], n: usize) -> ComplexMatrix {
    let st = rho.kron(chi);
    let mut out = ComplexMatrix::zeros(n, n);
    for idx in WeylIndex::all(n) {
        let b = bases::bell_state(idx);
        let r = project_leading(&st, b.amplitudes());
        out = &out + &conj_by(correction_for(idx, ts), &r);
    }
    out
}

/// Input on 0, pairs on (1,2) and (3,4); Alice applies `w` on (1,3), Bob `v` on (2,4); Bell
/// measurement on (0,1); correction on 2; particles 3 and 4 discarded.
pub fn physical_bell(
    rho: &ComplexMatrix,
    chi: &ComplexMatrix,
    w: &ComplexMatrix,
    v: &ComplexMatrix,
    ts: &[ComplexMatrix],
    n: usize,
) -> ComplexMatrix {
    let dims = [n; 5];
    let st = rho.kron(&chi.kron(chi));
    let o = embed(w, &dims, &[1, 3]).unwrap().matmul(&embed(v, &dims, &[2, 4]).unwrap());
    let st = conj_by(&o, &st);
    let mut out = ComplexMatrix::zeros(n, n);
    for idx in WeylIndex::all(n) {
        let b = bases::bell_state(idx);
        let r = project_leading(&st, b.amplitudes());
        let kept = partial_trace(&r, &[n, n, n], &[0]).unwrap();
        out = &out + &conj_by(correction_for(idx, ts), &kept);
    }
    out
}

/// Alice applies `w` on (1,3) and measures (0,1,3) in the GHZ basis; Bob corrects (2,4) jointly
/// and keeps particle 2.
pub fn physical_ghz(
    rho: &ComplexMatrix,
    chi: &ComplexMatrix,
    w: &ComplexMatrix,
    ts: &[ComplexMatrix],
    n: usize,
) -> ComplexMatrix {
    let dims = [n; 5];
    let st = rho.kron(&chi.kron(chi));
    let o = embed(w, &dims, &[1, 3]).unwrap();
    let st = permute_factors(&conj_by(&o, &st), &dims, &[0, 1, 3, 2, 4]).unwrap();
    let mut out = ComplexMatrix::zeros(n, n);
    for (idx, t) in GhzIndex::all(n).zip(ts) {
        let b = bases::ghz_state(idx);
        let r = conj_by(t, &project_leading(&st, b.amplitudes()));
        out = &out + &partial_trace(&r, &[n, n], &[0]).unwrap();
    }
    out
}

pub fn haar_family(count: usize, d: usize, rng: &mut QtlRng) -> Vec<ComplexMatrix> {
    (0..count).map(|_| haar_unitary(d, rng)).collect()
}

pub fn random_state(n: usize, rng: &mut QtlRng) -> DensityMatrix {
    random_density(&[n], rng)
}

pub fn random_resource(n: usize, rng: &mut QtlRng) -> DensityMatrix {
    random_density(&[n, n], rng)
}

/// `p|Φ⟩⟨Φ| + (1−p)I/n²` assembled directly.
pub fn isotropic(n: usize, p: f64) -> DensityMatrix {
    let d = n * n;
    let m = ComplexMatrix::from_fn(d, d, |i, j| {
        let (a, b) = (i / n, i % n);
        let (x, y) = (j / n, j % n);
        let mut v = if a == b && x == y { p / n as f64 } else { 0.0 };
        if i == j {
            v += (1.0 - p) / d as f64;
        }
        c(v, 0.0)
    });
    DensityMatrix::new(m, vec![n, n]).unwrap()
}

/// Pure state `Σ_i √λ_i |i⟩|i⟩` rotated by local unitaries.
pub fn schmidt_state(lambdas: &[f64], rng: &mut QtlRng) -> DensityMatrix {
    let n = lambdas.len();
    let mut amps = vec![c(0.0, 0.0); n * n];
    for (i, l) in lambdas.iter().enumerate() {
        amps[i * n + i] = c(l.sqrt(), 0.0);
    }
    let local = haar_unitary(n, rng).kron(&haar_unitary(n, rng));
    let psi = local.matvec(&amps);
    let m = ComplexMatrix::outer(&psi, &psi);
    DensityMatrix::new(m.hermitian_part(), vec![n, n]).unwrap()
}

/// Random point on the probability simplex.
pub fn simplex(n: usize, rng: &mut QtlRng) -> Vec<f64> {
    let xs: Vec<f64> = (0..n).map(|_| -(1.0 - rng.uniform()).ln()).collect();
    let s: f64 = xs.iter().sum();
    xs.into_iter().map(|x| x / s).collect()
}
