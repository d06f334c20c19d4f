mod common;

use common::c;
use proptest::prelude::*;
use qtl_core::bases::{
    bell_matrix_elements, bell_state, e_i, flip, ghz_state, ghz_u, schur_twirl, shift_power, utilde, utilde_dagger,
    weyl_coefficients, weyl_g, weyl_h, weyl_u, GhzIndex, WeylIndex,
};
use qtl_core::random::{haar_unitary, random_density, random_matrix};
use qtl_core::{ComplexMatrix, PureState, QtlRng, C64};

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[test]
fn weyl_generators() {
    let h = weyl_h(2).unwrap();
    let want = ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
    assert_eq!(h, want);
    let g = weyl_g(2).unwrap();
    assert!(g.max_abs_diff(&ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)])) < 1e-15);
    let g3 = weyl_g(3).unwrap();
    let theta = -4.0 * core::f64::consts::PI / 3.0;
    assert!((g3[(2, 2)] - c(theta.cos(), theta.sin())).norm() < 1e-15);
    assert!(weyl_h(1).is_err());
    assert!(weyl_g(0).is_err());
    assert!(WeylIndex::new(2, 0, 2).is_err());
    assert!(GhzIndex::new(0, 0, 3, 3).is_err());
}

#[test]
fn weyl_u_examples() {
    for n in [2, 3, 4] {
        assert_eq!(weyl_u(WeylIndex::new(0, 0, n).unwrap()), ComplexMatrix::identity(n));
        let h = weyl_h(n).unwrap();
        let g = weyl_g(n).unwrap();
        for idx in WeylIndex::all(n) {
            let mut m = ComplexMatrix::identity(n);
            for _ in 0..idx.t {
                m = m.matmul(&h);
            }
            for _ in 0..idx.s {
                m = m.matmul(&g);
            }
            assert!(weyl_u(idx).max_abs_diff(&m) < 1e-14);
        }
    }
    let u11 = weyl_u(WeylIndex::new(1, 1, 2).unwrap());
    let want = ComplexMatrix::new(2, 2, vec![c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
    assert!(u11.max_abs_diff(&want) < 1e-15);
}

#[test]
fn weyl_trace_orthogonality() {
    for n in [2, 3] {
        for a in WeylIndex::all(n) {
            for b in WeylIndex::all(n) {
                let v = weyl_u(a).dagger().matmul(&weyl_u(b)).trace();
                let want = if a == b { n as f64 } else { 0.0 };
                assert!((v - c(want, 0.0)).norm() < 1e-12, "{:?} {:?}", a, b);
            }
        }
    }
}

#[test]
fn bell_examples() {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let b00 = bell_state(WeylIndex::new(0, 0, 2).unwrap());
    let want = [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
    for (x, y) in b00.amplitudes().iter().zip(want) {
        assert!((x - y).norm() < 1e-15);
    }
    let b10 = bell_state(WeylIndex::new(1, 0, 2).unwrap());
    let want = [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-s, 0.0)];
    for (x, y) in b10.amplitudes().iter().zip(want) {
        assert!((x - y).norm() < 1e-15);
    }
}

#[test]
fn bell_states_orthonormal_and_generated_by_weyl() {
    for n in [2, 3] {
        let phi = PureState::maximally_entangled(n);
        let states: Vec<PureState> = WeylIndex::all(n).map(bell_state).collect();
        for (a, sa) in WeylIndex::all(n).zip(&states) {
            let direct = ComplexMatrix::identity(n).kron(&weyl_u(a)).matvec(phi.amplitudes());
            for (x, y) in sa.amplitudes().iter().zip(&direct) {
                assert!((x - y).norm() < 1e-14);
            }
            for (b, sb) in WeylIndex::all(n).zip(&states) {
                let v = inner(sa.amplitudes(), sb.amplitudes());
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((v - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn bell_components_carry_the_transpose() {
    // (1⊗U)|Φ⟩ has components U_ji/√n; the conjugated form U*_ij differs at n = 3.
    let n = 3;
    let norm = 1.0 / (n as f64).sqrt();
    let mut conj_mismatch = 0.0f64;
    for idx in WeylIndex::all(n) {
        let u = weyl_u(idx);
        let amps = bell_state(idx).amplitudes().to_vec();
        for i in 0..n {
            for j in 0..n {
                assert!((amps[i * n + j] - u[(j, i)] * norm).norm() < 1e-15);
                conj_mismatch = conj_mismatch.max((amps[i * n + j] - u[(i, j)].conj() * norm).norm());
            }
        }
    }
    assert!(conj_mismatch > 0.1);
}

#[test]
fn ghz_u_examples() {
    assert_eq!(ghz_u(GhzIndex::new(0, 0, 0, 2).unwrap()), ComplexMatrix::identity(4));
    let h = weyl_h(2).unwrap();
    assert!(ghz_u(GhzIndex::new(1, 1, 0, 2).unwrap()).max_abs_diff(&h.kron(&h)) < 1e-15);
    for a in GhzIndex::all(2) {
        for b in GhzIndex::all(2) {
            let v = ghz_u(a).matmul(&ghz_u(b).dagger()).trace();
            let want = if a == b { 4.0 } else { 0.0 };
            assert!((v - c(want, 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn ghz_state_examples() {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let g0 = ghz_state(GhzIndex::new(0, 0, 0, 2).unwrap());
    let g1 = ghz_state(GhzIndex::new(1, 0, 0, 2).unwrap());
    for k in 0..8 {
        let w0 = if k == 0 || k == 7 { s } else { 0.0 };
        let w1 = if k == 0b010 || k == 0b101 { s } else { 0.0 };
        assert!((g0.amplitudes()[k] - c(w0, 0.0)).norm() < 1e-15);
        assert!((g1.amplitudes()[k] - c(w1, 0.0)).norm() < 1e-15);
    }
}

#[test]
fn ghz_states_orthonormal_and_generated_by_u() {
    for n in [2, 3] {
        let base = ghz_state(GhzIndex::new(0, 0, 0, n).unwrap());
        let states: Vec<PureState> = GhzIndex::all(n).map(ghz_state).collect();
        for (a, sa) in GhzIndex::all(n).zip(&states) {
            let direct = ComplexMatrix::identity(n).kron(&ghz_u(a)).matvec(base.amplitudes());
            for (x, y) in sa.amplitudes().iter().zip(&direct) {
                assert!((x - y).norm() < 1e-12);
            }
            for (b, sb) in GhzIndex::all(n).zip(&states) {
                let v = inner(sa.amplitudes(), sb.amplitudes());
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((v - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn utilde_relations() {
    for n in [2, 3] {
        let mut diag = ComplexMatrix::zeros(n * n, n * n);
        for j in 0..n {
            diag[(j * n + j, j * n + j)] = c(1.0, 0.0);
        }
        for idx in GhzIndex::all(n) {
            let u = utilde(idx);
            assert_eq!((u.rows(), u.cols()), (n, n * n));
            assert!(u.matmul(&u.dagger()).max_abs_diff(&ComplexMatrix::identity(n)) < 1e-12);
            let shift = ComplexMatrix::identity(n).kron(&shift_power(n, idx.m as i64 - idx.r as i64));
            let want = shift.matmul(&diag).matmul(&shift.dagger());
            assert!(u.dagger().matmul(&u).max_abs_diff(&want) < 1e-12);
        }
    }
    let d = utilde_dagger(GhzIndex::new(0, 0, 0, 2).unwrap());
    let mut want = ComplexMatrix::zeros(4, 2);
    want[(0, 0)] = c(1.0, 0.0);
    want[(3, 1)] = c(1.0, 0.0);
    assert_eq!(d, want);
}

#[test]
fn e_i_examples() {
    let e0 = e_i(2, 0).unwrap();
    let mut want = ComplexMatrix::zeros(4, 4);
    want[(0, 0)] = c(1.0, 0.0);
    want[(3, 2)] = c(1.0, 0.0);
    assert_eq!(e0, want);
    let mut sum = ComplexMatrix::zeros(4, 4);
    for i in 0..2 {
        let e = e_i(2, i).unwrap();
        sum = &sum + &e.matmul(&e.dagger());
    }
    let mut diag = ComplexMatrix::zeros(4, 4);
    diag[(0, 0)] = c(2.0, 0.0);
    diag[(3, 3)] = c(2.0, 0.0);
    assert!(sum.max_abs_diff(&diag) < 1e-15);
    for n in [2, 3] {
        for i in 0..n {
            let e = e_i(n, i).unwrap();
            let nz: Vec<&C64> = e.data().iter().filter(|z| z.norm() > 0.0).collect();
            assert_eq!(nz.len(), n);
            assert!(nz.iter().all(|z| **z == c(1.0, 0.0)));
        }
    }
    assert!(e_i(2, 2).is_err());
}

#[test]
fn twirl_fixed_points() {
    for n in [2, 3] {
        let id = ComplexMatrix::identity(n * n);
        assert!(schur_twirl(&id).unwrap().max_abs_diff(&id) < 1e-14);
        let p = flip(n);
        assert!(schur_twirl(&p).unwrap().max_abs_diff(&p) < 1e-14);
    }
    assert!(schur_twirl(&ComplexMatrix::identity(1)).is_err());
    assert!(schur_twirl(&ComplexMatrix::identity(3)).is_err());
}

#[test]
fn twirl_matches_haar_average() {
    let n = 2;
    let mut rng = QtlRng::from_seed(2024);
    let sigma = random_matrix(4, 4, &mut rng);
    let closed = schur_twirl(&sigma).unwrap();
    let samples = 100_000usize;
    let mut sum = vec![[0.0f64; 4]; 16];
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
    for (k, s) in sum.iter().enumerate() {
        let (mr, mi) = (s[0] / nf, s[2] / nf);
        let vr = (s[1] / nf - mr * mr).max(0.0) / (nf - 1.0) * nf;
        let vi = (s[3] / nf - mi * mi).max(0.0) / (nf - 1.0) * nf;
        let se = ((vr + vi) / nf).sqrt();
        let dev = (c(mr, mi) - closed.data()[k]).norm();
        assert!(dev <= 3.0 * se + 1e-12, "entry {} deviates by {} with se {}", k, dev, se);
    }
}

#[test]
fn depolarizing_identities() {
    let mut rng = QtlRng::from_seed(31);
    for n in [2, 3] {
        for _ in 0..50 {
            let a = random_matrix(n, n, &mut rng);
            let tr = a.trace();
            let mut sum = ComplexMatrix::zeros(n, n);
            for idx in WeylIndex::all(n) {
                let u = weyl_u(idx);
                sum = &sum + &u.dagger().matmul(&a).matmul(&u);
            }
            let want = ComplexMatrix::identity(n).scale(tr * n as f64);
            assert!(sum.max_abs_diff(&want) < 1e-11);

            let mut sum = ComplexMatrix::zeros(n * n, n * n);
            for idx in GhzIndex::all(n) {
                let ud = utilde_dagger(idx);
                sum = &sum + &ud.matmul(&a).matmul(&ud.dagger());
            }
            let want = ComplexMatrix::identity(n * n).scale(tr * n as f64);
            assert!(sum.max_abs_diff(&want) < 1e-11);
        }
    }
}

#[test]
fn bell_elements_from_eigendecomposition() {
    let mut rng = QtlRng::from_seed(41);
    for n in [2, 3] {
        let chi = random_density(&[n, n], &mut rng);
        let m = bell_matrix_elements(chi.matrix(), n).unwrap();
        let d = n * n;
        let mut rebuilt = ComplexMatrix::zeros(d, d);
        for (p, psi) in chi.spectral_components(0.0).unwrap() {
            // A_ij = ψ_(i·n+j); the Bell components are the Weyl coefficients of Aᵀ.
            let at = ComplexMatrix::from_fn(n, n, |i, j| psi[j * n + i]);
            let b = weyl_coefficients(&at).unwrap();
            for x in 0..d {
                for y in 0..d {
                    rebuilt[(x, y)] += b[x] * b[y].conj() * (p * n as f64);
                }
            }
        }
        assert!(m.max_abs_diff(&rebuilt) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weyl_expansion_reconstructs(seed in any::<u64>(), n in 2usize..5) {
        let a = random_matrix(n, n, &mut QtlRng::from_seed(seed));
        let coeffs = weyl_coefficients(&a).unwrap();
        let mut sum = ComplexMatrix::zeros(n, n);
        for (idx, k) in WeylIndex::all(n).zip(&coeffs) {
            sum.add_scaled(&weyl_u(idx), *k);
        }
        prop_assert!(sum.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn twirl_is_invariant_under_fixed_conjugation(seed in any::<u64>()) {
        let mut rng = QtlRng::from_seed(seed);
        let sigma = random_matrix(9, 9, &mut rng);
        let u = haar_unitary(3, &mut rng);
        let uu = u.kron(&u);
        let moved = uu.dagger().matmul(&sigma).matmul(&uu);
        prop_assert!(schur_twirl(&moved).unwrap().max_abs_diff(&schur_twirl(&sigma).unwrap()) < 1e-12);
    }
}
