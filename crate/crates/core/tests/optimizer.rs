mod common;

use common::{c, isotropic, schmidt_state};
use proptest::prelude::*;
use qtl_core::matrix::exp_skew_hermitian;
use qtl_core::metrics::f1_objective;
use qtl_core::optimizer::{
    grad_check, maximize, maximize_from, riemannian_grad, Objective, OptimizerConfig, QuadraticObjective,
    ScaledObjective,
};
use qtl_core::random::{haar_unitary, random_density, random_matrix};
use qtl_core::{ComplexMatrix, Error, QtlRng, C64};

struct Constant(usize, f64);

impl Objective for Constant {
    fn dim(&self) -> usize {
        self.0
    }
    fn value(&self, _u: &ComplexMatrix) -> C64 {
        c(self.1, 0.0)
    }
    fn euclidean_gradient(&self, _u: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::zeros(self.0, self.0)
    }
}

/// `Re tr(AU)`; `Γ = A†/2`.
struct LinearTrace(ComplexMatrix);

impl Objective for LinearTrace {
    fn dim(&self) -> usize {
        self.0.rows()
    }
    fn value(&self, u: &ComplexMatrix) -> C64 {
        c(self.0.matmul(u).trace().re, 0.0)
    }
    fn euclidean_gradient(&self, _u: &ComplexMatrix) -> ComplexMatrix {
        self.0.dagger().scale_real(0.5)
    }
}

/// `Re tr(U†AUB)`; `Γ = (AUB + A†UB†)/2`.
struct Sandwich(ComplexMatrix, ComplexMatrix);

impl Objective for Sandwich {
    fn dim(&self) -> usize {
        self.0.rows()
    }
    fn value(&self, u: &ComplexMatrix) -> C64 {
        c(u.dagger().matmul(&self.0).matmul(u).matmul(&self.1).trace().re, 0.0)
    }
    fn euclidean_gradient(&self, u: &ComplexMatrix) -> ComplexMatrix {
        let a = self.0.matmul(u).matmul(&self.1);
        let b = self.0.dagger().matmul(u).matmul(&self.1.dagger());
        (&a + &b).scale_real(0.5)
    }
}

/// Deliberately complex-valued.
struct Complex(usize);

impl Objective for Complex {
    fn dim(&self) -> usize {
        self.0
    }
    fn value(&self, u: &ComplexMatrix) -> C64 {
        u.trace() + c(0.0, 1e-6)
    }
    fn euclidean_gradient(&self, _u: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::identity(self.0).scale_real(0.5)
    }
}

fn hermitian(d: usize, rng: &mut QtlRng) -> ComplexMatrix {
    random_matrix(d, d, rng).hermitian_part()
}

fn small_config(restarts: usize) -> OptimizerConfig {
    OptimizerConfig {
        restarts,
        ..Default::default()
    }
}

#[test]
fn gradient_of_constant_is_zero() {
    let mut rng = QtlRng::from_seed(1);
    let u = haar_unitary(3, &mut rng);
    let g = riemannian_grad(&Constant(3, 2.5), &u).unwrap();
    assert_eq!(g, ComplexMatrix::zeros(3, 3));
}

#[test]
fn gradient_rejects_non_unitary_points() {
    let u = ComplexMatrix::identity(2).scale_real(1.001);
    let err = riemannian_grad(&Constant(2, 0.0), &u).unwrap_err();
    assert!(matches!(err, Error::Validation { field: "unitarity", .. }));
}

#[test]
fn directional_derivative_along_gradient_is_squared_norm() {
    let mut rng = QtlRng::from_seed(2);
    let chi = random_density(&[2, 2], &mut rng);
    let obj = f1_objective(&chi).unwrap();
    for _ in 0..10 {
        let u = haar_unitary(2, &mut rng);
        let g = riemannian_grad(&obj, &u).unwrap();
        assert!((&g + &g.dagger()).max_abs_diff(&ComplexMatrix::zeros(2, 2)) < 1e-12);
        let eps = 1e-6;
        let moved = exp_skew_hermitian(&g.scale_real(eps)).unwrap().matmul(&u);
        let fd = (obj.value(&moved).re - obj.value(&u).re) / eps;
        let g2 = g.frobenius_norm().powi(2);
        assert!(((fd - g2) / g2).abs() < 1e-4, "fd {} vs ‖G‖² {}", fd, g2);
    }
}

#[test]
fn trace_objective_is_maximized_at_identity() {
    let obj = LinearTrace(ComplexMatrix::identity(2).scale_real(0.5));
    let r = maximize(&obj, &OptimizerConfig::default()).unwrap();
    assert!((r.best_value - 1.0).abs() < 1e-8);
    assert!(r.maximizer.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-8);
    assert!(r.converged);
}

#[test]
fn f1_of_isotropic_state() {
    let chi = isotropic(2, 0.5);
    let r = maximize(&f1_objective(&chi).unwrap(), &OptimizerConfig::default()).unwrap();
    assert!((r.best_value - 0.625).abs() < 1e-6);
}

#[test]
fn f1_of_pure_resource() {
    let mut rng = QtlRng::from_seed(3);
    let chi = schmidt_state(&[0.9, 0.1], &mut rng);
    let want = (0.9f64.sqrt() + 0.1f64.sqrt()).powi(2) / 2.0;
    assert!((want - 0.8).abs() < 1e-12);
    let r = maximize(&f1_objective(&chi).unwrap(), &OptimizerConfig::default()).unwrap();
    assert!((r.best_value - want).abs() < 1e-6);
}

#[test]
fn trace_inequality_optimum() {
    // max_U Re tr(P U S U†) = Σ p↓_i s↓_i
    let mut rng = QtlRng::from_seed(4);
    for d in [2, 4, 6] {
        let p = hermitian(d, &mut rng);
        let s = hermitian(d, &mut rng);
        let (ep, _) = p.eigh().unwrap();
        let (es, _) = s.eigh().unwrap();
        let want: f64 = ep.iter().zip(&es).map(|(a, b)| a * b).sum();
        let obj = QuadraticObjective::new(&p, &s, &[d], &[0]).unwrap();
        let r = maximize(&obj, &OptimizerConfig::default()).unwrap();
        assert!((r.best_value - want).abs() < 1e-6, "d={} got {} want {}", d, r.best_value, want);
    }
}

#[test]
fn gradient_checks() {
    let mut rng = QtlRng::from_seed(5);
    let chi = random_density(&[2, 2], &mut rng);
    assert!(grad_check(&f1_objective(&chi).unwrap(), 20, 7).unwrap() < 1e-5);
    let a = hermitian(3, &mut rng);
    let b = hermitian(3, &mut rng);
    assert!(grad_check(&Sandwich(a, b), 20, 8).unwrap() < 1e-5);
    let a = random_matrix(3, 3, &mut rng);
    let b = random_matrix(3, 3, &mut rng);
    assert!(grad_check(&Sandwich(a, b), 20, 9).unwrap() < 1e-5);
    assert!(grad_check(&LinearTrace(random_matrix(4, 4, &mut rng)), 20, 10).unwrap() < 1e-5);
    let p = hermitian(6, &mut rng);
    let s = hermitian(6, &mut rng);
    let q = QuadraticObjective::new(&p, &s, &[2, 3], &[1]).unwrap();
    assert!(grad_check(&q, 20, 11).unwrap() < 1e-5);
    assert_eq!(grad_check(&Constant(3, 1.0), 5, 12).unwrap(), 0.0);
    assert!(grad_check(&Constant(3, 1.0), 0, 12).is_err());
}

#[test]
fn runs_are_monotone_unitary_and_consistent() {
    let mut rng = QtlRng::from_seed(6);
    let p = hermitian(4, &mut rng);
    let s = hermitian(4, &mut rng);
    let obj = QuadraticObjective::new(&p, &s, &[2, 2], &[0, 1]).unwrap();
    let r = maximize(&obj, &small_config(5)).unwrap();
    assert_eq!(r.traces.len(), 5);
    for t in &r.traces {
        for w in t.points.windows(2) {
            assert!(w[1].value >= w[0].value, "restart {} decreased", t.restart);
            assert!(w[1].iteration == w[0].iteration + 1);
        }
    }
    assert!(r.maximizer.unitarity_residual() < 1e-8);
    assert!((obj.value(&r.maximizer).re - r.best_value).abs() < 1e-10);
    let best_trace = &r.traces[r.best_restart];
    assert_eq!(best_trace.points.last().unwrap().iteration, r.iterations);
}

#[test]
fn identical_seeds_give_identical_traces() {
    let mut rng = QtlRng::from_seed(7);
    let chi = random_density(&[2, 2], &mut rng);
    let obj = f1_objective(&chi).unwrap();
    let a = maximize(&obj, &small_config(6)).unwrap();
    let b = maximize(&obj, &small_config(6)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn positive_rescaling_keeps_the_maximizer() {
    let mut rng = QtlRng::from_seed(8);
    let chi = random_density(&[2, 2], &mut rng);
    let obj = f1_objective(&chi).unwrap();
    let r = maximize(&obj, &OptimizerConfig::default()).unwrap();
    let scaled = ScaledObjective {
        inner: &obj,
        factor: 3.0,
    };
    let rs = maximize(&scaled, &OptimizerConfig::default()).unwrap();
    assert!((rs.best_value - 3.0 * r.best_value).abs() < 1e-8);
    assert!((obj.value(&rs.maximizer).re - r.best_value).abs() < 1e-8);
}

#[test]
fn warm_starts_are_run() {
    let mut rng = QtlRng::from_seed(9);
    let p = hermitian(3, &mut rng);
    let s = hermitian(3, &mut rng);
    let obj = QuadraticObjective::new(&p, &s, &[3], &[0]).unwrap();
    let start = haar_unitary(3, &mut rng);
    let cfg = OptimizerConfig {
        restarts: 1,
        max_iters: 0,
        ..Default::default()
    };
    let r = maximize_from(&obj, &cfg, std::slice::from_ref(&start)).unwrap();
    assert_eq!(r.traces.len(), 2);
    assert_eq!(r.traces[1].points[0].value, obj.value(&start).re);
    assert!(maximize_from(&obj, &cfg, &[ComplexMatrix::identity(2)]).is_err());
    assert!(maximize_from(&obj, &cfg, &[ComplexMatrix::identity(3).scale_real(2.0)]).is_err());
}

#[test]
fn non_real_objective_is_an_error() {
    let err = maximize(&Complex(2), &small_config(1)).unwrap_err();
    assert!(matches!(err, Error::NonRealObjective(_)));
}

#[test]
fn config_validation() {
    let obj = Constant(2, 0.0);
    for cfg in [
        OptimizerConfig {
            grad_tol: 0.0,
            ..Default::default()
        },
        OptimizerConfig {
            armijo_shrink: 0.0,
            ..Default::default()
        },
        OptimizerConfig {
            armijo_c: -1.0,
            ..Default::default()
        },
        OptimizerConfig {
            restarts: 0,
            ..Default::default()
        },
        OptimizerConfig {
            initial_step: f64::NAN,
            ..Default::default()
        },
    ] {
        assert!(matches!(maximize(&obj, &cfg), Err(Error::InvalidArgument(_))));
    }
    assert!(maximize(&Constant(0, 0.0), &OptimizerConfig::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn riemannian_gradient_is_skew_hermitian(seed in any::<u64>(), d in 1usize..5) {
        let mut rng = QtlRng::from_seed(seed);
        let p = hermitian(d, &mut rng);
        let s = hermitian(d, &mut rng);
        let obj = QuadraticObjective::new(&p, &s, &[d], &[0]).unwrap();
        let u = haar_unitary(d, &mut rng);
        let g = riemannian_grad(&obj, &u).unwrap();
        prop_assert!((&g + &g.dagger()).max_abs_diff(&ComplexMatrix::zeros(d, d)) < 1e-12);
    }

    #[test]
    fn quadratic_gradient_passes_finite_differences(seed in any::<u64>(), split in 0usize..3) {
        let mut rng = QtlRng::from_seed(seed);
        let dims = [2, 3, 2];
        let slots: &[usize] = [&[0usize][..], &[2, 1][..], &[0, 2][..]][split];
        let p = hermitian(12, &mut rng);
        let s = hermitian(12, &mut rng);
        let obj = QuadraticObjective::new(&p, &s, &dims, slots).unwrap();
        prop_assert!(grad_check(&obj, 3, seed).unwrap() < 1e-5);
    }
}
