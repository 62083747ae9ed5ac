use std::sync::Arc;

use dunkl_pauli::angular::{lambda_eigenvalue, sigma_index, AngularIndex, Sign};
use dunkl_pauli::dunkl::{dunkl_angular_apply, dunkl_inner_product, reflect, DeformationParams};
use dunkl_pauli::invariant::Sl2Coefficients;
use dunkl_pauli::special::{jacobi, laguerre};
use dunkl_pauli::{Axis, GridFunction, ThetaGrid};
use num_complex::Complex64;
use proptest::prelude::*;

fn nu() -> impl Strategy<Value = f64> {
    -0.45f64..2.0
}

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

proptest! {
    #[test]
    fn jacobi_reflection_symmetry(l in 0u32..12, a in nu(), b in nu(), x in -1.0f64..1.0) {
        let lhs = jacobi(l, a, b, -x).unwrap();
        let rhs = if l % 2 == 0 { 1.0 } else { -1.0 } * jacobi(l, b, a, x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn laguerre_three_term_recurrence(n in 1u32..15, s in 0.0f64..6.0, x in 0.0f64..20.0) {
        let (lp, l0, lm) = (laguerre(n + 1, s, x).unwrap(), laguerre(n, s, x).unwrap(), laguerre(n - 1, s, x).unwrap());
        let k = n as f64;
        let lhs = (k + 1.0) * lp;
        let rhs = (2.0 * k + 1.0 + s - x) * l0 - (k + s) * lm;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs() + rhs.abs()));
    }

    #[test]
    fn sigma_is_the_same_in_both_sectors(l in 1u32..8, a in nu(), b in nu(), eps in sign(), branch in sign()) {
        let p = DeformationParams::new(a, b).unwrap();
        let idx = AngularIndex::nth(eps, l - 1);
        let lambda = lambda_eigenvalue(eps, idx, &p, branch).unwrap();
        let sigma = sigma_index(lambda, &p, eps);
        prop_assert!((sigma - (2.0 * idx.value() + a + b)).abs() < 1e-12 * (1.0 + sigma));
    }

    #[test]
    fn wrong_ladder_parity_is_rejected(twice in 1u32..20, eps in sign()) {
        let idx = AngularIndex::from_twice(twice).unwrap();
        let integer = twice % 2 == 0;
        prop_assert_eq!(idx.check_ladder(eps).is_ok(), integer == (eps == Sign::Plus));
    }

    #[test]
    fn sl2_identity_holds_for_any_auxiliary_state(m in 0.1f64..10.0, rho in 0.05f64..20.0, rho_dot in -10.0f64..10.0) {
        let c = Sl2Coefficients::from_auxiliary(m, rho, rho_dot).unwrap();
        prop_assert!(c.identity_defect().abs() <= 1e-12 * (1.0 + c.alpha * c.beta));
    }

    #[test]
    fn reflections_are_involutions_that_commute(coeffs in prop::collection::vec(-1.0f64..1.0, 6)) {
        let grid = Arc::new(ThetaGrid::new(32).unwrap());
        let f = GridFunction::<ThetaGrid>::from_fn(grid, |t| {
            coeffs.iter().enumerate().map(|(j, c)| Complex64::new(c * (j as f64 * t).cos(), c * ((j + 1) as f64 * t).sin())).sum()
        });
        let r1 = reflect(&f, Axis::First).unwrap();
        let back = reflect(&r1, Axis::First).unwrap();
        prop_assert_eq!(back.values(), f.values());
        let a = reflect(&r1, Axis::Second).unwrap();
        let b = reflect(&reflect(&f, Axis::Second).unwrap(), Axis::First).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn angular_operator_is_symmetric(a in 0.0f64..1.5, b in 0.0f64..1.5, c in prop::collection::vec(-1.0f64..1.0, 8)) {
        let p = DeformationParams::new(a, b).unwrap();
        let grid = Arc::new(ThetaGrid::new(64).unwrap());
        let mk = |off: usize| GridFunction::<ThetaGrid>::from_fn(grid.clone(), |t| {
            (0..4).map(|j| Complex64::new(c[off + j] * (j as f64 * t).cos(), c[(off + j + 1) % 8] * ((j + 1) as f64 * t).sin())).sum()
        });
        let (f, g) = (mk(0), mk(4));
        let lhs = dunkl_inner_product(&f, &dunkl_angular_apply(&g, &p), &p).unwrap();
        let rhs = dunkl_inner_product(&dunkl_angular_apply(&f, &p), &g, &p).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + lhs.norm()));
    }

    #[test]
    fn deformation_parameters_reject_the_boundary(v in -5.0f64..=-0.5) {
        prop_assert!(DeformationParams::new(v, 0.0).is_err());
        prop_assert!(DeformationParams::new(0.0, v).is_err());
    }
}
