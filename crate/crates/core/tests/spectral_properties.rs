use gibbs_dnls_core::spectral::bracket;
use gibbs_dnls_core::{Complex64, FourierCoeffs, LpExponent, QuadratureGrid};
use proptest::prelude::*;

fn coeffs(max_band: usize) -> impl Strategy<Value = FourierCoeffs> {
    (0..=max_band).prop_flat_map(|band| {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 2 * band + 1).prop_map(move |v| {
            FourierCoeffs::new(
                band,
                v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect(),
            )
            .unwrap()
        })
    })
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #[test]
    fn projection_is_idempotent_and_self_adjoint(f in coeffs(8), g in coeffs(8), m in 0usize..10) {
        let p = f.project(m);
        prop_assert_eq!(p.project(m), p.clone());
        prop_assert_eq!(&p + &f.project_complement(m), f.clone());
        prop_assert!(close(p.inner_product(&g), f.inner_product(&g.project(m)), 1e-12));
    }

    #[test]
    fn antiderivative_inverts_derivative_on_zero_mean(u in coeffs(8)) {
        // n·c/n and (c/n)·n are within one rounding of c
        let ulp = 2.0 * f64::EPSILON * u.max_abs();
        prop_assert!(u.derivative().antiderivative().max_abs_diff(&u.zero_mean()) <= ulp);
        prop_assert!(u.antiderivative().derivative().max_abs_diff(&u.zero_mean()) <= ulp);
        prop_assert_eq!(u.derivative().antiderivative().get(0), Complex64::new(0.0, 0.0));
        prop_assert_eq!(u.zero_mean().zero_mean(), u.zero_mean());
    }

    #[test]
    fn antiderivative_is_skew_for_the_bilinear_pairing(f in coeffs(6), g in coeffs(6)) {
        let (f, g) = (f.zero_mean(), g.zero_mean());
        let lhs = f.antiderivative().pairing(&g);
        let rhs = -f.pairing(&g.antiderivative());
        prop_assert!(close(lhs, rhs, 1e-13));
    }

    #[test]
    fn product_is_commutative_and_matches_grid_product(u in coeffs(6), v in coeffs(6)) {
        let uv = u.multiply(&v);
        prop_assert_eq!(uv.band(), u.band() + v.band());
        prop_assert!(uv.max_abs_diff(&v.multiply(&u)) <= 1e-13 * (1.0 + uv.max_abs()));
        let band = u.band() + v.band();
        let grid = QuadratureGrid::exact_for_degree(2 * band);
        let pointwise: Vec<Complex64> = grid.evaluate(&u).iter().zip(grid.evaluate(&v)).map(|(a, b)| a * b).collect();
        let back = grid.analyze(&pointwise, band).unwrap();
        prop_assert!(back.max_abs_diff(&uv) <= 1e-12 * (1.0 + uv.max_abs()));
    }

    #[test]
    fn conjugation_is_an_involution(u in coeffs(8)) {
        prop_assert_eq!(u.conjugate().conjugate(), u.clone());
        for (n, c) in u.conjugate().modes() {
            prop_assert_eq!(c, u.get(-n).conj());
        }
    }

    #[test]
    fn l2_norm_on_grid_is_parseval(u in coeffs(8)) {
        let grid = QuadratureGrid::exact_for_degree(2 * u.band());
        let l2 = u.lp_norm(LpExponent::Finite(2.0), &grid).unwrap();
        prop_assert!((l2 - u.l2_norm()).abs() <= 1e-12 * u.l2_norm().max(1e-300));
        prop_assert!((u.sobolev_norm(0.0) - u.l2_norm()).abs() <= 1e-14 * (1.0 + u.l2_norm()));
    }

    #[test]
    fn sobolev_weights(u in coeffs(5), sigma in -1.0f64..1.0) {
        let direct: f64 = u.modes().map(|(n, c)| bracket(n).powf(2.0 * sigma) * c.norm_sqr()).sum();
        prop_assert!((u.sobolev_norm(sigma) - direct.sqrt()).abs() <= 1e-12 * (1.0 + direct.sqrt()));
    }

    #[test]
    fn sums_use_the_union_band(u in coeffs(5), v in coeffs(5)) {
        let s = &u + &v;
        prop_assert_eq!(s.band(), u.band().max(v.band()));
        prop_assert!((&s - &v).max_abs_diff(&u.with_band(s.band())) <= 4.0 * f64::EPSILON * (1.0 + s.max_abs()));
        prop_assert_eq!(&u + &FourierCoeffs::zeros(7), u.with_band(7));
    }
}

#[test]
fn quadrature_exactness_on_the_torus() {
    for m in [1usize, 2, 7, 16] {
        let grid = QuadratureGrid::new(m).unwrap();
        for k in 0..m as i64 {
            let e = FourierCoeffs::mode(k, Complex64::new(1.0, 0.0));
            let v = grid.integrate(&grid.evaluate(&e));
            let expected = if k == 0 { 1.0 } else { 0.0 };
            assert!(
                (v - Complex64::new(expected, 0.0)).norm() < 1e-14,
                "M={m} k={k}: {v}"
            );
        }
    }
    assert!(QuadratureGrid::new(0).is_err());
}

#[test]
fn hand_examples() {
    let one = Complex64::new(1.0, 0.0);
    let u = FourierCoeffs::constant(one) + FourierCoeffs::mode(1, one);
    let sq = u.multiply(&u);
    assert_eq!(sq.get(0), one);
    assert_eq!(sq.get(1), 2.0 * one);
    assert_eq!(sq.get(2), one);
    let grid = QuadratureGrid::exact_for_degree(4);
    let l4 = u.lp_norm(LpExponent::Finite(4.0), &grid).unwrap();
    assert!((l4.powi(4) - 6.0).abs() < 1e-13);
    assert!((u.inner_product(&u).re - 2.0).abs() < 1e-15);
    let e1 = FourierCoeffs::mode(1, one);
    assert!((e1.sobolev_norm(0.5) - 2f64.powf(0.25)).abs() < 1e-15);
    assert_eq!(
        FourierCoeffs::mode(2, Complex64::new(4.0, 0.0))
            .antiderivative()
            .get(2),
        Complex64::new(0.0, -2.0)
    );
    assert!(FourierCoeffs::constant(one)
        .lp_norm(LpExponent::Finite(0.5), &grid)
        .is_err());
}
