use gibbs_dnls_core::chaos_stats::{
    cauchy_rate, chaos_ratio, f_decompose, f_gap_second_chaos_norm, hermite_p, x_gap_norm_oracle,
    ChaosTable, RateMode,
};
use gibbs_dnls_core::functionals::f_quartic;
use gibbs_dnls_core::random_field::sample_phi;
use gibbs_dnls_core::spectral::bracket_sq;
use gibbs_dnls_core::stats;
use gibbs_dnls_core::{Complex64, SeedSpec, Sequential};

/// `∫ P_m P_n e^{-x²} dx` by the trapezoidal rule with 40 nodes on
/// `[-8, 8]`, against `√π 2ⁿ n! δ_{mn}`.
#[test]
fn hermite_orthogonality_under_gaussian_weight() {
    let nodes = 40;
    let h = 16.0 / (nodes - 1) as f64;
    for m in 0..=6 {
        for n in 0..=6 {
            let mut s = 0.0;
            for j in 0..nodes {
                let x = -8.0 + h * j as f64;
                let w = if j == 0 || j == nodes - 1 { 0.5 } else { 1.0 };
                s += w * hermite_p(m, x).unwrap() * hermite_p(n, x).unwrap() * (-x * x).exp();
            }
            s *= h;
            let factorial: f64 = (1..=n).map(|k| k as f64).product();
            let expected = if m == n {
                std::f64::consts::PI.sqrt() * 2f64.powi(n as i32) * factorial
            } else {
                0.0
            };
            assert!(
                (s - expected).abs() < 1e-9 * (1.0 + expected),
                "m={m} n={n}: {s} vs {expected}"
            );
        }
    }
}

#[test]
fn chaos_spot_values() {
    let one = vec![Complex64::new(1.0, 0.0)];
    let cases = [(1, 2f64.powf(0.25)), (2, 6f64.powf(0.25))];
    for (order, exact) in cases {
        let t = ChaosTable::new(order, 1, one.clone()).unwrap();
        let r = chaos_ratio(&t, 4.0, 200_000, 77, &Sequential).unwrap();
        assert!(
            (r.ratio - exact).abs() < 3.0 * r.std_error,
            "order {order}: {r:?} vs {exact}"
        );
        assert!(r.ratio <= r.bound);
    }
}

#[test]
fn decomposition_on_fifty_draws() {
    for i in 0..50 {
        let seed = SeedSpec::new(12, i);
        let d = f_decompose(12, seed);
        let f = f_quartic(&sample_phi(12, seed), 12);
        let total = d.s1 + d.s2;
        assert!((total.im - f).abs() <= 1e-9 * f.abs().max(1.0), "draw {i}");
        assert_eq!(d.y3, Complex64::new(0.0, 0.0));
        assert_eq!(d.x_printed, d.x * 2.0);
        assert!((d.s1 - (d.x + d.y1 + d.y2 + d.y3)).norm() <= 1e-10 * d.s1.norm().max(1.0));
    }
}

/// The second-chaos part of `f_M - f_N` is `Σ_b α_b (|g_b|² - 1)` with
/// `α_b = 4b⟨b⟩⁻²(C_M 1_{|b|<=M} - C_N 1_{|b|<=N})`; each `α_b` is the
/// covariance of `f_M - f_N` with `|g_b|²`.
#[test]
fn second_chaos_coefficients_match_covariances() {
    let (n, m) = (2usize, 4usize);
    let count = 100_000;
    let c = |k: i64| -> f64 { (-k..=k).map(|a| 1.0 / bracket_sq(a)).sum() };
    let draws: Vec<_> = (0..count)
        .map(|i| sample_phi(m, SeedSpec::new(5, i)))
        .collect();
    let gaps: Vec<f64> = draws
        .iter()
        .map(|u| f_quartic(u, m) - f_quartic(u, n))
        .collect();
    let mut alpha_sq = 0.0;
    for b in -(m as i64)..=(m as i64) {
        let prod: Vec<f64> = draws
            .iter()
            .zip(&gaps)
            .map(|(u, d)| d * (u.get(b).norm_sqr() * bracket_sq(b) - 1.0))
            .collect();
        let est = stats::mean_estimate(&prod);
        let inner = if b.unsigned_abs() as usize <= n {
            c(n as i64)
        } else {
            0.0
        };
        let alpha = 4.0 * b as f64 / bracket_sq(b) * (c(m as i64) - inner);
        assert!(
            (est.mean - alpha).abs() < 4.0 * est.std_error,
            "b={b}: {est:?} vs {alpha}"
        );
        alpha_sq += alpha * alpha;
    }
    assert!((alpha_sq.sqrt() - f_gap_second_chaos_norm(m, n)).abs() < 1e-12);
}

#[test]
fn full_gap_is_bounded_below_by_its_second_chaos() {
    let bands = [4, 8, 16];
    let fit = cauchy_rate(&bands, 400, 3, RateMode::FFull, &Sequential).unwrap();
    for (j, &b) in bands.iter().enumerate() {
        let floor = f_gap_second_chaos_norm(2 * b, b);
        assert!(
            fit.values[j] >= floor - 3.0 * fit.std_errors[j],
            "N={b}: {} < {floor}",
            fit.values[j]
        );
    }
    let floors: Vec<f64> = [64usize, 128, 256]
        .iter()
        .map(|&b| f_gap_second_chaos_norm(2 * b, b))
        .collect();
    let slope = (floors[2] / floors[0]).ln() / 4f64.ln();
    assert!((slope + 0.5).abs() < 0.05, "second chaos slope {slope}");
}

#[test]
fn diagonal_gap_matches_its_exact_norm() {
    let bands = [2, 4, 8];
    let fit = cauchy_rate(&bands, 20_000, 8, RateMode::XOnly, &Sequential).unwrap();
    for (j, &b) in bands.iter().enumerate() {
        let exact = x_gap_norm_oracle(b);
        assert!(
            (fit.values[j] - exact).abs() < 4.0 * fit.std_errors[j],
            "N={b}: {} vs {exact}",
            fit.values[j]
        );
    }
}
