use gibbs_dnls_core::random_field::{
    ball_tilt, ensemble_stats, sample_ensemble, sample_gaussian, sample_phi, sample_phi_in_ball,
    sample_tilted_phi, tilt_for_mean_mass, Ensemble,
};
use gibbs_dnls_core::spectral::bracket_sq;
use gibbs_dnls_core::stats::{self, mean_estimate};
use gibbs_dnls_core::{SeedSpec, Sequential};

#[test]
fn complex_gaussian_moments() {
    let n = 1_000_000;
    let g = sample_gaussian(SeedSpec::new(1, 0), n);
    let mean = g.iter().sum::<gibbs_dnls_core::Complex64>() / n as f64;
    assert!(mean.norm() <= 3.0 / (n as f64).sqrt(), "{mean}");
    let second = g.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    assert!((second - 1.0).abs() <= 3.0 / (n as f64).sqrt(), "{second}");
    assert_eq!(g, sample_gaussian(SeedSpec::new(1, 0), n));
}

#[test]
fn coefficient_marginals() {
    let count = 100_000;
    let band = 3;
    let draws: Vec<_> = (0..count)
        .map(|i| sample_phi(band, SeedSpec::new(2, i)))
        .collect();
    for n in -3i64..=3 {
        // √2⟨n⟩ Re c_n is standard normal
        let x: Vec<f64> = draws
            .iter()
            .map(|u| (2.0 * bracket_sq(n)).sqrt() * u.get(n).re)
            .collect();
        let var = mean_estimate(&x.iter().map(|v| v * v).collect::<Vec<_>>());
        assert!(
            (var.mean - 1.0).abs() < 3.0 * var.std_error,
            "n={n}: {var:?}"
        );
        let kurt = mean_estimate(&x.iter().map(|v| v.powi(4)).collect::<Vec<_>>());
        assert!(
            (kurt.mean - 3.0).abs() < 5.0 * kurt.std_error,
            "n={n}: {kurt:?}"
        );
    }
    let a: Vec<f64> = draws.iter().map(|u| u.get(1).re).collect();
    let b: Vec<f64> = draws.iter().map(|u| u.get(-1).re).collect();
    let corr = stats::covariance(&a, &b) / (stats::variance(&a) * stats::variance(&b)).sqrt();
    assert!(corr.abs() < 3.0 / (count as f64).sqrt(), "{corr}");
}

#[test]
fn mean_mass_matches_exact_sum() {
    let e = sample_ensemble(4, 50_000, 3, &Sequential).unwrap();
    let est = ensemble_stats(&e, |u| u.l2_norm_squared()).unwrap();
    let exact: f64 = (-4i64..=4).map(|n| 1.0 / bracket_sq(n)).sum();
    assert!(
        (est.mean - exact).abs() < 3.0 * est.std_error,
        "{est:?} vs {exact}"
    );
    let zero = sample_ensemble(0, 100_000, 4, &Sequential).unwrap();
    let est = ensemble_stats(&zero, |u| u.l2_norm_squared()).unwrap();
    assert!((est.mean - 1.0).abs() < 3.0 * est.std_error);
}

#[test]
fn disjoint_streams_are_uncorrelated() {
    let pairs = 10_000;
    let a: Vec<f64> = (0..pairs)
        .map(|i| sample_gaussian(SeedSpec::new(9, i), 1)[0].re)
        .collect();
    let b: Vec<f64> = (0..pairs)
        .map(|i| sample_gaussian(SeedSpec::new(9, i + pairs), 1)[0].re)
        .collect();
    let corr = stats::covariance(&a, &b) / (stats::variance(&a) * stats::variance(&b)).sqrt();
    assert!(corr.abs() < 3.0 / (pairs as f64).sqrt(), "{corr}");
}

#[test]
fn ensemble_reproduces_single_draws() {
    let e = sample_ensemble(5, 3, 42, &Sequential).unwrap();
    assert_eq!(e.samples()[0], sample_phi(5, SeedSpec::new(42, 0)));
    assert_eq!(e.samples()[2], sample_phi(5, SeedSpec::new(42, 2)));
}

#[test]
fn equal_weights_reduce_to_the_plain_mean() {
    let e = sample_ensemble(2, 500, 6, &Sequential).unwrap();
    let plain = ensemble_stats(&e, |u| u.l2_norm()).unwrap();
    let samples = e.samples().to_vec();
    let weighted = Ensemble::new(2, samples, Some(vec![0.5; 500]), 6).unwrap();
    let w = ensemble_stats(&weighted, |u| u.l2_norm()).unwrap();
    assert!((w.mean - plain.mean).abs() <= 1e-15 * plain.mean);
    let zero = Ensemble::new(2, e.samples().to_vec(), Some(vec![0.0; 500]), 6).unwrap();
    assert!(ensemble_stats(&zero, |u| u.l2_norm()).is_err());
}

#[test]
fn tilted_weights_average_to_one() {
    // the weight has finite variance only for tilts below the smallest ⟨n⟩² = 1
    let tilt = tilt_for_mean_mass(6, 2.45);
    assert!(tilt > 0.1 && tilt < 0.4, "{tilt}");
    let w: Vec<f64> = (0..50_000)
        .map(|i| {
            sample_tilted_phi(6, tilt, SeedSpec::new(8, i))
                .log_weight
                .exp()
        })
        .collect();
    let est = mean_estimate(&w);
    assert!((est.mean - 1.0).abs() < 4.0 * est.std_error, "{est:?}");
}

/// The exact ball sampler against plain draws of `φ_N` filtered by mass.
#[test]
fn ball_sampler_matches_naive_rejection() {
    let (band, kappa) = (2, 1.2);
    let naive: Vec<f64> = (0..60_000)
        .map(|i| sample_phi(band, SeedSpec::new(10, i)))
        .filter(|u| u.l2_norm() <= kappa)
        .map(|u| u.l2_norm_squared())
        .collect();
    let tilt = ball_tilt(band, kappa);
    let exact: Vec<f64> = (0..20_000)
        .map(|i| {
            sample_phi_in_ball(band, kappa, tilt, SeedSpec::new(11, i))
                .u
                .l2_norm_squared()
        })
        .collect();
    let (a, b) = (mean_estimate(&naive), mean_estimate(&exact));
    assert!(exact.iter().all(|m| *m <= kappa * kappa));
    assert!(
        (a.mean - b.mean).abs() < 4.0 * a.std_error.hypot(b.std_error),
        "{a:?} vs {b:?}"
    );
}
