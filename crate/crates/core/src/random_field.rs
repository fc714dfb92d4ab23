//! Deterministic sampling of the Gaussian fields
//! `φ_N(x) = Σ_{|n|<=N} g_n / ⟨n⟩ e^{inx}` and ensemble bookkeeping.
//!
//! Every draw is addressed by a [`SeedSpec`]: `(master_seed, stream_index)`
//! selects an independent ChaCha20 stream (key from `seed_from_u64`, 64-bit
//! stream id = `stream_index`). Normals come from the Box–Muller transform,
//! one uniform pair per complex Gaussian, so a sample never depends on which
//! thread produced it or in what order.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::spectral::{bracket, bracket_sq, FourierCoeffs};
use crate::stats::{self, Estimate};

/// Recorded in run manifests; changing the generator or the normal transform
/// changes every sample.
pub const GENERATOR_NAME: &str = "chacha20(seed_from_u64, stream=stream_index)+box-muller";

/// Number of bootstrap resamples for weighted estimators.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

pub(crate) const BOOTSTRAP_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }
}

/// A reproducible stream of uniforms and normals.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha20Rng,
}

impl GaussianStream {
    pub fn new(seed: SeedSpec) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed.master_seed);
        rng.set_stream(seed.stream_index);
        Self { rng }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Two independent standard real normals (Box–Muller).
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        (r * libm::cos(theta), r * libm::sin(theta))
    }

    /// `g = (h + i l) / √2` with `h, l` independent standard normals.
    pub fn complex_normal(&mut self) -> Complex64 {
        let (h, l) = self.normal_pair();
        Complex64::new(h, l) * core::f64::consts::FRAC_1_SQRT_2
    }
}

/// `count` independent complex standard Gaussians (`E g = 0`, `E|g|² = 1`).
pub fn sample_gaussian(seed: SeedSpec, count: usize) -> Vec<Complex64> {
    let mut s = GaussianStream::new(seed);
    (0..count).map(|_| s.complex_normal()).collect()
}

/// `φ_N` for one seed; Gaussians are consumed in the order `n = -N..=N`.
pub fn sample_phi(band: usize, seed: SeedSpec) -> FourierCoeffs {
    let mut s = GaussianStream::new(seed);
    FourierCoeffs::from_fn(band, |n| s.complex_normal() / bracket(n))
}

/// A draw from the exponentially tilted law with density proportional to
/// `e^{-β‖u‖²} dμ_N`, together with `log(dμ_N / dq)` at the draw.
#[derive(Debug, Clone)]
pub struct TiltedSample {
    pub u: FourierCoeffs,
    pub log_weight: f64,
}

/// Samples `c_n = g_n / sqrt(⟨n⟩² + β)`. With `tilt = 0` this is exactly
/// [`sample_phi`] with zero log-weight.
pub fn sample_tilted_phi(band: usize, tilt: f64, seed: SeedSpec) -> TiltedSample {
    let mut s = GaussianStream::new(seed);
    let mut log_norm = 0.0;
    let u = FourierCoeffs::from_fn(band, |n| {
        let a = bracket_sq(n);
        log_norm += libm::log(a / (a + tilt));
        s.complex_normal() / libm::sqrt(a + tilt)
    });
    let log_weight = log_norm + tilt * u.l2_norm_squared();
    TiltedSample { u, log_weight }
}

/// The tilt `β >= 0` whose tilted law has `E‖u_N‖² = target`, found by
/// bisection on `Σ 1/(⟨n⟩² + β)`. Returns 0 when the untilted mean is already
/// at or below the target.
pub fn tilt_for_mean_mass(band: usize, target: f64) -> f64 {
    let b = band as i64;
    let mean_at = |beta: f64| -> f64 { (-b..=b).map(|n| 1.0 / (bracket_sq(n) + beta)).sum() };
    if mean_at(0.0) <= target {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while mean_at(hi) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_at(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// An exact draw of `φ_N` conditioned on `‖φ_N‖_{L²} <= κ`.
#[derive(Debug, Clone)]
pub struct BallSample {
    pub u: FourierCoeffs,
    pub attempts: u64,
}

/// Tilt used by [`sample_phi_in_ball`]: tilted mean mass at 95% of `κ²`.
pub fn ball_tilt(band: usize, kappa: f64) -> f64 {
    tilt_for_mean_mass(band, 0.95 * kappa * kappa)
}

/// Rejection sampling of `μ_N( · | ‖u‖ <= κ)` from the tilted proposal: a
/// proposal with mass `m <= κ²` is accepted with probability
/// `e^{β(m - κ²)}`, which is the normalized density ratio. All draws,
/// including the acceptance uniforms, come from the one stream of `seed`.
pub fn sample_phi_in_ball(band: usize, kappa: f64, tilt: f64, seed: SeedSpec) -> BallSample {
    let mut s = GaussianStream::new(seed);
    let k2 = kappa * kappa;
    let scales: Vec<f64> = {
        let b = band as i64;
        (-b..=b)
            .map(|n| 1.0 / libm::sqrt(bracket_sq(n) + tilt))
            .collect()
    };
    let mut attempts = 0u64;
    loop {
        attempts += 1;
        let coeffs: Vec<Complex64> = scales.iter().map(|sc| s.complex_normal() * *sc).collect();
        let m: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        let accept_u = s.uniform();
        if m <= k2 && accept_u < libm::exp(tilt * (m - k2)) {
            let u = FourierCoeffs::new(band, coeffs).expect("finite draw");
            return BallSample { u, attempts };
        }
    }
}

/// A Monte Carlo stand-in for `μ_N` or, with weights, for `ρ_N`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    band: usize,
    samples: Vec<FourierCoeffs>,
    weights: Option<Vec<f64>>,
    master_seed: u64,
}

impl Ensemble {
    pub fn new(
        band: usize,
        samples: Vec<FourierCoeffs>,
        weights: Option<Vec<f64>>,
        master_seed: u64,
    ) -> Result<Self> {
        if samples.iter().any(|s| s.band() != band) {
            return Err(invalid(
                "samples",
                "all samples must share the ensemble band",
            ));
        }
        if let Some(w) = &weights {
            if w.len() != samples.len() {
                return Err(invalid("weights", "one weight per sample is required"));
            }
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(invalid(
                    "weights",
                    "weights must be finite and non-negative",
                ));
            }
        }
        Ok(Self {
            band,
            samples,
            weights,
            master_seed,
        })
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn samples(&self) -> &[FourierCoeffs] {
        &self.samples
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Attaches importance weights, replacing any existing ones.
    pub fn with_weights(self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.band, self.samples, Some(weights), self.master_seed)
    }
}

/// Sample `i` uses stream index `i`.
pub fn sample_ensemble<E: Executor>(
    band: usize,
    count: usize,
    master_seed: u64,
    exec: &E,
) -> Result<Ensemble> {
    if count == 0 {
        return Err(invalid("count", "ensemble needs at least one sample"));
    }
    let samples = exec.map_indices(count, |i| {
        sample_phi(band, SeedSpec::new(master_seed, i as u64))
    });
    Ensemble::new(band, samples, None, master_seed)
}

/// Mean of `observable` over the ensemble with its standard error.
///
/// Unweighted ensembles use the sample mean and `s/√n`. Weighted ensembles
/// use the self-normalized estimator `Σ w h / Σ w` with a bootstrap standard
/// error over [`BOOTSTRAP_RESAMPLES`] resamples seeded from the ensemble's
/// master seed. Equal weights reduce to the unweighted estimator.
pub fn ensemble_stats(
    e: &Ensemble,
    observable: impl Fn(&FourierCoeffs) -> f64,
) -> Result<Estimate> {
    if e.is_empty() {
        return Err(invalid("ensemble", "empty ensemble"));
    }
    let values: Vec<f64> = e.samples.iter().map(&observable).collect();
    match &e.weights {
        None => Ok(stats::mean_estimate(&values)),
        Some(w) => weighted_mean_bootstrap(&values, w, e.master_seed),
    }
}

/// Self-normalized weighted mean with bootstrap standard error.
pub fn weighted_mean_bootstrap(
    values: &[f64],
    weights: &[f64],
    master_seed: u64,
) -> Result<Estimate> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateWeights);
    }
    if weights.iter().all(|w| *w == weights[0]) {
        return Ok(stats::mean_estimate(values));
    }
    let mean = weighted_mean(values, weights).expect("positive total");
    let n = values.len();
    let mut rng = GaussianStream::new(SeedSpec::new(master_seed, BOOTSTRAP_STREAM));
    let mut boots = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let mut num = 0.0;
        let mut den = 0.0;
        for _ in 0..n {
            let k = ((rng.uniform() * n as f64) as usize).min(n - 1);
            num += weights[k] * values[k];
            den += weights[k];
        }
        if den > 0.0 {
            boots.push(num / den);
        }
    }
    let std_error = libm::sqrt(stats::variance(&boots));
    Ok(Estimate { mean, std_error })
}

pub fn weighted_mean(values: &[f64], weights: &[f64]) -> Option<f64> {
    let den: f64 = weights.iter().sum();
    if !(den > 0.0) {
        return None;
    }
    let num: f64 = values.iter().zip(weights).map(|(v, w)| v * w).sum();
    Some(num / den)
}

/// Kish effective sample size `(Σw)² / Σw²`.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    let s: f64 = weights.iter().sum();
    let s2: f64 = weights.iter().map(|w| w * w).sum();
    if s2 == 0.0 {
        0.0
    } else {
        s * s / s2
    }
}
