//! Statistics of the Gaussian field: Wiener-chaos moment ratios, empirical
//! tails, the diagonal/off-diagonal split of `f_N`, Cauchy rates of `f_N`
//! under coupled draws, and the deterministic kernel sum that bounds the
//! off-diagonal part.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::functionals::f_quartic;
use crate::random_field::{
    ball_tilt, sample_gaussian, sample_phi, sample_phi_in_ball, GaussianStream, SeedSpec,
    BOOTSTRAP_RESAMPLES, BOOTSTRAP_STREAM,
};
use crate::spectral::{bracket, bracket_sq, FourierCoeffs};
use crate::stats::{self, linear_fit};

pub const MAX_HERMITE_DEGREE: usize = 30;

/// Thresholds with fewer exceedances are left out of tail regressions.
pub const MIN_EXCEEDANCES: usize = 50;

/// Smallest ensemble accepted by [`cauchy_rate`].
pub const MIN_RATE_SAMPLES: usize = 100;

/// Physicists' Hermite polynomial by `P_{n+1} = 2x P_n - 2n P_{n-1}`.
pub fn hermite_p(n: usize, x: f64) -> Result<f64> {
    if n > MAX_HERMITE_DEGREE {
        return Err(invalid("n", "Hermite degree above 30"));
    }
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `|A(k, d)| = C(d + k - 1, k)`.
pub fn multi_index_count(order: usize, dim: usize) -> usize {
    if dim == 0 {
        return 0;
    }
    let mut c: u128 = 1;
    for i in 0..order {
        c = c * (dim + i) as u128 / (i + 1) as u128;
    }
    c as usize
}

/// Non-decreasing multi-indices `1 <= n_1 <= ... <= n_k <= d` in
/// lexicographic order.
pub fn multi_indices(order: usize, dim: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if order == 0 || dim == 0 {
        return out;
    }
    let mut cur = vec![1usize; order];
    loop {
        out.push(cur.clone());
        // rightmost position that can still grow
        let mut pos = order;
        while pos > 0 && cur[pos - 1] == dim {
            pos -= 1;
        }
        if pos == 0 {
            return out;
        }
        let v = cur[pos - 1] + 1;
        for slot in cur[pos - 1..].iter_mut() {
            *slot = v;
        }
    }
}

/// Coefficients `c(n_1, ..., n_k)` of a homogeneous chaos
/// `S_k = Σ_{A(k,d)} c(n) g_{n_1} ... g_{n_k}`, stored in the order of
/// [`multi_indices`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosTable {
    order: usize,
    dim: usize,
    indices: Vec<Vec<usize>>,
    coeffs: Vec<Complex64>,
}

impl ChaosTable {
    pub fn new(order: usize, dim: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if order == 0 || dim == 0 {
            return Err(invalid("coeffs", "empty coefficient table"));
        }
        let indices = multi_indices(order, dim);
        if coeffs.len() != indices.len() {
            return Err(invalid("coeffs", "table length must equal |A(k, d)|"));
        }
        if coeffs.iter().all(|c| c.norm_sqr() == 0.0) {
            return Err(invalid("coeffs", "empty coefficient table"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("chaos coefficients"));
        }
        Ok(Self {
            order,
            dim,
            indices,
            coeffs,
        })
    }

    pub fn from_fn(
        order: usize,
        dim: usize,
        mut f: impl FnMut(&[usize]) -> Complex64,
    ) -> Result<Self> {
        let coeffs = multi_indices(order, dim).iter().map(|m| f(m)).collect();
        Self::new(order, dim, coeffs)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `S_k` at `g = (g_1, ..., g_d)`; `g[0]` is `g_1`.
    pub fn evaluate(&self, g: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, c) in self.indices.iter().zip(&self.coeffs) {
            let mut term = *c;
            for &j in idx {
                term *= g[j - 1];
            }
            acc += term;
        }
        acc
    }
}

/// `√(k+1) (p-1)^{k/2}`.
pub fn chaos_bound(order: usize, p: f64) -> f64 {
    libm::sqrt(order as f64 + 1.0) * libm::pow(p - 1.0, order as f64 / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaosRatio {
    /// `‖S‖_p / ‖S‖_2` from the sample moments.
    pub ratio: f64,
    /// Delta-method standard error of `ratio`.
    pub std_error: f64,
    pub bound: f64,
    pub lp_norm: f64,
    pub l2_norm: f64,
}

/// Monte Carlo `‖S_k‖_{L^p} / ‖S_k‖_{L²}` with sample `i` drawn from stream
/// `i` of `seed`.
pub fn chaos_ratio<E: Executor>(
    table: &ChaosTable,
    p: f64,
    count: usize,
    seed: u64,
    exec: &E,
) -> Result<ChaosRatio> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(invalid("p", "moment exponent must be >= 2"));
    }
    if count < 2 {
        return Err(invalid("count", "need at least two samples"));
    }
    let moduli: Vec<f64> = exec.map_indices(count, |i| {
        let g = sample_gaussian(SeedSpec::new(seed, i as u64), table.dim);
        table.evaluate(&g).norm()
    });
    let pth: Vec<f64> = moduli.iter().map(|m| libm::pow(*m, p)).collect();
    let sq: Vec<f64> = moduli.iter().map(|m| m * m).collect();
    let a = stats::mean(&pth);
    let b = stats::mean(&sq);
    let lp_norm = libm::pow(a, 1.0 / p);
    let l2_norm = libm::sqrt(b);
    let ratio = lp_norm / l2_norm;
    // gradient of log r in (A, B) is (1/(pA), -1/(2B))
    let ga = 1.0 / (p * a);
    let gb = -0.5 / b;
    let var_log = (ga * ga * stats::variance(&pth)
        + gb * gb * stats::variance(&sq)
        + 2.0 * ga * gb * stats::covariance(&pth, &sq))
        / count as f64;
    Ok(ChaosRatio {
        ratio,
        std_error: ratio * libm::sqrt(var_log.max(0.0)),
        bound: chaos_bound(table.order, p),
        lp_norm,
        l2_norm,
    })
}

/// The split of `∫ conj(φ_N²) ∂_x(φ_N²)` into index classes, for one draw.
///
/// `s1` sums the quadruples with `m_1 ∈ {n_1, n_2}` (each quadruple once),
/// `s2` the rest. `s1 = x + y1 + y2 + y3` with the diagonal term
/// `x = Σ 2in |g_n|⁴/⟨n⟩⁴` and the `n_1 ≠ n_2` part split through
/// `|g|² = 1 + G`. `x_printed` is the diagonal with the factor `4in`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FDecomposition {
    pub s1: Complex64,
    pub s2: Complex64,
    pub x: Complex64,
    pub x_printed: Complex64,
    pub y1: Complex64,
    pub y2: Complex64,
    pub y3: Complex64,
}

/// Decomposes the draw `sample_phi(band, seed)`.
pub fn f_decompose(band: usize, seed: SeedSpec) -> FDecomposition {
    let b = band as i64;
    let g = sample_gaussian(seed, 2 * band + 1);
    let c: Vec<Complex64> = (-b..=b).zip(&g).map(|(n, gn)| gn / bracket(n)).collect();
    let at = |n: i64| c[(n + b) as usize];
    let i = Complex64::new(0.0, 1.0);

    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    for m1 in -b..=b {
        for m2 in -b..=b {
            let top = at(m1) * at(m2);
            for n1 in -b..=b {
                let n2 = m1 + m2 - n1;
                if n2.abs() > b {
                    continue;
                }
                let term = i * (n1 + n2) as f64 * top * (at(n1) * at(n2)).conj();
                if m1 == n1 || m1 == n2 {
                    s1 += term;
                } else {
                    s2 += term;
                }
            }
        }
    }

    let mut x = Complex64::new(0.0, 0.0);
    for n in -b..=b {
        x += i * (2 * n) as f64 * at(n).norm_sqr() * at(n).norm_sqr();
    }

    let centered: Vec<f64> = g.iter().map(|z| z.norm_sqr() - 1.0).collect();
    let gc = |n: i64| centered[(n + b) as usize];
    let w = |n: i64| 1.0 / bracket_sq(n);
    let mut y1 = Complex64::new(0.0, 0.0);
    let mut y2 = Complex64::new(0.0, 0.0);
    for n1 in -b..=b {
        for n2 in -b..=b {
            if n1 == n2 {
                continue;
            }
            let k = i * (2 * (n1 + n2)) as f64 * w(n1) * w(n2);
            y1 += k * gc(n1) * gc(n2);
            y2 += k * (gc(n1) + gc(n2));
        }
    }

    FDecomposition {
        s1,
        s2,
        x,
        x_printed: x * 2.0,
        y1,
        y2,
        y3: y3_symmetric_sum(band),
    }
}

/// `Σ_{n_1 ≠ n_2} 2i (n_1 + n_2) / (⟨n_1⟩² ⟨n_2⟩²)`, accumulated in pairs
/// `(n_1, n_2)`, `(-n_1, -n_2)` so each pair cancels in floating point.
pub fn y3_symmetric_sum(band: usize) -> Complex64 {
    let b = band as i64;
    let mut acc = 0.0;
    for n1 in -b..=b {
        for n2 in -b..=b {
            if n1 == n2 {
                continue;
            }
            // visit each reflected pair once
            if (n1, n2) > (-n1, -n2) {
                continue;
            }
            let w = 1.0 / (bracket_sq(n1) * bracket_sq(n2));
            let plus = 2.0 * (n1 + n2) as f64 * w;
            let minus = 2.0 * (-n1 - n2) as f64 * w;
            acc += plus + minus;
        }
    }
    Complex64::new(0.0, acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMode {
    /// `f_M - f_N`.
    FFull,
    /// Diagonal part only: `Im(X_M - X_N)`.
    XOnly,
}

/// `Im X_N(u) = 2 Σ_{|n|<=N} n |c_n|⁴`.
pub fn x_diagonal(u: &FourierCoeffs, band: usize) -> f64 {
    let b = band.min(u.band()) as i64;
    (-b..=b)
        .map(|n| {
            2.0 * n as f64 * {
                let m = u.get(n).norm_sqr();
                m * m
            }
        })
        .sum()
}

/// Coupled difference at two truncations of the same draw `u`.
pub fn coupled_gap(u: &FourierCoeffs, m: usize, n: usize, mode: RateMode) -> f64 {
    if m == n {
        return 0.0;
    }
    match mode {
        RateMode::FFull => f_quartic(u, m) - f_quartic(u, n),
        RateMode::XOnly => x_diagonal(u, m) - x_diagonal(u, n),
    }
}

/// Exact `‖Im(X_{2N} - X_N)‖_{L²(dμ)} = (80 Σ_{N<|n|<=2N} n²/⟨n⟩⁸)^{1/2}`,
/// from `E|g|⁴ = 2`, `E|g|⁸ = 24` and the cancellation of `n` against `-n`.
pub fn x_gap_norm_oracle(band: usize) -> f64 {
    let s: f64 = (band + 1..=2 * band)
        .map(|n| {
            let n = n as i64;
            2.0 * (n * n) as f64 / libm::pow(bracket_sq(n), 4.0)
        })
        .sum();
    libm::sqrt(80.0 * s)
}

/// Exact norm of the second Wiener chaos component of `f_M - f_N`:
///
/// `‖P₂(f_M - f_N)‖² = 16 Σ_b b² ⟨b⟩⁻⁴ (C_M 1_{|b|<=M} - C_N 1_{|b|<=N})²`
///
/// with `C_N = Σ_{|a|<=N} ⟨a⟩⁻²`. Chaos components are orthogonal, so this is
/// a lower bound for `‖f_M - f_N‖_{L²(dμ)}`. It decays like `N^{-1/2}`.
pub fn f_gap_second_chaos_norm(m: usize, n: usize) -> f64 {
    let c = |k: usize| -> f64 {
        let k = k as i64;
        (-k..=k).map(|a| 1.0 / bracket_sq(a)).sum()
    };
    let (cm, cn) = (c(m), c(n));
    let top = m.max(n) as i64;
    let s: f64 = (-top..=top)
        .map(|b| {
            let coef = if b.unsigned_abs() as usize <= m {
                cm
            } else {
                0.0
            } - if b.unsigned_abs() as usize <= n {
                cn
            } else {
                0.0
            };
            (b * b) as f64 / (bracket_sq(b) * bracket_sq(b)) * coef * coef
        })
        .sum();
    libm::sqrt(16.0 * s)
}

/// Log-log fit of `‖F_{2N} - F_N‖_{L²}` against `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub bands: Vec<usize>,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// 95% percentile bootstrap interval for the slope.
    pub ci_low: f64,
    pub ci_high: f64,
    pub sample_count: usize,
}

fn rms(values: impl Iterator<Item = f64>) -> (f64, usize) {
    let mut s = 0.0;
    let mut n = 0;
    for v in values {
        s += v * v;
        n += 1;
    }
    (libm::sqrt(s / n as f64), n)
}

fn log_log_slope(bands: &[usize], values: &[f64]) -> stats::LinearFit {
    let xs: Vec<f64> = bands.iter().map(|b| libm::log(*b as f64)).collect();
    let ys: Vec<f64> = values.iter().map(|v| libm::log(*v)).collect();
    linear_fit(&xs, &ys)
}

/// Estimates `‖F_{2N} - F_N‖_{L²(dμ)}` for each `N` in `bands` with both
/// truncations evaluated on one draw of `φ_{2 max N}` per sample.
pub fn cauchy_rate<E: Executor>(
    bands: &[usize],
    count: usize,
    seed: u64,
    mode: RateMode,
    exec: &E,
) -> Result<RateFit> {
    if bands.len() < 2 {
        return Err(invalid("bands", "need at least two truncations"));
    }
    if bands.windows(2).any(|w| w[0] >= w[1]) || bands[0] == 0 {
        return Err(invalid(
            "bands",
            "bands must be positive and strictly increasing",
        ));
    }
    if count < MIN_RATE_SAMPLES {
        return Err(invalid("count", "cauchy_rate needs at least 100 samples"));
    }
    let top = 2 * bands[bands.len() - 1];
    let mut levels: Vec<usize> = bands.iter().flat_map(|b| [*b, 2 * b]).collect();
    levels.sort_unstable();
    levels.dedup();

    // gaps[i][j]: sample i, band j
    let gaps: Vec<Vec<f64>> = exec.map_indices(count, |i| {
        let u = sample_phi(top, SeedSpec::new(seed, i as u64));
        let vals: Vec<f64> = levels
            .iter()
            .map(|&l| match mode {
                RateMode::FFull => f_quartic(&u, l),
                RateMode::XOnly => x_diagonal(&u, l),
            })
            .collect();
        let at = |l: usize| vals[levels.binary_search(&l).expect("level present")];
        bands.iter().map(|&b| at(2 * b) - at(b)).collect()
    });

    let mut values = Vec::with_capacity(bands.len());
    let mut std_errors = Vec::with_capacity(bands.len());
    for j in 0..bands.len() {
        let sq: Vec<f64> = gaps.iter().map(|g| g[j] * g[j]).collect();
        let est = stats::mean_estimate(&sq);
        let norm = libm::sqrt(est.mean);
        values.push(norm);
        std_errors.push(if norm > 0.0 {
            est.std_error / (2.0 * norm)
        } else {
            0.0
        });
    }
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(invalid("bands", "a coupled gap vanished identically"));
    }
    let fit = log_log_slope(bands, &values);

    // resample whole draws so every band sees the same bootstrap sample
    let mut rng = GaussianStream::new(SeedSpec::new(seed, BOOTSTRAP_STREAM));
    let mut slopes = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut boot_vals = vec![0.0; bands.len()];
    let mut picks = vec![0usize; count];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for p in picks.iter_mut() {
            *p = ((rng.uniform() * count as f64) as usize).min(count - 1);
        }
        for (j, v) in boot_vals.iter_mut().enumerate() {
            *v = rms(picks.iter().map(|&k| gaps[k][j])).0;
        }
        if boot_vals.iter().all(|v| *v > 0.0) {
            slopes.push(log_log_slope(bands, &boot_vals).slope);
        }
    }
    slopes.sort_by(f64::total_cmp);
    let (ci_low, ci_high) = if slopes.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        (
            stats::quantile_sorted(&slopes, 0.025),
            stats::quantile_sorted(&slopes, 0.975),
        )
    };

    Ok(RateFit {
        bands: bands.to_vec(),
        values,
        std_errors,
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        ci_low,
        ci_high,
        sample_count: count,
    })
}

/// Which law the tail samples come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Conditioning {
    /// Plain `μ_N`.
    None,
    /// `μ_N` draws with `‖u‖_{L²} > κ` discarded.
    MassFilter { kappa: f64 },
    /// Exact draws from `μ_N( · | ‖u‖_{L²} <= κ)`; `count` is the number of
    /// accepted samples.
    Ball { kappa: f64 },
}

/// Observable values on `count` draws of `φ_N`, draw `i` from stream `i`.
pub fn sample_observable<E, F>(
    band: usize,
    count: usize,
    seed: u64,
    conditioning: Conditioning,
    observable: F,
    exec: &E,
) -> Result<Vec<f64>>
where
    E: Executor,
    F: Fn(&FourierCoeffs) -> f64 + Sync + Send,
{
    if count == 0 {
        return Err(invalid("count", "need at least one sample"));
    }
    match conditioning {
        Conditioning::None => Ok(exec.map_indices(count, |i| {
            observable(&sample_phi(band, SeedSpec::new(seed, i as u64)))
        })),
        Conditioning::MassFilter { kappa } => {
            check_kappa(kappa)?;
            let vals = exec.map_indices(count, |i| {
                let u = sample_phi(band, SeedSpec::new(seed, i as u64));
                (u.l2_norm() <= kappa).then(|| observable(&u))
            });
            Ok(vals.into_iter().flatten().collect())
        }
        Conditioning::Ball { kappa } => {
            check_kappa(kappa)?;
            let tilt = ball_tilt(band, kappa);
            Ok(exec.map_indices(count, |i| {
                observable(&sample_phi_in_ball(band, kappa, tilt, SeedSpec::new(seed, i as u64)).u)
            }))
        }
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(invalid("kappa", "conditioning radius must be positive"))
    }
}

/// Empirical survival `P(X > λ)` and the regression
/// `log P ≈ intercept + slope λ^θ` over the thresholds with at least
/// [`MIN_EXCEEDANCES`] exceedances. The tail rate is `c = -slope`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailFit {
    pub lambdas: Vec<f64>,
    pub survival: Vec<f64>,
    pub exceedances: Vec<usize>,
    pub sample_count: usize,
    pub theta: f64,
    /// Number of leading thresholds used in the regression.
    pub fitted: usize,
    pub slope: f64,
    pub intercept: f64,
    pub rate: f64,
    pub r_squared: f64,
}

pub fn fit_tail(values: &[f64], lambdas: &[f64], theta: f64) -> Result<TailFit> {
    if ![0.5, 1.0, 2.0].contains(&theta) {
        return Err(invalid("theta", "tail exponent must be 1/2, 1 or 2"));
    }
    if lambdas.is_empty() || lambdas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("lambdas", "thresholds must be strictly increasing"));
    }
    if values.is_empty() {
        return Err(Error::InsufficientTail {
            exceedances: 0,
            required: MIN_EXCEEDANCES,
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let exceedances: Vec<usize> = lambdas
        .iter()
        .map(|l| n - sorted.partition_point(|v| v <= l))
        .collect();
    let survival: Vec<f64> = exceedances.iter().map(|e| *e as f64 / n as f64).collect();
    if exceedances[0] < MIN_EXCEEDANCES {
        return Err(Error::InsufficientTail {
            exceedances: exceedances[0],
            required: MIN_EXCEEDANCES,
        });
    }
    let fitted = exceedances
        .iter()
        .take_while(|e| **e >= MIN_EXCEEDANCES)
        .count();
    if fitted < 3 {
        return Err(invalid(
            "lambdas",
            "fewer than three thresholds carry enough exceedances",
        ));
    }
    let xs: Vec<f64> = lambdas[..fitted]
        .iter()
        .map(|l| libm::pow(*l, theta))
        .collect();
    let ys: Vec<f64> = survival[..fitted].iter().map(|s| libm::log(*s)).collect();
    let fit = linear_fit(&xs, &ys);
    Ok(TailFit {
        lambdas: lambdas.to_vec(),
        survival,
        exceedances,
        sample_count: n,
        theta,
        fitted,
        slope: fit.slope,
        intercept: fit.intercept,
        rate: -fit.slope,
        r_squared: fit.r_squared,
    })
}

/// Sampling followed by [`fit_tail`].
#[allow(clippy::too_many_arguments)]
pub fn tail_survival<E, F>(
    observable: F,
    band: usize,
    lambdas: &[f64],
    count: usize,
    seed: u64,
    conditioning: Conditioning,
    theta: f64,
    exec: &E,
) -> Result<TailFit>
where
    E: Executor,
    F: Fn(&FourierCoeffs) -> f64 + Sync + Send,
{
    let values = sample_observable(band, count, seed, conditioning, observable, exec)?;
    fit_tail(&values, lambdas, theta)
}

/// `k` equispaced thresholds from the `from_quantile` quantile of `values`
/// up to the largest level that still has [`MIN_EXCEEDANCES`] exceedances.
pub fn tail_lambdas(values: &[f64], from_quantile: f64, k: usize) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n <= MIN_EXCEEDANCES || k < 2 {
        return Vec::new();
    }
    let lo = stats::quantile_sorted(&sorted, from_quantile);
    // strictly below this value at least MIN_EXCEEDANCES points remain above
    let hi = sorted[n - MIN_EXCEEDANCES - 1];
    if !(hi > lo) {
        return Vec::new();
    }
    (0..k)
        .map(|j| lo + (hi - lo) * j as f64 / (k - 1) as f64)
        .collect()
}

/// Stopping threshold for the kernel series.
const KERNEL_TERM_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSum {
    pub sum: f64,
    /// `sum · N^{3/2-ε} · ⟨n⟩^{3/2+ε}`.
    pub bound_ratio: f64,
}

/// Direct summation of `Σ ⟨n_1⟩^{-2} ⟨n - n_1⟩^{-2}` over `|n_1| >= N`,
/// `|n - n_1| >= N`, for either sign of `n`.
fn kernel_series(n: i64, big_n: i64) -> f64 {
    let term = |n1: i64| {
        if n1.abs() >= big_n && (n - n1).abs() >= big_n {
            1.0 / (bracket_sq(n1) * bracket_sq(n - n1))
        } else {
            0.0
        }
    };
    let reach = n.abs() + big_n;
    let mut sum = 0.0;
    let mut k: i64 = 0;
    loop {
        let right = term(k);
        let left = term(-k - 1);
        sum += right + left;
        if k > reach && right < KERNEL_TERM_FLOOR && left < KERNEL_TERM_FLOOR {
            return sum;
        }
        k += 1;
    }
}

pub fn kernel_tail_sum(n: i64, big_n: usize, eps: f64) -> Result<KernelSum> {
    if big_n == 0 {
        return Err(invalid("N", "truncation must be positive"));
    }
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(invalid("eps", "epsilon must lie in (0, 1/2]"));
    }
    // n_1 -> -n_1 maps the index set for n onto the one for -n
    let sum = kernel_series(n.abs(), big_n as i64);
    let bound_ratio = sum * libm::pow(big_n as f64, 1.5 - eps) * libm::pow(bracket(n), 1.5 + eps);
    Ok(KernelSum { sum, bound_ratio })
}
