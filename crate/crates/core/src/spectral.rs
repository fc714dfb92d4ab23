//! Truncated Fourier series on the circle.
//!
//! A [`FourierCoeffs`] holds the coefficients `c_n`, `|n| <= band`, of the
//! trigonometric polynomial `u(x) = Σ c_n e^{inx}`. All operations are exact
//! on the coefficient side; the only approximation in this module is the
//! sup-norm (and non-even `L^p` norms) sampled on a [`QuadratureGrid`].

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The weight `⟨n⟩ = sqrt(n² + 1)`.
#[inline]
pub fn bracket(n: i64) -> f64 {
    let n = n as f64;
    libm::sqrt(n * n + 1.0)
}

/// `⟨n⟩² = n² + 1`, exact in floating point for `|n| < 2^26`.
#[inline]
pub fn bracket_sq(n: i64) -> f64 {
    let n = n as f64;
    n * n + 1.0
}

/// Complex Fourier coefficients `c_{-band}, ..., c_{band}`.
#[derive(Debug, Clone)]
pub struct FourierCoeffs {
    band: usize,
    coeffs: Vec<Complex64>,
}

impl FourierCoeffs {
    pub fn zeros(band: usize) -> Self {
        Self {
            band,
            coeffs: vec![ZERO; 2 * band + 1],
        }
    }

    /// Builds from coefficients ordered `n = -band..=band`.
    pub fn new(band: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * band + 1 {
            return Err(Error::BandMismatch {
                band,
                expected: 2 * band + 1,
                got: coeffs.len(),
            });
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite("Fourier coefficients"));
        }
        Ok(Self { band, coeffs })
    }

    pub fn from_fn(band: usize, mut f: impl FnMut(i64) -> Complex64) -> Self {
        let b = band as i64;
        Self {
            band,
            coeffs: (-b..=b).map(&mut f).collect(),
        }
    }

    /// The single mode `c e^{inx}`, with band `|n|`.
    pub fn mode(n: i64, c: Complex64) -> Self {
        let mut u = Self::zeros(n.unsigned_abs() as usize);
        u.set(n, c);
        u
    }

    pub fn constant(c: Complex64) -> Self {
        Self::mode(0, c)
    }

    #[inline]
    pub fn band(&self) -> usize {
        self.band
    }

    /// Coefficients ordered `n = -band..=band`.
    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `c_n`, zero outside the band.
    #[inline]
    pub fn get(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.band {
            ZERO
        } else {
            self.coeffs[(n + self.band as i64) as usize]
        }
    }

    /// # Panics
    /// If `|n| > band`.
    pub fn set(&mut self, n: i64, c: Complex64) {
        assert!(
            n.unsigned_abs() as usize <= self.band,
            "mode {n} outside band {}",
            self.band
        );
        let idx = (n + self.band as i64) as usize;
        self.coeffs[idx] = c;
    }

    /// `(n, c_n)` pairs in increasing `n`.
    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let b = self.band as i64;
        (-b..=b).zip(self.coeffs.iter().copied())
    }

    /// Same function represented with a different band: pads with zeros or
    /// drops the modes above `band`.
    pub fn with_band(&self, band: usize) -> Self {
        Self::from_fn(band, |n| self.get(n))
    }

    /// The spectral projector `Π_M`.
    pub fn project(&self, m: usize) -> Self {
        self.with_band(m)
    }

    /// `Π_M^⊥ u = u - Π_M u`, kept at the band of `u`.
    pub fn project_complement(&self, m: usize) -> Self {
        self - &self.project(m)
    }

    /// Sets the mean `c_0` to zero.
    pub fn zero_mean(&self) -> Self {
        let mut out = self.clone();
        out.set(0, ZERO);
        out
    }

    /// `∂_x`: `c_n -> i n c_n`.
    pub fn derivative(&self) -> Self {
        let mut out = self.clone();
        let b = self.band as i64;
        for (c, n) in out.coeffs.iter_mut().zip(-b..=b) {
            *c *= Complex64::new(0.0, n as f64);
        }
        out
    }

    /// `∂^{-1}`: `c_n -> c_n / (i n)` for `n != 0`, mean removed.
    pub fn antiderivative(&self) -> Self {
        let mut out = self.clone();
        let b = self.band as i64;
        for (c, n) in out.coeffs.iter_mut().zip(-b..=b) {
            *c = if n == 0 {
                ZERO
            } else {
                // c / (i n) = -i c / n
                Complex64::new(c.im, -c.re) / n as f64
            };
        }
        out
    }

    /// Exact product by dense coefficient convolution; band is the sum of
    /// the input bands.
    pub fn multiply(&self, other: &Self) -> Self {
        let band = self.band + other.band;
        let mut out = vec![ZERO; 2 * band + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                // index offsets: (i - bu) + (j - bv) + band = i + j
                out[i + j] += a * b;
            }
        }
        Self { band, coeffs: out }
    }

    /// Pointwise complex conjugate: `c_n -> conj(c_{-n})`.
    pub fn conjugate(&self) -> Self {
        Self {
            band: self.band,
            coeffs: self.coeffs.iter().rev().map(|c| c.conj()).collect(),
        }
    }

    /// `x -> -x`: `c_n -> c_{-n}`.
    pub fn reflect(&self) -> Self {
        Self {
            band: self.band,
            coeffs: self.coeffs.iter().rev().copied().collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            band: self.band,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            band: self.band,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `⟨f, g⟩ = ∫ f conj(g) = Σ f_n conj(g_n)`.
    pub fn inner_product(&self, other: &Self) -> Complex64 {
        let b = self.band.min(other.band) as i64;
        (-b..=b).map(|n| self.get(n) * other.get(n).conj()).sum()
    }

    /// Bilinear pairing `∫ f g = Σ f_n g_{-n}` (no conjugation).
    pub fn pairing(&self, other: &Self) -> Complex64 {
        let b = self.band.min(other.band) as i64;
        (-b..=b).map(|n| self.get(n) * other.get(-n)).sum()
    }

    /// `Σ |c_n|²`.
    pub fn l2_norm_squared(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `L²` norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.l2_norm_squared())
    }

    /// `Σ n² |c_n|² = ‖∂_x u‖²_{L²}`.
    pub fn dirichlet_energy(&self) -> f64 {
        self.modes()
            .map(|(n, c)| (n * n) as f64 * c.norm_sqr())
            .sum()
    }

    /// `H^σ` norm `(Σ ⟨n⟩^{2σ} |c_n|²)^{1/2}`.
    pub fn sobolev_norm(&self, sigma: f64) -> f64 {
        let s: f64 = self
            .modes()
            .map(|(n, c)| libm::pow(1.0 + (n * n) as f64, sigma) * c.norm_sqr())
            .sum();
        libm::sqrt(s)
    }

    /// `L^p` norm under the normalized measure, sampled on `grid`.
    ///
    /// Exact for even integer `p` when `grid.points() > p * band`. For other
    /// `p`, including the sup-norm, the grid must meet the oversampling floor
    /// `8 * band + 8` and the result is a grid approximation.
    pub fn lp_norm(&self, p: LpExponent, grid: &QuadratureGrid) -> Result<f64> {
        match p {
            LpExponent::Finite(p) if !(p >= 1.0) => return Err(Error::InvalidExponent(p)),
            LpExponent::Finite(p) if is_even_integer(p) => {
                let degree = p as usize * self.band;
                if grid.points() <= degree {
                    return Err(Error::GridTooCoarse {
                        points: grid.points(),
                        degree,
                    });
                }
            }
            _ => {
                let floor = 8 * self.band + 8;
                if grid.points() < floor {
                    return Err(Error::GridTooCoarse {
                        points: grid.points(),
                        degree: floor - 1,
                    });
                }
            }
        }
        let values = grid.evaluate(self);
        Ok(match p {
            LpExponent::Infinity => values.iter().map(|z| z.norm()).fold(0.0, f64::max),
            LpExponent::Finite(p) => {
                let m = values.len() as f64;
                let s: f64 = if is_even_integer(p) {
                    let half = (p / 2.0) as i32;
                    values
                        .iter()
                        .map(|z| libm::pow(z.norm_sqr(), half as f64))
                        .sum()
                } else {
                    values.iter().map(|z| libm::pow(z.norm(), p)).sum()
                };
                libm::pow(s / m, 1.0 / p)
            }
        })
    }

    /// Largest coefficientwise modulus of `self - other` over the union band.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let b = self.band.max(other.band) as i64;
        (-b..=b)
            .map(|n| (self.get(n) - other.get(n)).norm())
            .fold(0.0, f64::max)
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

fn is_even_integer(p: f64) -> bool {
    p == libm::trunc(p) && (p as i64) % 2 == 0
}

impl PartialEq for FourierCoeffs {
    fn eq(&self, other: &Self) -> bool {
        let b = self.band.max(other.band) as i64;
        (-b..=b).all(|n| self.get(n) == other.get(n))
    }
}

fn combine(
    a: &FourierCoeffs,
    b: &FourierCoeffs,
    op: impl Fn(Complex64, Complex64) -> Complex64,
) -> FourierCoeffs {
    FourierCoeffs::from_fn(a.band.max(b.band), |n| op(a.get(n), b.get(n)))
}

impl Add for &FourierCoeffs {
    type Output = FourierCoeffs;
    fn add(self, rhs: Self) -> FourierCoeffs {
        combine(self, rhs, |x, y| x + y)
    }
}

impl Sub for &FourierCoeffs {
    type Output = FourierCoeffs;
    fn sub(self, rhs: Self) -> FourierCoeffs {
        combine(self, rhs, |x, y| x - y)
    }
}

impl Add for FourierCoeffs {
    type Output = FourierCoeffs;
    fn add(self, rhs: Self) -> FourierCoeffs {
        &self + &rhs
    }
}

impl Sub for FourierCoeffs {
    type Output = FourierCoeffs;
    fn sub(self, rhs: Self) -> FourierCoeffs {
        &self - &rhs
    }
}

impl Neg for &FourierCoeffs {
    type Output = FourierCoeffs;
    fn neg(self) -> FourierCoeffs {
        self.scale_real(-1.0)
    }
}

impl Neg for FourierCoeffs {
    type Output = FourierCoeffs;
    fn neg(self) -> FourierCoeffs {
        -&self
    }
}

impl Mul for &FourierCoeffs {
    type Output = FourierCoeffs;
    fn mul(self, rhs: Self) -> FourierCoeffs {
        self.multiply(rhs)
    }
}

impl Mul<Complex64> for &FourierCoeffs {
    type Output = FourierCoeffs;
    fn mul(self, rhs: Complex64) -> FourierCoeffs {
        self.scale(rhs)
    }
}

/// Which `L^p` norm to take.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

/// Equispaced nodes `x_j = 2πj/M`, `j = 0..M`, with trapezoidal weights
/// `1/M`. Integration of `e^{ikx}` is exact for `|k| < M`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    points: usize,
    // roots[k] = e^{2πik/M}
    roots: Vec<Complex64>,
}

impl QuadratureGrid {
    pub fn new(points: usize) -> Result<Self> {
        if points == 0 {
            return Err(crate::error::invalid(
                "points",
                "grid needs at least one node",
            ));
        }
        let roots = (0..points)
            .map(|k| {
                let theta = 2.0 * core::f64::consts::PI * k as f64 / points as f64;
                Complex64::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        Ok(Self { points, roots })
    }

    /// Smallest power of two `M >= degree + 1`; integrates trigonometric
    /// polynomials of the given degree exactly.
    pub fn exact_for_degree(degree: usize) -> Self {
        Self::new((degree + 1).next_power_of_two()).expect("nonzero")
    }

    /// Grid meeting the sup-norm oversampling floor `8 * band + 8`, rounded up
    /// to a power of two.
    pub fn oversampled(band: usize) -> Self {
        Self::new((8 * band + 8).next_power_of_two()).expect("nonzero")
    }

    #[inline]
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn is_exact_for_degree(&self, degree: usize) -> bool {
        self.points > degree
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let m = self.points as f64;
        (0..self.points).map(move |j| 2.0 * core::f64::consts::PI * j as f64 / m)
    }

    /// Values `u(x_j)`.
    pub fn evaluate(&self, u: &FourierCoeffs) -> Vec<Complex64> {
        let m = self.points;
        let mut buf = vec![ZERO; m];
        if m.is_power_of_two() {
            for (n, c) in u.modes() {
                buf[n.rem_euclid(m as i64) as usize] += c;
            }
            fft::radix2(&mut buf, &self.roots, true);
        } else {
            for (j, out) in buf.iter_mut().enumerate() {
                let mut acc = ZERO;
                for (n, c) in u.modes() {
                    let k = (n * j as i64).rem_euclid(m as i64) as usize;
                    acc += c * self.roots[k];
                }
                *out = acc;
            }
        }
        buf
    }

    /// `(1/M) Σ_j f(x_j)`.
    pub fn integrate(&self, values: &[Complex64]) -> Complex64 {
        values.iter().sum::<Complex64>() / values.len() as f64
    }

    /// Discrete Fourier analysis of grid values onto modes `|n| <= band`.
    /// Exact inverse of [`evaluate`](Self::evaluate) when `points > 2 * band`.
    pub fn analyze(&self, values: &[Complex64], band: usize) -> Result<FourierCoeffs> {
        let m = self.points;
        if values.len() != m {
            return Err(Error::BandMismatch {
                band,
                expected: m,
                got: values.len(),
            });
        }
        let scale = 1.0 / m as f64;
        if m.is_power_of_two() {
            let mut buf = values.to_vec();
            fft::radix2(&mut buf, &self.roots, false);
            Ok(FourierCoeffs::from_fn(band, |n| {
                buf[n.rem_euclid(m as i64) as usize] * scale
            }))
        } else {
            Ok(FourierCoeffs::from_fn(band, |n| {
                let mut acc = ZERO;
                for (j, v) in values.iter().enumerate() {
                    let k = (n * j as i64).rem_euclid(m as i64) as usize;
                    acc += v * self.roots[k].conj();
                }
                acc * scale
            }))
        }
    }
}
