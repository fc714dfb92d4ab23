//! Scalar functionals: mass, momentum, energy, the quartic derivative term
//! `f_N`, the cutoff `χ`, the density `G_N`, the gauge functional `F_u` and
//! the two-variable Hamiltonian `H(u, v)`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::spectral::{FourierCoeffs, LpExponent, QuadratureGrid};

/// Exponents above this are reported as an error instead of overflowing.
pub const EXPONENT_GUARD: f64 = 700.0;

/// Profile of the cutoff `χ` between the plateau `|x| <= κ/2` and the edge
/// of the support `|x| = κ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ramp {
    /// Linear descent from 1 to 0.
    #[default]
    Linear,
    /// `C^∞` transition built from `e^{-1/t}`.
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityParams {
    pub kappa: f64,
    pub band: usize,
    pub ramp: Ramp,
}

impl DensityParams {
    pub fn new(kappa: f64, band: usize) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(invalid(
                "kappa",
                "cutoff radius must be positive and finite",
            ));
        }
        Ok(Self {
            kappa,
            band,
            ramp: Ramp::Linear,
        })
    }

    pub fn with_ramp(mut self, ramp: Ramp) -> Self {
        self.ramp = ramp;
        self
    }
}

/// `M(u) = ‖u‖_{L²}`.
pub fn mass(u: &FourierCoeffs) -> f64 {
    u.l2_norm()
}

fn require_exact(grid: &QuadratureGrid, degree: usize) -> Result<()> {
    if grid.is_exact_for_degree(degree) {
        Ok(())
    } else {
        Err(Error::GridTooCoarse {
            points: grid.points(),
            degree,
        })
    }
}

/// `∫ |u|⁴` sampled on a grid exact for degree `4 * band`.
fn quartic_integral(u: &FourierCoeffs, grid: &QuadratureGrid) -> Result<f64> {
    Ok(libm::pow(u.lp_norm(LpExponent::Finite(4.0), grid)?, 4.0))
}

fn sextic_integral(u: &FourierCoeffs, grid: &QuadratureGrid) -> Result<f64> {
    Ok(libm::pow(u.lp_norm(LpExponent::Finite(6.0), grid)?, 6.0))
}

/// `Im ∫ conj(u) ∂_x u = Σ n |c_n|²`.
fn im_conj_u_du(u: &FourierCoeffs) -> f64 {
    u.modes().map(|(n, c)| n as f64 * c.norm_sqr()).sum()
}

/// Momentum `P(u) = ½ ∫|u|⁴ - Im ∫ conj(u) ∂_x u`.
pub fn momentum(u: &FourierCoeffs, grid: &QuadratureGrid) -> Result<f64> {
    Ok(0.5 * quartic_integral(u, grid)? - im_conj_u_du(u))
}

/// `f_N(u) = Im ∫ conj(w) ∂_x w` with `w = (Π_N u)²`.
///
/// With `w = Σ ŵ_k e^{ikx}`, `∫ conj(w) ∂_x w = Σ conj(ŵ_k) (ik) ŵ_k
/// = i Σ k |ŵ_k|²`, so the imaginary part is the real sum `Σ k |ŵ_k|²`.
pub fn f_quartic(u: &FourierCoeffs, band: usize) -> f64 {
    let un = u.project(band);
    let w = un.multiply(&un);
    w.modes().map(|(k, c)| k as f64 * c.norm_sqr()).sum()
}

/// Grid evaluation of `Im ∫ conj(u_N²) ∂_x(u_N²)`, independent of the
/// spectral closed form in [`f_quartic`].
pub fn f_quadrature_oracle(u: &FourierCoeffs, band: usize, grid: &QuadratureGrid) -> Result<f64> {
    require_exact(grid, 4 * band)?;
    let un = u.project(band);
    let vals = grid.evaluate(&un);
    let dvals = grid.evaluate(&un.derivative());
    // ∂_x(u²) = 2 u ∂_x u pointwise
    let integrand: alloc::vec::Vec<Complex64> = vals
        .iter()
        .zip(&dvals)
        .map(|(v, dv)| (v * v).conj() * (v * dv * 2.0))
        .collect();
    Ok(grid.integrate(&integrand).im)
}

/// `H(u) = ∫|∂u|² - ¾ f(u) + ½ ∫|u|⁶`, using the full band of `u`.
pub fn energy(u: &FourierCoeffs, grid: &QuadratureGrid) -> Result<f64> {
    require_exact(grid, 6 * u.band())?;
    Ok(u.dirichlet_energy() - 0.75 * f_quartic(u, u.band()) + 0.5 * sextic_integral(u, grid)?)
}

/// The first printed form of the energy,
/// `∫|∂u|² + (3/2) Im ∫ |u|² u ∂_x conj(u) + ½ ∫|u|⁶`, evaluated on the grid.
pub fn energy_first_form(u: &FourierCoeffs, grid: &QuadratureGrid) -> Result<f64> {
    require_exact(grid, 6 * u.band())?;
    let vals = grid.evaluate(u);
    let dconj = grid.evaluate(&u.conjugate().derivative());
    let integrand: alloc::vec::Vec<Complex64> = vals
        .iter()
        .zip(&dconj)
        .map(|(v, dv)| v * v.conj() * v * dv)
        .collect();
    let cubic = grid.integrate(&integrand).im;
    Ok(u.dirichlet_energy() + 1.5 * cubic + 0.5 * sextic_integral(u, grid)?)
}

/// The third printed form, `∫|∂u|² + ¾ i ∫ conj(u)² ∂_x(u²) + ½ ∫|u|⁶`,
/// returned as a complex number (its imaginary part vanishes).
pub fn energy_third_form(u: &FourierCoeffs, grid: &QuadratureGrid) -> Result<Complex64> {
    require_exact(grid, 6 * u.band())?;
    let u2 = u.multiply(u);
    // pairing(conj(u²), ∂(u²)) = ∫ conj(u)² ∂_x(u²)
    let quartic = u2.conjugate().pairing(&u2.derivative());
    Ok(
        Complex64::new(u.dirichlet_energy() + 0.5 * sextic_integral(u, grid)?, 0.0)
            + Complex64::new(0.0, 0.75) * quartic,
    )
}

/// The cutoff `χ(x)`: 1 on `|x| <= κ/2`, 0 on `|x| >= κ`, continuous and
/// even, with the configured ramp in between.
pub fn chi(x: f64, params: &DensityParams) -> f64 {
    let k = params.kappa;
    let a = x.abs();
    if a <= 0.5 * k {
        return 1.0;
    }
    if a >= k {
        return 0.0;
    }
    // s runs from 0 at the plateau edge to 1 at the support edge
    let s = (a - 0.5 * k) / (0.5 * k);
    match params.ramp {
        Ramp::Linear => 1.0 - s,
        Ramp::Smooth => {
            let psi = |t: f64| if t <= 0.0 { 0.0 } else { libm::exp(-1.0 / t) };
            let up = psi(1.0 - s);
            up / (up + psi(s))
        }
    }
}

/// `G_N(u) = χ(‖u_N‖) exp(¾ f_N(u) - ½ ∫|u_N|⁶)`.
pub fn density_g(u: &FourierCoeffs, params: &DensityParams, grid: &QuadratureGrid) -> Result<f64> {
    let un = u.project(params.band);
    let cut = chi(un.l2_norm(), params);
    if cut == 0.0 {
        return Ok(0.0);
    }
    let exponent = log_density_exponent(&un, params.band, grid)?;
    if exponent > EXPONENT_GUARD {
        return Err(Error::ExponentOverflow(exponent));
    }
    Ok(cut * libm::exp(exponent))
}

/// `¾ f_N(u) - ½ ∫|u_N|⁶`.
pub fn log_density_exponent(u: &FourierCoeffs, band: usize, grid: &QuadratureGrid) -> Result<f64> {
    let un = u.project(band);
    require_exact(grid, 6 * band)?;
    Ok(0.75 * f_quartic(&un, band) - 0.5 * sextic_integral(&un, grid)?)
}

/// `F_u = 2 Im ∫ u ∂_x conj(u) + (3/2) ∫|u|⁴`.
pub fn gauge_f(u: &FourierCoeffs, grid: &QuadratureGrid) -> Result<f64> {
    // Im ∫ u ∂ conj(u) = -Σ n |c_n|²
    Ok(-2.0 * im_conj_u_du(u) + 1.5 * quartic_integral(u, grid)?)
}

/// `H(u, v) = ∫ ∂u ∂v + ¾ i ∫ v² ∂(u²) + ½ ∫ u³ v³`, with exact spectral
/// products. Equals [`energy`] at `v = conj(u)`.
pub fn hamiltonian_h2(u: &FourierCoeffs, v: &FourierCoeffs) -> Complex64 {
    let gradient = u.derivative().pairing(&v.derivative());
    let u2 = u.multiply(u);
    let v2 = v.multiply(v);
    let cubic = v2.pairing(&u2.derivative());
    let u3 = u2.multiply(u);
    let v3 = v2.multiply(v);
    let sextic = u3.pairing(&v3);
    gradient + Complex64::new(0.0, 0.75) * cubic + sextic * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn e1() -> FourierCoeffs {
        FourierCoeffs::mode(1, c(1.0, 0.0))
    }

    fn one_plus_e1() -> FourierCoeffs {
        let mut u = FourierCoeffs::zeros(1);
        u.set(0, c(1.0, 0.0));
        u.set(1, c(1.0, 0.0));
        u
    }

    #[test]
    fn mass_examples() {
        assert_eq!(mass(&e1()), 1.0);
        assert_eq!(mass(&FourierCoeffs::zeros(3)), 0.0);
        assert!((mass(&one_plus_e1()) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn momentum_examples() {
        let grid = QuadratureGrid::exact_for_degree(8);
        assert!((momentum(&e1(), &grid).unwrap() + 0.5).abs() < 1e-14);
        let c0 = c(0.7, -0.2);
        let p = momentum(&FourierCoeffs::constant(c0), &grid).unwrap();
        assert!((p - 0.5 * (c0.norm_sqr() * c0.norm_sqr())).abs() < 1e-14);
        assert_eq!(momentum(&FourierCoeffs::zeros(2), &grid).unwrap(), 0.0);
    }

    #[test]
    fn f_quartic_examples() {
        assert_eq!(f_quartic(&e1(), 1), 2.0);
        assert_eq!(f_quartic(&FourierCoeffs::constant(c(2.0, 1.0)), 3), 0.0);
        let mut sym = FourierCoeffs::zeros(1);
        sym.set(-1, c(1.0, 0.0));
        sym.set(1, c(1.0, 0.0));
        assert_eq!(f_quartic(&sym, 1), 0.0);
        assert_eq!(f_quartic(&one_plus_e1(), 1), 6.0);
        // truncation below the band drops the mode
        assert_eq!(f_quartic(&e1(), 0), 0.0);
    }

    #[test]
    fn quadrature_oracle_examples() {
        let grid = QuadratureGrid::exact_for_degree(4);
        assert!((f_quadrature_oracle(&e1(), 1, &grid).unwrap() - 2.0).abs() < 1e-14);
        assert!(
            f_quadrature_oracle(&FourierCoeffs::constant(c(1.0, 1.0)), 1, &grid)
                .unwrap()
                .abs()
                < 1e-14
        );
        let coarse = QuadratureGrid::new(3).unwrap();
        assert!(f_quadrature_oracle(&e1(), 1, &coarse).is_err());
    }

    #[test]
    fn energy_examples() {
        let grid = QuadratureGrid::exact_for_degree(6);
        assert!(energy(&e1(), &grid).unwrap().abs() < 1e-14);
        let c0 = c(0.3, 0.4);
        let e = energy(&FourierCoeffs::constant(c0), &grid).unwrap();
        assert!((e - 0.5 * libm::pow(c0.norm(), 6.0)).abs() < 1e-15);
        assert_eq!(energy(&FourierCoeffs::zeros(1), &grid).unwrap(), 0.0);
    }

    #[test]
    fn chi_examples() {
        let p = DensityParams::new(2.0, 4).unwrap();
        assert_eq!(chi(1.0, &p), 1.0);
        assert_eq!(chi(4.0, &p), 0.0);
        assert_eq!(chi(1.5, &p), 0.5);
        assert_eq!(chi(-1.5, &p), 0.5);
        assert_eq!(chi(2.0, &p), 0.0);
        let smooth = p.with_ramp(Ramp::Smooth);
        assert_eq!(chi(1.0, &smooth), 1.0);
        assert_eq!(chi(2.0, &smooth), 0.0);
        assert!((chi(1.5, &smooth) - 0.5).abs() < 1e-15);
        assert!(DensityParams::new(0.0, 1).is_err());
    }

    #[test]
    fn chi_is_continuous_and_bounded() {
        for ramp in [Ramp::Linear, Ramp::Smooth] {
            let p = DensityParams::new(1.0, 1).unwrap().with_ramp(ramp);
            let mut prev = chi(0.0, &p);
            for i in 1..=3000 {
                let x = i as f64 * 5e-4;
                let y = chi(x, &p);
                assert!((0.0..=1.0).contains(&y));
                assert!((y - prev).abs() < 5e-3, "jump at {x}");
                assert!(y <= prev);
                prev = y;
            }
        }
    }

    #[test]
    fn density_examples() {
        let p = DensityParams::new(1.0, 2).unwrap();
        let grid = QuadratureGrid::exact_for_degree(12);
        assert_eq!(density_g(&FourierCoeffs::zeros(2), &p, &grid).unwrap(), 1.0);
        let big = FourierCoeffs::mode(1, c(1.0, 0.0));
        assert_eq!(density_g(&big, &p, &grid).unwrap(), 0.0);
        let small = FourierCoeffs::mode(1, c(0.1, 0.0));
        let g = density_g(&small, &p, &grid).unwrap();
        let expected = (0.75 * 2e-4 - 0.5 * 1e-6f64).exp();
        assert!((g - expected).abs() < 1e-15, "{g} vs {expected}");
    }

    #[test]
    fn gauge_f_examples() {
        let grid = QuadratureGrid::exact_for_degree(4);
        assert!((gauge_f(&e1(), &grid).unwrap() + 0.5).abs() < 1e-14);
        assert!(
            (gauge_f(&FourierCoeffs::constant(c(1.0, 0.0)), &grid).unwrap() - 1.5).abs() < 1e-14
        );
        assert_eq!(gauge_f(&FourierCoeffs::zeros(1), &grid).unwrap(), 0.0);
    }

    #[test]
    fn h2_examples() {
        let h = hamiltonian_h2(&e1(), &FourierCoeffs::mode(-1, c(1.0, 0.0)));
        assert!(h.norm() < 1e-15, "{h}");
        let z = FourierCoeffs::zeros(2);
        assert_eq!(hamiltonian_h2(&z, &z), c(0.0, 0.0));
    }
}
