//! The truncated Hamiltonian system in the independent coordinates
//! `(u, v)`, its restriction to `v = ū`, a fixed-step RK4 integrator with
//! conservation monitoring, the gauge transform, and the Monte Carlo
//! invariance test for the truncated Gibbs measure.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::functionals::{self, density_g, f_quartic, gauge_f, DensityParams};
use crate::random_field::{effective_sample_size, sample_phi, weighted_mean_bootstrap, SeedSpec};
use crate::spectral::{FourierCoeffs, QuadratureGrid};
use crate::stats::Estimate;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `(δH/δu, δH/δv)` at `(u, v)`:
///
/// `δH/δu = -∂²v - (3/2) i u ∂(v²) + (3/2) u² v³`,
/// `δH/δv = -∂²u + (3/2) i v ∂(u²) + (3/2) u³ v²`.
///
/// Both outputs have band `5 * max(band u, band v)`.
pub fn variational_derivatives(
    u: &FourierCoeffs,
    v: &FourierCoeffs,
) -> (FourierCoeffs, FourierCoeffs) {
    let band = 5 * u.band().max(v.band());
    let u2 = u.multiply(u);
    let v2 = v.multiply(v);
    let u2v2 = u2.multiply(&v2);
    let half = Complex64::new(0.0, 1.5);

    let du = -v.derivative().derivative() - u.multiply(&v2.derivative()).scale(half)
        + u2v2.multiply(v).scale_real(1.5);
    let dv = -u.derivative().derivative()
        + v.multiply(&u2.derivative()).scale(half)
        + u2v2.multiply(u).scale_real(1.5);
    (du.with_band(band), dv.with_band(band))
}

/// `K(u, v)(w1, w2)`:
///
/// `z1 = -u ∂⁻¹(u w1) - i w2 + u ∂⁻¹(v w2)`,
/// `z2 =  i w1 + v ∂⁻¹(u w1) - v ∂⁻¹(v w2)`.
pub fn apply_k(
    u: &FourierCoeffs,
    v: &FourierCoeffs,
    w1: &FourierCoeffs,
    w2: &FourierCoeffs,
) -> (FourierCoeffs, FourierCoeffs) {
    let a = u.multiply(w1).antiderivative();
    let b = v.multiply(w2).antiderivative();
    let z1 = -u.multiply(&a) - w2.scale(I) + u.multiply(&b);
    let z2 = w1.scale(I) + v.multiply(&a) - v.multiply(&b);
    (z1, z2)
}

/// Relative skew defect `|⟨K w, z⟩ + ⟨w, K z⟩| / (|⟨K w, z⟩| + |⟨w, K z⟩|)`
/// for the bilinear pairing summed over both components.
pub fn skew_defect(
    u: &FourierCoeffs,
    v: &FourierCoeffs,
    w: [&FourierCoeffs; 2],
    z: [&FourierCoeffs; 2],
) -> f64 {
    let (kw1, kw2) = apply_k(u, v, w[0], w[1]);
    let (kz1, kz2) = apply_k(u, v, z[0], z[1]);
    let left = kw1.pairing(z[0]) + kw2.pairing(z[1]);
    let right = w[0].pairing(&kz1) + w[1].pairing(&kz2);
    let scale = left.norm() + right.norm();
    if scale == 0.0 {
        0.0
    } else {
        (left + right).norm() / scale
    }
}

/// Max-coefficient residual of
/// `∂⁻¹(u ∂²v) = ∂⁻¹(v ∂²u) + u ∂v - v ∂u - ∫(u ∂v - v ∂u)`.
pub fn ipp1_residual(u: &FourierCoeffs, v: &FourierCoeffs) -> f64 {
    let lhs = u.multiply(&v.derivative().derivative()).antiderivative();
    let cross = u.multiply(&v.derivative()) - v.multiply(&u.derivative());
    let rhs = v.multiply(&u.derivative().derivative()).antiderivative() + cross.zero_mean();
    lhs.max_abs_diff(&rhs)
}

/// Max-coefficient residual of
/// `∂⁻¹(u² ∂(v²)) = -∂⁻¹(v² ∂(u²)) + u² v² - ∫ u² v²`.
pub fn ipp2_residual(u: &FourierCoeffs, v: &FourierCoeffs) -> f64 {
    let u2 = u.multiply(u);
    let v2 = v.multiply(v);
    let lhs = u2.multiply(&v2.derivative()).antiderivative();
    let rhs = -v2.multiply(&u2.derivative()).antiderivative() + u2.multiply(&v2).zero_mean();
    lhs.max_abs_diff(&rhs)
}

/// Right-hand side of the truncated pair system
/// `∂_t(u, v) = Π_N K(u_N, v_N) Π_N (δH/δu, δH/δv)(u_N, v_N)`.
pub fn rhs_pair(
    u: &FourierCoeffs,
    v: &FourierCoeffs,
    band: usize,
) -> (FourierCoeffs, FourierCoeffs) {
    let un = u.project(band);
    let vn = v.project(band);
    let (du, dv) = variational_derivatives(&un, &vn);
    let (z1, z2) = apply_k(&un, &vn, &du.project(band), &dv.project(band));
    (z1.project(band), z2.project(band))
}

/// `∂_t u` of the truncated system on the real slice `v = ū`.
pub fn rhs_hamiltonian(u: &FourierCoeffs, band: usize) -> FourierCoeffs {
    let un = u.project(band);
    rhs_pair(&un, &un.conjugate(), band).0
}

/// Named pieces of the expanded truncated equation, solved for `∂_t u`:
/// `∂_t u = i∂²u_N + Π_N ∂(|u_N|² u_N) - i u_N F - i R_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsExpansion {
    pub rhs: FourierCoeffs,
    pub r_n: FourierCoeffs,
    /// `[i∂²u, Π_N ∂(|u|²u), -i u F, first R_N bracket, second R_N bracket]`,
    /// each already carrying its factor in the expression above, so that
    /// `rhs` is their sum.
    pub terms: [FourierCoeffs; 5],
    /// `max_n |rhs_n - rhs_hamiltonian_n|`.
    pub discrepancy: f64,
}

pub const EXPANSION_TERM_NAMES: [&str; 5] = [
    "i d2u",
    "P_N d(|u|^2 u)",
    "-i u F_u",
    "R_N cubic bracket",
    "R_N quintic bracket",
];

/// The expanded form of the truncated equation, assembled term by term and
/// compared with [`rhs_hamiltonian`].
pub fn rhs_expanded(u: &FourierCoeffs, band: usize) -> RhsExpansion {
    let u = u.project(band);
    let ub = u.conjugate();
    let perp = |w: &FourierCoeffs| w.project_complement(band);
    let u2 = u.multiply(&u);
    let ub2 = ub.multiply(&ub);
    let modsq = u.multiply(&ub);

    let t1 = u.derivative().derivative().scale(I);
    let t2 = modsq.multiply(&u).derivative().project(band);

    // F_u = 2 Im ∫ u ∂ū + (3/2) ∫|u|⁴ with ∫|u|⁴ = ‖u²‖² exactly
    let im_u_dub = -u.modes().map(|(n, c)| n as f64 * c.norm_sqr()).sum::<f64>();
    let f_u = 2.0 * im_u_dub + 1.5 * u2.l2_norm_squared();
    let t3 = u.scale(Complex64::new(0.0, -f_u));

    let cubic_bracket = u.multiply(&perp(&u.multiply(&ub2.derivative())))
        + ub.multiply(&perp(&ub.multiply(&u2.derivative())));
    let r_cubic = u
        .multiply(&cubic_bracket.antiderivative())
        .project(band)
        .scale_real(1.5);

    let quartic = modsq.multiply(&modsq);
    let quintic_bracket =
        u.multiply(&perp(&quartic.multiply(&ub))) - ub.multiply(&perp(&quartic.multiply(&u)));
    let r_quintic = u
        .multiply(&quintic_bracket.antiderivative())
        .project(band)
        .scale(Complex64::new(0.0, 1.5));

    let r_n = &r_cubic + &r_quintic;
    let t4 = r_cubic.scale(-I);
    let t5 = r_quintic.scale(-I);
    let rhs = &(&(&(&t1 + &t2) + &t3) + &t4) + &t5;
    let discrepancy = rhs.max_abs_diff(&rhs_hamiltonian(&u, band));
    RhsExpansion {
        rhs,
        r_n,
        terms: [t1, t2, t3, t4, t5],
        discrepancy,
    }
}

/// Complex least-squares coefficients `a_k` with
/// `rhs_hamiltonian ≈ Σ a_k terms_k`, stacked over several inputs.
/// All ones means the expanded form reproduces the system.
pub fn fit_expansion_coefficients(inputs: &[FourierCoeffs], band: usize) -> Result<[Complex64; 5]> {
    let mut gram = [[Complex64::new(0.0, 0.0); 5]; 5];
    let mut rhs = [Complex64::new(0.0, 0.0); 5];
    for u in inputs {
        let exp = rhs_expanded(u, band);
        let target = rhs_hamiltonian(u, band);
        for j in 0..5 {
            for k in 0..5 {
                gram[j][k] += exp.terms[k].inner_product(&exp.terms[j]);
            }
            rhs[j] += target.inner_product(&exp.terms[j]);
        }
    }
    solve_dense(gram, rhs)
        .ok_or_else(|| invalid("inputs", "expansion terms are linearly dependent"))
}

fn solve_dense<const D: usize>(
    mut a: [[Complex64; D]; D],
    mut b: [Complex64; D],
) -> Option<[Complex64; D]> {
    let scale = a.iter().flatten().map(|x| x.norm()).fold(0.0, f64::max);
    for col in 0..D {
        let pivot = (col..D).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
        if a[pivot][col].norm() <= 1e-14 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..D {
            let factor = a[row][col] / a[col][col];
            for k in col..D {
                let sub = factor * a[col][k];
                a[row][k] -= sub;
            }
            let sub = factor * b[col];
            b[row] -= sub;
        }
    }
    let mut x = [Complex64::new(0.0, 0.0); D];
    for row in (0..D).rev() {
        let mut acc = b[row];
        for k in row + 1..D {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub step: f64,
    pub scheme: Scheme,
    /// Abort when `|mass(t) - mass(0)|` exceeds this.
    pub max_drift: f64,
}

impl IntegratorConfig {
    pub fn new(step: f64, max_drift: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(invalid("step", "step must be positive and finite"));
        }
        if !(max_drift > 0.0) {
            return Err(invalid("max_drift", "drift tolerance must be positive"));
        }
        Ok(Self {
            step,
            scheme: Scheme::Rk4,
            max_drift,
        })
    }
}

/// A point of the truncated flow with its monitored quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub u: FourierCoeffs,
    pub t: f64,
    pub mass: f64,
    /// `H(Π_N u, Π_N ū)`.
    pub energy: f64,
    pub gauge_f: f64,
}

impl FlowState {
    pub fn new(u: FourierCoeffs, t: f64, grid: &QuadratureGrid) -> Result<Self> {
        if !u.is_finite() {
            return Err(Error::FlowBlowUp { t });
        }
        Ok(Self {
            mass: functionals::mass(&u),
            energy: functionals::energy(&u, grid)?,
            gauge_f: gauge_f(&u, grid)?,
            u,
            t,
        })
    }
}

pub type Trajectory = Vec<FlowState>;

/// Grid on which the monitored quantities of band-`N` states are exact.
pub fn monitor_grid(band: usize) -> QuadratureGrid {
    QuadratureGrid::exact_for_degree(6 * band.max(1))
}

fn rk4(u: &FourierCoeffs, band: usize, h: f64) -> FourierCoeffs {
    let k1 = rhs_hamiltonian(u, band);
    let k2 = rhs_hamiltonian(&(u + &k1.scale_real(0.5 * h)), band);
    let k3 = rhs_hamiltonian(&(u + &k2.scale_real(0.5 * h)), band);
    let k4 = rhs_hamiltonian(&(u + &k3.scale_real(h)), band);
    let incr = &(&k1 + &k2.scale_real(2.0)) + &(&k3.scale_real(2.0) + &k4);
    u + &incr.scale_real(h / 6.0)
}

/// One RK4 step of signed length `h` (the configured step's sign is not
/// used; pass `-step` to go backwards).
pub fn step_signed(
    state: &FlowState,
    band: usize,
    h: f64,
    grid: &QuadratureGrid,
) -> Result<FlowState> {
    let u = rk4(&state.u.project(band), band, h);
    FlowState::new(u, state.t + h, grid)
}

/// Advances `state` by `config.step`.
pub fn step(state: &FlowState, band: usize, config: &IntegratorConfig) -> Result<FlowState> {
    step_signed(state, band, config.step, &monitor_grid(band))
}

fn step_plan(t_final: f64, step: f64) -> (usize, f64) {
    if t_final == 0.0 {
        return (0, 0.0);
    }
    let steps = libm::ceil(libm::fabs(t_final) / step - 1e-9).max(1.0) as usize;
    (steps, t_final / steps as f64)
}

/// Integrates `Π_N u0` to time `t_final` (either sign) in steps of at most
/// `config.step`, recording every state.
pub fn evolve(
    u0: &FourierCoeffs,
    band: usize,
    t_final: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    if !u0.is_finite() {
        return Err(Error::NonFinite("initial data"));
    }
    if !t_final.is_finite() {
        return Err(invalid("T", "final time must be finite"));
    }
    let grid = monitor_grid(band);
    let first = FlowState::new(u0.project(band), 0.0, &grid)?;
    let (steps, h) = step_plan(t_final, config.step);
    let mut traj = Vec::with_capacity(steps + 1);
    traj.push(first);
    for _ in 0..steps {
        let prev = traj.last().expect("non-empty");
        let next = step_signed(prev, band, h, &grid)?;
        let drift = libm::fabs(next.mass - traj[0].mass);
        if drift > config.max_drift {
            return Err(Error::MassDrift {
                t: next.t,
                drift,
                tolerance: config.max_drift,
            });
        }
        traj.push(next);
    }
    Ok(traj)
}

/// `Φ_N(t) u0` without recording intermediate states.
pub fn flow_map(
    u0: &FourierCoeffs,
    band: usize,
    t_final: f64,
    config: &IntegratorConfig,
) -> Result<FourierCoeffs> {
    let (steps, h) = step_plan(t_final, config.step);
    let mut u = u0.project(band);
    let m0 = u.l2_norm();
    for k in 0..steps {
        u = rk4(&u, band, h);
        let t = (k + 1) as f64 * h;
        if !u.is_finite() {
            return Err(Error::FlowBlowUp { t });
        }
        let drift = libm::fabs(u.l2_norm() - m0);
        if drift > config.max_drift {
            return Err(Error::MassDrift {
                t,
                drift,
                tolerance: config.max_drift,
            });
        }
    }
    Ok(u)
}

/// Evolves the pair `(u, v)` without imposing `v = ū`; returns the final
/// pair. Used to check that the real slice is preserved.
pub fn evolve_pair(
    u0: &FourierCoeffs,
    v0: &FourierCoeffs,
    band: usize,
    t_final: f64,
    step: f64,
) -> (FourierCoeffs, FourierCoeffs) {
    let (steps, h) = step_plan(t_final, step);
    let mut u = u0.project(band);
    let mut v = v0.project(band);
    let shift = |a: &FourierCoeffs, k: &FourierCoeffs, s: f64| a + &k.scale_real(s);
    for _ in 0..steps {
        let (a1, b1) = rhs_pair(&u, &v, band);
        let (a2, b2) = rhs_pair(&shift(&u, &a1, 0.5 * h), &shift(&v, &b1, 0.5 * h), band);
        let (a3, b3) = rhs_pair(&shift(&u, &a2, 0.5 * h), &shift(&v, &b2, 0.5 * h), band);
        let (a4, b4) = rhs_pair(&shift(&u, &a3, h), &shift(&v, &b3, h), band);
        let du = &(&a1 + &a2.scale_real(2.0)) + &(&a3.scale_real(2.0) + &a4);
        let dv = &(&b1 + &b2.scale_real(2.0)) + &(&b3.scale_real(2.0) + &b4);
        u = shift(&u, &du, h / 6.0);
        v = shift(&v, &dv, h / 6.0);
    }
    (u, v)
}

/// `v(t) = e^{i ∫₀ᵗ F_u} u(t)`, with the phase integral taken by the
/// trapezoidal rule over the recorded states. Monitored quantities of the
/// output are recomputed from `v`.
pub fn gauge_transform(traj: &[FlowState]) -> Result<Trajectory> {
    let mut out = Vec::with_capacity(traj.len());
    let mut phase = 0.0;
    for (k, state) in traj.iter().enumerate() {
        if k > 0 {
            let prev = &traj[k - 1];
            phase += 0.5 * (prev.gauge_f + state.gauge_f) * (state.t - prev.t);
        }
        let rot = Complex64::new(libm::cos(phase), libm::sin(phase));
        let v = if phase == 0.0 {
            state.u.clone()
        } else {
            state.u.scale(rot)
        };
        let grid = monitor_grid(v.band());
        out.push(FlowState::new(v, state.t, &grid)?);
    }
    Ok(out)
}

/// Real observables for the invariance experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowObservable {
    Mass,
    /// `‖u‖⁴_{L⁴}`.
    L4Quartic,
    /// `Re c_1`.
    ReC1,
    /// `‖∂u‖²_{L²}`.
    Dirichlet,
    /// `f_N(u)`.
    FN,
}

impl FlowObservable {
    pub const ALL: [FlowObservable; 5] = [
        FlowObservable::Mass,
        FlowObservable::L4Quartic,
        FlowObservable::ReC1,
        FlowObservable::Dirichlet,
        FlowObservable::FN,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FlowObservable::Mass => "mass",
            FlowObservable::L4Quartic => "l4_quartic",
            FlowObservable::ReC1 => "re_c1",
            FlowObservable::Dirichlet => "dirichlet",
            FlowObservable::FN => "f_N",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == name)
    }

    pub fn evaluate(&self, u: &FourierCoeffs, band: usize) -> f64 {
        match self {
            FlowObservable::Mass => u.l2_norm(),
            FlowObservable::L4Quartic => u.multiply(u).l2_norm_squared(),
            FlowObservable::ReC1 => u.get(1).re,
            FlowObservable::Dirichlet => u.dirichlet_energy(),
            FlowObservable::FN => f_quartic(u, band),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceRow {
    pub observable: String,
    pub before: Estimate,
    pub after: Estimate,
    pub difference: f64,
    /// `sqrt(se_before² + se_after²)`.
    pub combined_se: f64,
    /// Bootstrap standard error of the weighted mean of per-sample
    /// differences; smaller because before and after share samples.
    pub paired_se: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub band: usize,
    pub kappa: f64,
    pub t: f64,
    pub count: usize,
    pub master_seed: u64,
    /// Samples with nonzero density weight; only these are evolved.
    pub support: usize,
    pub ess: f64,
    pub rows: Vec<InvarianceRow>,
}

impl InvarianceReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Minimum effective sample size for the invariance test.
pub const MIN_ESS: f64 = 100.0;

/// Draws `φ_N` on streams `0..count` of `seed`, weights them by `G_N`,
/// evolves the weighted ones to time `t` and compares weighted means of each
/// observable before and after.
#[allow(clippy::too_many_arguments)]
pub fn invariance_experiment<E: Executor>(
    band: usize,
    params: &DensityParams,
    t: f64,
    count: usize,
    seed: u64,
    observables: &[FlowObservable],
    config: &IntegratorConfig,
    exec: &E,
) -> Result<InvarianceReport> {
    if count == 0 {
        return Err(invalid("count", "need at least one sample"));
    }
    if params.band != band {
        return Err(invalid(
            "band",
            "density truncation must match the flow truncation",
        ));
    }
    let grid = monitor_grid(band);
    let draws: Vec<Result<(FourierCoeffs, f64)>> = exec.map_indices(count, |i| {
        let u = sample_phi(band, SeedSpec::new(seed, i as u64));
        let w = density_g(&u, params, &grid)?;
        Ok((u, w))
    });
    let mut samples = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for d in draws {
        let (u, w) = d?;
        if w > 0.0 {
            samples.push(u);
            weights.push(w);
        }
    }
    let ess = effective_sample_size(&weights);
    if !(ess >= MIN_ESS) {
        return Err(Error::EffectiveSampleSize {
            ess,
            required: MIN_ESS,
        });
    }
    let evolved: Vec<Result<FourierCoeffs>> =
        exec.map_indices(samples.len(), |i| flow_map(&samples[i], band, t, config));
    let evolved: Vec<FourierCoeffs> = evolved.into_iter().collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(observables.len());
    for obs in observables {
        let before_vals: Vec<f64> = samples.iter().map(|u| obs.evaluate(u, band)).collect();
        let after_vals: Vec<f64> = evolved.iter().map(|u| obs.evaluate(u, band)).collect();
        let diffs: Vec<f64> = after_vals
            .iter()
            .zip(&before_vals)
            .map(|(a, b)| a - b)
            .collect();
        let before = weighted_mean_bootstrap(&before_vals, &weights, seed)?;
        let after = weighted_mean_bootstrap(&after_vals, &weights, seed)?;
        let paired = weighted_mean_bootstrap(&diffs, &weights, seed)?;
        let difference = after.mean - before.mean;
        let combined_se =
            libm::sqrt(before.std_error * before.std_error + after.std_error * after.std_error);
        rows.push(InvarianceRow {
            observable: obs.name().into(),
            before,
            after,
            difference,
            combined_se,
            paired_se: paired.std_error,
            pass: libm::fabs(difference) <= 3.0 * combined_se,
        });
    }
    Ok(InvarianceReport {
        band,
        kappa: params.kappa,
        t,
        count,
        master_seed: seed,
        support: samples.len(),
        ess,
        rows,
    })
}
