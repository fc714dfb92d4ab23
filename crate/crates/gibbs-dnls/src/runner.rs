//! Dispatch from a validated configuration to the numerical core.

use std::time::Instant;

use gibbs_dnls_core::chaos_stats::{
    chaos_ratio, fit_tail, kernel_tail_sum, multi_index_count, sample_observable, tail_lambdas,
    x_gap_norm_oracle, ChaosTable, Conditioning, RateMode,
};
use gibbs_dnls_core::density_moments::{ball_mass, gn_gap, gn_moment};
use gibbs_dnls_core::functionals::{
    density_g, energy, f_quadrature_oracle, f_quartic, gauge_f, mass, momentum, DensityParams,
};
use gibbs_dnls_core::hamiltonian_flow::{
    evolve, gauge_transform, invariance_experiment, monitor_grid, FlowObservable, IntegratorConfig,
};
use gibbs_dnls_core::random_field::{sample_ensemble, sample_gaussian, sample_phi, GENERATOR_NAME};
use gibbs_dnls_core::spectral::bracket_sq;
use gibbs_dnls_core::stats::{self, Estimate};
use gibbs_dnls_core::{Complex64, Executor, FourierCoeffs, LpExponent, QuadratureGrid, SeedSpec};
use serde_json::{json, Value};

use crate::config::{
    parse_ramp, parse_rate_mode, CauchyParams, ChaosParams, Experiment, ExperimentConfig,
    FlowParams, FunctionalsParams, GnLpParams, InvarianceParams, KernelParams, SampleParams,
    TailsParams,
};
use crate::error::{Context, Result};
use crate::formats::{ensemble_lines, CoeffsJson, Manifest};
use crate::record::{Cell, Document, Payload, RunRecord, SeedRecord, Stream, Table, Verdict};

#[derive(Default)]
struct Outcome {
    payload: Payload,
    verdicts: Vec<Verdict>,
    seeds: Vec<SeedRecord>,
}

fn estimate(e: Estimate) -> Value {
    json!({ "mean": e.mean, "std_error": e.std_error })
}

/// Runs the experiment described by `config`.
pub fn run<E: Executor>(config: &ExperimentConfig, exec: &E) -> Result<RunRecord> {
    let start = Instant::now();
    log::info!("running {}", config.experiment.name());
    let out = match &config.experiment {
        Experiment::Sample(p) => sample(p, exec)?,
        Experiment::Functionals(p) => functionals(p, exec)?,
        Experiment::CauchyRate(p) => cauchy(p, exec)?,
        Experiment::Chaos(p) => chaos(p, exec)?,
        Experiment::Tails(p) => tails(p, exec)?,
        Experiment::KernelSum(p) => kernel(p)?,
        Experiment::Flow(p) => flow(p)?,
        Experiment::Invariance(p) => invariance(p, exec)?,
        Experiment::GnLp(p) => gn_lp(p, exec)?,
    };
    let wall_time_seconds = start.elapsed().as_secs_f64();
    log::info!(
        "{} finished in {wall_time_seconds:.2} s",
        config.experiment.name()
    );
    Ok(RunRecord {
        experiment: config.experiment.name().to_string(),
        config: config.to_json(),
        generator: GENERATOR_NAME.to_string(),
        seeds: out.seeds,
        wall_time_seconds,
        payload: out.payload,
        verdicts: out.verdicts,
    })
}

fn sample<E: Executor>(p: &SampleParams, exec: &E) -> Result<Outcome> {
    let e = sample_ensemble(p.band, p.count, p.seed, exec).context("sampling the ensemble")?;
    let mut out = Outcome::default();
    let mut table = Table::new("samples", &["sample_index", "mass", "h_sigma_norm"]);
    let mut sq = Vec::with_capacity(e.len());
    for (i, u) in e.samples().iter().enumerate() {
        table.push(vec![
            i.into(),
            mass(u).into(),
            u.sobolev_norm(p.sigma).into(),
        ]);
        sq.push(u.l2_norm_squared());
    }
    let b = p.band as i64;
    let oracle: f64 = (-b..=b).map(|n| 1.0 / bracket_sq(n)).sum();
    let est = stats::mean_estimate(&sq);
    let manifest = serde_json::to_value(Manifest::for_ensemble(&e))?;
    out.payload.summarize("manifest", &manifest);
    out.payload.summarize("mean_mass_squared", estimate(est));
    out.payload.summarize("mean_mass_squared_exact", oracle);
    out.payload.tables.push(table);
    out.payload.documents.push(Document {
        name: "manifest".into(),
        content: manifest,
    });
    out.payload.streams.push(Stream {
        name: "ensemble".into(),
        lines: ensemble_lines(&e)
            .into_iter()
            .map(|l| serde_json::to_value(l).expect("ensemble line serializes"))
            .collect(),
    });
    if p.count >= 2 {
        out.verdicts.push(Verdict::at_most(
            "E|u_N|^2 within 3 SE of its exact value",
            (est.mean - oracle).abs(),
            3.0 * est.std_error,
        ));
    }
    out.seeds
        .push(SeedRecord::range("samples", p.seed, p.count));
    Ok(out)
}

fn functionals<E: Executor>(p: &FunctionalsParams, exec: &E) -> Result<Outcome> {
    let params = DensityParams::new(p.kappa, p.band)
        .context("density parameters")?
        .with_ramp(parse_ramp(&p.ramp).expect("validated ramp"));
    let grid = QuadratureGrid::exact_for_degree(6 * p.band.max(1));
    let rows = exec.map_indices(p.count, |i| -> gibbs_dnls_core::Result<[f64; 7]> {
        let u = sample_phi(p.band, SeedSpec::new(p.seed, i as u64));
        Ok([
            mass(&u),
            momentum(&u, &grid)?,
            f_quartic(&u, p.band),
            energy(&u, &grid)?,
            density_g(&u, &params, &grid)?,
            gauge_f(&u, &grid)?,
            f_quadrature_oracle(&u, p.band, &grid)?,
        ])
    });
    let mut table = Table::new(
        "functionals",
        &[
            "sample_index",
            "mass",
            "momentum",
            "f_N",
            "energy",
            "G_N",
            "F_u",
        ],
    );
    let mut max_gap: f64 = 0.0;
    for (i, r) in rows.into_iter().enumerate() {
        let r = r.context(format!("functionals of sample {i}"))?;
        let gap = (r[2] - r[6]).abs() / r[6].abs().max(f64::MIN_POSITIVE);
        max_gap = max_gap.max(gap);
        table.push(vec![
            i.into(),
            r[0].into(),
            r[1].into(),
            r[2].into(),
            r[3].into(),
            r[4].into(),
            r[5].into(),
        ]);
    }
    let mut out = Outcome::default();
    out.payload.summarize("max_relative_oracle_gap", max_gap);
    out.payload.tables.push(table);
    out.verdicts.push(Verdict::at_most(
        "f_N spectral form vs quadrature oracle, max relative gap",
        max_gap,
        p.oracle_tolerance,
    ));
    out.seeds
        .push(SeedRecord::range("samples", p.seed, p.count));
    Ok(out)
}

fn cauchy<E: Executor>(p: &CauchyParams, exec: &E) -> Result<Outcome> {
    let mode = parse_rate_mode(&p.mode).expect("validated mode");
    let fit = gibbs_dnls_core::chaos_stats::cauchy_rate(&p.bands, p.count, p.seed, mode, exec)
        .context("cauchy_rate")?;
    let with_oracle = mode == RateMode::XOnly;
    let mut cols = vec!["N", "M", "l2_gap", "std_error"];
    if with_oracle {
        cols.push("exact");
    }
    let mut table = Table::new("rate", &cols);
    for (j, &n) in fit.bands.iter().enumerate() {
        let mut row: Vec<Cell> = vec![
            n.into(),
            (2 * n).into(),
            fit.values[j].into(),
            fit.std_errors[j].into(),
        ];
        if with_oracle {
            row.push(x_gap_norm_oracle(n).into());
        }
        table.push(row);
    }
    let mut out = Outcome::default();
    out.payload.summarize("mode", &p.mode);
    out.payload.summarize("slope", fit.slope);
    out.payload.summarize("intercept", fit.intercept);
    out.payload.summarize("r_squared", fit.r_squared);
    out.payload
        .summarize("slope_ci95", [fit.ci_low, fit.ci_high]);
    out.payload.summarize("sample_count", fit.sample_count);
    out.payload.tables.push(table);
    out.verdicts.push(Verdict::within(
        format!("log-log slope of |F_2N - F_N| ({})", p.mode),
        fit.slope,
        p.slope_min,
        p.slope_max,
    ));
    out.seeds.push(SeedRecord::range("draws", p.seed, p.count));
    Ok(out)
}

fn chaos<E: Executor>(p: &ChaosParams, exec: &E) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut table = Table::new("chaos", &["order", "p", "ratio", "std_error", "bound"]);
    for &k in &p.orders {
        let coeffs = sample_gaussian(
            SeedSpec::new(p.coefficient_seed, k as u64),
            multi_index_count(k, p.dim),
        );
        let t = ChaosTable::new(k, p.dim, coeffs).context("coefficient table")?;
        for &q in &p.exponents {
            let r = chaos_ratio(&t, q, p.count, p.seed, exec)
                .context(format!("chaos ratio k={k} p={q}"))?;
            table.push(vec![
                k.into(),
                q.into(),
                r.ratio.into(),
                r.std_error.into(),
                r.bound.into(),
            ]);
            out.verdicts.push(Verdict::at_most(
                format!("|S|_p/|S|_2 for k={k}, p={q}, d={}", p.dim),
                r.ratio,
                r.bound + 3.0 * r.std_error,
            ));
        }
    }
    out.payload.tables.push(table);
    if p.spot_checks {
        let mut spot = Table::new("chaos_spot", &["case", "ratio", "std_error", "exact"]);
        let one = Complex64::new(1.0, 0.0);
        for (case, order, exact) in [("g_1", 1, 2f64.powf(0.25)), ("g_1^2", 2, 6f64.powf(0.25))] {
            let t = ChaosTable::new(order, 1, vec![one]).context("spot table")?;
            let r = chaos_ratio(&t, 4.0, p.count, p.seed, exec).context("spot ratio")?;
            spot.push(vec![
                case.into(),
                r.ratio.into(),
                r.std_error.into(),
                exact.into(),
            ]);
            out.verdicts.push(Verdict::at_most(
                format!("|{case}|_4/|{case}|_2 vs closed form, deviation"),
                (r.ratio - exact).abs(),
                3.0 * r.std_error,
            ));
        }
        out.payload.tables.push(spot);
    }
    out.seeds
        .push(SeedRecord::range("gaussians", p.seed, p.count));
    out.seeds.push(SeedRecord {
        role: "coefficient tables".into(),
        master_seed: p.coefficient_seed,
        streams: "stream k for order k".into(),
    });
    Ok(out)
}

/// `P(|Re c_0| > λ)` for `Re c_0 ~ N(0, 1/2)`.
fn re_c0_survival(lambda: f64) -> f64 {
    libm::erfc(lambda)
}

fn tails<E: Executor>(p: &TailsParams, exec: &E) -> Result<Outcome> {
    let band = p.band;
    let l4_grid = QuadratureGrid::exact_for_degree(4 * band.max(1));
    let sup_grid = QuadratureGrid::oversampled(2 * band.max(1));
    let observable = |u: &FourierCoeffs| -> f64 {
        match p.observable.as_str() {
            "l4_norm" => u
                .lp_norm(LpExponent::Finite(4.0), &l4_grid)
                .expect("exponent 4 is valid"),
            "derivative_square_sup" => u
                .multiply(u)
                .derivative()
                .lp_norm(LpExponent::Infinity, &sup_grid)
                .expect("sup norm is valid"),
            _ => u.get(0).re.abs(),
        }
    };
    let conditioning = match p.conditioning.as_str() {
        "mass_filter" => Conditioning::MassFilter { kappa: p.kappa },
        "ball" => Conditioning::Ball { kappa: p.kappa },
        _ => Conditioning::None,
    };
    let values = sample_observable(band, p.count, p.seed, conditioning, observable, exec)
        .context("sampling")?;
    let lambdas = if p.lambdas.is_empty() {
        tail_lambdas(&values, p.from_quantile, p.thresholds)
    } else {
        p.lambdas.clone()
    };
    let fit = fit_tail(&values, &lambdas, p.theta).context("tail fit")?;
    let with_oracle = p.observable == "re_c0" && p.conditioning == "none";
    let mut cols = vec!["lambda", "survival", "exceedances", "in_fit"];
    if with_oracle {
        cols.push("exact");
    }
    let mut table = Table::new("survival", &cols);
    for (j, &l) in fit.lambdas.iter().enumerate() {
        let mut row: Vec<Cell> = vec![
            l.into(),
            fit.survival[j].into(),
            fit.exceedances[j].into(),
            (j < fit.fitted).into(),
        ];
        if with_oracle {
            row.push(re_c0_survival(l).into());
        }
        table.push(row);
    }
    let mut out = Outcome::default();
    out.payload.summarize("observable", &p.observable);
    out.payload.summarize("conditioning", &p.conditioning);
    out.payload.summarize("theta", fit.theta);
    out.payload.summarize("slope", fit.slope);
    out.payload.summarize("intercept", fit.intercept);
    out.payload.summarize("rate", fit.rate);
    out.payload.summarize("r_squared", fit.r_squared);
    out.payload.summarize("fitted_thresholds", fit.fitted);
    out.payload.summarize("sample_count", fit.sample_count);
    out.verdicts.push(Verdict::at_least(
        format!("r^2 of log-survival vs lambda^{}", fit.theta),
        fit.r_squared,
        p.min_r_squared,
    ));
    out.verdicts
        .push(Verdict::below("fitted log-survival slope", fit.slope, 0.0));
    out.verdicts.push(Verdict::holds(
        "survival non-increasing",
        fit.survival.windows(2).all(|w| w[1] <= w[0]),
        "exact",
    ));
    if with_oracle {
        let n = fit.fitted;
        let obs: Vec<f64> = fit.survival[..n].iter().map(|s| s.ln()).collect();
        let exact: Vec<f64> = fit.lambdas[..n]
            .iter()
            .map(|l| re_c0_survival(*l).ln())
            .collect();
        let r2 = stats::r_squared_against(&obs, &exact);
        out.payload.summarize("erfc_r_squared", r2);
        out.verdicts.push(Verdict::at_least(
            "r^2 of log-survival against log erfc",
            r2,
            0.98,
        ));
    }
    out.payload.tables.push(table);
    out.seeds.push(SeedRecord::range("draws", p.seed, p.count));
    Ok(out)
}

fn kernel(p: &KernelParams) -> Result<Outcome> {
    let mut out = Outcome::default();
    let mut table = Table::new("kernel", &["eps", "n", "N", "sum", "bound_ratio"]);
    let mut spreads = Vec::new();
    for &eps in &p.eps {
        let mut ratios = Vec::new();
        let mut symmetric = true;
        let mut decreasing = true;
        for &n in &p.ns {
            let mut prev = f64::INFINITY;
            for &big_n in &p.bands {
                let k = kernel_tail_sum(n, big_n, eps).context("kernel sum")?;
                let mirror = kernel_tail_sum(-n, big_n, eps).context("kernel sum")?;
                symmetric &= mirror.sum == k.sum;
                decreasing &= k.sum < prev;
                prev = k.sum;
                ratios.push(k.bound_ratio);
                table.push(vec![
                    eps.into(),
                    n.into(),
                    big_n.into(),
                    k.sum.into(),
                    k.bound_ratio.into(),
                ]);
            }
        }
        let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let spread = max / stats::median(&ratios);
        spreads.push(json!({ "eps": eps, "max_over_median": spread }));
        out.verdicts.push(Verdict::at_most(
            format!("kernel bound ratio max/median, eps={eps}"),
            spread,
            p.max_spread,
        ));
        out.verdicts.push(Verdict::holds(
            format!("kernel sum symmetric in n, eps={eps}"),
            symmetric,
            "exact",
        ));
        out.verdicts.push(Verdict::holds(
            format!("kernel sum decreasing in N, eps={eps}"),
            decreasing,
            "strict",
        ));
    }
    out.payload.summarize("spread", spreads);
    out.payload.tables.push(table);
    Ok(out)
}

fn flow_initial(p: &FlowParams) -> FourierCoeffs {
    match p.initial.as_str() {
        "single_mode" => {
            FourierCoeffs::mode(p.mode, Complex64::new(p.amplitude, 0.0)).with_band(p.band)
        }
        _ => {
            let u = sample_phi(p.band, SeedSpec::new(p.seed, 0));
            let norm = u.l2_norm();
            u.scale_real(p.amplitude / norm)
        }
    }
}

/// Largest `||v(x)| - |u(x)||` over the monitor grid, relative to `max |u|`.
fn modulus_gap(u: &FourierCoeffs, v: &FourierCoeffs, grid: &QuadratureGrid) -> f64 {
    let a = grid.evaluate(u);
    let b = grid.evaluate(v);
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x.norm() - y.norm()).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Bound on the relative modulus gap allowed for `e^{iθ} u` against `u`:
/// a few rounding errors of the rotation and the grid synthesis.
pub const MODULUS_ULPS: f64 = 64.0 * f64::EPSILON;

fn drifts(traj: &[gibbs_dnls_core::hamiltonian_flow::FlowState]) -> (f64, f64) {
    let (m0, e0) = (traj[0].mass, traj[0].energy);
    traj.iter().fold((0.0, 0.0), |(m, e), s| {
        (
            f64::max(m, (s.mass - m0).abs()),
            f64::max(e, (s.energy - e0).abs()),
        )
    })
}

fn flow(p: &FlowParams) -> Result<Outcome> {
    let u0 = flow_initial(p);
    let config = IntegratorConfig::new(p.step, p.max_drift).context("integrator")?;
    let traj = evolve(&u0, p.band, p.t, &config).context("integrating the flow")?;
    let mut out = Outcome::default();

    let mut table = Table::new("trajectory", &["t", "mass", "energy", "F_u"]);
    for s in &traj {
        table.push(vec![
            s.t.into(),
            s.mass.into(),
            s.energy.into(),
            s.gauge_f.into(),
        ]);
    }
    out.payload.tables.push(table);
    if p.snapshot_every > 0 {
        let lines = traj
            .iter()
            .step_by(p.snapshot_every)
            .map(|s| {
                let c = CoeffsJson::from(&s.u);
                json!({ "t": s.t, "band": c.band, "re": c.re, "im": c.im })
            })
            .collect();
        out.payload.streams.push(Stream {
            name: "snapshots".into(),
            lines,
        });
    }

    let (mass_drift, energy_drift) = drifts(&traj);
    out.payload
        .summarize("initial", json!(CoeffsJson::from(&u0)));
    out.payload.summarize("steps", traj.len() - 1);
    out.payload.summarize("mass_drift", mass_drift);
    out.payload.summarize("energy_drift", energy_drift);
    out.verdicts
        .push(Verdict::at_most("mass drift", mass_drift, p.mass_tolerance));
    out.verdicts.push(Verdict::at_most(
        "energy drift",
        energy_drift,
        p.energy_tolerance,
    ));

    let gauged = gauge_transform(&traj).context("gauge transform")?;
    let grid = monitor_grid(p.band);
    let f_gap = traj
        .iter()
        .zip(&gauged)
        .map(|(a, b)| (a.gauge_f - b.gauge_f).abs())
        .fold(0.0, f64::max);
    let mod_gap = traj
        .iter()
        .zip(&gauged)
        .map(|(a, b)| modulus_gap(&a.u, &b.u, &grid))
        .fold(0.0, f64::max);
    out.payload.summarize("gauge_f_gap", f_gap);
    out.payload.summarize("gauge_modulus_gap", mod_gap);
    out.verdicts.push(Verdict::at_most(
        "F_u - F_v along the trajectory",
        f_gap,
        p.gauge_tolerance,
    ));
    out.verdicts.push(Verdict::holds(
        "v(0) = u(0)",
        gauged[0].u == traj[0].u,
        "bitwise",
    ));
    out.verdicts.push(Verdict::at_most(
        "|v| - |u| relative to max|u|",
        mod_gap,
        MODULUS_ULPS,
    ));

    if p.initial == "single_mode" {
        let leak = traj
            .iter()
            .map(|s| {
                s.u.modes()
                    .filter(|(n, _)| *n != p.mode)
                    .map(|(_, c)| c.norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let modulus = traj
            .iter()
            .map(|s| (s.u.get(p.mode).norm() - p.amplitude).abs())
            .fold(0.0, f64::max);
        out.verdicts.push(Verdict::at_most(
            "single-mode leakage into other modes",
            leak,
            1e-10,
        ));
        out.verdicts
            .push(Verdict::at_most("single-mode |c| drift", modulus, 1e-10));
    }

    if !p.order_steps.is_empty() {
        let mut order = Table::new("drift_order", &["step", "mass_drift", "energy_drift"]);
        let (mut hs, mut ms, mut es) = (Vec::new(), Vec::new(), Vec::new());
        for &h in &p.order_steps {
            let cfg = IntegratorConfig::new(h, p.max_drift).context("integrator")?;
            let tr =
                evolve(&u0, p.band, p.t, &cfg).context(format!("integrating with step {h}"))?;
            let (m, e) = drifts(&tr);
            order.push(vec![h.into(), m.into(), e.into()]);
            hs.push(h.ln());
            ms.push(m.ln());
            es.push(e.ln());
        }
        let mass_order = stats::linear_fit(&hs, &ms).slope;
        let energy_order = stats::linear_fit(&hs, &es).slope;
        out.payload.summarize("mass_drift_order", mass_order);
        out.payload.summarize("energy_drift_order", energy_order);
        out.payload.tables.push(order);
        out.verdicts.push(Verdict::at_least(
            "mass drift order in h",
            mass_order,
            p.min_order,
        ));
        out.verdicts.push(Verdict::at_least(
            "energy drift order in h",
            energy_order,
            p.min_order,
        ));
    }
    if p.initial == "gaussian" {
        out.seeds
            .push(SeedRecord::range("initial datum", p.seed, 1));
    }
    Ok(out)
}

fn invariance<E: Executor>(p: &InvarianceParams, exec: &E) -> Result<Outcome> {
    let params = DensityParams::new(p.kappa, p.band).context("density parameters")?;
    let observables: Vec<FlowObservable> = p
        .observables
        .iter()
        .map(|o| FlowObservable::from_name(o).expect("validated observable"))
        .collect();
    let config = IntegratorConfig::new(p.step, p.max_drift).context("integrator")?;
    let report = invariance_experiment(
        p.band,
        &params,
        p.t,
        p.count,
        p.seed,
        &observables,
        &config,
        exec,
    )
    .context("invariance experiment")?;
    let mut table = Table::new(
        "invariance",
        &[
            "observable",
            "before",
            "before_se",
            "after",
            "after_se",
            "difference",
            "combined_se",
            "paired_se",
        ],
    );
    let mut out = Outcome::default();
    for r in &report.rows {
        table.push(vec![
            r.observable.as_str().into(),
            r.before.mean.into(),
            r.before.std_error.into(),
            r.after.mean.into(),
            r.after.std_error.into(),
            r.difference.into(),
            r.combined_se.into(),
            r.paired_se.into(),
        ]);
        out.verdicts.push(Verdict::at_most(
            format!("{}: |after - before| / combined SE", r.observable),
            r.difference.abs() / r.combined_se,
            3.0,
        ));
    }
    out.payload.summarize("support", report.support);
    out.payload.summarize("effective_sample_size", report.ess);
    out.payload.tables.push(table);
    out.verdicts.push(Verdict::at_least(
        "effective sample size",
        report.ess,
        gibbs_dnls_core::hamiltonian_flow::MIN_ESS,
    ));
    out.seeds.push(SeedRecord::range("draws", p.seed, p.count));
    Ok(out)
}

/// Seed offset of the independent ball-mass estimate in `gn_lp`.
const BALL_SEED_OFFSET: u64 = 1;

fn gn_lp<E: Executor>(p: &GnLpParams, exec: &E) -> Result<Outcome> {
    let mut out = Outcome::default();
    let ball_seed = p.seed.wrapping_add(BALL_SEED_OFFSET);
    let mut moments = Table::new(
        "moments",
        &[
            "N",
            "moment",
            "moment_se",
            "positive_mass",
            "positive_mass_se",
            "conditional_moment",
            "ball_mass",
            "ball_mass_se",
        ],
    );
    let mut values = Vec::new();
    for &n in &p.bands {
        log::debug!("gn_lp moments at N = {n}");
        let params = DensityParams::new(p.kappa, n).context("density parameters")?;
        let m = gn_moment(&params, p.p, p.count, p.seed, p.tilt_fraction, exec)
            .context(format!("E[G_N^p], N={n}"))?;
        let b = ball_mass(n, p.kappa, p.count, ball_seed, p.tilt_fraction, exec)
            .context(format!("ball mass, N={n}"))?;
        moments.push(vec![
            n.into(),
            m.moment.mean.into(),
            m.moment.std_error.into(),
            m.positive_mass.mean.into(),
            m.positive_mass.std_error.into(),
            m.conditional_moment.into(),
            b.mean.into(),
            b.std_error.into(),
        ]);
        let se = m.positive_mass.std_error.hypot(b.std_error);
        out.verdicts.push(Verdict::at_most(
            format!("N={n}: |P(G_N > 0) - ball mass| / combined SE"),
            (m.positive_mass.mean - b.mean).abs() / se,
            3.0,
        ));
        values.push(m.moment.mean);
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    out.payload.summarize("moment_max_over_min", max / min);
    out.verdicts.push(Verdict::below(
        format!("E[G_N^{}] max/min over N", p.p),
        max / min,
        p.max_ratio,
    ));
    out.payload.tables.push(moments);

    if !p.gap_bands.is_empty() {
        let mut gaps = Table::new("gaps", &["N", "M", "mean_abs_gap", "std_error"]);
        let mut exceed = Table::new(
            "gap_exceedance",
            &["N", "M", "eps", "probability", "std_error"],
        );
        let mut means = Vec::new();
        for &n in &p.gap_bands {
            log::debug!("gn_lp gap at N = {n}");
            let g = gn_gap(
                p.kappa,
                n,
                2 * n,
                p.count,
                p.seed,
                &p.eps_grid,
                p.tilt_fraction,
                exec,
            )
            .context(format!("|G_2N - G_N|, N={n}"))?;
            gaps.push(vec![
                n.into(),
                (2 * n).into(),
                g.mean_abs_gap.mean.into(),
                g.mean_abs_gap.std_error.into(),
            ]);
            for (eps, e) in &g.exceed {
                exceed.push(vec![
                    n.into(),
                    (2 * n).into(),
                    (*eps).into(),
                    e.mean.into(),
                    e.std_error.into(),
                ]);
            }
            means.push(g.mean_abs_gap.mean);
        }
        out.verdicts.push(Verdict::holds(
            "E|G_2N - G_N| decreasing in N",
            means.windows(2).all(|w| w[1] < w[0]),
            "strict",
        ));
        out.payload.tables.push(gaps);
        out.payload.tables.push(exceed);
    }
    out.seeds
        .push(SeedRecord::range("tilted draws", p.seed, p.count));
    out.seeds
        .push(SeedRecord::range("ball mass draws", ball_seed, p.count));
    Ok(out)
}
