//! Experiment configuration files.
//!
//! A configuration is a JSON object
//! `{"experiment": <name>, "parameters": {...}}`. Parameters missing from the
//! file take the defaults listed on each parameter struct. Unknown keys,
//! wrong types and out-of-range values are all collected, so a rejected file
//! reports every problem at once.

use std::collections::BTreeSet;
use std::path::PathBuf;

use gibbs_dnls_core::chaos_stats::{RateMode, MAX_HERMITE_DEGREE, MIN_RATE_SAMPLES};
use gibbs_dnls_core::functionals::Ramp;
use gibbs_dnls_core::hamiltonian_flow::FlowObservable;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{HarnessError, Result};

pub const EXPERIMENTS: [&str; 9] = [
    "sample",
    "functionals",
    "cauchy_rate",
    "chaos",
    "tails",
    "kernel_sum",
    "flow",
    "invariance",
    "gn_lp",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleParams {
    #[serde(rename = "N")]
    pub band: usize,
    pub count: usize,
    pub seed: u64,
    /// Exponent of the reported `H^σ` norm.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalsParams {
    #[serde(rename = "N")]
    pub band: usize,
    pub count: usize,
    pub seed: u64,
    pub kappa: f64,
    pub ramp: String,
    /// Largest relative gap allowed between `f_N` and its quadrature oracle.
    pub oracle_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CauchyParams {
    pub bands: Vec<usize>,
    pub count: usize,
    pub seed: u64,
    pub mode: String,
    pub slope_min: f64,
    pub slope_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosParams {
    pub orders: Vec<usize>,
    pub exponents: Vec<f64>,
    pub dim: usize,
    pub count: usize,
    pub seed: u64,
    /// Master seed of the random coefficient tables; table of order `k` uses
    /// stream `k`.
    pub coefficient_seed: u64,
    /// Also check the closed-form ratios of `g_1` and `g_1²` at `p = 4`.
    pub spot_checks: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailsParams {
    #[serde(rename = "N")]
    pub band: usize,
    pub count: usize,
    pub seed: u64,
    /// `l4_norm`, `derivative_square_sup` or `re_c0`.
    pub observable: String,
    pub theta: f64,
    /// `none`, `mass_filter` or `ball`.
    pub conditioning: String,
    pub kappa: f64,
    /// Explicit thresholds; when empty they are spread from the
    /// `from_quantile` quantile to the last level with enough exceedances.
    pub lambdas: Vec<f64>,
    pub from_quantile: f64,
    pub thresholds: usize,
    pub min_r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelParams {
    pub ns: Vec<i64>,
    pub bands: Vec<usize>,
    pub eps: Vec<f64>,
    /// Allowed `max / median` of the bound ratio over the sweep.
    pub max_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowParams {
    #[serde(rename = "N")]
    pub band: usize,
    /// `gaussian` (a draw of `φ_N` rescaled to `amplitude`) or `single_mode`.
    pub initial: String,
    pub amplitude: f64,
    pub mode: i64,
    pub seed: u64,
    pub t: f64,
    pub step: f64,
    /// Mass drift that aborts the integration.
    pub max_drift: f64,
    /// Write the full state every this many steps; 0 disables snapshots.
    pub snapshot_every: usize,
    pub mass_tolerance: f64,
    pub energy_tolerance: f64,
    pub gauge_tolerance: f64,
    /// Extra step sizes for the drift-order study; empty skips it.
    pub order_steps: Vec<f64>,
    pub min_order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceParams {
    #[serde(rename = "N")]
    pub band: usize,
    pub kappa: f64,
    pub t: f64,
    pub count: usize,
    pub seed: u64,
    pub step: f64,
    pub max_drift: f64,
    pub observables: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GnLpParams {
    pub bands: Vec<usize>,
    pub kappa: f64,
    pub p: f64,
    pub count: usize,
    pub seed: u64,
    /// Tilted mean mass as a fraction of `κ²`.
    pub tilt_fraction: f64,
    /// Coarse truncations `N` of the `|G_{2N} - G_N|` study.
    pub gap_bands: Vec<usize>,
    pub eps_grid: Vec<f64>,
    /// Allowed `max / min` of `E[G_N^p]` over `bands`.
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Sample(SampleParams),
    Functionals(FunctionalsParams),
    CauchyRate(CauchyParams),
    Chaos(ChaosParams),
    Tails(TailsParams),
    KernelSum(KernelParams),
    Flow(FlowParams),
    Invariance(InvarianceParams),
    GnLp(GnLpParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Sample(_) => "sample",
            Experiment::Functionals(_) => "functionals",
            Experiment::CauchyRate(_) => "cauchy_rate",
            Experiment::Chaos(_) => "chaos",
            Experiment::Tails(_) => "tails",
            Experiment::KernelSum(_) => "kernel_sum",
            Experiment::Flow(_) => "flow",
            Experiment::Invariance(_) => "invariance",
            Experiment::GnLp(_) => "gn_lp",
        }
    }

    fn parameters(&self) -> Value {
        let v = match self {
            Experiment::Sample(p) => serde_json::to_value(p),
            Experiment::Functionals(p) => serde_json::to_value(p),
            Experiment::CauchyRate(p) => serde_json::to_value(p),
            Experiment::Chaos(p) => serde_json::to_value(p),
            Experiment::Tails(p) => serde_json::to_value(p),
            Experiment::KernelSum(p) => serde_json::to_value(p),
            Experiment::Flow(p) => serde_json::to_value(p),
            Experiment::Invariance(p) => serde_json::to_value(p),
            Experiment::GnLp(p) => serde_json::to_value(p),
        };
        v.expect("parameters serialize")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Default output directory; the CLI `--out` flag overrides it.
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// The configuration with all defaults made explicit.
    pub fn to_json(&self) -> Value {
        let mut params = self.experiment.parameters();
        if let (Some(out), Value::Object(m)) = (&self.output, &mut params) {
            m.insert("output".into(), Value::String(out.display().to_string()));
        }
        serde_json::json!({
            "experiment": self.experiment.name(),
            "parameters": params,
        })
    }
}

/// Typed reads from the parameter map that record problems instead of
/// stopping at the first one.
struct Reader<'a> {
    map: &'a Map<String, Value>,
    seen: BTreeSet<&'static str>,
    errors: Vec<String>,
}

impl<'a> Reader<'a> {
    fn new(map: &'a Map<String, Value>) -> Self {
        Self {
            map,
            seen: BTreeSet::new(),
            errors: Vec::new(),
        }
    }

    fn fail(&mut self, key: &str, reason: impl std::fmt::Display) {
        self.errors.push(format!("parameters.{key}: {reason}"));
    }

    fn check(&mut self, ok: bool, key: &str, reason: &str) {
        if !ok {
            self.fail(key, reason);
        }
    }

    fn get<T>(
        &mut self,
        key: &'static str,
        default: T,
        conv: impl Fn(&Value) -> Option<T>,
        kind: &str,
    ) -> T {
        self.seen.insert(key);
        match self.map.get(key) {
            None => default,
            Some(v) => match conv(v) {
                Some(x) => x,
                None => {
                    self.fail(key, format!("expected {kind}, got {v}"));
                    default
                }
            },
        }
    }

    fn usize(&mut self, key: &'static str, default: usize) -> usize {
        self.get(
            key,
            default,
            |v| v.as_u64().and_then(|x| usize::try_from(x).ok()),
            "a non-negative integer",
        )
    }

    fn u64(&mut self, key: &'static str, default: u64) -> u64 {
        self.get(key, default, Value::as_u64, "a non-negative 64-bit integer")
    }

    fn i64(&mut self, key: &'static str, default: i64) -> i64 {
        self.get(key, default, Value::as_i64, "an integer")
    }

    fn f64(&mut self, key: &'static str, default: f64) -> f64 {
        self.get(
            key,
            default,
            |v| v.as_f64().filter(|x| x.is_finite()),
            "a finite number",
        )
    }

    fn bool(&mut self, key: &'static str, default: bool) -> bool {
        self.get(key, default, Value::as_bool, "a boolean")
    }

    fn string(&mut self, key: &'static str, default: &str, allowed: &[&str]) -> String {
        let s = self.get(
            key,
            default.to_string(),
            |v| v.as_str().map(str::to_string),
            "a string",
        );
        if !allowed.contains(&s.as_str()) {
            self.fail(key, format!("`{s}` is not one of {}", allowed.join(", ")));
        }
        s
    }

    fn list<T: Clone>(
        &mut self,
        key: &'static str,
        default: &[T],
        conv: impl Fn(&Value) -> Option<T>,
        kind: &str,
    ) -> Vec<T> {
        self.get(
            key,
            default.to_vec(),
            |v| v.as_array()?.iter().map(&conv).collect::<Option<Vec<T>>>(),
            &format!("a list of {kind}"),
        )
    }

    fn usize_list(&mut self, key: &'static str, default: &[usize]) -> Vec<usize> {
        self.list(
            key,
            default,
            |v| v.as_u64().and_then(|x| usize::try_from(x).ok()),
            "non-negative integers",
        )
    }

    fn i64_list(&mut self, key: &'static str, default: &[i64]) -> Vec<i64> {
        self.list(key, default, Value::as_i64, "integers")
    }

    fn f64_list(&mut self, key: &'static str, default: &[f64]) -> Vec<f64> {
        self.list(
            key,
            default,
            |v| v.as_f64().filter(|x| x.is_finite()),
            "finite numbers",
        )
    }

    fn string_list(&mut self, key: &'static str, default: &[&str]) -> Vec<String> {
        let d: Vec<String> = default.iter().map(|s| s.to_string()).collect();
        self.list(key, &d, |v| v.as_str().map(str::to_string), "strings")
    }

    fn positive(&mut self, key: &str, x: f64) {
        self.check(x > 0.0, key, "must be positive");
    }

    fn increasing<T: PartialOrd>(&mut self, key: &str, xs: &[T], min_len: usize) {
        if xs.len() < min_len {
            self.fail(key, format!("needs at least {min_len} entries"));
        }
        self.check(
            xs.windows(2).all(|w| w[0] < w[1]),
            key,
            "entries must be strictly increasing",
        );
    }

    fn finish(mut self) -> Vec<String> {
        let unknown: Vec<String> = self
            .map
            .keys()
            .filter(|k| !self.seen.contains(k.as_str()))
            .cloned()
            .collect();
        for k in unknown {
            self.fail(&k, "unknown parameter");
        }
        self.errors
    }
}

const RAMPS: [&str; 2] = ["linear", "smooth"];
const RATE_MODES: [&str; 2] = ["f_full", "x_only"];
const TAIL_OBSERVABLES: [&str; 3] = ["l4_norm", "derivative_square_sup", "re_c0"];
const CONDITIONINGS: [&str; 3] = ["none", "mass_filter", "ball"];
const INITIAL_DATA: [&str; 2] = ["gaussian", "single_mode"];

pub fn parse_ramp(s: &str) -> Option<Ramp> {
    match s {
        "linear" => Some(Ramp::Linear),
        "smooth" => Some(Ramp::Smooth),
        _ => None,
    }
}

pub fn parse_rate_mode(s: &str) -> Option<RateMode> {
    match s {
        "f_full" => Some(RateMode::FFull),
        "x_only" => Some(RateMode::XOnly),
        _ => None,
    }
}

fn sample(r: &mut Reader) -> SampleParams {
    let p = SampleParams {
        band: r.usize("N", 4),
        count: r.usize("count", 10),
        seed: r.u64("seed", 0),
        sigma: r.f64("sigma", 0.25),
    };
    r.check(p.count >= 1, "count", "must be at least 1");
    p
}

fn functionals(r: &mut Reader) -> FunctionalsParams {
    let p = FunctionalsParams {
        band: r.usize("N", 4),
        count: r.usize("count", 100),
        seed: r.u64("seed", 0),
        kappa: r.f64("kappa", 1.0),
        ramp: r.string("ramp", "linear", &RAMPS),
        oracle_tolerance: r.f64("oracle_tolerance", 1e-10),
    };
    r.check(p.count >= 1, "count", "must be at least 1");
    r.positive("kappa", p.kappa);
    r.positive("oracle_tolerance", p.oracle_tolerance);
    p
}

fn cauchy(r: &mut Reader) -> CauchyParams {
    let bands = r.usize_list("bands", &[8, 16, 32, 64, 128]);
    let count = r.usize("count", 2000);
    let seed = r.u64("seed", 0);
    let mode = r.string("mode", "f_full", &RATE_MODES);
    let (lo, hi) = if mode == "x_only" {
        (-2.4, -1.6)
    } else {
        (-1.8, -1.2)
    };
    let p = CauchyParams {
        bands,
        count,
        seed,
        mode,
        slope_min: r.f64("slope_min", lo),
        slope_max: r.f64("slope_max", hi),
    };
    r.increasing("bands", &p.bands, 2);
    r.check(
        p.bands.first().is_none_or(|b| *b >= 1),
        "bands",
        "truncations must be positive",
    );
    if p.count < MIN_RATE_SAMPLES {
        r.fail(
            "count",
            format!("{} is below the minimum {MIN_RATE_SAMPLES}", p.count),
        );
    }
    r.check(
        p.slope_min <= p.slope_max,
        "slope_min",
        "must not exceed slope_max",
    );
    p
}

fn chaos(r: &mut Reader) -> ChaosParams {
    let p = ChaosParams {
        orders: r.usize_list("orders", &[1, 2, 3]),
        exponents: r.f64_list("exponents", &[4.0, 6.0]),
        dim: r.usize("dim", 16),
        count: r.usize("count", 100_000),
        seed: r.u64("seed", 0),
        coefficient_seed: r.u64("coefficient_seed", 1),
        spot_checks: r.bool("spot_checks", true),
    };
    r.check(!p.orders.is_empty(), "orders", "must not be empty");
    r.check(
        p.orders
            .iter()
            .all(|k| (1..=MAX_HERMITE_DEGREE).contains(k)),
        "orders",
        "chaos orders must lie in 1..=30",
    );
    r.check(
        p.exponents.iter().all(|q| *q >= 2.0),
        "exponents",
        "moment exponents must be >= 2",
    );
    r.check(p.dim >= 1, "dim", "must be at least 1");
    r.check(p.count >= 2, "count", "must be at least 2");
    p
}

fn tails(r: &mut Reader) -> TailsParams {
    let p = TailsParams {
        band: r.usize("N", 32),
        count: r.usize("count", 100_000),
        seed: r.u64("seed", 0),
        observable: r.string("observable", "l4_norm", &TAIL_OBSERVABLES),
        theta: r.f64("theta", 2.0),
        conditioning: r.string("conditioning", "none", &CONDITIONINGS),
        kappa: r.f64("kappa", 0.4),
        lambdas: r.f64_list("lambdas", &[]),
        from_quantile: r.f64("from_quantile", 0.5),
        thresholds: r.usize("thresholds", 12),
        min_r_squared: r.f64("min_r_squared", 0.9),
    };
    r.check(
        [0.5, 1.0, 2.0].contains(&p.theta),
        "theta",
        "must be 0.5, 1 or 2",
    );
    r.check(p.count >= 1, "count", "must be at least 1");
    r.positive("kappa", p.kappa);
    if !p.lambdas.is_empty() {
        r.increasing("lambdas", &p.lambdas, 3);
    }
    r.check(
        (0.0..1.0).contains(&p.from_quantile),
        "from_quantile",
        "must lie in [0, 1)",
    );
    r.check(p.thresholds >= 3, "thresholds", "must be at least 3");
    p
}

fn kernel(r: &mut Reader) -> KernelParams {
    let p = KernelParams {
        ns: r.i64_list("ns", &[0, 5, 20]),
        bands: r.usize_list("bands", &[4, 8, 16, 32, 64]),
        eps: r.f64_list("eps", &[0.25]),
        max_spread: r.f64("max_spread", 2.0),
    };
    r.check(!p.ns.is_empty(), "ns", "must not be empty");
    r.check(
        !p.bands.is_empty() && p.bands.iter().all(|b| *b >= 1),
        "bands",
        "truncations must be positive",
    );
    r.check(
        !p.eps.is_empty() && p.eps.iter().all(|e| *e > 0.0 && *e <= 0.5),
        "eps",
        "each epsilon must lie in (0, 1/2]",
    );
    r.positive("max_spread", p.max_spread);
    p
}

fn flow(r: &mut Reader) -> FlowParams {
    let p = FlowParams {
        band: r.usize("N", 8),
        initial: r.string("initial", "gaussian", &INITIAL_DATA),
        amplitude: r.f64("amplitude", 0.1),
        mode: r.i64("mode", 1),
        seed: r.u64("seed", 0),
        t: r.f64("t", 1.0),
        step: r.f64("step", 1e-3),
        max_drift: r.f64("max_drift", 1e-6),
        snapshot_every: r.usize("snapshot_every", 0),
        mass_tolerance: r.f64("mass_tolerance", 1e-8),
        energy_tolerance: r.f64("energy_tolerance", 1e-6),
        gauge_tolerance: r.f64("gauge_tolerance", 1e-12),
        order_steps: r.f64_list("order_steps", &[]),
        min_order: r.f64("min_order", 3.75),
    };
    r.check(p.band >= 1, "N", "must be at least 1");
    r.check(p.amplitude >= 0.0, "amplitude", "must be non-negative");
    r.check(
        p.initial != "single_mode" || p.mode.unsigned_abs() as usize <= p.band,
        "mode",
        "single-mode datum must lie in the band",
    );
    r.check(p.t >= 0.0, "t", "must be non-negative");
    r.positive("step", p.step);
    r.positive("max_drift", p.max_drift);
    r.positive("mass_tolerance", p.mass_tolerance);
    r.positive("energy_tolerance", p.energy_tolerance);
    r.positive("gauge_tolerance", p.gauge_tolerance);
    r.check(
        p.order_steps.iter().all(|h| *h > 0.0),
        "order_steps",
        "steps must be positive",
    );
    r.check(
        p.order_steps.is_empty() || p.order_steps.len() >= 2,
        "order_steps",
        "needs at least 2 steps",
    );
    p
}

fn invariance(r: &mut Reader) -> InvarianceParams {
    let default_obs = ["l4_quartic", "re_c1", "dirichlet", "f_N"];
    let p = InvarianceParams {
        band: r.usize("N", 4),
        kappa: r.f64("kappa", 1.0),
        t: r.f64("t", 0.5),
        count: r.usize("count", 20_000),
        seed: r.u64("seed", 2024),
        step: r.f64("step", 2.5e-3),
        max_drift: r.f64("max_drift", 1e-6),
        observables: r.string_list("observables", &default_obs),
    };
    r.positive("kappa", p.kappa);
    r.check(p.t >= 0.0, "t", "must be non-negative");
    r.check(p.count >= 1, "count", "must be at least 1");
    r.positive("step", p.step);
    r.positive("max_drift", p.max_drift);
    r.check(
        !p.observables.is_empty(),
        "observables",
        "must not be empty",
    );
    for o in &p.observables {
        if FlowObservable::from_name(o).is_none() {
            let names: Vec<&str> = FlowObservable::ALL.iter().map(|o| o.name()).collect();
            r.fail(
                "observables",
                format!("`{o}` is not one of {}", names.join(", ")),
            );
        }
    }
    p
}

fn gn_lp(r: &mut Reader) -> GnLpParams {
    let p = GnLpParams {
        bands: r.usize_list("bands", &[16, 32, 64]),
        kappa: r.f64("kappa", 0.3),
        p: r.f64("p", 2.0),
        count: r.usize("count", 10_000),
        seed: r.u64("seed", 0),
        tilt_fraction: r.f64("tilt_fraction", 0.95),
        gap_bands: r.usize_list("gap_bands", &[8, 16, 32]),
        eps_grid: r.f64_list("eps_grid", &[1e-3, 1e-2, 1e-1]),
        max_ratio: r.f64("max_ratio", 2.0),
    };
    r.increasing("bands", &p.bands, 1);
    r.check(
        p.bands.first().is_none_or(|b| *b >= 1),
        "bands",
        "truncations must be positive",
    );
    r.increasing("gap_bands", &p.gap_bands, 0);
    r.check(
        p.gap_bands.first().is_none_or(|b| *b >= 1),
        "gap_bands",
        "truncations must be positive",
    );
    r.positive("kappa", p.kappa);
    r.check(p.p >= 1.0, "p", "must be at least 1");
    r.check(p.count >= 2, "count", "must be at least 2");
    r.positive("tilt_fraction", p.tilt_fraction);
    r.check(
        p.eps_grid.iter().all(|e| *e > 0.0),
        "eps_grid",
        "entries must be positive",
    );
    r.check(p.max_ratio >= 1.0, "max_ratio", "must be at least 1");
    p
}

/// Parses and validates a configuration file.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| HarnessError::Config(vec![format!("not valid JSON: {e}")]))?;
    let Value::Object(top) = value else {
        return Err(HarnessError::Config(vec![
            "configuration must be a JSON object".into(),
        ]));
    };
    let mut errors = Vec::new();
    for k in top.keys() {
        if k != "experiment" && k != "parameters" {
            errors.push(format!("{k}: unknown key"));
        }
    }
    let name = match top.get("experiment") {
        None => {
            errors.push("experiment: missing".into());
            None
        }
        Some(Value::String(s)) if EXPERIMENTS.contains(&s.as_str()) => Some(s.as_str()),
        Some(v) => {
            errors.push(format!(
                "experiment: {v} is not one of {}",
                EXPERIMENTS.join(", ")
            ));
            None
        }
    };
    let empty = Map::new();
    let params = match top.get("parameters") {
        None => &empty,
        Some(Value::Object(m)) => m,
        Some(v) => {
            errors.push(format!("parameters: expected an object, got {v}"));
            &empty
        }
    };
    let Some(name) = name else {
        return Err(HarnessError::Config(errors));
    };

    let mut r = Reader::new(params);
    let output = r.get(
        "output",
        None,
        |v| v.as_str().map(|s| Some(PathBuf::from(s))),
        "a path string",
    );
    let experiment = match name {
        "sample" => Experiment::Sample(sample(&mut r)),
        "functionals" => Experiment::Functionals(functionals(&mut r)),
        "cauchy_rate" => Experiment::CauchyRate(cauchy(&mut r)),
        "chaos" => Experiment::Chaos(chaos(&mut r)),
        "tails" => Experiment::Tails(tails(&mut r)),
        "kernel_sum" => Experiment::KernelSum(kernel(&mut r)),
        "flow" => Experiment::Flow(flow(&mut r)),
        "invariance" => Experiment::Invariance(invariance(&mut r)),
        "gn_lp" => Experiment::GnLp(gn_lp(&mut r)),
        _ => unreachable!("experiment names are checked above"),
    };
    errors.extend(r.finish());
    if errors.is_empty() {
        Ok(ExperimentConfig { experiment, output })
    } else {
        Err(HarnessError::Config(errors))
    }
}
