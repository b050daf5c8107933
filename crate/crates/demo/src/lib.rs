//! WebAssembly bindings behind `www/index.html`.
//!
//! Each export takes a JSON config string and returns a JSON string, so the
//! page needs no bindings beyond strings. The plain functions below are what
//! the exports call; native tests use them directly.

use period_lattice::infra::{from_corners_1d, BoxInfrastructure, GridContext, GridSpec};
use period_lattice::pipeline::distance_to_basis;
use period_lattice::planner::{input_from_infra, ledger_table, plan, recovery_parameters, PlanMode};
use period_lattice::rational::{parse_q, to_f64};
use period_lattice::recovery::end_to_end_recover;
use period_lattice::sampler::fourier::fft_distribution_1d;
use period_lattice::sampler::shift::minimal_shift_count;
use period_lattice::sampler::targets::{rounding_radius, CosineForm, Rounding};
use period_lattice::sampler::{
    build_collision_set, find_clean_anchor, find_good_shift, run_sampling_experiment, verify_fourier_bound, BoundSettings, SampleMode,
    SampleParams, TERM_BUDGET,
};
use period_lattice::{qi, Q};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest `q` for the distribution view; the exact bound check grows with `q^2 N`.
pub const MAX_Q: u64 = 2000;
/// Largest `q` and sample count for sampling and recovery.
pub const MAX_Q_RECOVER: u64 = 40000;
pub const MAX_SAMPLES: u64 = 16;
/// Bars sent to the page for the distribution plot.
pub const BARS: usize = 1024;

#[derive(Clone, Debug, Deserialize)]
#[serde(default)]
pub struct DemoConfig {
    pub period: String,
    pub corners: String,
    #[serde(rename = "N")]
    pub big_n: u64,
    pub q: u64,
    pub kappa: String,
    pub seed: u64,
    pub samples: u64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig { period: "40".into(), corners: "0,13,27".into(), big_n: 32, q: 160, kappa: "1/9".into(), seed: 1, samples: 2 }
    }
}

type Res<T> = Result<T, String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn parse_config(cfg: &str, max_q: u64) -> Res<DemoConfig> {
    let c: DemoConfig = if cfg.trim().is_empty() { DemoConfig::default() } else { serde_json::from_str(cfg).map_err(err)? };
    if c.big_n == 0 || c.q == 0 || c.q > max_q {
        return Err(format!("need N > 0 and 0 < q <= {max_q}"));
    }
    if c.samples == 0 || c.samples > MAX_SAMPLES {
        return Err(format!("need 1 to {MAX_SAMPLES} samples"));
    }
    Ok(c)
}

fn infra(c: &DemoConfig) -> Res<BoxInfrastructure> {
    let period = parse_q(&c.period).map_err(err)?;
    let corners = c.corners.split(',').map(parse_q).collect::<Result<Vec<Q>, _>>().map_err(err)?;
    from_corners_1d(&period, &corners, &qi(1)).map_err(err)
}

fn spec(c: &DemoConfig, inf: &BoxInfrastructure) -> Res<GridSpec> {
    Ok(GridSpec::new(1, c.big_n, c.q, minimal_shift_count(inf, 1, c.q).map_err(err)?))
}

/// Desk plan for the instance, with the configured `N`, `q` and `kappa` as overrides.
pub fn plan_instance(cfg: &str) -> Res<String> {
    let c = parse_config(cfg, MAX_Q_RECOVER)?;
    let inf = infra(&c)?;
    let mut inp = input_from_infra(&inf, qi(1)).map_err(err)?;
    inp.big_n = Some(c.big_n);
    inp.q = Some(c.q);
    inp.kappa = Some(parse_q(&c.kappa).map_err(err)?.into());
    let p = plan(&inp, PlanMode::Desk).map_err(err)?;
    let out = json!({ "satisfied": p.mode_satisfied(), "table": ledger_table(&p), "L": p.l });
    Ok(out.to_string())
}

/// Largest probability per bin, so narrow peaks survive the downsampling.
fn bins(probs: &[f64], count: usize) -> Vec<f64> {
    let width = probs.len().div_ceil(count).max(1);
    probs.chunks(width).map(|c| c.iter().cloned().fold(0.0, f64::max)).collect()
}

/// Exact outcome distribution for one good shift and clean anchor, and the certified lower bound check.
pub fn outcome_distribution(cfg: &str) -> Res<String> {
    let c = parse_config(cfg, MAX_Q)?;
    let inf = infra(&c)?;
    let sp = spec(&c, &inf)?;
    let ctx = GridContext::new(&inf, &sp, None).map_err(err)?;
    let sigma = find_good_shift(&ctx, c.seed, 1000).map_err(err)?;
    let anchor = find_clean_anchor(&ctx, &sigma, c.seed, 1000).map_err(err)?;
    let cs = build_collision_set(&ctx, &sigma, &anchor).map_err(err)?;
    let dist = fft_distribution_1d(&cs.members, &sp).map_err(err)?;
    let settings = BoundSettings {
        kappa: parse_q(&c.kappa).map_err(err)?,
        rounding: Rounding::Floor,
        form: CosineForm::Half,
        mode: SampleMode::ExactDist,
        budget_terms: TERM_BUDGET,
    };
    let v = verify_fourier_bound(&inf, &sp, &sigma, &anchor, &settings).map_err(err)?;
    let out = json!({
        "w_side": dist.w_side,
        "L": sp.l,
        "shift": sigma,
        "anchor": anchor,
        "M": cs.m(),
        "bins": bins(&dist.probs, BARS),
        "targets": v.targets,
        "min_ratio": v.min_ratio,
        "bound": v.bound,
        "pass": v.pass(),
    });
    Ok(out.to_string())
}

#[derive(Serialize)]
struct Recovered {
    outcomes: Vec<Option<Vec<u64>>>,
    hits: usize,
    period: Option<f64>,
    distance: Option<f64>,
    certified_gamma: Option<f64>,
    success: bool,
    error: Option<String>,
}

/// Samples at the configured grid, then recovery of the period from them.
pub fn sample_and_recover(cfg: &str) -> Res<String> {
    let c = parse_config(cfg, MAX_Q_RECOVER)?;
    let inf = infra(&c)?;
    let sp = spec(&c, &inf)?;
    let params = SampleParams {
        big_n: c.big_n,
        big_n0: c.big_n,
        q: c.q,
        l: sp.l,
        kappa: parse_q(&c.kappa).map_err(err)?,
        reps: Some(c.samples as usize),
        mode: SampleMode::ExactDist,
        rounding: Rounding::Nearest,
        budget_terms: TERM_BUDGET,
    };
    let samples = run_sampling_experiment(&inf, &params, c.seed).map_err(err)?;
    let cands: Vec<Vec<Q>> = samples.iter().filter_map(|s| s.candidate.as_ref()).map(|v| v.iter().map(|x| x.0.clone()).collect()).collect();
    let inp = input_from_infra(&inf, qi(1)).map_err(err)?;
    let (mu, det_dual, mode) = recovery_parameters(&inp);
    let eps = rounding_radius(1, c.q, Rounding::Nearest);
    let mut r = Recovered {
        outcomes: samples.iter().map(|s| s.w.clone()).collect(),
        hits: samples.iter().filter(|s| s.hit.is_some()).count(),
        period: None,
        distance: None,
        certified_gamma: None,
        success: false,
        error: None,
    };
    match end_to_end_recover(&cands, &eps, &mu, &det_dual, mode) {
        Ok(e) => {
            r.period = Some(to_f64(&e.basis[0][0]));
            r.certified_gamma = e.dual.gamma().map(to_f64);
            let d = distance_to_basis(&inf.lambda, &e.basis).map_err(err)?;
            r.distance = d.as_ref().map(to_f64);
            r.success = d.is_some_and(|d| d <= qi(1));
        }
        Err(e) => r.error = Some(e.to_string()),
    }
    Ok(serde_json::to_string(&r).map_err(err)?)
}

fn js(r: Res<String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = planInstance)]
pub fn plan_instance_js(cfg: &str) -> Result<String, JsValue> {
    js(plan_instance(cfg))
}

#[wasm_bindgen(js_name = outcomeDistribution)]
pub fn outcome_distribution_js(cfg: &str) -> Result<String, JsValue> {
    js(outcome_distribution(cfg))
}

#[wasm_bindgen(js_name = sampleAndRecover)]
pub fn sample_and_recover_js(cfg: &str) -> Result<String, JsValue> {
    js(sample_and_recover(cfg))
}

/// Default config as JSON, for the page's initial form values.
#[wasm_bindgen(js_name = defaultConfig)]
pub fn default_config() -> String {
    let c = DemoConfig::default();
    let v: Value = json!({ "period": c.period, "corners": c.corners, "N": c.big_n, "q": c.q, "kappa": c.kappa, "seed": c.seed, "samples": c.samples });
    v.to_string()
}
