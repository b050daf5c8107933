//! Classical simulation of the sampling steps: measure `f`, transform, measure `w`.

pub mod collision;
pub mod fourier;
pub mod shift;
pub mod targets;

pub use collision::{build_collision_set, check_mestimate, m_lower, CollisionSet, MestimateReport};
pub use fourier::{exact_distribution, fft_distribution_1d, targets_mass, FourierDistribution, TERM_BUDGET};
pub use targets::{
    cosine_constant, in_window_targets, kappa_admissible, probability_lower_bound, r_set, CosineForm, DualApproxTarget,
    Rounding,
};

use crate::check::Check;
use crate::error::{Error, Result};
use crate::infra::{BoxInfrastructure, FRep, GridContext, GridSpec};
use crate::lattice::{covering_radius_bound, svp};
use crate::rational::{f64_upper, qi, JsonQ, Q};
use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleMode {
    /// Draw `w` from the full distribution.
    ExactDist,
    /// Only resolve which in-window rounding set (if any) the outcome falls into.
    TargetsOnly,
}

/// `N >= 2 sqrt(n) / lambda_1`, as `N^2 lambda_1^2 >= 4n`.
pub fn premise_grid(n: usize, big_n: u64, lambda1_sq: &Q) -> bool {
    qi((big_n * big_n) as i64) * lambda1_sq >= qi(4 * n as i64)
}

/// `q > 2 n nu + 3n/N`.
pub fn premise_window(n: usize, q: u64, big_n: u64, nu: &Q) -> bool {
    qi(q as i64) > qi(2 * n as i64) * nu + Q::new((3 * n as i64).into(), (big_n as i64).into())
}

/// Uniformly random shift index in `{0..L-1}^n`.
pub fn random_shift<R: Rng>(spec: &GridSpec, rng: &mut R) -> Vec<u64> {
    (0..spec.n).map(|_| rng.gen_range(0..spec.l)).collect()
}

pub fn random_anchor<R: Rng>(spec: &GridSpec, rng: &mut R) -> Vec<u64> {
    (0..spec.n).map(|_| rng.gen_range(0..spec.side())).collect()
}

/// Outcome of checking the Fourier lower bound on one instance.
#[derive(Clone, Debug, Serialize)]
pub struct BoundVerification {
    pub sigma: Vec<u64>,
    pub anchor: Vec<u64>,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "M_lower")]
    pub m_lower: JsonQ,
    pub targets: usize,
    /// Smallest ratio `Pr(R) / bound` over the targets (lower end of the enclosure over upper end of the bound).
    pub min_ratio: f64,
    pub bound: f64,
    pub checks: Vec<Check>,
}

impl BoundVerification {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Settings of one bound verification.
#[derive(Clone, Debug)]
pub struct BoundSettings {
    pub kappa: Q,
    pub rounding: Rounding,
    pub form: CosineForm,
    pub mode: SampleMode,
    pub budget_terms: u128,
}

/// Verify `Pr(R_{lambda*}) >= factor * M_lower * c / W` for every in-window dual vector.
pub fn verify_fourier_bound(
    infra: &BoxInfrastructure,
    spec: &GridSpec,
    sigma: &[u64],
    anchor: &[u64],
    settings: &BoundSettings,
) -> Result<BoundVerification> {
    let n = spec.n;
    let ctx = GridContext::new(infra, spec, None)?;
    let mut checks = Vec::new();
    let (_, l1sq) = svp(&infra.lambda.basis)?;
    let nu = covering_radius_bound(&infra.lambda)?;
    let det = infra.lambda.det()?;
    checks.push(Check::holds("premise: N >= 2 sqrt(n)/lambda_1", "holds", premise_grid(n, spec.big_n, &l1sq)));
    checks.push(Check::holds("premise: q > 2 n nu + 3n/N", "holds", premise_window(n, spec.q, spec.big_n, &nu)));
    checks.push(Check::holds("premise: kappa admissible", "holds", kappa_admissible(spec, &settings.kappa, settings.rounding)));
    let good = ctx.shift_is_good(sigma);
    checks.push(Check::holds("good shift", "G(s) avoids Hgrid", good));
    let cs = build_collision_set(&ctx, sigma, anchor)?;
    checks.push(Check::holds("anchor outside Hbound", "holds", !cs.anchor_in_hbound));
    let ml = m_lower(n, spec.q, spec.big_n, &det, &nu);
    checks.push(Check::at_least("M >= M_lower", qi(cs.m() as i64), ml.clone()));
    let targets = in_window_targets(&infra.lambda, spec, &settings.kappa, settings.rounding)?;
    let c = cosine_constant(spec, &settings.kappa, settings.form);
    let bound = probability_lower_bound(spec, &ml, &c, settings.rounding);
    let bound_hi = f64_upper(&bound.hi);
    let masses: Vec<crate::real::FInt> = match settings.mode {
        SampleMode::ExactDist => {
            let dist = exact_distribution(&cs.members, spec, settings.budget_terms)?;
            checks.push(Check::at_most("normalization |sum - 1|", (dist.total - 1.0).abs(), 2f64.powi(-30)));
            checks.push(Check::at_most("direct vs factored evaluation", dist.plancherel_max_diff, 2f64.powi(-30)));
            checks.push(Check::at_most("certified probability error", dist.err, 2f64.powi(-40)));
            targets.iter().map(|t| dist.mass(&t.r_set)).collect()
        }
        SampleMode::TargetsOnly => targets.iter().map(|t| targets_mass(&cs.members, spec, &t.r_set)).collect(),
    };
    let mut min_ratio = f64::INFINITY;
    let mut failures = 0usize;
    for (t, m) in targets.iter().zip(&masses) {
        if !targets::r_set_radius_ok(t, spec, settings.rounding) {
            failures += 1;
        }
        let r = m.lo / bound_hi;
        min_ratio = min_ratio.min(r);
        if m.lo < bound_hi {
            failures += 1;
        }
    }
    checks.push(Check::holds("targets in window", "at least one", !targets.is_empty()));
    checks.push(Check::at_least("min over targets of Pr(R) / bound", min_ratio, 1.0));
    checks.push(Check::at_most("target failures", failures, 0));
    Ok(BoundVerification {
        sigma: sigma.to_vec(),
        anchor: anchor.to_vec(),
        m: cs.m(),
        m_lower: JsonQ(ml),
        targets: targets.len(),
        min_ratio,
        bound: bound_hi,
        checks,
    })
}

/// Draw shifts from the seeded stream until a good one appears.
pub fn find_good_shift(ctx: &GridContext, seed: u64, tries: u64) -> Result<Vec<u64>> {
    for t in 0..tries {
        let mut r = rng::stream(seed, "shift", t);
        let s = random_shift(&ctx.spec, &mut r);
        if ctx.shift_is_good(&s) {
            return Ok(s);
        }
    }
    Err(Error::NotFound)
}

/// Draw anchors until one lies outside `Hbound`.
pub fn find_clean_anchor(ctx: &GridContext, sigma: &[u64], seed: u64, tries: u64) -> Result<Vec<u64>> {
    for t in 0..tries {
        let mut r = rng::stream(seed, "anchor", t);
        let v = random_anchor(&ctx.spec, &mut r);
        if ctx.anchor_ok(sigma, &v) {
            return Ok(v);
        }
    }
    Err(Error::NotFound)
}

/// Exhaustive collision-structure audit over every anchor outside `Hbound`.
#[derive(Clone, Debug, Serialize)]
pub struct CollisionAudit {
    pub anchors: usize,
    pub classes: usize,
    pub min_m: usize,
    pub m_lower: JsonQ,
    pub unique_translate_failures: usize,
    pub existence_failures: usize,
    pub below_m_lower: usize,
}

impl CollisionAudit {
    pub fn pass(&self) -> bool {
        self.unique_translate_failures == 0 && self.existence_failures == 0 && self.below_m_lower == 0
    }
}

pub fn audit_collisions(infra: &BoxInfrastructure, spec: &GridSpec, sigma: &[u64]) -> Result<CollisionAudit> {
    let ctx = GridContext::new(infra, spec, None)?;
    if !ctx.shift_is_good(sigma) {
        return Err(Error::precondition("collision audit needs a good shift"));
    }
    let table = ctx.f_all(sigma)?;
    let side = spec.side() as usize;
    let n = spec.n;
    let point = |idx: usize| -> Vec<u64> {
        let mut i = idx;
        (0..n)
            .map(|_| {
                let x = (i % side) as u64;
                i /= side;
                x
            })
            .collect()
    };
    let mut groups: HashMap<&FRep, Vec<Vec<u64>>> = HashMap::new();
    for (idx, r) in table.iter().enumerate() {
        groups.entry(r).or_default().push(point(idx));
    }
    let nu = covering_radius_bound(&infra.lambda)?;
    let det = infra.lambda.det()?;
    let ml = m_lower(n, spec.q, spec.big_n, &det, &nu);
    let mut audit = CollisionAudit {
        anchors: 0,
        classes: groups.len(),
        min_m: usize::MAX,
        m_lower: JsonQ(ml.clone()),
        unique_translate_failures: 0,
        existence_failures: 0,
        below_m_lower: 0,
    };
    for (idx, r) in table.iter().enumerate() {
        let v = point(idx);
        if !ctx.anchor_ok(sigma, &v) {
            continue;
        }
        audit.anchors += 1;
        let cs = CollisionSet { anchor: v, value: r.clone(), members: groups[r].clone(), anchor_in_hbound: false };
        let rep = check_mestimate(infra, spec.big_n, spec.q, spec.l, &cs)?;
        audit.min_m = audit.min_m.min(rep.m);
        if !rep.unique_translate {
            audit.unique_translate_failures += 1;
        }
        if !rep.translate_has_member {
            audit.existence_failures += 1;
        }
        if qi(rep.m as i64) < ml {
            audit.below_m_lower += 1;
        }
    }
    Ok(audit)
}

/// One repetition of the sampling procedure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub rep: usize,
    /// Measured outcome; `None` in targets-only mode when no in-window rounding set was hit.
    pub w: Option<Vec<u64>>,
    /// `w / (2nq)`.
    pub candidate: Option<Vec<JsonQ>>,
    pub grid: GridSpec,
    pub sigma: Vec<u64>,
    pub anchor: Vec<u64>,
    #[serde(rename = "M")]
    pub m: usize,
    pub good_shift: bool,
    pub anchor_ok: bool,
    /// In-window dual vector whose rounding set contains `w`.
    pub hit: Option<Vec<JsonQ>>,
    /// Mass of the union of in-window rounding sets, when computed.
    pub target_mass: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SampleParams {
    pub big_n: u64,
    pub big_n0: u64,
    pub q: u64,
    pub l: u64,
    pub kappa: Q,
    /// Defaults to 2 in one dimension and `2n + 1` otherwise.
    pub reps: Option<usize>,
    pub mode: SampleMode,
    pub rounding: Rounding,
    pub budget_terms: u128,
}

impl SampleParams {
    /// Grid used by repetition `rep`: `n` draws at `N`, then `n + 1` at `N0`.
    pub fn grid_for(&self, n: usize, rep: usize) -> GridSpec {
        let big_n = if n >= 2 && rep >= n { self.big_n0 } else { self.big_n };
        GridSpec::new(n, big_n, self.q, self.l)
    }
    pub fn default_reps(n: usize) -> usize {
        if n == 1 {
            2
        } else {
            2 * n + 1
        }
    }
}

struct GridCache {
    ctx: GridContext,
    targets: Vec<DualApproxTarget>,
    by_w: HashMap<Vec<u64>, usize>,
}

fn grid_cache(infra: &BoxInfrastructure, spec: &GridSpec, params: &SampleParams) -> Result<GridCache> {
    let ctx = GridContext::new(infra, spec, None)?;
    let targets = in_window_targets(&infra.lambda, spec, &params.kappa, params.rounding)?;
    let mut by_w = HashMap::new();
    for (i, t) in targets.iter().enumerate() {
        for w in &t.r_set {
            by_w.insert(w.clone(), i);
        }
    }
    Ok(GridCache { ctx, targets, by_w })
}

/// Run the sampling procedure `reps` times under one random shift, with fresh anchors.
pub fn run_sampling_experiment(infra: &BoxInfrastructure, params: &SampleParams, seed: u64) -> Result<Vec<SampleRecord>> {
    let n = infra.dim();
    let reps = params.reps.unwrap_or_else(|| SampleParams::default_reps(n));
    let mut caches: HashMap<u64, GridCache> = HashMap::new();
    let mut out = Vec::with_capacity(reps);
    // one shift index for the whole run; each grid reads it at its own step 1/(NL)
    let sigma = random_shift(&params.grid_for(n, 0), &mut rng::stream(seed, "sample-shift", 0));
    for rep in 0..reps {
        let spec = params.grid_for(n, rep);
        if !caches.contains_key(&spec.big_n) {
            caches.insert(spec.big_n, grid_cache(infra, &spec, params)?);
        }
        let cache = &caches[&spec.big_n];
        out.push(sample_once(cache, &spec, params, &sigma, seed, rep)?);
    }
    Ok(out)
}

fn sample_once(cache: &GridCache, spec: &GridSpec, params: &SampleParams, sigma: &[u64], seed: u64, rep: usize) -> Result<SampleRecord> {
    let mut r = rng::stream(seed, "sample", rep as u64);
    let sigma = sigma.to_vec();
    let good_shift = cache.ctx.shift_is_good(&sigma);
    let anchor = random_anchor(spec, &mut r);
    let cs = build_collision_set(&cache.ctx, &sigma, &anchor)?;
    let d = spec.w_side();
    let terms = (d as u128).pow(spec.n as u32) * cs.m() as u128;
    let (w, target_mass) = match params.mode {
        SampleMode::ExactDist => {
            let dist = if terms <= params.budget_terms.min(50_000_000) {
                exact_distribution(&cs.members, spec, params.budget_terms)?
            } else if spec.n == 1 {
                fft_distribution_1d(&cs.members, spec)?
            } else {
                return Err(Error::budget("exact distribution terms (use targets-only mode)", terms.to_string(), params.budget_terms));
            };
            (Some(dist.sample(&mut r)), None)
        }
        SampleMode::TargetsOnly => {
            let all: Vec<Vec<u64>> = cache.targets.iter().flat_map(|t| t.r_set.iter().cloned()).collect();
            let probs = fourier::outcome_probabilities(&cs.members, spec, &all);
            let mids: Vec<f64> = probs.iter().map(|p| p.mid()).collect();
            let total: f64 = mids.iter().sum();
            let u: f64 = r.gen();
            let mut acc = 0.0;
            let mut pick = None;
            for (i, p) in mids.iter().enumerate() {
                acc += p;
                if u < acc {
                    pick = Some(all[i].clone());
                    break;
                }
            }
            (pick, Some(total))
        }
    };
    let sc = targets::outcome_scale(spec);
    let candidate = w.as_ref().map(|w| w.iter().map(|&x| JsonQ(qi(x as i64) / &sc)).collect());
    let hit = w.as_ref().and_then(|w| cache.by_w.get(w)).map(|&i| cache.targets[i].lambda_star.iter().cloned().map(JsonQ).collect());
    Ok(SampleRecord {
        rep,
        w,
        candidate,
        grid: spec.clone(),
        sigma,
        anchor,
        m: cs.m(),
        good_shift,
        anchor_ok: !cs.anchor_in_hbound,
        hit,
        target_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infra::from_corners_1d;
    use crate::rational::q;

    fn forty() -> BoxInfrastructure {
        from_corners_1d(&qi(40), &[qi(0), qi(13), qi(27)], &qi(1)).unwrap()
    }

    #[test]
    fn m_lower_forty() {
        // (160/40)(1 - 3/5120 - 2*20/160)
        let ml = m_lower(1, 160, 32, &qi(40), &qi(20));
        assert_eq!(ml, qi(4) * (qi(1) - q(3, 5120) - q(1, 4)));
    }

    #[test]
    fn small_bound_holds() {
        let infra = forty();
        let spec = GridSpec::new(1, 32, 160, 708);
        let ctx = GridContext::new(&infra, &spec, None).unwrap();
        let s = find_good_shift(&ctx, 1, 100).unwrap();
        let v = find_clean_anchor(&ctx, &s, 1, 100).unwrap();
        let settings = BoundSettings {
            kappa: q(1, 9),
            rounding: Rounding::Floor,
            form: CosineForm::Half,
            mode: SampleMode::ExactDist,
            budget_terms: TERM_BUDGET,
        };
        let r = verify_fourier_bound(&infra, &spec, &s, &v, &settings).unwrap();
        assert!(r.pass(), "{:#?}", r.checks);
        let t = verify_fourier_bound(&infra, &spec, &s, &v, &BoundSettings { mode: SampleMode::TargetsOnly, ..settings }).unwrap();
        assert!(t.pass());
        assert!((t.min_ratio - r.min_ratio).abs() < 1e-6);
    }

    #[test]
    fn sampling_is_reproducible() {
        let infra = forty();
        let params = SampleParams {
            big_n: 32,
            big_n0: 32,
            q: 160,
            l: 708,
            kappa: q(1, 9),
            reps: None,
            mode: SampleMode::ExactDist,
            rounding: Rounding::Floor,
            budget_terms: TERM_BUDGET,
        };
        let a = run_sampling_experiment(&infra, &params, 5).unwrap();
        let b = run_sampling_experiment(&infra, &params, 5).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a, b);
    }
}
