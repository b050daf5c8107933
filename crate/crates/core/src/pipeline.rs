//! End-to-end runs: sample the dual lattice under a planned parameter set, recover
//! an approximate basis of the period lattice and audit every factor of the success bound.

use crate::check::Check;
use crate::error::{Error, Result};
use crate::infra::BoxInfrastructure;
use crate::lattice::lll::ReductionMode;
use crate::lattice::Lattice;
use crate::linalg::{abs_det, inverse, mat_vec, mat_vec_z, to_q_cols};
use crate::planner::{joint_probability_audit, recovery_inputs, AttemptFactors, JointAudit, PlannedParameters, SampleFactors};
use crate::rational::{norm2, round_half_up, sqrt_upper, to_f64, JsonQ, Q, Z};
use crate::recovery::end_to_end_recover;
use crate::rng::derive_seed;
use crate::sampler::targets::Rounding;
use crate::sampler::{run_sampling_experiment, SampleMode, SampleParams, SampleRecord};
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug)]
pub struct PipelineSettings {
    pub attempts: u64,
    pub seed: u64,
    pub reduction: Option<ReductionMode>,
    pub rounding: Rounding,
    pub budget_terms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct AttemptRecord {
    pub attempt: u64,
    pub seed: u64,
    pub good_shift: bool,
    pub samples: Vec<SampleRecord>,
    /// Recovered basis of the period lattice.
    pub basis: Option<Vec<Vec<JsonQ>>>,
    pub error: Option<String>,
    /// Distance to the nearest exact basis, when the recovered one rounds to a basis.
    pub distance: Option<f64>,
    /// Certified accuracy of the inverted dual basis.
    pub certified_gamma: Option<f64>,
    pub generated: Option<bool>,
    pub success: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineReport {
    pub attempts: Vec<AttemptRecord>,
    pub successes: u64,
    pub audit: JointAudit,
    pub checks: Vec<Check>,
}

impl PipelineReport {
    pub fn pass(&self) -> bool {
        crate::check::all_pass(&self.checks)
    }
}

/// Distance from `b` to the closest exact basis `Lambda C` (C = rounded coordinates),
/// or `None` when the rounded coordinates are not unimodular.
pub fn distance_to_basis(lambda: &Lattice, b: &[Vec<Q>]) -> Result<Option<Q>> {
    let inv = inverse(&lambda.basis)?;
    let coords: Vec<Vec<Z>> = b.iter().map(|col| mat_vec(&inv, col).iter().map(round_half_up).collect()).collect();
    if abs_det(&to_q_cols(&coords)) != Q::one() {
        return Ok(None);
    }
    let d = b
        .iter()
        .zip(&coords)
        .map(|(col, c)| {
            let exact = mat_vec_z(&lambda.basis, c);
            let diff: Vec<Q> = col.iter().zip(&exact).map(|(x, y)| x - y).collect();
            sqrt_upper(&norm2(&diff))
        })
        .max()
        .unwrap_or_default();
    Ok(Some(d))
}

fn attempt(infra: &BoxInfrastructure, planned: &PlannedParameters, settings: &PipelineSettings, i: u64) -> Result<AttemptRecord> {
    let seed = derive_seed(settings.seed, "pipeline", i);
    let (big_n, big_n0, q, l) = planned.desk_values()?;
    let params = SampleParams {
        big_n,
        big_n0,
        q,
        l,
        kappa: planned.kappa.0.clone(),
        reps: None,
        mode: SampleMode::ExactDist,
        rounding: settings.rounding,
        budget_terms: settings.budget_terms,
    };
    let samples = run_sampling_experiment(infra, &params, seed)?;
    let good_shift = samples.iter().all(|s| s.good_shift);
    let dual = infra.lambda.dual()?;
    let hits: Option<Vec<Vec<Q>>> = samples.iter().map(|s| s.hit.as_ref().map(|h| h.iter().map(|x| x.0.clone()).collect())).collect();
    let generated = match &hits {
        Some(h) => Some(Lattice::generated_by(h).map(|g| g.same_lattice(&dual)).unwrap_or(false)),
        None => None,
    };
    let cands: Vec<Vec<Q>> = samples.iter().filter_map(|s| s.candidate.as_ref().map(|c| c.iter().map(|x| x.0.clone()).collect())).collect();
    let (mu, det_dual, mode) = recovery_inputs(planned);
    let mode = settings.reduction.unwrap_or(mode);
    let gamma = &planned.input.gamma.0;
    let mut rec = AttemptRecord {
        attempt: i,
        seed,
        good_shift,
        samples,
        basis: None,
        error: None,
        distance: None,
        certified_gamma: None,
        generated,
        success: false,
    };
    match end_to_end_recover(&cands, &planned.eps.0, &mu, &det_dual, mode) {
        Ok(e2e) => {
            let dist = distance_to_basis(&infra.lambda, &e2e.basis)?;
            rec.success = dist.as_ref().is_some_and(|d| d <= gamma);
            rec.distance = dist.as_ref().map(to_f64);
            rec.certified_gamma = e2e.dual.gamma().map(to_f64);
            rec.basis = Some(e2e.basis.iter().map(|c| crate::rational::to_json_vec(c)).collect());
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    Ok(rec)
}

/// Run `attempts` independent seeded attempts of the full procedure.
pub fn run_pipeline(infra: &BoxInfrastructure, planned: &PlannedParameters, settings: &PipelineSettings) -> Result<PipelineReport> {
    if planned.n() != infra.dim() {
        return Err(Error::invalid("plan and infrastructure dimensions differ"));
    }
    let attempts: Vec<AttemptRecord> =
        (0..settings.attempts).into_par_iter().map(|i| attempt(infra, planned, settings, i)).collect::<Result<Vec<_>>>()?;
    let factors: Vec<AttemptFactors> = attempts
        .iter()
        .map(|a| AttemptFactors {
            good_shift: a.good_shift,
            samples: a.samples.iter().map(|s| SampleFactors { big_n: s.grid.big_n, anchor_ok: s.anchor_ok, hit: s.hit.is_some() }).collect(),
            generated: a.generated,
            success: a.success,
        })
        .collect();
    let audit = joint_probability_audit(planned, &factors, settings.rounding)?;
    let successes = attempts.iter().filter(|a| a.success).count() as u64;
    let mut checks = vec![Check::at_least("successful attempts", successes, 1)];
    for f in &audit.factors {
        checks.push(Check::new(
            format!("factor {}", f.factor),
            "wilson_hi(3 sigma) >= bound",
            format!("{:.6e}", f.bound),
            format!("{}/{} (hi {:.6e})", f.successes, f.trials, f.wilson_hi),
            f.pass,
        ));
    }
    for (name, v, floor, ok) in &audit.guards {
        checks.push(Check::new(name.clone(), "observed >= bound", floor, v, *ok));
    }
    // a successful attempt never reports a wrong lattice
    let wrong = attempts.iter().filter(|a| a.success && a.distance.is_none()).count();
    checks.push(Check::at_most("successes without exact match", wrong, 0));
    Ok(PipelineReport { attempts, successes, audit, checks })
}
