use crate::args::RecoverArgs;
use crate::io::{self, Run};
use crate::Ctx;
use period_lattice::check::Check;
use period_lattice::pipeline::distance_to_basis;
use period_lattice::planner::{input_from_infra, recovery_parameters, PlannerInput};
use period_lattice::rational::to_f64;
use period_lattice::recovery::end_to_end_recover;
use period_lattice::sampler::targets::{rounding_radius, Rounding};
use period_lattice::sampler::SampleRecord;
use period_lattice::{qi, Error, JsonQ, Q, Result};
use serde_json::json;

fn json_cols(m: &[Vec<Q>]) -> Vec<Vec<JsonQ>> {
    m.iter().map(|c| c.iter().cloned().map(JsonQ).collect()).collect()
}

pub fn run(_ctx: &Ctx, a: &RecoverArgs, run: &Run) -> Result<bool> {
    let path = a.input.as_deref().ok_or_else(|| Error::invalid("--input <sample transcript> is required"))?;
    let t = io::read_transcript(path, Some("sample"))?;
    let samples: Vec<SampleRecord> = io::field(&t, "samples")?;
    let rounding: Rounding = io::field(&t, "rounding")?;
    let first = samples.first().ok_or_else(|| Error::invalid("sample transcript has no samples"))?;
    let (n, q) = (first.grid.n, first.grid.q);
    let cands: Vec<Vec<Q>> = samples.iter().filter_map(|s| s.candidate.as_ref()).map(|c| c.iter().map(|x| x.0.clone()).collect()).collect();
    let eps = a.eps.as_ref().map(|e| e.0.clone()).unwrap_or_else(|| rounding_radius(n, q, rounding));
    let gamma = a.gamma.as_ref().map(|g| g.0.clone()).unwrap_or_else(|| qi(1));
    let infra = a.infra.as_deref().map(io::load_infra).transpose()?;
    let mut inp = match &infra {
        Some(inf) => input_from_infra(inf, gamma.clone())?,
        None => {
            let det = a.det.as_ref().ok_or_else(|| Error::invalid("give --infra or --det"))?.0.clone();
            let lambda1 = match (&a.lambda1, n) {
                (Some(l), _) => l.0.clone(),
                (None, 1) => det.clone(),
                (None, _) => return Err(Error::invalid("--lambda1 is required when n > 1")),
            };
            PlannerInput::new(n, qi(1), qi(1), qi(1), lambda1, det, gamma.clone())
        }
    };
    inp.reduction = a.reduction;
    let (mu, det_dual, mode) = recovery_parameters(&inp);
    let mut payload = json!({
        "n": n,
        "eps": JsonQ(eps.clone()),
        "gamma": JsonQ(gamma.clone()),
        "mu": JsonQ(mu.clone()),
        "reduction": mode,
        "samples_used": cands.len(),
    });
    let rec = match end_to_end_recover(&cands, &eps, &mu, &det_dual, mode) {
        Ok(r) => r,
        Err(e) if e.exit_code() == 2 => {
            payload["error"] = e.to_string().into();
            return run.finish(payload, &[Check::holds("recovery", "a basis is produced", false)]);
        }
        Err(e) => return Err(e),
    };
    let mut checks = rec.recovery.checks.clone();
    let certified = rec.dual.gamma().cloned();
    checks.push(Check::holds("certified dual error bound", "available", certified.is_some()));
    payload["basis"] = io::to_value(&json_cols(&rec.basis));
    payload["dual_basis"] = io::to_value(&json_cols(&rec.recovery.basis));
    payload["transform"] = io::to_value(&rec.recovery.transform.iter().map(|c| c.iter().map(|z| z.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>());
    payload["delta"] = io::to_value(&JsonQ(rec.recovery.delta.clone()));
    payload["delta_observed"] = io::to_value(&JsonQ(rec.recovery.delta_observed.clone()));
    payload["certified_gamma"] = io::to_value(&certified.as_ref().map(to_f64));
    payload["recovery"] = io::to_value(&rec.recovery);
    payload["dual"] = io::to_value(&rec.dual);
    if let Some(inf) = &infra {
        let d = distance_to_basis(&inf.lambda, &rec.basis)?;
        checks.push(Check::holds("rounds to a basis of the period lattice", "holds", d.is_some()));
        if let Some(d) = d {
            payload["distance"] = to_f64(&d).into();
            checks.push(Check::at_most("distance to the nearest exact basis", d, gamma));
        }
    }
    run.finish(payload, &checks)
}
