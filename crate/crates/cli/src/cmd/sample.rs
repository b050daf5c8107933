use super::grid;
use crate::args::SampleArgs;
use crate::io::Run;
use crate::Ctx;
use period_lattice::sampler::{run_sampling_experiment, SampleMode, SampleParams};
use period_lattice::Result;
use serde_json::json;

pub fn run(ctx: &Ctx, a: &SampleArgs, run: &Run) -> Result<bool> {
    let g = grid::resolve(&a.grid)?;
    let mode = a.mode.unwrap_or(SampleMode::ExactDist);
    let params = SampleParams {
        big_n: g.big_n,
        big_n0: g.big_n0,
        q: g.q,
        l: g.l,
        kappa: g.kappa()?,
        reps: a.reps,
        mode,
        rounding: g.rounding,
        budget_terms: ctx.budget_terms,
    };
    let checks = grid::premise_checks(&g)?;
    let samples = run_sampling_experiment(&g.infra, &params, ctx.seed)?;
    let hits = samples.iter().filter(|s| s.hit.is_some()).count();
    let payload = json!({
        "n": g.n(),
        "N": g.big_n,
        "N0": g.big_n0,
        "q": g.q,
        "L": g.l,
        "kappa": period_lattice::JsonQ(g.kappa()?),
        "rounding": g.rounding,
        "mode": mode,
        "hits": hits,
        "samples": samples,
    });
    run.finish(payload, &checks)
}
