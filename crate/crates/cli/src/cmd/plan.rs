use crate::args::PlanArgs;
use crate::io::{self, Run};
use crate::Ctx;
use period_lattice::check::Check;
use period_lattice::planner::{input_from_infra, ledger_table, plan, PlanMode, PlannerInput};
use period_lattice::{qi, Error, JsonQ, Q, Result};
use serde_json::json;

fn required(x: &Option<JsonQ>, what: &str) -> Result<Q> {
    x.as_ref().map(|v| v.0.clone()).ok_or_else(|| Error::invalid(format!("--{what} is required without --infra")))
}

pub fn input(a: &PlanArgs) -> Result<PlannerInput> {
    let gamma = a.gamma.as_ref().map(|g| g.0.clone()).unwrap_or_else(|| qi(1));
    let mut inp = match &a.infra {
        Some(p) => {
            let mut inp = input_from_infra(&io::load_infra(p)?, gamma)?;
            let set = |slot: &mut JsonQ, v: &Option<JsonQ>| {
                if let Some(v) = v {
                    *slot = v.clone();
                }
            };
            set(&mut inp.a, &a.a);
            set(&mut inp.c, &a.c);
            set(&mut inp.d, &a.d);
            set(&mut inp.lambda1, &a.lambda1);
            set(&mut inp.det, &a.det);
            if a.n.is_some_and(|n| n != inp.n) {
                return Err(Error::invalid("--n does not match the infrastructure"));
            }
            inp
        }
        None => {
            let n = a.n.ok_or_else(|| Error::invalid("--n is required without --infra"))?;
            let det = required(&a.det, "det")?;
            let lambda1 = match (&a.lambda1, n) {
                (Some(l), _) => l.0.clone(),
                (None, 1) => det.clone(),
                (None, _) => return Err(Error::invalid("--lambda1 is required when n > 1")),
            };
            let d = a.d.as_ref().map(|v| v.0.clone()).unwrap_or_else(|| qi(1));
            PlannerInput::new(n, required(&a.a, "A")?, required(&a.c, "C")?, d, lambda1, det, gamma)
        }
    };
    if a.nu.is_some() {
        inp.nu = a.nu.clone();
    }
    inp.big_n = a.big_n;
    inp.big_n0 = a.big_n0;
    inp.q = a.q;
    inp.kappa = a.kappa.clone();
    inp.reduction = a.reduction;
    Ok(inp)
}

pub fn run(_ctx: &Ctx, a: &PlanArgs, run: &Run) -> Result<bool> {
    let mode: PlanMode = a.mode.as_deref().unwrap_or("theorem").parse()?;
    let inp = input(a)?;
    let p = plan(&inp, mode)?;
    eprint!("{}", ledger_table(&p));
    let checks: Vec<Check> = p
        .ledger
        .iter()
        .filter(|e| e.required)
        .flat_map(|e| {
            e.conditions
                .iter()
                .map(move |c| Check::new(format!("{} {}", e.id, c.param), c.relation.symbol(), &c.required, &c.chosen, c.satisfied))
        })
        .collect();
    run.finish(json!({ "planned": p }), &checks)
}
