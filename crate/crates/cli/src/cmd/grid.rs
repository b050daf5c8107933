use crate::args::GridArgs;
use crate::io;
use period_lattice::check::Check;
use period_lattice::infra::{BoxInfrastructure, GridSpec};
use period_lattice::lattice::{covering_radius_bound, svp};
use period_lattice::planner::PlannedParameters;
use period_lattice::sampler::shift::{minimal_shift_count, premise_shift_count};
use period_lattice::sampler::targets::{kappa_admissible, Rounding};
use period_lattice::sampler::{premise_grid, premise_window};
use period_lattice::{Error, Q, Result};

pub struct Grid {
    pub infra: BoxInfrastructure,
    pub big_n: u64,
    pub big_n0: u64,
    pub q: u64,
    pub l: u64,
    pub kappa: Option<Q>,
    pub rounding: Rounding,
}

impl Grid {
    pub fn n(&self) -> usize {
        self.infra.dim()
    }
    pub fn kappa(&self) -> Result<Q> {
        self.kappa.clone().ok_or_else(|| missing("kappa"))
    }
    pub fn spec(&self) -> GridSpec {
        GridSpec::new(self.n(), self.big_n, self.q, self.l)
    }
}

fn missing(what: &str) -> Error {
    Error::invalid(format!("--{what} is required (or give --plan)"))
}

pub fn resolve(a: &GridArgs) -> Result<Grid> {
    let infra = io::load_infra(a.infra.as_deref().ok_or_else(|| Error::invalid("--infra is required"))?)?;
    let n = infra.dim();
    let planned = match &a.plan {
        Some(p) => {
            let p: PlannedParameters = io::field(&io::read_transcript(p, Some("plan"))?, "planned")?;
            if p.n() != n {
                return Err(Error::invalid(format!("plan is for n = {}, infrastructure has n = {n}", p.n())));
            }
            Some((p.desk_values()?, p.kappa.0.clone()))
        }
        None => None,
    };
    let from_plan = |i: usize| planned.as_ref().map(|((a, b, c, d), _)| [*a, *b, *c, *d][i]);
    let big_n = a.big_n.or(from_plan(0)).ok_or_else(|| missing("N"))?;
    let big_n0 = a.big_n0.or(from_plan(1)).unwrap_or(big_n);
    let q = a.q.or(from_plan(2)).ok_or_else(|| missing("q"))?;
    let l = match a.l.or(from_plan(3)) {
        Some(l) => l,
        None => minimal_shift_count(&infra, n, q)?,
    };
    let kappa = match (&a.kappa, &planned) {
        (Some(k), _) => Some(k.0.clone()),
        (None, Some((_, k))) => Some(k.clone()),
        (None, None) => None,
    };
    if big_n == 0 || big_n0 == 0 || q == 0 || l == 0 {
        return Err(Error::invalid("N, N0, q and L must be positive"));
    }
    let rounding = a.rounding.unwrap_or(if n == 1 { Rounding::Nearest } else { Rounding::Floor });
    Ok(Grid { infra, big_n, big_n0, q, l, kappa, rounding })
}

/// Grid, window, kappa and shift-count premises for every grid size in use.
pub fn premise_checks(g: &Grid) -> Result<Vec<Check>> {
    let n = g.n();
    let (_, l1sq) = svp(&g.infra.lambda.basis)?;
    let nu = covering_radius_bound(&g.infra.lambda)?;
    let mut sizes = vec![g.big_n];
    if n >= 2 && g.big_n0 != g.big_n {
        sizes.push(g.big_n0);
    }
    let mut checks = Vec::new();
    for big_n in sizes {
        let spec = GridSpec::new(n, big_n, g.q, g.l);
        checks.push(Check::holds(format!("premise N={big_n}: N >= 2 sqrt(n)/lambda_1"), "holds", premise_grid(n, big_n, &l1sq)));
        checks.push(Check::holds(format!("premise N={big_n}: q > 2 n nu + 3n/N"), "holds", premise_window(n, g.q, big_n, &nu)));
        if let Some(k) = &g.kappa {
            checks.push(Check::holds(format!("premise N={big_n}: kappa admissible"), "holds", kappa_admissible(&spec, k, g.rounding)));
        }
    }
    checks.push(Check::holds("premise: L >= 4nD(q+A+C+2)^n/C^n", "holds", premise_shift_count(&g.infra, &g.spec())));
    Ok(checks)
}
