use super::grid;
use crate::args::{Part1Args, RecoveryArgs, SamplerArgs, ShiftArgs};
use crate::io::{self, Row, Run};
use crate::Ctx;
use period_lattice::check::{all_pass, Check};
use period_lattice::generation::{
    abelian_groups_up_to, exact_generation_probability, full_generation_trial, generation_windows, one_dim_pair_bound,
    one_dim_pair_trial, run_trials, span_bound, span_probability_trial, zeta_product_bound, TrialSummary, WindowSample,
    GENERATION_BUDGET,
};
use period_lattice::infra::GridContext;
use period_lattice::lattice::{random_lattice, ReductionMode};
use period_lattice::linalg::{inverse, transpose};
use period_lattice::rational::to_f64;
use period_lattice::recovery::{compare_with_exact, dual_basis_from_approx, max_column_distance, random_recovery_instance, recover_basis};
use period_lattice::rng::{derive_seed, stream};
use period_lattice::sampler::shift::analyze_shifts;
use period_lattice::sampler::targets::{CosineForm, Rounding};
use period_lattice::sampler::{audit_collisions, find_clean_anchor, find_good_shift, verify_fourier_bound, BoundSettings, SampleMode};
use period_lattice::{q, qi, Lattice, Q, Result};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::path::Path;

const TRIES: u64 = 1000;

fn finish(run: &Run, csv: Option<&Path>, rows: &[Row], payload: Value, checks: &[Check]) -> Result<bool> {
    io::emit(csv, &io::csv_string(rows)?)?;
    if let Some(out) = &run.out {
        io::write_text(out, &run.transcript(payload, checks))?;
    }
    run.metadata()?;
    Ok(all_pass(checks))
}

fn trial_row(instance: String, t: &TrialSummary, bound: f64) -> Row {
    Row {
        instance,
        bound: format!("{bound:.6}"),
        empirical: format!("{:.6}", t.fraction),
        stderr: format!("{:.6}", t.stderr),
        pass: t.meets(bound),
    }
}

fn exact_row(instance: String, value: f64, bound: f64) -> Row {
    Row { instance, bound: format!("{bound:.6}"), empirical: format!("{value:.6}"), stderr: "0".into(), pass: value >= bound }
}

fn row_check(r: &Row) -> Check {
    let rel = if r.stderr == "0" { "empirical >= bound" } else { "empirical >= bound - 3 stderr" };
    Check::new(r.instance.clone(), rel, &r.bound, &r.empirical, r.pass)
}

fn group_name(d: &[i64]) -> String {
    d.iter().map(|x| format!("Z/{x}")).collect::<Vec<_>>().join(" x ")
}

/// Span, group generation and one-dimensional pair probabilities against their bounds.
pub fn part1(ctx: &Ctx, a: &Part1Args, run: &Run) -> Result<bool> {
    let n = a.n.unwrap_or(2);
    let trials = a.trials.unwrap_or(10_000);
    if n == 0 || trials == 0 {
        return Err(period_lattice::Error::invalid("n and trials must be positive"));
    }
    let mut rows = Vec::new();
    if n >= 2 {
        let identity = Lattice::diagonal(&vec![qi(1); n])?;
        let skewed = random_lattice(n, 3, 2, &mut stream(ctx.seed, "part1-lattice", 0));
        let bound = to_f64(&span_bound(n as u32));
        for (name, l) in [("identity", &identity), ("random", &skewed)] {
            let (b, big) = generation_windows(l)?;
            let ws = WindowSample::new(l, &b, GENERATION_BUDGET)?;
            let t = run_trials(derive_seed(ctx.seed, "part1-span", 0), name, trials, |r| span_probability_trial(&ws, r));
            rows.push(trial_row(format!("span n={n} {name} lattice"), &t, bound));
            if n == 2 {
                let large = WindowSample::new(l, &big, GENERATION_BUDGET)?;
                let gen = bound * (zeta_product_bound(n as u32).lo - 0.25);
                let t = run_trials(derive_seed(ctx.seed, "part1-generation", 0), name, trials, |r| full_generation_trial(&ws, &large, r));
                rows.push(trial_row(format!("generation n={n} {name} lattice"), &t, gen));
            }
        }
    }
    let zeta = zeta_product_bound(n as u32).hi;
    let groups: Vec<_> = abelian_groups_up_to(a.max_order.unwrap_or(64)).into_iter().filter(|g| g.rank() >= 1 && g.rank() <= n).collect();
    let exact: Vec<f64> = groups.par_iter().map(|g| to_f64(&exact_generation_probability(g, n + 1))).collect();
    for (g, p) in groups.iter().zip(exact) {
        rows.push(exact_row(format!("{} draws generate {}", n + 1, group_name(&g.divisors)), p, zeta));
    }
    let unit = Lattice::from_ints(&[vec![1]])?;
    let (b, _) = generation_windows(&unit)?;
    let ws = WindowSample::new(&unit, &(b * qi(20)), GENERATION_BUDGET)?;
    let t = run_trials(derive_seed(ctx.seed, "part1-pair", 0), "pair", trials, |r| one_dim_pair_trial(&ws, r));
    rows.push(trial_row("two samples generate Z".into(), &t, to_f64(&one_dim_pair_bound().hi)));
    let checks: Vec<Check> = rows.iter().map(row_check).collect();
    finish(run, a.csv.as_deref(), &rows, json!({ "n": n, "trials": trials, "groups": groups.len() }), &checks)
}

/// Fourier lower bound for several good shifts with clean anchors.
pub fn sampler(ctx: &Ctx, a: &SamplerArgs, run: &Run) -> Result<bool> {
    let g = grid::resolve(&a.grid)?;
    let spec = g.spec();
    let gctx = GridContext::new(&g.infra, &spec, None)?;
    let settings = BoundSettings {
        kappa: g.kappa()?,
        rounding: g.rounding,
        form: a.form.unwrap_or(if g.rounding == Rounding::Floor { CosineForm::Half } else { CosineForm::Quarter }),
        mode: a.mode.unwrap_or(SampleMode::ExactDist),
        budget_terms: ctx.budget_terms,
    };
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut found = Vec::new();
    let mut audits = Vec::new();
    for i in 0..a.shifts.unwrap_or(3) {
        let seed = derive_seed(ctx.seed, "verify-sampler", i);
        let s = find_good_shift(&gctx, seed, TRIES)?;
        let v = find_clean_anchor(&gctx, &s, seed, TRIES)?;
        let r = verify_fourier_bound(&g.infra, &spec, &s, &v, &settings)?;
        let name = format!("pair {i} shift {s:?} anchor {v:?}");
        rows.push(Row { instance: name.clone(), bound: "1".into(), empirical: format!("{:.6}", r.min_ratio), stderr: "0".into(), pass: r.pass() });
        checks.extend(r.checks.iter().map(|c| Check { name: format!("pair {i}: {}", c.name), ..c.clone() }));
        if a.exhaustive.unwrap_or(false) {
            let au = audit_collisions(&g.infra, &spec, &s)?;
            rows.push(Row {
                instance: format!("collision audit shift {s:?} ({} anchors)", au.anchors),
                bound: format!("{:.6}", to_f64(&au.m_lower.0)),
                empirical: au.min_m.to_string(),
                stderr: "0".into(),
                pass: au.pass(),
            });
            checks.push(Check::at_most(format!("pair {i}: collision translate failures"), au.unique_translate_failures, 0));
            checks.push(Check::at_most(format!("pair {i}: in-window vectors without collision"), au.existence_failures, 0));
            checks.push(Check::at_most(format!("pair {i}: anchors with M < M_lower"), au.below_m_lower, 0));
            audits.push(au);
        }
        found.push(r);
    }
    let payload = json!({ "grid": spec, "kappa": period_lattice::JsonQ(settings.kappa.clone()), "rounding": g.rounding, "verifications": found, "audits": audits });
    finish(run, a.csv.as_deref(), &rows, payload, &checks)
}

struct RecoveryOutcome {
    row: Row,
    detail: Value,
}

fn recovery_instance(seed: u64, i: u64, n: usize, mode: ReductionMode, frac: &Q) -> RecoveryOutcome {
    let mut r = stream(seed, "verify-recovery", i);
    let name = format!("instance {i} n={n} {mode:?}");
    let fail = |why: String| RecoveryOutcome {
        row: Row { instance: name.clone(), bound: String::new(), empirical: String::new(), stderr: "0".into(), pass: false },
        detail: json!({ "instance": i, "error": why }),
    };
    let inst = match random_recovery_instance(n, 2 * n + 1, frac, mode, &mut r) {
        Ok(x) => x,
        Err(e) => return fail(e.to_string()),
    };
    let det = if inst.det < qi(0) { -inst.det.clone() } else { inst.det.clone() };
    let rec = match recover_basis(&inst.approx, n, &det, mode) {
        Ok(x) => x,
        Err(e) => return fail(e.to_string()),
    };
    let cmp = compare_with_exact(&rec, &inst.exact, &inst.lattice, &inst.approx.alpha);
    let k = inst.exact.len();
    let b_exact: Vec<Vec<Q>> = rec.transform[k - n..]
        .iter()
        .map(|c| (0..n).map(|j| c.iter().zip(&inst.exact).map(|(x, a)| Q::from_integer(x.clone()) * &a[j]).sum()).collect())
        .collect();
    let gamma = dual_basis_from_approx(&rec.basis, &rec.delta, &inst.approx.eps, &rec.plan.g, &inst.approx.alpha, &det)
        .ok()
        .and_then(|d| {
            let exact_dual = transpose(&inverse(&b_exact).ok()?);
            let dist = max_column_distance(&d.basis, &exact_dual);
            let g = d.gamma_lemma_q.clone()?;
            Some((d.precondition && dist <= g, to_f64(&dist), to_f64(&g)))
        });
    let gamma_ok = gamma.is_some_and(|x| x.0);
    RecoveryOutcome {
        row: Row {
            instance: name,
            bound: format!("{:.6e}", cmp.delta_bound),
            empirical: format!("{:.6e}", cmp.max_distance),
            stderr: "0".into(),
            pass: cmp.hnf_equal && cmp.distance_ok && cmp.norm_ok && gamma_ok,
        },
        detail: json!({
            "instance": i,
            "n": n,
            "reduction": mode,
            "comparison": cmp,
            "dual_distance": gamma.map(|x| x.1),
            "gamma_bound": gamma.map(|x| x.2),
            "gamma_ok": gamma_ok,
        }),
    }
}

/// Recovery and dual inversion against exact generators on random lattices.
pub fn recovery(ctx: &Ctx, a: &RecoveryArgs, run: &Run) -> Result<bool> {
    let count = a.instances.unwrap_or(100);
    let n_max = a.n_max.unwrap_or(3).max(1);
    let frac = a.eps_fraction.as_ref().map(|f| f.0.clone()).unwrap_or_else(|| q(1, 2));
    let outcomes: Vec<RecoveryOutcome> = (0..count)
        .into_par_iter()
        .map(|i| {
            let n = 1 + (i as usize % n_max);
            let mode = a.reduction.unwrap_or(if i % 2 == 0 { ReductionMode::Kz } else { ReductionMode::Lll });
            recovery_instance(ctx.seed, i, n, mode, &frac)
        })
        .collect();
    let rows: Vec<Row> = outcomes.iter().map(|o| o.row.clone()).collect();
    let checks: Vec<Check> = rows
        .iter()
        .map(|r| Check::new(r.instance.clone(), "HNF equal, distance <= delta, norms bounded, dual within gamma", &r.bound, &r.empirical, r.pass))
        .collect();
    let details: Vec<Value> = outcomes.into_iter().map(|o| o.detail).collect();
    finish(run, a.csv.as_deref(), &rows, json!({ "instances": details }), &checks)
}

/// Good-shift fraction and the fraction of the grid outside the boundary.
pub fn shift(ctx: &Ctx, a: &ShiftArgs, run: &Run) -> Result<bool> {
    let g = grid::resolve(&a.grid)?;
    let an = analyze_shifts(&g.infra, &g.spec(), a.max_shifts.unwrap_or(10_000), ctx.seed)?;
    let rows: Vec<Row> = an.checks.iter().map(Row::from_check).collect();
    let checks = an.checks.clone();
    finish(run, a.csv.as_deref(), &rows, json!({ "grid": g.spec(), "analysis": an }), &checks)
}
