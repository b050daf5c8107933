use crate::args::ReportArgs;
use crate::io::{self, Run};
use crate::Ctx;
use period_lattice::check::Check;
use period_lattice::planner::{iteration_table, TableRow};
use period_lattice::{Error, Result};
use serde::Serialize;
use serde_json::Value;
use std::fmt::Write;
use std::path::Path;

/// Checks listed per section before the rest is left to the CSV.
const SHOWN: usize = 20;

#[derive(Serialize)]
struct ReportRow {
    transcript: String,
    command: String,
    check: String,
    relation: String,
    bound: String,
    observed: String,
    pass: bool,
}

struct Loaded {
    name: String,
    body: Value,
    checks: Vec<Check>,
}

fn load(path: &Path) -> Result<Loaded> {
    let body = io::read_transcript(path, None)?;
    let checks: Vec<Check> = io::field(&body, "checks")?;
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string());
    Ok(Loaded { name, body, checks })
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|")
}

fn text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) if a.len() == 2 && a.iter().all(Value::is_string) => {
            let (n, d) = (a[0].as_str().unwrap_or(""), a[1].as_str().unwrap_or(""));
            if d == "1" {
                n.to_string()
            } else {
                format!("{n}/{d}")
            }
        }
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

/// Command-specific headline facts.
fn facts(l: &Loaded) -> Vec<String> {
    let b = &l.body;
    let get = |k: &str| b.get(k).map(text).unwrap_or_else(|| "-".into());
    match b.get("command").and_then(Value::as_str).unwrap_or("") {
        "plan" => {
            let p = &b["planned"];
            let g = |k: &str| p.get(k).map(text).unwrap_or_else(|| "-".into());
            vec![format!(
                "mode {}, n = {}, N = {}, N0 = {}, q = {}, L = {}, kappa = {}, eps = {}",
                g("mode"),
                p["input"].get("n").map(text).unwrap_or_default(),
                g("N"),
                g("N0"),
                g("q"),
                g("L"),
                g("kappa"),
                g("eps")
            )]
        }
        "sample" => vec![format!(
            "n = {}, N = {}, q = {}, L = {}, kappa = {}, {} rounding: {} of {} samples hit an in-window target",
            get("n"),
            get("N"),
            get("q"),
            get("L"),
            get("kappa"),
            get("rounding"),
            get("hits"),
            b.get("samples").and_then(Value::as_array).map(|a| a.len()).unwrap_or(0)
        )],
        "recover" => vec![format!(
            "eps = {}, gamma = {}, distance to the nearest exact basis = {}, certified dual error = {}",
            get("eps"),
            get("gamma"),
            get("distance"),
            get("certified_gamma")
        )],
        _ => Vec::new(),
    }
}

fn section(md: &mut String, l: &Loaded) {
    let cmd = l.body.get("command").and_then(Value::as_str).unwrap_or("?");
    let passed = l.checks.iter().filter(|c| c.pass).count();
    let verdict = if passed == l.checks.len() { "PASS" } else { "FAIL" };
    let _ = writeln!(md, "## {}: `{cmd}`\n", l.name);
    let _ = writeln!(md, "**{verdict}**, {passed} of {} checks hold.\n", l.checks.len());
    for f in facts(l) {
        let _ = writeln!(md, "{f}\n");
    }
    if l.checks.is_empty() {
        return;
    }
    // failing checks first, then passing ones up to the display limit
    let mut shown: Vec<&Check> = l.checks.iter().filter(|c| !c.pass).collect();
    let room = SHOWN.saturating_sub(shown.len());
    shown.extend(l.checks.iter().filter(|c| c.pass).take(room));
    let _ = writeln!(md, "| check | relation | bound | observed | pass |\n|---|---|---|---|---|");
    for c in &shown {
        let _ = writeln!(md, "| {} | {} | {} | {} | {} |", cell(&c.name), cell(&c.relation), cell(&c.bound), cell(&c.observed), c.pass);
    }
    if shown.len() < l.checks.len() {
        let _ = writeln!(md, "\n{} further passing checks are listed in the CSV.", l.checks.len() - shown.len());
    }
    md.push('\n');
}

/// Three decimals, truncated, so a certified lower bound is never rounded up.
fn trunc3(x: f64) -> String {
    format!("{:.3}", (x * 1000.0).floor() / 1000.0)
}

fn bounds_table(md: &mut String, rows: &[TableRow], heading: &str) {
    let _ = writeln!(md, "{heading} Bounds for n = 1..{}\n", rows.len());
    let head: Vec<String> = rows.iter().map(|r| format!("n={}", r.n)).collect();
    let _ = writeln!(md, "| | {} |", head.join(" | "));
    let _ = writeln!(md, "|---|{}", "---|".repeat(rows.len()));
    let line = |md: &mut String, label: &str, f: &dyn Fn(&TableRow) -> String| {
        let v: Vec<String> = rows.iter().map(f).collect();
        let _ = writeln!(md, "| {label} | {} |", v.join(" | "));
    };
    line(md, "expected iterations", &|r| r.ours_inverse.clone());
    line(md, "earlier bound, iterations", &|r| r.competitor_inverse.clone());
    line(md, "log10 improvement", &|r| format!("{:.1}", r.log10_ratio));
    line(md, "zeta product", &|r| trunc3(r.zeta_product));
    line(md, "span product", &|r| trunc3(r.span_product));
    md.push('\n');
}

pub fn run(_ctx: &Ctx, a: &ReportArgs, run: &Run) -> Result<bool> {
    if a.transcripts.is_empty() {
        return Err(Error::invalid("report needs at least one transcript"));
    }
    let loaded: Vec<Loaded> = a.transcripts.iter().map(|p| load(p)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for l in &loaded {
        let cmd = l.body.get("command").and_then(Value::as_str).unwrap_or("").to_string();
        for c in &l.checks {
            rows.push(ReportRow {
                transcript: l.name.clone(),
                command: cmd.clone(),
                check: c.name.clone(),
                relation: c.relation.clone(),
                bound: c.bound.clone(),
                observed: c.observed.clone(),
                pass: c.pass,
            });
        }
    }
    let total = rows.len();
    let failed = rows.iter().filter(|r| !r.pass).count();
    let table = iteration_table(6)?;
    let mut md = String::from("# Report\n\n");
    let _ = writeln!(md, "{} transcript(s), {total} checks, {failed} failed.\n", loaded.len());
    for l in &loaded {
        section(&mut md, l);
        if loaded.len() == 1 {
            bounds_table(&mut md, &table, "###");
        }
    }
    if loaded.len() > 1 {
        bounds_table(&mut md, &table, "##");
    }
    io::emit(a.markdown.as_deref(), &md)?;
    match a.csv.as_deref().or(run.out.as_deref()) {
        Some(p) => io::write_text(p, &io::csv_string(&rows)?)?,
        None => eprintln!("note: no --csv or --out given, aggregate CSV not written"),
    }
    run.metadata()?;
    Ok(failed == 0)
}
