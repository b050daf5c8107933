//! `period-lattice`: batch harness over the period-lattice library.
//!
//! Exit codes: 0 every check passed, 2 a check failed, 3 capability, budget or
//! precondition, 4 configuration or parse error.

mod args;
mod cmd;
mod io;

use args::{Cli, Command, Global, Verify};
use clap::Parser;
use period_lattice::sampler::TERM_BUDGET;
use period_lattice::{Error, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use std::path::PathBuf;

/// Resolved global settings.
pub struct Ctx {
    pub seed: u64,
    pub budget_terms: u128,
    pub out: Option<PathBuf>,
}

fn keys<T: Serialize>(x: &T) -> Vec<String> {
    match io::to_value(x) {
        Value::Object(m) => m.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

fn resolve<T: Serialize + DeserializeOwned>(g: &Global, sub: &T, file: &Map<String, Value>) -> Result<(Ctx, T, Map<String, Value>)> {
    let gk = keys(g);
    let sk = keys(sub);
    let (g, mut echo) = io::merge(g, file, &sk.iter().map(String::as_str).collect::<Vec<_>>())?;
    let (sub, sub_echo) = io::merge(sub, file, &gk.iter().map(String::as_str).collect::<Vec<_>>())?;
    echo.extend(sub_echo);
    echo.remove("out");
    let seed = g.seed.unwrap_or(1);
    let budget = g.budget_terms.unwrap_or(TERM_BUDGET as f64);
    if !(budget >= 1.0 && budget.fract() == 0.0 && budget < 2f64.powi(100)) {
        return Err(Error::invalid(format!("budget-terms must be a positive integer, got {budget}")));
    }
    echo.insert("seed".into(), seed.into());
    echo.insert("budget-terms".into(), Value::from(budget as u64));
    Ok((Ctx { seed, budget_terms: budget as u128, out: g.out }, sub, echo))
}

fn run(cli: Cli) -> Result<bool> {
    let file = io::load_config(cli.global.config.as_deref())?;
    let g = &cli.global;
    macro_rules! dispatch {
        ($name:expr, $args:expr, $f:path) => {{
            let (ctx, a, echo) = resolve(g, $args, &file)?;
            let run = io::Run::new($name, echo, ctx.out.clone());
            $f(&ctx, &a, &run)
        }};
    }
    match &cli.command {
        Command::Synth(a) => dispatch!("synth", a, cmd::synth::run),
        Command::Plan(a) => dispatch!("plan", a, cmd::plan::run),
        Command::Sample(a) => dispatch!("sample", a, cmd::sample::run),
        Command::Recover(a) => dispatch!("recover", a, cmd::recover::run),
        Command::Verify(Verify::Part1(a)) => dispatch!("verify part1", a, cmd::verify::part1),
        Command::Verify(Verify::Sampler(a)) => dispatch!("verify sampler", a, cmd::verify::sampler),
        Command::Verify(Verify::Recovery(a)) => dispatch!("verify recovery", a, cmd::verify::recovery),
        Command::Verify(Verify::Shift(a)) => dispatch!("verify shift", a, cmd::verify::shift),
        Command::Report(a) => dispatch!("report", a, cmd::report::run),
    }
}

fn main() {
    let code = match Cli::try_parse() {
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                4
            } else {
                0
            }
        }
        Ok(cli) => match run(cli) {
            Ok(true) => 0,
            Ok(false) => 2,
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
    };
    std::process::exit(code);
}
