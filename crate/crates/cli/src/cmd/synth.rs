use crate::args::SynthArgs;
use crate::io::{self, Run};
use crate::Ctx;
use period_lattice::infra::{from_corners_1d, synth_box_infrastructure, SynthOptions};
use period_lattice::lattice::LatticeJson;
use period_lattice::rational::parse_q;
use period_lattice::{qi, Error, Lattice, Q, Result};

fn list(s: &str) -> Result<Vec<Q>> {
    s.split(',').map(parse_q).collect()
}

fn lattice(a: &SynthArgs) -> Result<Lattice> {
    match (&a.lattice, &a.diag, &a.period) {
        (Some(p), None, None) => {
            let j: LatticeJson = serde_json::from_value(io::read_json(p)?).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
            Lattice::from_json(&j)
        }
        (None, Some(d), None) => Lattice::diagonal(&list(d)?),
        (None, None, Some(p)) => Lattice::diagonal(std::slice::from_ref(&p.0)),
        (None, None, None) => Err(Error::invalid("give one of --lattice, --diag or --period")),
        _ => Err(Error::invalid("--lattice, --diag and --period are exclusive")),
    }
}

/// Writes the raw infrastructure JSON; it is the input format of every other command.
pub fn run(ctx: &Ctx, a: &SynthArgs, run: &Run) -> Result<bool> {
    let lambda = lattice(a)?;
    let n = a.n.unwrap_or(lambda.dim);
    if n != lambda.dim {
        return Err(Error::invalid(format!("--n {n} does not match the lattice dimension {}", lambda.dim)));
    }
    let c = a.c.as_ref().map(|x| x.0.clone()).unwrap_or_else(|| qi(1));
    let infra = match &a.corners {
        Some(cs) => {
            if n != 1 {
                return Err(Error::invalid("--corners needs a one-dimensional lattice"));
            }
            from_corners_1d(&lambda.basis[0][0], &list(cs)?, &c)?
        }
        None => {
            let mut opts = SynthOptions { c, ..SynthOptions::default() };
            opts.staircase = a.staircase.unwrap_or(false);
            if let Some(g) = a.granularity {
                opts.granularity = g;
            }
            synth_box_infrastructure(n, &lambda, a.cells.unwrap_or(4), ctx.seed, &opts)?
        }
    };
    infra.validate_tiling(16)?;
    let mut text = serde_json::to_string_pretty(&infra.to_json()).expect("serializable");
    text.push('\n');
    io::emit(ctx.out.as_deref(), &text)?;
    run.metadata()?;
    Ok(true)
}
