//! Shift statistics: how often a random shift avoids the enhanced boundary, and
//! how much of the grid stays clear of `Hbound`.

use super::random_shift;
use crate::check::Check;
use crate::error::Result;
use crate::infra::grid::{GridContext, GridSpec};
use crate::infra::BoxInfrastructure;
use crate::rational::{max_q, pow, q, qi, Q, Z};
use crate::rng;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

/// Shift-count premise `L >= 4 n D (q + A + C + 2)^n / C^n`.
pub fn premise_shift_count(infra: &BoxInfrastructure, spec: &GridSpec) -> bool {
    let n = spec.n as u32;
    let need = qi(4 * spec.n as i64) * qi(infra.d as i64) * pow(&((qi(spec.q as i64) + &infra.a + &infra.c + qi(2)) / &infra.c), n);
    qi(spec.l as i64) >= need
}

/// Smallest `L` meeting the shift-count premise.
pub fn minimal_shift_count(infra: &BoxInfrastructure, n: usize, q_: u64) -> crate::error::Result<u64> {
    let base = (qi(q_ as i64) + &infra.a + &infra.c + qi(2)) / &infra.c;
    let need = qi(4 * n as i64 * infra.d as i64) * pow(&base, n as u32);
    crate::rational::ceil(&need)
        .try_into()
        .map_err(|_| crate::error::Error::Capability("shift count exceeds 64 bits".into()))
}

/// Size premise `q >= 9 max(1, A)` and `N >= max(4/A, 8 (n+1) n 2^n D A^(n-1) / (3 C^n))`.
pub fn premise_sizes(infra: &BoxInfrastructure, spec: &GridSpec) -> bool {
    let n = spec.n as i64;
    let a = &infra.a;
    let q_ok = qi(spec.q as i64) >= qi(9) * max_q(&Q::one(), a);
    let big_n = qi(spec.big_n as i64);
    let t1 = qi(4) / a;
    let t2 = qi(8 * (n + 1) * n * (1i64 << n)) * qi(infra.d as i64) * pow(a, spec.n as u32 - 1) / (qi(3) * pow(&infra.c, spec.n as u32));
    q_ok && big_n >= t1 && big_n >= t2
}

#[derive(Clone, Debug, Serialize)]
pub struct ShiftAnalysis {
    pub shifts: u64,
    /// Every shift in `{0..L-1}^n` was examined.
    pub exhaustive: bool,
    pub good: u64,
    pub good_fraction: f64,
    pub premise_shift_count: bool,
    pub premise_sizes: bool,
    /// Smallest and mean fraction of grid points outside `Hbound` over the examined shifts.
    pub min_outside: f64,
    pub mean_outside: f64,
    /// `1 - 1/(4(n+1))`.
    pub outside_bound: f64,
    pub checks: Vec<Check>,
}

impl ShiftAnalysis {
    pub fn pass(&self) -> bool {
        crate::check::all_pass(&self.checks)
    }
}

/// Examine every shift when `L^n <= max_shifts`, otherwise `max_shifts` seeded uniform ones.
pub fn analyze_shifts(infra: &BoxInfrastructure, spec: &GridSpec, max_shifts: u64, seed: u64) -> Result<ShiftAnalysis> {
    let ctx = GridContext::new(infra, spec, None)?;
    let n = spec.n;
    let total = (spec.l as u128).checked_pow(n as u32);
    let exhaustive = matches!(total, Some(t) if t <= max_shifts as u128);
    let shifts: Vec<Vec<u64>> = if exhaustive {
        let l = spec.l;
        let count = total.unwrap() as u64;
        (0..count)
            .map(|mut i| {
                (0..n)
                    .map(|_| {
                        let v = i % l;
                        i /= l;
                        v
                    })
                    .collect()
            })
            .collect()
    } else {
        (0..max_shifts).map(|t| random_shift(spec, &mut rng::stream(seed, "shift-analysis", t))).collect()
    };
    let domain = spec.domain_size();
    let results: Vec<(bool, u128)> = shifts.par_iter().map(|s| (ctx.shift_is_good(s), ctx.hbound_count(s))).collect();
    let good = results.iter().filter(|r| r.0).count() as u64;
    let k = shifts.len() as u64;
    let worst = results.iter().map(|r| r.1).max().unwrap_or(0);
    let sum: u128 = results.iter().map(|r| r.1).sum();
    // exact fractions
    let min_outside_q = Q::one() - Q::new(Z::from(worst), Z::from(domain));
    let mean_outside_q = Q::one() - Q::new(Z::from(sum), Z::from(domain) * Z::from(k));
    let bound_q = Q::one() - q(1, 4 * (n as i64 + 1));
    let good_q = Q::new(Z::from(good), Z::from(k));
    let p1 = premise_shift_count(infra, spec);
    let p2 = premise_sizes(infra, spec);
    let to_f = |x: &Q| crate::rational::to_f64(x);
    let checks = vec![
        Check::holds("shift-count premise", "L >= 4nD(q+A+C+2)^n/C^n", p1),
        Check::at_least("good-shift fraction", &good_q, &q(1, 2)),
        Check::holds("size premise", "q >= 9 max(1,A), N >= max(4/A, 8(n+1)n2^n D A^(n-1)/(3C^n))", p2),
        Check::at_least("min fraction outside Hbound", &min_outside_q, &bound_q),
    ];
    Ok(ShiftAnalysis {
        shifts: k,
        exhaustive,
        good,
        good_fraction: to_f(&good_q),
        premise_shift_count: p1,
        premise_sizes: p2,
        min_outside: to_f(&min_outside_q),
        mean_outside: to_f(&mean_outside_q),
        outside_bound: to_f(&bound_q),
        checks,
    })
}
