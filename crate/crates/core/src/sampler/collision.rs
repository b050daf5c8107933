//! Collision sets and their periodic structure.

use crate::error::{Error, Result};
use crate::infra::{BoxInfrastructure, FRep, GridContext};
use crate::lattice::bounds::{TriangularLattice, WINDOW_BUDGET};
use crate::rational::{pow, qi, Q, Z};
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Preimage of one measured value of `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionSet {
    pub anchor: Vec<u64>,
    pub value: FRep,
    pub members: Vec<Vec<u64>>,
    /// `s + v/N` lies in the thickened boundary; bounds are not asserted for such anchors.
    pub anchor_in_hbound: bool,
}

impl CollisionSet {
    pub fn m(&self) -> usize {
        self.members.len()
    }
}

pub fn build_collision_set(ctx: &GridContext, sigma: &[u64], anchor: &[u64]) -> Result<CollisionSet> {
    let value = ctx.f(sigma, anchor)?;
    let members = ctx.collisions(sigma, anchor)?;
    if !members.iter().any(|m| m == anchor) {
        return Err(Error::CheckFailed("anchor missing from its own collision set".into()));
    }
    let anchor_in_hbound = !ctx.anchor_ok(sigma, anchor);
    Ok(CollisionSet { anchor: anchor.to_vec(), value, members, anchor_in_hbound })
}

/// `(q^n / det) (1 - 3n/(qN) - 2 n nu / q)` with `nu` an upper bound on the covering radius.
pub fn m_lower(n: usize, q: u64, big_n: u64, det: &Q, nu: &Q) -> Q {
    let nq = qi(n as i64);
    let qq = qi(q as i64);
    let factor = Q::one() - &nq * qi(3) / (&qq * qi(big_n as i64)) - qi(2) * &nq * nu / &qq;
    pow(&qq, n as u32) / det * factor
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MestimateReport {
    pub m: usize,
    /// Every member has exactly one period translate within `1 - 1/L`.
    pub unique_translate: bool,
    /// Every translate keeping `v + N lambda` in `[1, qN-2]^n` has exactly one member.
    pub translate_has_member: bool,
    pub members_checked: usize,
    pub translates_checked: usize,
    pub violations: Vec<String>,
}

fn strict_close(diff: &[Q], lam: &[Q], big_n: &Q, thr: &Q) -> bool {
    diff.iter().zip(lam).all(|(d, l)| (d - big_n * l).abs() < *thr)
}

/// Exhaustive check of the collision structure for one anchor (translates as `v' ~ v + N lambda`).
pub fn check_mestimate(infra: &BoxInfrastructure, big_n: u64, q: u64, l: u64, cs: &CollisionSet) -> Result<MestimateReport> {
    let n = cs.anchor.len();
    let tri = TriangularLattice::new(&infra.lambda)?;
    let nq = qi(big_n as i64);
    let thr = Q::one() - Q::new(Z::one(), Z::from(l));
    let v: Vec<Q> = cs.anchor.iter().map(|&x| qi(x as i64)).collect();
    let mut violations = Vec::new();
    for m in &cs.members {
        let diff: Vec<Q> = (0..n).map(|j| qi(m[j] as i64) - &v[j]).collect();
        let lo: Vec<Q> = diff.iter().map(|d| (d - &thr) / &nq).collect();
        let hi: Vec<Q> = diff.iter().map(|d| (d + &thr) / &nq).collect();
        let mut count = 0;
        tri.for_each_in_box(&lo, &hi, true, WINDOW_BUDGET, |c| {
            if strict_close(&diff, &tri.point(c), &nq, &thr) {
                count += 1;
            }
        })?;
        if count != 1 {
            violations.push(format!("member {m:?}: {count} translates within 1 - 1/L"));
        }
    }
    let members: HashSet<Vec<i64>> = cs.members.iter().map(|m| m.iter().map(|&x| x as i64).collect()).collect();
    let top = qi((q * big_n) as i64 - 2);
    let lo: Vec<Q> = v.iter().map(|x| (qi(1) - x) / &nq).collect();
    let hi: Vec<Q> = v.iter().map(|x| (&top - x) / &nq).collect();
    let mut translates = 0usize;
    let mut lambdas = Vec::new();
    tri.for_each_in_box(&lo, &hi, true, WINDOW_BUDGET, |c| lambdas.push(tri.point(c)))?;
    for lam in &lambdas {
        translates += 1;
        let centre: Vec<Q> = (0..n).map(|j| &v[j] + &nq * &lam[j]).collect();
        // candidates per axis: integers within (centre - thr, centre + thr)
        let axes: Vec<Vec<i64>> = centre
            .iter()
            .map(|c| {
                let a = (c - &thr).floor().to_integer() + 1;
                let b = (c + &thr).ceil().to_integer() - 1;
                let mut out = Vec::new();
                let mut x = a;
                while x <= b {
                    out.push(i64::try_from(&x).unwrap_or(i64::MIN));
                    x += 1;
                }
                out
            })
            .collect();
        let mut hits = 0;
        let mut idx = vec![0usize; n];
        if axes.iter().all(|a| !a.is_empty()) {
            'outer: loop {
                let cand: Vec<i64> = (0..n).map(|j| axes[j][idx[j]]).collect();
                if members.contains(&cand) {
                    hits += 1;
                }
                for j in 0..n {
                    idx[j] += 1;
                    if idx[j] < axes[j].len() {
                        continue 'outer;
                    }
                    idx[j] = 0;
                }
                break;
            }
        }
        if hits != 1 {
            violations.push(format!("translate {lam:?}: {hits} members"));
        }
    }
    let unique_translate = !violations.iter().any(|s| s.starts_with("member"));
    let translate_has_member = !violations.iter().any(|s| s.starts_with("translate"));
    Ok(MestimateReport { m: cs.m(), unique_translate, translate_has_member, members_checked: cs.m(), translates_checked: translates, violations })
}
