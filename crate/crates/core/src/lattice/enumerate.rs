//! Fincke–Pohst enumeration over exact Gram–Schmidt data.

use super::gram_schmidt::gram_schmidt;
use super::lll::lll;
use crate::error::{Error, Result};
use crate::linalg::mat_vec_z;
use crate::rational::{ceil, floor, norm2, sqrt_upper, Q, Z};
use num_traits::{Signed, Zero};

/// Default cap on the number of vectors listed by [`short_vectors`].
pub const SHORT_VECTOR_BUDGET: usize = 2_000_000;

struct Search<'a> {
    mu: &'a [Vec<Q>],
    norms: &'a [Q],
    start: usize,
    x: Vec<Z>,
}

impl<'a> Search<'a> {
    fn center(&self, i: usize) -> Q {
        let mut c = Q::zero();
        for l in (i + 1)..self.x.len() {
            if !self.x[l].is_zero() {
                c -= Q::from_integer(self.x[l].clone()) * &self.mu[l][i];
            }
        }
        c
    }

    /// Visit every nonzero coefficient vector (top nonzero entry positive) whose
    /// projected squared norm is `<= bound()`. The callback may shrink the bound.
    fn walk<F>(&mut self, i: usize, partial: Q, all_zero_above: bool, bound: &mut Q, visit: &mut F) -> Result<()>
    where
        F: FnMut(&[Z], &Q, &mut Q) -> Result<()>,
    {
        let c = self.center(i);
        let rem = &*bound - &partial;
        if rem.is_negative() {
            return Ok(());
        }
        let r = sqrt_upper(&(rem / &self.norms[i]));
        let mut lo = ceil(&(&c - &r));
        let hi = floor(&(&c + &r));
        if all_zero_above && lo.is_negative() {
            lo = Z::zero();
        }
        let mut xi = lo;
        while xi <= hi {
            let d = Q::from_integer(xi.clone()) - &c;
            let p = &partial + &d * &d * &self.norms[i];
            if p <= *bound {
                self.x[i] = xi.clone();
                let zero_here = all_zero_above && xi.is_zero();
                if i == self.start {
                    if !zero_here {
                        let xs = self.x.clone();
                        visit(&xs, &p, bound)?;
                    }
                } else {
                    self.walk(i - 1, p, zero_here, bound, visit)?;
                }
            }
            xi += 1;
        }
        self.x[i] = Z::zero();
        Ok(())
    }
}

/// Enumerate the projected lattice `pi_start(L(b_start..b_k))` described by GS
/// data. `visit` receives full-length coefficient vectors (zeros below `start`).
pub(crate) fn enumerate_projected<F>(mu: &[Vec<Q>], norms: &[Q], start: usize, bound: Q, mut visit: F) -> Result<()>
where
    F: FnMut(&[Z], &Q, &mut Q) -> Result<()>,
{
    let k = norms.len();
    let mut s = Search { mu, norms, start, x: vec![Z::zero(); k] };
    let mut b = bound;
    s.walk(k - 1, Q::zero(), true, &mut b, &mut visit)
}

/// Shortest nonzero vector of the projected lattice starting at `start`:
/// coefficients and projected squared norm.
pub(crate) fn shortest_projected(mu: &[Vec<Q>], norms: &[Q], start: usize) -> Result<(Vec<Z>, Q)> {
    let k = norms.len();
    let mut best_x: Vec<Z> = vec![Z::zero(); k];
    best_x[start] = Z::from(1);
    let mut best = norms[start].clone();
    enumerate_projected(mu, norms, start, norms[start].clone(), |x, p, bound| {
        if p < &best {
            best = p.clone();
            best_x = x.to_vec();
            *bound = p.clone();
        }
        Ok(())
    })?;
    Ok((best_x, best))
}

/// Shortest nonzero vector and its squared norm.
pub fn svp(basis: &[Vec<Q>]) -> Result<(Vec<Q>, Q)> {
    let red = lll(basis)?;
    let gs = gram_schmidt(&red.basis)?;
    let (x, n2) = shortest_projected(&gs.mu, &gs.norms, 0)?;
    Ok((mat_vec_z(&red.basis, &x), n2))
}

/// Shortest nonzero vector of squared norm at most `radius2`, or `NotFound`.
pub fn svp_within(basis: &[Vec<Q>], radius2: &Q) -> Result<(Vec<Q>, Q)> {
    let (v, n2) = svp(basis)?;
    if &n2 <= radius2 {
        Ok((v, n2))
    } else {
        Err(Error::NotFound)
    }
}

/// Every nonzero lattice vector (one of each `±` pair) with squared norm `<= radius2`.
pub fn short_vectors(basis: &[Vec<Q>], radius2: &Q, budget: usize) -> Result<Vec<(Vec<Q>, Q)>> {
    let red = lll(basis)?;
    let gs = gram_schmidt(&red.basis)?;
    let mut out = Vec::new();
    enumerate_projected(&gs.mu, &gs.norms, 0, radius2.clone(), |x, p, _| {
        if out.len() >= budget {
            return Err(Error::budget("short vector enumeration", out.len() + 1, budget));
        }
        out.push((mat_vec_z(&red.basis, x), p.clone()));
        Ok(())
    })?;
    Ok(out)
}

/// Squared successive minima `lambda_1^2 <= ... <= lambda_k^2` with witnesses.
pub fn successive_minima(basis: &[Vec<Q>]) -> Result<Vec<(Vec<Q>, Q)>> {
    let k = basis.len();
    let red = lll(basis)?;
    let radius2 = red.basis.iter().map(|b| norm2(b)).max().ok_or(Error::RankDeficient)?;
    let mut vs = short_vectors(&red.basis, &radius2, SHORT_VECTOR_BUDGET)?;
    vs.sort_by(|a, b| a.1.cmp(&b.1));
    let mut chosen: Vec<(Vec<Q>, Q)> = Vec::with_capacity(k);
    let mut echelon: Vec<Vec<Q>> = Vec::new();
    for (v, n2) in vs {
        if let Some(reduced) = reduce_against(&echelon, &v) {
            echelon.push(reduced);
            chosen.push((v, n2));
            if chosen.len() == k {
                break;
            }
        }
    }
    if chosen.len() < k {
        return Err(Error::RankDeficient);
    }
    Ok(chosen)
}

/// Reduce `v` against an echelon set; `None` if it lies in their span.
fn reduce_against(echelon: &[Vec<Q>], v: &[Q]) -> Option<Vec<Q>> {
    let mut w = v.to_vec();
    for e in echelon {
        let p = e.iter().position(|x| !x.is_zero()).unwrap();
        if !w[p].is_zero() {
            let f = &w[p] / &e[p];
            for (a, b) in w.iter_mut().zip(e) {
                *a -= &f * b;
            }
        }
    }
    if w.iter().all(|x| x.is_zero()) {
        None
    } else {
        Some(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    #[test]
    fn svp_small() {
        let b = vec![vec![qi(2), qi(0)], vec![qi(1), qi(2)]];
        let (v, n2) = svp(&b).unwrap();
        assert_eq!(n2, qi(4));
        assert_eq!(norm2(&v), qi(4));
        assert_eq!(svp_within(&b, &qi(3)), Err(Error::NotFound));
    }

    #[test]
    fn minima_of_scaled_integer_lattice() {
        let b = vec![vec![qi(10), qi(0)], vec![qi(0), qi(10)]];
        let m = successive_minima(&b).unwrap();
        assert_eq!(m[0].1, qi(100));
        assert_eq!(m[1].1, qi(100));
    }
}
