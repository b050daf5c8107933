//! Window counting, covering-radius and hyperplane bounds.

use super::enumerate::successive_minima;
use super::normal_form::hnf_rational;
use super::Lattice;
use crate::error::{Error, Result};
use crate::rational::{ceil, floor, min_q, pow, qi, qz, sqrt_upper, Q, Z};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Default cap on the number of lattice points enumerated in a window.
pub const WINDOW_BUDGET: u64 = 50_000_000;

/// Full-rank lattice in lower-triangular HNF form, scaled to integers:
/// `L = (1/den) H Z^n`, `h[i][j] = 0` for `j > i`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangularLattice {
    pub n: usize,
    pub den: Z,
    /// Row-major lower-triangular entries.
    pub h: Vec<Vec<Z>>,
}

impl TriangularLattice {
    pub fn new(l: &Lattice) -> Result<Self> {
        if !l.is_full_rank() {
            return Err(Error::RankDeficient);
        }
        let (den, cols) = hnf_rational(&l.basis);
        let n = l.dim;
        let h = (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect();
        Ok(TriangularLattice { n, den, h })
    }

    /// Side lengths of the box fundamental domain `prod [0, h_ii/den)`.
    pub fn box_sides(&self) -> Vec<Q> {
        (0..self.n).map(|i| Q::new(self.h[i][i].clone(), self.den.clone())).collect()
    }

    /// Reduce `y` into the box fundamental domain; returns `(coefficients, y - H c / den)`.
    pub fn reduce(&self, y: &[Q]) -> (Vec<Z>, Vec<Q>) {
        let dq = qz(self.den.clone());
        let mut r: Vec<Q> = y.iter().map(|v| v * &dq).collect();
        let mut c = vec![Z::zero(); self.n];
        for i in 0..self.n {
            let k = floor(&(&r[i] / qz(self.h[i][i].clone())));
            for t in i..self.n {
                r[t] -= qz(&k * &self.h[t][i]);
            }
            c[i] = k;
        }
        (c, r.iter().map(|v| v / &dq).collect())
    }

    /// Point `H c / den`.
    pub fn point(&self, c: &[Z]) -> Vec<Q> {
        let dq = qz(self.den.clone());
        (0..self.n)
            .map(|i| {
                let s: Z = (0..=i).map(|j| &self.h[i][j] * &c[j]).sum();
                qz(s) / &dq
            })
            .collect()
    }

    fn range(&self, i: usize, partial: &Z, lo: &Q, hi: &Q, hi_closed: bool) -> (Z, Z) {
        let dq = qz(self.den.clone());
        let hii = qz(self.h[i][i].clone());
        let a = (lo * &dq - qz(partial.clone())) / &hii;
        let b = (hi * &dq - qz(partial.clone())) / &hii;
        let first = ceil(&a);
        let last = if hi_closed { floor(&b) } else { ceil(&b) - 1 };
        (first, last)
    }

    /// Visit the coefficient vectors of all points `y` with `lo <= y` and
    /// `y < hi` (or `y <= hi` when `hi_closed`), coordinatewise.
    pub fn for_each_in_box<F: FnMut(&[Z])>(&self, lo: &[Q], hi: &[Q], hi_closed: bool, budget: u64, mut f: F) -> Result<u64> {
        let mut c = vec![Z::zero(); self.n];
        let mut seen = 0u64;
        self.walk(0, &mut c, lo, hi, hi_closed, budget, &mut seen, &mut f)?;
        Ok(seen)
    }

    #[allow(clippy::too_many_arguments)]
    fn walk<F: FnMut(&[Z])>(
        &self,
        i: usize,
        c: &mut Vec<Z>,
        lo: &[Q],
        hi: &[Q],
        hi_closed: bool,
        budget: u64,
        seen: &mut u64,
        f: &mut F,
    ) -> Result<()> {
        let partial: Z = (0..i).map(|j| &self.h[i][j] * &c[j]).sum();
        let (first, last) = self.range(i, &partial, &lo[i], &hi[i], hi_closed);
        let mut k = first;
        while k <= last {
            c[i] = k.clone();
            if i + 1 == self.n {
                *seen += 1;
                if *seen > budget {
                    return Err(Error::budget("window enumeration", format!(">{budget}"), budget));
                }
                f(c);
            } else {
                self.walk(i + 1, c, lo, hi, hi_closed, budget, seen, f)?;
            }
            k += 1;
        }
        Ok(())
    }

    /// Number of lattice points in the box, without listing the last coordinate.
    pub fn count_in_box(&self, lo: &[Q], hi: &[Q], hi_closed: bool, budget: u64) -> Result<Z> {
        let mut c = vec![Z::zero(); self.n];
        let mut visited = 0u64;
        self.count_walk(0, &mut c, lo, hi, hi_closed, budget, &mut visited)
    }

    #[allow(clippy::too_many_arguments)]
    fn count_walk(
        &self,
        i: usize,
        c: &mut Vec<Z>,
        lo: &[Q],
        hi: &[Q],
        hi_closed: bool,
        budget: u64,
        visited: &mut u64,
    ) -> Result<Z> {
        let partial: Z = (0..i).map(|j| &self.h[i][j] * &c[j]).sum();
        let (first, last) = self.range(i, &partial, &lo[i], &hi[i], hi_closed);
        if last < first {
            return Ok(Z::zero());
        }
        if i + 1 == self.n {
            return Ok(last - first + 1);
        }
        let mut total = Z::zero();
        let mut k = first;
        while k <= last {
            *visited += 1;
            if *visited > budget {
                return Err(Error::budget("window count", format!(">{budget}"), budget));
            }
            c[i] = k.clone();
            total += self.count_walk(i + 1, c, lo, hi, hi_closed, budget, visited)?;
            k += 1;
        }
        Ok(total)
    }

    /// Points of `L ∩ [0, b)^n` as scaled integer vectors (`den * y`).
    pub fn window_points(&self, b: &Q, budget: u64) -> Result<Vec<Vec<Z>>> {
        let lo = vec![Q::zero(); self.n];
        let hi = vec![b.clone(); self.n];
        let mut out = Vec::new();
        self.for_each_in_box(&lo, &hi, false, budget, |c| {
            let y: Vec<Z> = (0..self.n).map(|i| (0..=i).map(|j| &self.h[i][j] * &c[j]).sum()).collect();
            out.push(y);
        })?;
        Ok(out)
    }
}

/// Certified upper bound on the covering radius,
/// `min(sqrt(n)/2 * lambda_n, n^((n+1)/2) det / (2 lambda_1^(n-1)))`.
pub fn covering_radius_bound(l: &Lattice) -> Result<Q> {
    let n = l.dim;
    if !l.is_full_rank() {
        return Err(Error::RankDeficient);
    }
    let mins = successive_minima(&l.basis)?;
    let l1sq = mins[0].1.clone();
    let lnsq = mins[n - 1].1.clone();
    let det = l.det()?;
    let t1 = qi(n as i64) * &lnsq / qi(4);
    let nn = qz(num_traits::pow(Z::from(n as u64), n + 1));
    let t2 = nn * &det * &det / (qi(4) * pow(&l1sq, (n - 1) as u32));
    Ok(sqrt_upper(&min_q(&t1, &t2)))
}

/// Exact window count with the covering-radius sandwich
/// `(b - 2 nu)^n / det <= #(L ∩ [0,b)^n) <= (b + 2 nu)^n / det`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowCount {
    pub count: Z,
    pub lower: Q,
    pub upper: Q,
    pub nu: Q,
}

pub fn window_count(l: &Lattice, b: &Q) -> Result<WindowCount> {
    let n = l.dim as u32;
    let tri = TriangularLattice::new(l)?;
    let lo = vec![Q::zero(); l.dim];
    let hi = vec![b.clone(); l.dim];
    let count = tri.count_in_box(&lo, &hi, false, WINDOW_BUDGET)?;
    let nu = covering_radius_bound(l)?;
    let det = l.det()?;
    let two_nu = qi(2) * &nu;
    let lower = if b > &two_nu { pow(&(b - &two_nu), n) / &det } else { Q::zero() };
    let upper = pow(&(b + &two_nu), n) / &det;
    Ok(WindowCount { count, lower, upper, nu })
}

/// `n^(k/2) (b + 2 nu)^k (2 nu)^(n-k) / det`, rounded up.
pub fn hyperplane_count_bound(n: usize, k: usize, b: &Q, nu: &Q, det: &Q) -> Q {
    let nk = qz(num_traits::pow(Z::from(n as u64), k));
    let root = sqrt_upper(&nk);
    root * pow(&(b + qi(2) * nu), k as u32) * pow(&(qi(2) * nu), (n - k) as u32) / det
}

pub fn to_u64(z: &Z) -> Option<u64> {
    if z.is_negative() { None } else { z.to_u64() }
}

pub fn is_one(z: &Z) -> bool {
    z.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn sandwich_for_z_squared() {
        let l = Lattice::from_ints(&[vec![1, 0], vec![0, 1]]).unwrap();
        let w = window_count(&l, &qi(10)).unwrap();
        assert_eq!(w.count, Z::from(100));
        assert!(w.lower <= qz(w.count.clone()) && qz(w.count.clone()) <= w.upper);
    }

    #[test]
    fn covering_bound_is_exact_in_one_dim() {
        let l = Lattice::from_ints(&[vec![40]]).unwrap();
        assert_eq!(covering_radius_bound(&l).unwrap(), qi(20));
        let l = Lattice::diagonal(&[qi(10), qi(10)]).unwrap();
        let nu = covering_radius_bound(&l).unwrap();
        assert!(&nu * &nu >= qi(50) && nu < q(7072, 1000));
    }

    #[test]
    fn reduce_lands_in_box() {
        let l = Lattice::new(vec![vec![qi(3), qi(1)], vec![qi(0), q(5, 2)]]).unwrap();
        let t = TriangularLattice::new(&l).unwrap();
        let (c, r) = t.reduce(&[q(-17, 3), qi(11)]);
        let sides = t.box_sides();
        for (x, s) in r.iter().zip(&sides) {
            assert!(!x.is_negative() && x < s);
        }
        let p = t.point(&c);
        assert_eq!(&p[0] + &r[0], q(-17, 3));
        assert_eq!(&p[1] + &r[1], qi(11));
    }
}
