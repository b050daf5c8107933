use super::gram_schmidt::gram_schmidt;
use crate::error::Result;
use crate::rational::{q, round_half_up, Q, Z};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionMode {
    Lll,
    Kz,
}

/// Reduced basis with the unimodular transform and its quality factor.
///
/// `transform[j]` holds the integer coefficients of reduced vector `j` in the
/// input basis, and `|b_l| <= f * lambda_l` for every `l`, where
/// `f^2 = f_squared`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionReport {
    pub mode: ReductionMode,
    pub basis: Vec<Vec<Q>>,
    pub transform: Vec<Vec<Z>>,
    pub f_squared: Q,
}

/// `f^2` for a rank-`k` basis reduced in the given mode.
pub fn quality_factor_sq(mode: ReductionMode, k: usize) -> Q {
    match mode {
        ReductionMode::Lll => Q::from_integer(Z::one() << (k.saturating_sub(1))),
        // Rank <= 2 KZ bases attain the successive minima exactly.
        ReductionMode::Kz if k <= 2 => Q::one(),
        ReductionMode::Kz => q(k as i64 + 3, 4),
    }
}

pub(crate) struct Reducer {
    pub b: Vec<Vec<Q>>,
    pub t: Vec<Vec<Z>>,
    pub mu: Vec<Vec<Q>>,
    pub norms: Vec<Q>,
}

impl Reducer {
    pub fn new(basis: &[Vec<Q>]) -> Result<Self> {
        let gs = gram_schmidt(basis)?;
        let k = basis.len();
        let t = (0..k).map(|j| (0..k).map(|i| if i == j { Z::one() } else { Z::zero() }).collect()).collect();
        Ok(Reducer { b: basis.to_vec(), t, mu: gs.mu, norms: gs.norms })
    }

    pub fn refresh(&mut self) -> Result<()> {
        let gs = gram_schmidt(&self.b)?;
        self.mu = gs.mu;
        self.norms = gs.norms;
        Ok(())
    }

    /// `b_k -= round(mu_kl) b_l`.
    pub fn size_reduce(&mut self, k: usize, l: usize) {
        if self.mu[k][l].abs() <= q(1, 2) {
            return;
        }
        let r = round_half_up(&self.mu[k][l]);
        let rq = Q::from_integer(r.clone());
        let (bl, tl) = (self.b[l].clone(), self.t[l].clone());
        for (x, y) in self.b[k].iter_mut().zip(&bl) {
            *x -= &rq * y;
        }
        for (x, y) in self.t[k].iter_mut().zip(&tl) {
            *x -= &r * y;
        }
        for i in 0..l {
            let m = &rq * &self.mu[l][i];
            self.mu[k][i] -= m;
        }
        self.mu[k][l] -= &rq;
    }

    pub fn size_reduce_all(&mut self) {
        for k in 1..self.b.len() {
            for l in (0..k).rev() {
                self.size_reduce(k, l);
            }
        }
    }

    fn swap(&mut self, k: usize) {
        let m = self.mu[k][k - 1].clone();
        let big = &self.norms[k] + &m * &m * &self.norms[k - 1];
        self.mu[k][k - 1] = &m * &self.norms[k - 1] / &big;
        let nk = &self.norms[k - 1] * &self.norms[k] / &big;
        self.norms[k] = nk;
        self.norms[k - 1] = big;
        self.b.swap(k, k - 1);
        self.t.swap(k, k - 1);
        for j in 0..k.saturating_sub(1) {
            let tmp = self.mu[k][j].clone();
            self.mu[k][j] = self.mu[k - 1][j].clone();
            self.mu[k - 1][j] = tmp;
        }
        let new_mu = self.mu[k][k - 1].clone();
        for i in (k + 1)..self.b.len() {
            let t = self.mu[i][k].clone();
            self.mu[i][k] = &self.mu[i][k - 1] - &m * &t;
            self.mu[i][k - 1] = &t + &new_mu * &self.mu[i][k];
        }
    }

    /// Textbook LLL with `delta = 3/4`.
    pub fn lll(&mut self) {
        let delta = q(3, 4);
        let n = self.b.len();
        let mut k = 1;
        while k < n {
            self.size_reduce(k, k - 1);
            let lhs = self.norms[k].clone();
            let rhs = (&delta - &self.mu[k][k - 1] * &self.mu[k][k - 1]) * &self.norms[k - 1];
            if lhs < rhs {
                self.swap(k);
                k = if k > 1 { k - 1 } else { 1 };
            } else {
                for l in (0..k.saturating_sub(1)).rev() {
                    self.size_reduce(k, l);
                }
                k += 1;
            }
        }
    }

    pub fn report(self, mode: ReductionMode) -> ReductionReport {
        let k = self.b.len();
        ReductionReport { mode, basis: self.b, transform: self.t, f_squared: quality_factor_sq(mode, k) }
    }
}

/// LLL reduction (`delta = 3/4`, so `f = 2^((k-1)/2)`).
pub fn lll(basis: &[Vec<Q>]) -> Result<ReductionReport> {
    let mut r = Reducer::new(basis)?;
    r.lll();
    Ok(r.report(ReductionMode::Lll))
}

/// The Lovasz and size conditions, checked exactly.
pub fn is_lll_reduced(basis: &[Vec<Q>]) -> Result<bool> {
    let gs = gram_schmidt(basis)?;
    for i in 1..basis.len() {
        for j in 0..i {
            if gs.mu[i][j].abs() > q(1, 2) {
                return Ok(false);
            }
        }
        let m = &gs.mu[i][i - 1];
        if gs.norms[i] < (q(3, 4) - m * m) * &gs.norms[i - 1] {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{mat_vec_z, transpose};
    use crate::rational::{norm2, qi};

    #[test]
    fn classic_example() {
        let b = vec![vec![qi(1), qi(1), qi(1)], vec![qi(-1), qi(0), qi(2)], vec![qi(3), qi(5), qi(6)]];
        let r = lll(&b).unwrap();
        assert!(is_lll_reduced(&r.basis).unwrap());
        let cols = b.clone();
        for (v, t) in r.basis.iter().zip(&r.transform) {
            assert_eq!(&mat_vec_z(&cols, t), v);
        }
        assert_eq!(norm2(&r.basis[0]), qi(1));
        let _ = transpose(&b);
    }

    #[test]
    fn f_values() {
        assert_eq!(quality_factor_sq(ReductionMode::Lll, 3), qi(4));
        assert_eq!(quality_factor_sq(ReductionMode::Kz, 5), qi(2));
        assert_eq!(quality_factor_sq(ReductionMode::Kz, 2), qi(1));
    }
}
