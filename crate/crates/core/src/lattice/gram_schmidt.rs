use crate::error::{Error, Result};
use crate::rational::{dot, Q};
use num_traits::{One, Zero};

/// Exact Gram–Schmidt data of an ordered basis.
#[derive(Clone, Debug, PartialEq)]
pub struct GramSchmidt {
    /// Orthogonalized vectors `b*_i`.
    pub bstar: Vec<Vec<Q>>,
    /// `mu[i][j] = <b_i, b*_j> / <b*_j, b*_j>` for `j < i`, `mu[i][i] = 1`.
    pub mu: Vec<Vec<Q>>,
    /// Squared norms `|b*_i|^2`.
    pub norms: Vec<Q>,
}

pub fn gram_schmidt(basis: &[Vec<Q>]) -> Result<GramSchmidt> {
    let k = basis.len();
    let mut bstar: Vec<Vec<Q>> = Vec::with_capacity(k);
    let mut mu = vec![vec![Q::zero(); k]; k];
    let mut norms: Vec<Q> = Vec::with_capacity(k);
    for i in 0..k {
        let mut v = basis[i].clone();
        for j in 0..i {
            let m = dot(&basis[i], &bstar[j]) / &norms[j];
            for (x, y) in v.iter_mut().zip(&bstar[j]) {
                *x -= &m * y;
            }
            mu[i][j] = m;
        }
        mu[i][i] = Q::one();
        let n = dot(&v, &v);
        if n.is_zero() {
            return Err(Error::RankDeficient);
        }
        norms.push(n);
        bstar.push(v);
    }
    Ok(GramSchmidt { bstar, mu, norms })
}

/// Squared norms and coefficients only, computed from the Gram matrix.
pub fn gso_from_gram(gram: &[Vec<Q>]) -> Result<(Vec<Vec<Q>>, Vec<Q>)> {
    let k = gram.len();
    let mut mu = vec![vec![Q::zero(); k]; k];
    let mut norms = Vec::with_capacity(k);
    for i in 0..k {
        for j in 0..i {
            let mut r = gram[i][j].clone();
            for l in 0..j {
                r -= &mu[j][l] * &mu[i][l] * &norms[l];
            }
            mu[i][j] = r / &norms[j];
        }
        let mut b = gram[i][i].clone();
        for l in 0..i {
            b -= &mu[i][l] * &mu[i][l] * &norms[l];
        }
        if b.is_zero() {
            return Err(Error::RankDeficient);
        }
        mu[i][i] = Q::one();
        norms.push(b);
    }
    Ok((mu, norms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn orthogonal_and_reconstructs() {
        let b = vec![vec![qi(3), qi(1), qi(0)], vec![qi(2), qi(2), qi(1)], vec![q(1, 2), qi(0), qi(4)]];
        let gs = gram_schmidt(&b).unwrap();
        for i in 0..3 {
            for j in 0..i {
                assert!(dot(&gs.bstar[i], &gs.bstar[j]).is_zero());
            }
            let mut r = vec![Q::zero(); 3];
            for j in 0..=i {
                for t in 0..3 {
                    r[t] += &gs.mu[i][j] * &gs.bstar[j][t];
                }
            }
            assert_eq!(r, b[i]);
        }
    }

    #[test]
    fn dependent_rejected() {
        let b = vec![vec![qi(1), qi(2)], vec![qi(2), qi(4)]];
        assert_eq!(gram_schmidt(&b), Err(Error::RankDeficient));
    }
}
