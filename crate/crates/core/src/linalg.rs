//! Dense exact linear algebra over the rationals.
//!
//! Matrices are stored as a list of columns; `m[j][i]` is row `i` of column `j`.

use crate::error::{Error, Result};
use crate::rational::{Q, Z};
use num_traits::{One, Signed, Zero};

pub type Cols = Vec<Vec<Q>>;

pub fn nrows(m: &Cols) -> usize {
    m.first().map_or(0, |c| c.len())
}

pub fn identity(n: usize) -> Cols {
    (0..n).map(|j| (0..n).map(|i| if i == j { Q::one() } else { Q::zero() }).collect()).collect()
}

pub fn transpose(m: &Cols) -> Cols {
    let r = nrows(m);
    (0..r).map(|i| m.iter().map(|c| c[i].clone()).collect()).collect()
}

pub fn mat_vec(m: &Cols, x: &[Q]) -> Vec<Q> {
    let mut out = vec![Q::zero(); nrows(m)];
    for (c, xj) in m.iter().zip(x) {
        if xj.is_zero() {
            continue;
        }
        for (o, v) in out.iter_mut().zip(c) {
            *o += v * xj;
        }
    }
    out
}

pub fn mat_vec_z(m: &Cols, x: &[Z]) -> Vec<Q> {
    let xq: Vec<Q> = x.iter().map(|v| Q::from_integer(v.clone())).collect();
    mat_vec(m, &xq)
}

pub fn mat_mul(a: &Cols, b: &Cols) -> Cols {
    b.iter().map(|c| mat_vec(a, c)).collect()
}

/// Row-major working copy.
fn rows_of(m: &Cols) -> Vec<Vec<Q>> {
    transpose(m)
}

/// Rank by fraction-free-free Gaussian elimination.
pub fn rank(m: &Cols) -> usize {
    let mut a = rows_of(m);
    let (r, c) = (a.len(), m.len());
    let mut rank = 0;
    for col in 0..c {
        let Some(p) = (rank..r).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(rank, p);
        let piv = a[rank][col].clone();
        for i in (rank + 1)..r {
            if a[i][col].is_zero() {
                continue;
            }
            let f = &a[i][col] / &piv;
            for j in col..c {
                let t = &f * &a[rank][j];
                a[i][j] -= t;
            }
        }
        rank += 1;
        if rank == r {
            break;
        }
    }
    rank
}

/// Determinant of a square matrix.
pub fn det(m: &Cols) -> Q {
    let n = m.len();
    assert_eq!(nrows(m), n, "det of non-square matrix");
    let mut a = rows_of(m);
    let mut d = Q::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&i| !a[i][col].is_zero()) else { return Q::zero() };
        if p != col {
            a.swap(p, col);
            d = -d;
        }
        let piv = a[col][col].clone();
        d *= &piv;
        for i in (col + 1)..n {
            if a[i][col].is_zero() {
                continue;
            }
            let f = &a[i][col] / &piv;
            for j in col..n {
                let t = &f * &a[col][j];
                a[i][j] -= t;
            }
        }
    }
    d
}

/// Inverse of a square matrix.
pub fn inverse(m: &Cols) -> Result<Cols> {
    let n = m.len();
    if nrows(m) != n {
        return Err(Error::invalid("inverse of non-square matrix"));
    }
    let mut a = rows_of(m);
    let mut inv = rows_of(&identity(n));
    for col in 0..n {
        let p = (col..n).find(|&i| !a[i][col].is_zero()).ok_or(Error::RankDeficient)?;
        a.swap(p, col);
        inv.swap(p, col);
        let piv = a[col][col].clone();
        for j in 0..n {
            a[col][j] /= &piv;
            inv[col][j] /= &piv;
        }
        for i in 0..n {
            if i == col || a[i][col].is_zero() {
                continue;
            }
            let f = a[i][col].clone();
            for j in 0..n {
                let t = &f * &a[col][j];
                a[i][j] -= t;
                let t = &f * &inv[col][j];
                inv[i][j] -= t;
            }
        }
    }
    Ok(transpose(&inv))
}

/// Solve `m x = b` for square invertible `m`.
pub fn solve(m: &Cols, b: &[Q]) -> Result<Vec<Q>> {
    Ok(mat_vec(&inverse(m)?, b))
}

/// Gram matrix `B^T B`.
pub fn gram(m: &Cols) -> Cols {
    m.iter().map(|ci| m.iter().map(|cj| crate::rational::dot(ci, cj)).collect()).collect()
}

/// Maximum column sum of absolute values.
pub fn norm1_mat(m: &Cols) -> Q {
    m.iter().map(|c| crate::rational::norm1(c)).max().unwrap_or_else(Q::zero)
}

/// Maximum row sum of absolute values.
pub fn norm_inf_mat(m: &Cols) -> Q {
    norm1_mat(&transpose(m))
}

pub fn sub(a: &Cols, b: &Cols) -> Cols {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u - v).collect()).collect()
}

pub fn to_q_cols(m: &[Vec<Z>]) -> Cols {
    m.iter().map(|c| c.iter().map(|v| Q::from_integer(v.clone())).collect()).collect()
}

pub fn abs_det(m: &Cols) -> Q {
    det(m).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn inverse_roundtrip() {
        let m = vec![vec![qi(2), qi(1)], vec![q(1, 3), qi(5)]];
        let inv = inverse(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv), identity(2));
        assert_eq!(det(&m), qi(10) - q(1, 3));
        assert_eq!(rank(&vec![vec![qi(1), qi(2)], vec![qi(2), qi(4)]]), 1);
    }
}
