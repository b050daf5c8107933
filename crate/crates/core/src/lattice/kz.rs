use super::enumerate::shortest_projected;
use super::gram_schmidt::gram_schmidt;
use super::lll::{ReductionMode, ReductionReport, Reducer};
use crate::error::{Error, Result};
use crate::rational::{Q, Z};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Largest rank accepted by the enumeration-based KZ reduction.
pub const KZ_MAX_RANK: usize = 12;

/// Replace columns `j..` so that column `j` becomes `sum_i x_i b_i`, keeping a basis.
fn insert(r: &mut Reducer, j: usize, x: &[Z]) {
    let mut x = x.to_vec();
    let k = x.len();
    for b in ((j + 1)..k).rev() {
        let a = b - 1;
        if x[b].is_zero() {
            continue;
        }
        let e = x[a].extended_gcd(&x[b]);
        let g = e.gcd.clone();
        let (alpha, beta) = (e.x.clone(), e.y.clone());
        let (u, v) = (&x[a] / &g, &x[b] / &g);
        let (uq, vq, aq, bq) = (
            Q::from_integer(u.clone()),
            Q::from_integer(v.clone()),
            Q::from_integer(alpha.clone()),
            Q::from_integer(beta.clone()),
        );
        let (ca, cb) = (r.b[a].clone(), r.b[b].clone());
        r.b[a] = ca.iter().zip(&cb).map(|(p, q)| &uq * p + &vq * q).collect();
        r.b[b] = ca.iter().zip(&cb).map(|(p, q)| -(&bq * p) + &aq * q).collect();
        let (ta, tb) = (r.t[a].clone(), r.t[b].clone());
        r.t[a] = ta.iter().zip(&tb).map(|(p, q)| &u * p + &v * q).collect();
        r.t[b] = ta.iter().zip(&tb).map(|(p, q)| -(&beta * p) + &alpha * q).collect();
        x[a] = g;
        x[b] = Z::zero();
    }
    if x[j].is_negative() {
        for v in r.b[j].iter_mut() {
            *v = -v.clone();
        }
        for v in r.t[j].iter_mut() {
            *v = -v.clone();
        }
    }
}

/// Hermite–Korkine–Zolotarev reduction by repeated projected SVP.
pub fn kz(basis: &[Vec<Q>]) -> Result<ReductionReport> {
    let k = basis.len();
    if k > KZ_MAX_RANK {
        return Err(Error::Capability(format!("KZ reduction limited to rank {KZ_MAX_RANK}, got {k}")));
    }
    let mut r = Reducer::new(basis)?;
    r.lll();
    for j in 0..k {
        let (x, n2) = shortest_projected(&r.mu, &r.norms, j)?;
        if n2 < r.norms[j] {
            insert(&mut r, j, &x);
            r.refresh()?;
        }
    }
    r.size_reduce_all();
    Ok(r.report(ReductionMode::Kz))
}

/// Size-reduced and every `b*_j` shortest in its projected lattice.
pub fn is_kz_reduced(basis: &[Vec<Q>]) -> Result<bool> {
    let gs = gram_schmidt(basis)?;
    let half = Q::new(Z::one(), Z::from(2));
    for i in 0..basis.len() {
        for j in 0..i {
            if gs.mu[i][j].abs() > half {
                return Ok(false);
            }
        }
        let (_, n2) = shortest_projected(&gs.mu, &gs.norms, i)?;
        if n2 < gs.norms[i] {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate::successive_minima;
    use crate::linalg::mat_vec_z;
    use crate::rational::{norm2, qi};

    #[test]
    fn kz_attains_bound() {
        let b = vec![
            vec![qi(7), qi(2), qi(0), qi(1)],
            vec![qi(3), qi(11), qi(1), qi(0)],
            vec![qi(1), qi(4), qi(13), qi(2)],
            vec![qi(5), qi(1), qi(2), qi(9)],
        ];
        let r = kz(&b).unwrap();
        assert!(is_kz_reduced(&r.basis).unwrap());
        for (v, t) in r.basis.iter().zip(&r.transform) {
            assert_eq!(&mat_vec_z(&b, t), v);
        }
        let mins = successive_minima(&b).unwrap();
        assert_eq!(norm2(&r.basis[0]), mins[0].1);
        for (v, (_, l2)) in r.basis.iter().zip(&mins) {
            assert!(norm2(v) <= &r.f_squared * l2);
        }
    }
}
