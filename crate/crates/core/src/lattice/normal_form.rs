//! Hermite and Smith normal forms over the integers.
//!
//! Generic in the integer type so the small-group experiments can run on `i64`
//! while lattice work stays on `BigInt`.

use crate::rational::{Q, Z};
use num_integer::Integer;
use num_traits::Signed;

pub trait Int: Integer + Signed + Clone + std::fmt::Debug {}
impl<T: Integer + Signed + Clone + std::fmt::Debug> Int for T {}

/// `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
pub fn egcd<T: Int>(a: &T, b: &T) -> (T, T, T) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (T::one(), T::zero());
    let (mut t0, mut t1) = (T::zero(), T::one());
    while !r1.is_zero() {
        let q = r0.div_floor(&r1);
        let r2 = r0 - q.clone() * r1.clone();
        r0 = std::mem::replace(&mut r1, r2);
        let s2 = s0 - q.clone() * s1.clone();
        s0 = std::mem::replace(&mut s1, s2);
        let t2 = t0 - q * t1.clone();
        t0 = std::mem::replace(&mut t1, t2);
    }
    if r0.is_negative() {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

fn col_combo<T: Int>(a: &[T], b: &[T], x: &T, y: &T) -> Vec<T> {
    a.iter().zip(b).map(|(p, q)| x.clone() * p.clone() + y.clone() * q.clone()).collect()
}

/// Column-style Hermite normal form of the lattice generated by `cols`
/// (each of length `n`). Returns the nonzero columns: lower echelon with
/// positive pivots and entries left of each pivot reduced into `[0, pivot)`.
pub fn hnf<T: Int>(cols: &[Vec<T>], n: usize) -> Vec<Vec<T>> {
    let mut a: Vec<Vec<T>> = cols.to_vec();
    let m = a.len();
    let mut c = 0;
    for i in 0..n {
        if c == m {
            break;
        }
        for j in (c + 1)..m {
            if a[j][i].is_zero() {
                continue;
            }
            if a[c][i].is_zero() {
                a.swap(c, j);
                continue;
            }
            let (g, x, y) = egcd(&a[c][i], &a[j][i]);
            let u = a[c][i].clone() / g.clone();
            let v = a[j][i].clone() / g;
            let new_c = col_combo(&a[c], &a[j], &x, &y);
            let new_j = col_combo(&a[c], &a[j], &(-v), &u);
            a[c] = new_c;
            a[j] = new_j;
        }
        if a[c][i].is_zero() {
            continue;
        }
        if a[c][i].is_negative() {
            for v in a[c].iter_mut() {
                *v = -v.clone();
            }
        }
        let piv = a[c][i].clone();
        for j in 0..c {
            let f = a[j][i].div_floor(&piv);
            if !f.is_zero() {
                let pc = a[c].clone();
                for (p, q) in a[j].iter_mut().zip(&pc) {
                    *p = p.clone() - f.clone() * q.clone();
                }
            }
        }
        c += 1;
    }
    a.truncate(c);
    a
}

/// Canonical form of a rational lattice: the least common denominator `d` of
/// all entries and the HNF of `d * basis`. Two generating sets span the same
/// lattice iff their canonical forms agree.
pub fn hnf_rational(cols: &[Vec<Q>]) -> (Z, Vec<Vec<Z>>) {
    let n = cols.first().map_or(0, |c| c.len());
    let d = crate::rational::lcm_denominators(cols.iter().flatten());
    let ints: Vec<Vec<Z>> =
        cols.iter().map(|c| c.iter().map(|x| (x * Q::from_integer(d.clone())).to_integer()).collect()).collect();
    (d, hnf(&ints, n))
}

/// Smith normal form `U A V = D` of an `n x m` matrix given by columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Smith<T> {
    /// Diagonal entries `d_1 | d_2 | ...` (nonnegative, zeros last).
    pub diag: Vec<T>,
    /// Row transform `U` (`n x n`, row-major).
    pub u: Vec<Vec<T>>,
    /// Column transform `V` (`m x m`, row-major).
    pub v: Vec<Vec<T>>,
}

/// Smith normal form with unimodular transforms.
pub fn snf<T: Int>(cols: &[Vec<T>], n: usize) -> Smith<T> {
    let m = cols.len();
    // Row-major working copy.
    let mut a: Vec<Vec<T>> = (0..n).map(|i| (0..m).map(|j| cols[j][i].clone()).collect()).collect();
    let eye = |k: usize| -> Vec<Vec<T>> {
        (0..k).map(|i| (0..k).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect()
    };
    let mut u = eye(n);
    let mut v = eye(m);
    let r = n.min(m);
    for t in 0..r {
        loop {
            // Smallest nonzero entry of the trailing block becomes the pivot.
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..m {
                    if !a[i][j].is_zero() {
                        let better = match best {
                            None => true,
                            Some((bi, bj)) => a[i][j].abs() < a[bi][bj].abs(),
                        };
                        if better {
                            best = Some((i, j));
                        }
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            a.swap(t, pi);
            u.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }
            let piv = a[t][t].clone();
            let mut clean = true;
            for i in (t + 1)..n {
                let f = a[i][t].div_floor(&piv);
                if !f.is_zero() {
                    for j in 0..m {
                        let s = f.clone() * a[t][j].clone();
                        a[i][j] = a[i][j].clone() - s;
                    }
                    for j in 0..n {
                        let s = f.clone() * u[t][j].clone();
                        u[i][j] = u[i][j].clone() - s;
                    }
                }
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in (t + 1)..m {
                let f = a[t][j].div_floor(&piv);
                if !f.is_zero() {
                    for i in 0..n {
                        let s = f.clone() * a[i][t].clone();
                        a[i][j] = a[i][j].clone() - s;
                    }
                    for i in 0..m {
                        let s = f.clone() * v[i][t].clone();
                        v[i][j] = v[i][j].clone() - s;
                    }
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // Divisibility: fold an offending row into row t and repeat.
            let mut offender = None;
            'outer: for i in (t + 1)..n {
                for j in (t + 1)..m {
                    if !(a[i][j].clone() % piv.clone()).is_zero() {
                        offender = Some(i);
                        break 'outer;
                    }
                }
            }
            match offender {
                Some(i) => {
                    for j in 0..m {
                        let s = a[i][j].clone();
                        a[t][j] = a[t][j].clone() + s;
                    }
                    for j in 0..n {
                        let s = u[i][j].clone();
                        u[t][j] = u[t][j].clone() + s;
                    }
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for j in 0..m {
                a[t][j] = -a[t][j].clone();
            }
            for j in 0..n {
                u[t][j] = -u[t][j].clone();
            }
        }
    }
    let diag = (0..r).map(|i| a[i][i].clone()).collect();
    Smith { diag, u, v }
}

/// Invariant factors of the finite group `Z^n / L` for a full-rank integer lattice.
pub fn elementary_divisors(cols: &[Vec<Z>], n: usize) -> Vec<Z> {
    snf(cols, n).diag
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn z(v: &[i64]) -> Vec<Z> {
        v.iter().map(|&x| Z::from(x)).collect()
    }

    #[test]
    fn hnf_known() {
        let h = hnf(&[z(&[2, 1]), z(&[0, 2])], 2);
        assert_eq!(h, vec![z(&[2, 1]), z(&[0, 2])]);
        let h = hnf(&[z(&[4, 6]), z(&[6, 9]), z(&[2, 2])], 2);
        assert_eq!(h.len(), 2);
        // det of the generated lattice: gcd of 2x2 minors = gcd(0, -4, -6) = 2
        assert_eq!(&h[0][0] * &h[1][1], Z::from(2));
    }

    #[test]
    fn snf_known() {
        let s = snf(&[z(&[2, 1]), z(&[0, 2])], 2);
        assert_eq!(s.diag, z(&[1, 4]));
        let s = snf(&[vec![6i64, 0], vec![0, 4]], 2);
        assert_eq!(s.diag, vec![2, 12]);
    }

    #[test]
    fn snf_transforms_reproduce() {
        let cols = vec![z(&[3, 5, 7]), z(&[2, 8, 4]), z(&[6, 1, 9]), z(&[1, 1, 1])];
        let s = snf(&cols, 3);
        // U A V must be diagonal
        let a: Vec<Vec<Z>> = (0..3).map(|i| (0..4).map(|j| cols[j][i].clone()).collect()).collect();
        for i in 0..3 {
            for j in 0..4 {
                let mut acc = Z::zero();
                for p in 0..3 {
                    for q in 0..4 {
                        acc += &s.u[i][p] * &a[p][q] * &s.v[q][j];
                    }
                }
                let want = if i == j { s.diag[i].clone() } else { Z::zero() };
                assert_eq!(acc, want);
            }
        }
    }
}
