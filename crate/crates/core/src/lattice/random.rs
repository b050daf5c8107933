//! Random full-rank test lattices.

use super::Lattice;
use crate::rational::{q, Q};
use rand::Rng;

/// Random rational basis with integer entries in `[-spread, spread]` over a denominator in `1..=max_den`.
pub fn random_lattice<R: Rng>(n: usize, spread: i64, max_den: i64, rng: &mut R) -> Lattice {
    loop {
        let den = rng.gen_range(1..=max_den);
        let cols: Vec<Vec<Q>> =
            (0..n).map(|_| (0..n).map(|_| q(rng.gen_range(-spread..=spread), den)).collect()).collect();
        if let Ok(l) = Lattice::new(cols) {
            return l;
        }
    }
}

/// Integer matrix with `|det| = 1`, built from random elementary column operations.
pub fn random_unimodular<R: Rng>(k: usize, steps: usize, spread: i64, rng: &mut R) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i64>> = (0..k).map(|j| (0..k).map(|i| (i == j) as i64).collect()).collect();
    if k < 2 {
        return m;
    }
    for _ in 0..steps {
        let a = rng.gen_range(0..k);
        let mut b = rng.gen_range(0..k - 1);
        if b >= a {
            b += 1;
        }
        let f = rng.gen_range(-spread..=spread);
        let src = m[b].clone();
        for (x, y) in m[a].iter_mut().zip(&src) {
            *x += f * y;
        }
        if rng.gen_bool(0.3) {
            m.swap(a, b);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{det, to_q_cols};
    use crate::rng::stream;
    use num_traits::Signed;

    #[test]
    fn unimodular_has_unit_det() {
        let mut r = stream(1, "t", 0);
        for _ in 0..20 {
            let m = random_unimodular(4, 12, 2, &mut r);
            let z: Vec<Vec<crate::Z>> = m.iter().map(|c| c.iter().map(|&x| x.into()).collect()).collect();
            assert_eq!(det(&to_q_cols(&z)).abs(), crate::qi(1));
        }
        let l = random_lattice(3, 5, 3, &mut r);
        assert!(l.is_full_rank());
    }
}
