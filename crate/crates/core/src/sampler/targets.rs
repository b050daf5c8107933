//! Rounding sets around dual-lattice vectors and the lower bound they must carry.

use crate::error::Result;
use crate::infra::GridSpec;
use crate::lattice::bounds::{TriangularLattice, WINDOW_BUDGET};
use crate::lattice::Lattice;
use crate::rational::{floor, norm2, qi, round_half_up, Q, Z};
use crate::real::{cos_pi, Ball};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rounding {
    /// `{floor(2nq x_k), floor(2nq x_k) + 1}` per axis, `2^n` outcomes.
    Floor,
    /// One outcome, the nearest integer to `2q x` (one dimension).
    Nearest,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualApproxTarget {
    pub lambda_star: Vec<Q>,
    pub r_set: Vec<Vec<u64>>,
}

/// `2nq`, the scale between outcomes and dual vectors.
pub fn outcome_scale(spec: &GridSpec) -> Q {
    qi(2 * spec.n as i64 * spec.q as i64)
}

/// Integer rounding set of `lambda_star`; entries may be negative.
pub fn r_set(lambda_star: &[Q], spec: &GridSpec, rounding: Rounding) -> Vec<Vec<i64>> {
    let sc = outcome_scale(spec);
    match rounding {
        Rounding::Nearest => vec![lambda_star.iter().map(|x| round_half_up(&(x * &sc)).to_i64().unwrap()).collect()],
        Rounding::Floor => {
            let base: Vec<i64> = lambda_star.iter().map(|x| floor(&(x * &sc)).to_i64().unwrap()).collect();
            let n = base.len();
            (0..(1usize << n)).map(|mask| (0..n).map(|j| base[j] + ((mask >> j) & 1) as i64).collect()).collect()
        }
    }
}

/// Upper end of the outcome window, `2nq kappa N`.
pub fn window_top(spec: &GridSpec, kappa: &Q) -> Q {
    outcome_scale(spec) * kappa * qi(spec.big_n as i64)
}

/// Dual vectors whose rounding set lies in `[0, 2nq kappa N]^n`.
pub fn in_window_targets(lambda: &Lattice, spec: &GridSpec, kappa: &Q, rounding: Rounding) -> Result<Vec<DualApproxTarget>> {
    let dual = lambda.dual()?;
    let tri = TriangularLattice::new(&dual)?;
    let n = spec.n;
    let sc = outcome_scale(spec);
    let top = window_top(spec, kappa);
    let pad = Q::one() / &sc;
    let lo = vec![-pad.clone(); n];
    let hi = vec![&top / &sc + &pad; n];
    let mut out = Vec::new();
    tri.for_each_in_box(&lo, &hi, true, WINDOW_BUDGET, |c| {
        let ls = tri.point(c);
        let rs = r_set(&ls, spec, rounding);
        let inside = rs.iter().all(|w| w.iter().all(|&x| x >= 0 && qi(x) <= top));
        if inside {
            out.push(DualApproxTarget { lambda_star: ls, r_set: rs.iter().map(|w| w.iter().map(|&x| x as u64).collect()).collect() });
        }
    })?;
    Ok(out)
}

/// `||w / (2nq) - lambda*||_2^2 <= 1/(4 n q^2)` (floor sets) or `|w/(2q) - lambda*| <= 1/(4q)` (nearest).
pub fn r_set_radius_ok(t: &DualApproxTarget, spec: &GridSpec, rounding: Rounding) -> bool {
    let sc = outcome_scale(spec);
    let n = spec.n as i64;
    let q = spec.q as i64;
    let r2 = match rounding {
        Rounding::Floor => Q::new(Z::one(), Z::from(4 * n * q * q)),
        Rounding::Nearest => Q::new(Z::one(), Z::from(16 * q * q)),
    };
    t.r_set.iter().all(|w| {
        let d: Vec<Q> = w.iter().zip(&t.lambda_star).map(|(&x, l)| qi(x as i64) / &sc - l).collect();
        norm2(&d) <= r2
    })
}

/// Upper bound on `||w / (2nq) - lambda*||_2` for `w` in a rounding set: `1/(2 sqrt(n) q)` or `1/(4q)`.
pub fn rounding_radius(n: usize, q: u64, rounding: Rounding) -> Q {
    match rounding {
        Rounding::Floor => Q::one() / (qi(2) * crate::rational::sqrt_lower(&qi(n as i64)) * qi(q as i64)),
        Rounding::Nearest => Q::new(Z::one(), Z::from(4 * q)),
    }
}

/// Which form of the cosine constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CosineForm {
    /// `1/(2qN)` term.
    Half,
    /// `1/(4qN)` term.
    Quarter,
}

/// Enclosure of `cos^2(pi (1/4 + 1/(2qN or 4qN) + 2 kappa n))`.
pub fn cosine_constant(spec: &GridSpec, kappa: &Q, form: CosineForm) -> Ball {
    let qn = qi((spec.q * spec.big_n) as i64);
    let t = match form {
        CosineForm::Half => Q::one() / (qi(2) * &qn),
        CosineForm::Quarter => Q::one() / (qi(4) * &qn),
    };
    let r = Q::new(Z::one(), Z::from(4)) + t + qi(2) * kappa * qi(spec.n as i64);
    let c = cos_pi(&r);
    // cos is nonnegative on [0, 1/2]; clamp the lower end for safety.
    let lo = if c.lo.is_negative() { Q::zero() } else { c.lo.clone() };
    let c = Ball { lo, hi: c.hi };
    c.mul(&c)
}

/// `2^(n-1) * m * c / W`, `W = (2nqN)^n`.
pub fn probability_lower_bound(spec: &GridSpec, m: &Q, c: &Ball, rounding: Rounding) -> Ball {
    let w_total = qi(spec.w_side() as i64).pow(spec.n as i32);
    let factor = match rounding {
        Rounding::Floor => qi(1i64 << (spec.n - 1)),
        Rounding::Nearest => Q::one(),
    };
    c.mul_q(&(factor * m / w_total))
}

/// `kappa < 1/(8n) - 1/(4nqN)`, or `< 1/8 - 1/(8qN)` for nearest rounding in one dimension.
pub fn kappa_admissible(spec: &GridSpec, kappa: &Q, rounding: Rounding) -> bool {
    let n = spec.n as i64;
    let qn = qi((spec.q * spec.big_n) as i64);
    let bound = match rounding {
        Rounding::Floor => Q::new(Z::one(), Z::from(8 * n)) - Q::one() / (qi(4 * n) * &qn),
        Rounding::Nearest => Q::new(Z::one(), Z::from(8)) - Q::one() / (qi(8) * &qn),
    };
    kappa.is_positive() && kappa < &bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn forty_targets() {
        let l = Lattice::from_ints(&[vec![40]]).unwrap();
        let spec = GridSpec::new(1, 32, 160, 708);
        let t = in_window_targets(&l, &spec, &q(1, 9), Rounding::Floor).unwrap();
        // 2q kappa N = 320*32/9 = 1137.7; lambda* = k/40 with 8k + 1 <= 1137
        assert_eq!(t.len(), 143);
        assert_eq!(t[1].r_set, vec![vec![8], vec![9]]);
        assert!(t.iter().all(|x| r_set_radius_ok(x, &spec, Rounding::Floor)));
        let c = cosine_constant(&spec, &q(1, 9), CosineForm::Half);
        assert!(c.lo > q(74, 10000) && c.hi < q(77, 10000));
    }

    #[test]
    fn paper_cosine_constant() {
        // qN = 32^2, kappa = 1/(9n): the quarter form clears 0.00746, the half form does not
        let spec = GridSpec::new(1, 32, 32, 1);
        let c = cosine_constant(&spec, &q(1, 9), CosineForm::Quarter);
        assert!(c.lo >= q(746, 100000));
        let h = cosine_constant(&spec, &q(1, 9), CosineForm::Half);
        assert!(h.hi < q(746, 100000) && h.lo > q(733, 100000));
    }
}
