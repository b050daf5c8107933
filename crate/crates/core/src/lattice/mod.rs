//! Exact rational lattices.

pub mod bounds;
pub mod enumerate;
pub mod gram_schmidt;
pub mod kz;
pub mod lll;
pub mod normal_form;
pub mod random;

pub use bounds::{covering_radius_bound, hyperplane_count_bound, window_count, TriangularLattice, WindowCount};
pub use enumerate::{short_vectors, successive_minima, svp, svp_within};
pub use gram_schmidt::{gram_schmidt, GramSchmidt};
pub use kz::{is_kz_reduced, kz};
pub use lll::{is_lll_reduced, lll, quality_factor_sq, ReductionMode, ReductionReport};
pub use normal_form::{hnf, hnf_rational, snf, Smith};
pub use random::{random_lattice, random_unimodular};

use crate::error::{Error, Result};
use crate::linalg::{self, Cols};
use crate::rational::{from_json_vec, to_json_vec, JsonQ, Q, Z};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// A lattice in `Q^n` given by a basis of `r <= n` linearly independent columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub dim: usize,
    pub basis: Cols,
}

/// Wire form: `{"n": dim, "basis": [[num, den], ...]}`, column-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeJson {
    pub n: usize,
    pub basis: Vec<JsonQ>,
}

impl Lattice {
    pub fn new(basis: Cols) -> Result<Self> {
        let dim = basis.first().map(|c| c.len()).ok_or_else(|| Error::invalid("empty basis"))?;
        if basis.iter().any(|c| c.len() != dim) {
            return Err(Error::invalid("basis columns of unequal length"));
        }
        if basis.len() > dim || linalg::rank(&basis) != basis.len() {
            return Err(Error::RankDeficient);
        }
        Ok(Lattice { dim, basis })
    }

    pub fn from_ints(cols: &[Vec<i64>]) -> Result<Self> {
        Lattice::new(cols.iter().map(|c| c.iter().map(|&x| crate::rational::qi(x)).collect()).collect())
    }

    /// `diag(d_1, ..., d_n)`.
    pub fn diagonal(d: &[Q]) -> Result<Self> {
        let n = d.len();
        Lattice::new(
            (0..n).map(|j| (0..n).map(|i| if i == j { d[j].clone() } else { Q::zero() }).collect()).collect(),
        )
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim
    }

    /// Covolume; for rank-deficient lattices the square of it is exact, see [`Lattice::det_squared`].
    pub fn det(&self) -> Result<Q> {
        if !self.is_full_rank() {
            return Err(Error::Capability("det of a rank-deficient lattice is irrational in general".into()));
        }
        Ok(linalg::abs_det(&self.basis))
    }

    pub fn det_squared(&self) -> Q {
        linalg::det(&linalg::gram(&self.basis))
    }

    pub fn point(&self, coeffs: &[Z]) -> Vec<Q> {
        linalg::mat_vec_z(&self.basis, coeffs)
    }

    /// Integer coordinates of `v` in the basis, if `v` is a lattice vector.
    pub fn coordinates(&self, v: &[Q]) -> Option<Vec<Z>> {
        if !self.is_full_rank() {
            let g = linalg::gram(&self.basis);
            let rhs: Vec<Q> = self.basis.iter().map(|c| crate::rational::dot(c, v)).collect();
            let x = linalg::solve(&g, &rhs).ok()?;
            if linalg::mat_vec(&self.basis, &x) != v {
                return None;
            }
            return x.iter().all(|c| c.is_integer()).then(|| x.iter().map(|c| c.to_integer()).collect());
        }
        let x = linalg::solve(&self.basis, v).ok()?;
        x.iter().all(|c| c.is_integer()).then(|| x.iter().map(|c| c.to_integer()).collect())
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.coordinates(v).is_some()
    }

    /// Canonical HNF witness of the lattice.
    pub fn canonical(&self) -> (Z, Vec<Vec<Z>>) {
        hnf_rational(&self.basis)
    }

    pub fn same_lattice(&self, other: &Lattice) -> bool {
        self.dim == other.dim && self.canonical() == other.canonical()
    }

    /// Dual lattice, basis `B^{-T}` (full rank only).
    pub fn dual(&self) -> Result<Lattice> {
        if !self.is_full_rank() {
            return Err(Error::Capability("dual of a rank-deficient lattice".into()));
        }
        let inv = linalg::inverse(&self.basis)?;
        Lattice::new(linalg::transpose(&inv))
    }

    pub fn scaled(&self, s: &Q) -> Lattice {
        Lattice { dim: self.dim, basis: self.basis.iter().map(|c| c.iter().map(|x| x * s).collect()).collect() }
    }

    /// Is `L` contained in `self`?
    pub fn contains_lattice(&self, l: &Lattice) -> bool {
        l.basis.iter().all(|c| self.contains(c))
    }

    /// Lattice generated by arbitrary vectors (may be dependent).
    pub fn generated_by(vectors: &[Vec<Q>]) -> Result<Lattice> {
        let n = vectors.first().map(|c| c.len()).ok_or_else(|| Error::invalid("no generators"))?;
        let (d, h) = hnf_rational(vectors);
        if h.is_empty() {
            return Err(Error::RankDeficient);
        }
        let dq = Q::from_integer(d);
        let cols = h.iter().map(|c| c.iter().map(|x| Q::from_integer(x.clone()) / &dq).collect()).collect();
        let l = Lattice::new(cols)?;
        debug_assert_eq!(l.dim, n);
        Ok(l)
    }

    pub fn to_json(&self) -> LatticeJson {
        LatticeJson { n: self.dim, basis: self.basis.iter().flat_map(|c| to_json_vec(c)).collect() }
    }

    pub fn from_json(j: &LatticeJson) -> Result<Lattice> {
        if j.n == 0 || j.basis.len() % j.n != 0 {
            return Err(Error::invalid("basis length is not a multiple of n"));
        }
        let flat = from_json_vec(&j.basis);
        Lattice::new(flat.chunks(j.n).map(|c| c.to_vec()).collect())
    }

    /// Index `[self : sub]` for a full-rank sublattice.
    pub fn index_of(&self, sub: &Lattice) -> Result<Z> {
        let r = sub.det()? / self.det()?;
        if !r.is_integer() || !self.contains_lattice(sub) {
            return Err(Error::invalid("not a sublattice"));
        }
        Ok(r.to_integer().abs())
    }
}

impl Serialize for Lattice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = LatticeJson::deserialize(d)?;
        Lattice::from_json(&j).map_err(serde::de::Error::custom)
    }
}

/// Integer identity columns.
pub fn int_identity(n: usize) -> Vec<Vec<Z>> {
    (0..n).map(|j| (0..n).map(|i| if i == j { Z::one() } else { Z::zero() }).collect()).collect()
}

/// Absolute value helper for integer matrices.
pub fn max_abs_entry(m: &[Vec<Z>]) -> Z {
    m.iter().flatten().map(|x| x.abs()).max().unwrap_or_else(Z::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn json_roundtrip_and_dual() {
        let l = Lattice::new(vec![vec![qi(2), qi(0)], vec![qi(1), q(5, 2)]]).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        let back: Lattice = serde_json::from_str(&s).unwrap();
        assert_eq!(l, back);
        let d = l.dual().unwrap();
        for a in &l.basis {
            for b in &d.basis {
                assert!(crate::rational::dot(a, b).is_integer());
            }
        }
        assert_eq!(d.det().unwrap() * l.det().unwrap(), qi(1));
        assert!(d.dual().unwrap().same_lattice(&l));
    }
}
