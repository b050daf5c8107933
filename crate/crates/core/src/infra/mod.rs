//! Cornered box tilings of `R^n / Lambda` and the grid function `f`.

pub mod grid;
pub mod synth;

pub use grid::{eval_f_approx, ApproxPolicy, ApproxValue, FRep, GridContext, GridSpec};
pub use synth::{from_corners_1d, synth_box_infrastructure, SynthOptions};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeJson, TriangularLattice};
use crate::rational::{from_json_vec, max_q, qi, to_json_vec, JsonQ, Q, Z};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

/// Half-open box `[corner + offset, corner + offset + size)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxRegion {
    pub offset: Vec<Q>,
    pub size: Vec<Q>,
}

/// Closed axis-parallel face of a region boundary, relative to the corner.
/// `lo[axis] == hi[axis]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub axis: usize,
    pub lo: Vec<Q>,
    pub hi: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub id: usize,
    pub corner: Vec<Q>,
    pub boxes: Vec<BoxRegion>,
}

impl Cell {
    /// Upper corner of the bounding box, relative to the corner.
    pub fn extent(&self) -> Vec<Q> {
        let n = self.corner.len();
        (0..n)
            .map(|j| self.boxes.iter().map(|b| &b.offset[j] + &b.size[j]).max().unwrap_or_else(Q::zero))
            .collect()
    }

    /// Does the relative point `r` lie in the region?
    pub fn contains_rel(&self, r: &[Q]) -> bool {
        self.boxes.iter().any(|b| r.iter().enumerate().all(|(j, x)| &b.offset[j] <= x && x < &(&b.offset[j] + &b.size[j])))
    }

    fn breakpoints(&self) -> Vec<Vec<Q>> {
        let n = self.corner.len();
        (0..n)
            .map(|j| {
                let mut v: Vec<Q> = self.boxes.iter().flat_map(|b| [b.offset[j].clone(), &b.offset[j] + &b.size[j]]).collect();
                v.sort();
                v.dedup();
                v
            })
            .collect()
    }

    /// Membership of every cell of the grid induced by the box breakpoints.
    fn induced_grid(&self) -> (Vec<Vec<Q>>, Vec<bool>, Vec<usize>) {
        let bp = self.breakpoints();
        let dims: Vec<usize> = bp.iter().map(|b| b.len().saturating_sub(1)).collect();
        let total: usize = dims.iter().product();
        let mut member = vec![false; total];
        for (idx, m) in member.iter_mut().enumerate() {
            let t = unflatten(idx, &dims);
            let mid: Vec<Q> = t.iter().enumerate().map(|(j, &i)| (&bp[j][i] + &bp[j][i + 1]) / qi(2)).collect();
            *m = self.contains_rel(&mid);
        }
        (bp, member, dims)
    }

    /// Boundary of the region as closed faces.
    pub fn faces(&self) -> Vec<Face> {
        let (bp, member, dims) = self.induced_grid();
        let n = dims.len();
        let mut out = Vec::new();
        for idx in 0..member.len() {
            if !member[idx] {
                continue;
            }
            let t = unflatten(idx, &dims);
            for axis in 0..n {
                for up in [false, true] {
                    let neighbour_in = if up {
                        t[axis] + 1 < dims[axis] && {
                            let mut u = t.clone();
                            u[axis] += 1;
                            member[flatten(&u, &dims)]
                        }
                    } else {
                        t[axis] > 0 && {
                            let mut u = t.clone();
                            u[axis] -= 1;
                            member[flatten(&u, &dims)]
                        }
                    };
                    if neighbour_in {
                        continue;
                    }
                    let lo: Vec<Q> = (0..n)
                        .map(|j| if j == axis { bp[j][if up { t[j] + 1 } else { t[j] }].clone() } else { bp[j][t[j]].clone() })
                        .collect();
                    let hi: Vec<Q> = (0..n)
                        .map(|j| if j == axis { lo[j].clone() } else { bp[j][t[j] + 1].clone() })
                        .collect();
                    out.push(Face { axis, lo, hi });
                }
            }
        }
        out
    }

    /// Closed boxes whose union is the closure of the region.
    pub fn closed_boxes(&self) -> Vec<(Vec<Q>, Vec<Q>)> {
        self.boxes
            .iter()
            .map(|b| (b.offset.clone(), b.offset.iter().zip(&b.size).map(|(o, s)| o + s).collect()))
            .collect()
    }

    /// Union is cornered: the induced-grid membership is a down-set containing the origin cell.
    pub fn is_cornered(&self) -> bool {
        let (bp, member, dims) = self.induced_grid();
        if bp.iter().any(|b| b.first().map_or(true, |x| !x.is_zero())) || member.is_empty() || !member[0] {
            return false;
        }
        (0..member.len()).all(|idx| {
            !member[idx] || {
                let t = unflatten(idx, &dims);
                (0..dims.len()).all(|j| {
                    t[j] == 0 || {
                        let mut u = t.clone();
                        u[j] -= 1;
                        member[flatten(&u, &dims)]
                    }
                })
            }
        })
    }
}

pub(crate) fn unflatten(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut t = vec![0; dims.len()];
    for j in 0..dims.len() {
        t[j] = idx % dims[j];
        idx /= dims[j];
    }
    t
}

pub(crate) fn flatten(t: &[usize], dims: &[usize]) -> usize {
    let mut idx = 0;
    for j in (0..dims.len()).rev() {
        idx = idx * dims[j] + t[j];
    }
    idx
}

/// An infrastructure given by finitely many cornered cells on a torus `R^n / Lambda`.
///
/// `a` bounds every region (`V ⊂ corner + [0, a]^n`) and every closed box
/// `r + [0, c]^n` contains at most `d` corners.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxInfrastructure {
    pub lambda: Lattice,
    pub cells: Vec<Cell>,
    pub a: Q,
    pub c: Q,
    pub d: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoxJson {
    pub offset: Vec<JsonQ>,
    pub size: Vec<JsonQ>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellJson {
    pub id: usize,
    pub corner: Vec<JsonQ>,
    pub boxes: Vec<BoxJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InfraJson {
    pub lambda: LatticeJson,
    pub cells: Vec<CellJson>,
    #[serde(rename = "A")]
    pub a: JsonQ,
    #[serde(rename = "C")]
    pub c: JsonQ,
    #[serde(rename = "D")]
    pub d: u64,
}

/// Lattice translates `(cell index, lambda)` of cells whose closed bounding box
/// meets the closed box `[lo, hi]`.
pub(crate) fn translates_meeting(
    tri: &TriangularLattice,
    cells: &[Cell],
    lo: &[Q],
    hi: &[Q],
) -> Result<Vec<(usize, Vec<Q>)>> {
    let mut out = Vec::new();
    for (ci, cell) in cells.iter().enumerate() {
        let ext = cell.extent();
        let l: Vec<Q> = (0..lo.len()).map(|j| &lo[j] - &cell.corner[j] - &ext[j]).collect();
        let h: Vec<Q> = (0..lo.len()).map(|j| &hi[j] - &cell.corner[j]).collect();
        tri.for_each_in_box(&l, &h, true, crate::lattice::bounds::WINDOW_BUDGET, |c| {
            out.push((ci, tri.point(c)));
        })?;
    }
    Ok(out)
}

impl BoxInfrastructure {
    pub fn dim(&self) -> usize {
        self.lambda.dim
    }

    pub fn to_json(&self) -> InfraJson {
        InfraJson {
            lambda: self.lambda.to_json(),
            cells: self
                .cells
                .iter()
                .map(|c| CellJson {
                    id: c.id,
                    corner: to_json_vec(&c.corner),
                    boxes: c
                        .boxes
                        .iter()
                        .map(|b| BoxJson { offset: to_json_vec(&b.offset), size: to_json_vec(&b.size) })
                        .collect(),
                })
                .collect(),
            a: JsonQ(self.a.clone()),
            c: JsonQ(self.c.clone()),
            d: self.d,
        }
    }

    pub fn from_json(j: &InfraJson) -> Result<Self> {
        let lambda = Lattice::from_json(&j.lambda)?;
        if !lambda.is_full_rank() {
            return Err(Error::RankDeficient);
        }
        let n = lambda.dim;
        let mut cells = Vec::with_capacity(j.cells.len());
        for c in &j.cells {
            let corner = from_json_vec(&c.corner);
            if corner.len() != n {
                return Err(Error::invalid(format!("cell {} corner has wrong dimension", c.id)));
            }
            let mut boxes = Vec::new();
            for b in &c.boxes {
                let offset = from_json_vec(&b.offset);
                let size = from_json_vec(&b.size);
                if offset.len() != n || size.len() != n {
                    return Err(Error::invalid(format!("cell {} box has wrong dimension", c.id)));
                }
                if offset.iter().any(|x| x.is_negative()) || size.iter().any(|x| !x.is_positive()) {
                    return Err(Error::invalid(format!("cell {} box must have offset >= 0 and size > 0", c.id)));
                }
                boxes.push(BoxRegion { offset, size });
            }
            if boxes.is_empty() {
                return Err(Error::invalid(format!("cell {} has no boxes", c.id)));
            }
            cells.push(Cell { id: c.id, corner, boxes });
        }
        let infra = BoxInfrastructure { lambda, cells, a: j.a.0.clone(), c: j.c.0.clone(), d: j.d };
        for cell in &infra.cells {
            if !cell.is_cornered() {
                return Err(Error::invalid(format!("cell {} is not cornered", cell.id)));
            }
        }
        let a_true = infra.region_bound();
        if a_true > infra.a {
            return Err(Error::invalid(format!("declared A = {} is below the region size {}", infra.a, a_true)));
        }
        Ok(infra)
    }

    /// Smallest `A` with every region inside `corner + [0, A]^n`.
    pub fn region_bound(&self) -> Q {
        self.cells.iter().flat_map(|c| c.extent()).fold(Q::zero(), |a, x| max_q(&a, &x))
    }

    pub fn triangular(&self) -> TriangularLattice {
        TriangularLattice::new(&self.lambda).expect("full-rank period lattice")
    }

    /// Translates of cells whose bounding box meets the closed box `[lo, hi]`.
    pub fn translates_meeting(&self, lo: &[Q], hi: &[Q]) -> Result<Vec<(usize, Vec<Q>)>> {
        translates_meeting(&self.triangular(), &self.cells, lo, hi)
    }

    /// `(cell index, xhat)` with `u ∈ xhat + region`.
    pub fn reduce_point(&self, u: &[Q]) -> Result<(usize, Vec<Q>)> {
        let tri = self.triangular();
        let (coef, r) = tri.reduce(u);
        let shift = tri.point(&coef);
        let cands = self.translates_meeting(&r, &r)?;
        for (ci, lam) in cands {
            let cell = &self.cells[ci];
            let rel: Vec<Q> = (0..r.len()).map(|j| &r[j] - &cell.corner[j] - &lam[j]).collect();
            if cell.contains_rel(&rel) {
                let xhat = (0..r.len()).map(|j| &cell.corner[j] + &lam[j] + &shift[j]).collect();
                return Ok((ci, xhat));
            }
        }
        Err(Error::invalid("point is not covered by the tiling"))
    }

    /// Probe a `probes^n` grid of the box fundamental domain; every probe must lie
    /// in exactly one translate of one cell.
    pub fn validate_tiling(&self, probes: usize) -> Result<()> {
        let tri = self.triangular();
        let sides = tri.box_sides();
        let n = self.dim();
        let lo: Vec<Q> = vec![Q::zero(); n];
        let cands = self.translates_meeting(&lo, &sides)?;
        let dims = vec![probes; n];
        let total: usize = dims.iter().product();
        for idx in 0..total {
            let t = unflatten(idx, &dims);
            let p: Vec<Q> = (0..n).map(|j| &sides[j] * Q::new(Z::from(2 * t[j] + 1), Z::from(2 * probes))).collect();
            let hits = cands
                .iter()
                .filter(|(ci, lam)| {
                    let cell = &self.cells[*ci];
                    let rel: Vec<Q> = (0..n).map(|j| &p[j] - &cell.corner[j] - &lam[j]).collect();
                    cell.contains_rel(&rel)
                })
                .count();
            if hits != 1 {
                return Err(Error::invalid(format!("probe {p:?} covered {hits} times")));
            }
        }
        Ok(())
    }

    /// Largest number of corners in a closed box `r + [0, c]^n`.
    pub fn corner_density(&self, c: &Q) -> Result<u64> {
        let tri = self.triangular();
        let sides = tri.box_sides();
        let n = self.dim();
        let lo: Vec<Q> = vec![-c.clone(); n];
        let hi: Vec<Q> = sides.iter().map(|s| s + c + c).collect();
        let mut pts: Vec<Vec<Q>> = Vec::new();
        for cell in &self.cells {
            let l: Vec<Q> = (0..n).map(|j| &lo[j] - &cell.corner[j]).collect();
            let h: Vec<Q> = (0..n).map(|j| &hi[j] - &cell.corner[j]).collect();
            tri.for_each_in_box(&l, &h, true, crate::lattice::bounds::WINDOW_BUDGET, |co| {
                let lam = tri.point(co);
                pts.push((0..n).map(|j| &cell.corner[j] + &lam[j]).collect());
            })?;
        }
        let coords: Vec<Vec<Q>> = (0..n)
            .map(|j| {
                let mut v: Vec<Q> = pts.iter().map(|p| p[j].clone()).filter(|x| x < &sides[j] && !x.is_negative()).collect();
                v.sort();
                v.dedup();
                v
            })
            .collect();
        let mut best = 0u64;
        let mut rec = |r: &[Q]| {
            let cnt = pts.iter().filter(|p| p.iter().zip(r).all(|(x, rj)| rj <= x && x <= &(rj + c))).count() as u64;
            best = best.max(cnt);
        };
        let dims: Vec<usize> = coords.iter().map(|v| v.len()).collect();
        if dims.iter().any(|&d| d == 0) {
            return Ok(0);
        }
        let total: usize = dims.iter().product();
        for idx in 0..total {
            let t = unflatten(idx, &dims);
            let r: Vec<Q> = (0..n).map(|j| coords[j][t[j]].clone()).collect();
            rec(&r);
        }
        Ok(best)
    }
}

impl Serialize for BoxInfrastructure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BoxInfrastructure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = InfraJson::deserialize(d)?;
        BoxInfrastructure::from_json(&j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn l_shape() -> Cell {
        Cell {
            id: 0,
            corner: vec![qi(0), qi(0)],
            boxes: vec![
                BoxRegion { offset: vec![qi(0), qi(0)], size: vec![qi(2), qi(1)] },
                BoxRegion { offset: vec![qi(0), qi(0)], size: vec![qi(1), qi(2)] },
            ],
        }
    }

    #[test]
    fn l_shape_faces_and_corner() {
        let c = l_shape();
        assert!(c.is_cornered());
        let f = c.faces();
        // boundary of the L has 6 edges, split at the induced grid into 8 unit segments
        assert_eq!(f.len(), 8);
        let perimeter: Q = f.iter().map(|f| (0..2).filter(|&j| j != f.axis).map(|j| &f.hi[j] - &f.lo[j]).sum::<Q>()).sum();
        assert_eq!(perimeter, qi(8));
        assert!(c.contains_rel(&[q(3, 2), q(1, 2)]));
        assert!(!c.contains_rel(&[q(3, 2), q(3, 2)]));
    }

    #[test]
    fn uncornered_rejected() {
        let c = Cell {
            id: 0,
            corner: vec![qi(0), qi(0)],
            boxes: vec![BoxRegion { offset: vec![qi(1), qi(0)], size: vec![qi(1), qi(1)] }],
        };
        assert!(!c.is_cornered());
    }
}
