//! Random cornered tilings of the box fundamental domain.

use super::{BoxInfrastructure, BoxRegion, Cell};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::rational::{qi, Q, Z};
use crate::rng;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::Rng;

#[derive(Clone, Debug)]
pub struct SynthOptions {
    /// Side of the boxes used for the corner-density constant.
    pub c: Q,
    /// Merge neighbouring pieces into L-shaped cells.
    pub staircase: bool,
    /// Cut positions lie on `(1/granularity) Z`.
    pub granularity: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions { c: qi(1), staircase: false, granularity: 4 }
    }
}

fn factor_counts(n: usize, count: u64, rng: &mut rng::Rng) -> Vec<u64> {
    let mut k = vec![1u64; n];
    let mut rest = count;
    let mut p = 2;
    while rest > 1 {
        while rest % p == 0 {
            let j = rng.gen_range(0..n);
            k[j] *= p;
            rest /= p;
        }
        p += 1;
    }
    k
}

/// Tile the box fundamental domain of `lambda` by a random product grid with
/// `cell_count` pieces; with `staircase`, some pieces are merged into L-shapes.
pub fn synth_box_infrastructure(
    n: usize,
    lambda: &Lattice,
    cell_count: u64,
    seed: u64,
    opts: &SynthOptions,
) -> Result<BoxInfrastructure> {
    if lambda.dim != n || !lambda.is_full_rank() {
        return Err(Error::RankDeficient);
    }
    if cell_count == 0 {
        return Err(Error::invalid("cell_count must be at least 1"));
    }
    if opts.granularity == 0 || !opts.c.is_positive() {
        return Err(Error::invalid("granularity and C must be positive"));
    }
    let mut rng = rng::stream(seed, "synth", 0);
    let sides = crate::lattice::TriangularLattice::new(lambda)?.box_sides();
    let k = factor_counts(n, cell_count, &mut rng);
    let g = Q::from_integer(Z::from(opts.granularity));
    let mut cuts: Vec<Vec<Q>> = Vec::with_capacity(n);
    for j in 0..n {
        // interior cut positions m/g with 0 < m/g < side
        let slots: Z = (&sides[j] * &g).ceil().to_integer() - Z::from(1);
        let slots = slots.to_u64().unwrap_or(0);
        if slots + 1 < k[j] {
            return Err(Error::Generation(format!("axis {j} cannot hold {} pieces at granularity {}", k[j], opts.granularity)));
        }
        let mut pos: Vec<u64> = sample(&mut rng, slots as usize, (k[j] - 1) as usize).into_iter().map(|i| i as u64 + 1).collect();
        pos.sort_unstable();
        let mut c = vec![Q::zero()];
        c.extend(pos.into_iter().map(|m| Q::new(Z::from(m), Z::from(opts.granularity))));
        c.push(sides[j].clone());
        cuts.push(c);
    }
    let dims: Vec<usize> = k.iter().map(|&x| x as usize).collect();
    let total: usize = dims.iter().product();
    let mut owner: Vec<Option<usize>> = vec![None; total];
    let mut cells = Vec::new();
    let piece = |t: &[usize]| -> (Vec<Q>, Vec<Q>) {
        let lo: Vec<Q> = (0..n).map(|j| cuts[j][t[j]].clone()).collect();
        let size: Vec<Q> = (0..n).map(|j| &cuts[j][t[j] + 1] - &cuts[j][t[j]]).collect();
        (lo, size)
    };
    for idx in 0..total {
        if owner[idx].is_some() {
            continue;
        }
        let t = super::unflatten(idx, &dims);
        let id = cells.len();
        owner[idx] = Some(id);
        let (corner, size) = piece(&t);
        let mut boxes = vec![BoxRegion { offset: vec![Q::zero(); n], size: size.clone() }];
        if opts.staircase && n >= 2 && rng.gen_bool(0.5) {
            let a0 = t[0] + 1 < dims[0];
            let a1 = t[1] + 1 < dims[1];
            if a0 && a1 {
                let mut u0 = t.clone();
                u0[0] += 1;
                let mut u1 = t.clone();
                u1[1] += 1;
                let i0 = super::flatten(&u0, &dims);
                let i1 = super::flatten(&u1, &dims);
                if owner[i0].is_none() && owner[i1].is_none() {
                    owner[i0] = Some(id);
                    owner[i1] = Some(id);
                    let (_, s0) = piece(&u0);
                    let (_, s1) = piece(&u1);
                    let mut wide = size.clone();
                    wide[0] = &size[0] + &s0[0];
                    let mut tall = size.clone();
                    tall[1] = &size[1] + &s1[1];
                    boxes = vec![BoxRegion { offset: vec![Q::zero(); n], size: wide }, BoxRegion { offset: vec![Q::zero(); n], size: tall }];
                }
            }
        }
        cells.push(Cell { id, corner, boxes });
    }
    finish(lambda.clone(), cells, opts.c.clone())
}

fn finish(lambda: Lattice, cells: Vec<Cell>, c: Q) -> Result<BoxInfrastructure> {
    let mut infra = BoxInfrastructure { lambda, cells, a: Q::zero(), c: c.clone(), d: 0 };
    infra.a = infra.region_bound();
    infra.d = infra.corner_density(&c)?;
    if infra.cells.iter().any(|cell| !cell.is_cornered()) {
        return Err(Error::Generation("produced a cell that is not cornered".into()));
    }
    Ok(infra)
}

/// One-dimensional infrastructure with the given corners in `[0, period)`.
pub fn from_corners_1d(period: &Q, corners: &[Q], c: &Q) -> Result<BoxInfrastructure> {
    if !period.is_positive() {
        return Err(Error::invalid("period must be positive"));
    }
    let mut xs = corners.to_vec();
    xs.sort();
    xs.dedup();
    if xs.is_empty() || xs[0].is_negative() || xs.last().unwrap() >= period {
        return Err(Error::invalid("corners must be distinct and lie in [0, period)"));
    }
    let cells = (0..xs.len())
        .map(|i| {
            let next = if i + 1 < xs.len() { xs[i + 1].clone() } else { period + &xs[0] };
            Cell { id: i, corner: vec![xs[i].clone()], boxes: vec![BoxRegion { offset: vec![Q::zero()], size: vec![next - &xs[i]] }] }
        })
        .collect();
    finish(Lattice::diagonal(std::slice::from_ref(period))?, cells, c.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_is_fundamental_box() {
        let l = Lattice::diagonal(&[qi(40)]).unwrap();
        let infra = synth_box_infrastructure(1, &l, 1, 3, &SynthOptions::default()).unwrap();
        assert_eq!(infra.cells.len(), 1);
        assert_eq!(infra.cells[0].boxes[0].size, vec![qi(40)]);
        assert_eq!(infra.a, qi(40));
    }

    #[test]
    fn forty_three_cells() {
        let infra = from_corners_1d(&qi(40), &[qi(0), qi(13), qi(27)], &qi(1)).unwrap();
        let sizes: Vec<Q> = infra.cells.iter().map(|c| c.boxes[0].size[0].clone()).collect();
        assert_eq!(sizes, vec![qi(13), qi(14), qi(13)]);
        assert_eq!(infra.a, qi(14));
        assert_eq!(infra.d, 1);
        for (u, id) in [(0, 0), (12, 0), (13, 1), (26, 1), (27, 2), (39, 2), (40, 0), (-1, 2)] {
            let (ci, _) = infra.reduce_point(&[qi(u)]).unwrap();
            assert_eq!(infra.cells[ci].id, id, "u = {u}");
        }
    }

    #[test]
    fn two_dim_tiling_valid() {
        let l = Lattice::diagonal(&[qi(10), qi(10)]).unwrap();
        for seed in 0..3 {
            let infra = synth_box_infrastructure(2, &l, 4, seed, &SynthOptions::default()).unwrap();
            infra.validate_tiling(100).unwrap();
            let st = synth_box_infrastructure(2, &l, 12, seed, &SynthOptions { staircase: true, ..Default::default() }).unwrap();
            st.validate_tiling(40).unwrap();
        }
    }

    #[test]
    fn skew_lattice_tiling_valid() {
        let l = Lattice::new(vec![vec![qi(6), qi(2)], vec![qi(0), qi(5)]]).unwrap();
        let infra = synth_box_infrastructure(2, &l, 6, 1, &SynthOptions { staircase: true, ..Default::default() }).unwrap();
        infra.validate_tiling(30).unwrap();
    }
}
