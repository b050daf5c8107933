//! Generating lattices and finite abelian groups from uniform window samples.

use crate::error::{Error, Result};
use crate::lattice::bounds::{TriangularLattice, WINDOW_BUDGET};
use crate::lattice::{covering_radius_bound, hnf, snf, Lattice};
use crate::rational::{pow, q, qi, qz, sqrt_upper, Q, Z};
use crate::real::{inv_zeta_product, pi, span_product, Ball, FInt};
use crate::rng::{self, Rng};
use crate::stats::{self, SIGMAS};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

/// Exact list of `L ∩ [0, b)^n`, stored as integer coordinates in the triangular basis of `L`.
#[derive(Clone, Debug)]
pub struct WindowSample {
    pub b: Q,
    pub tri: TriangularLattice,
    n: usize,
    coords: Vec<i64>,
}

impl WindowSample {
    pub fn new(l: &Lattice, b: &Q, budget: u64) -> Result<Self> {
        let tri = TriangularLattice::new(l)?;
        let n = l.dim;
        let lo = vec![Q::zero(); n];
        let hi = vec![b.clone(); n];
        let mut coords = Vec::new();
        let mut overflow = false;
        tri.for_each_in_box(&lo, &hi, false, budget, |c| {
            for x in c {
                match x.to_i64() {
                    Some(v) => coords.push(v),
                    None => overflow = true,
                }
            }
        })?;
        if overflow {
            return Err(Error::Capability("window coordinates exceed 64 bits".into()));
        }
        if coords.is_empty() {
            return Err(Error::invalid("empty window"));
        }
        Ok(WindowSample { b: b.clone(), tri, n, coords })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coord(&self, i: usize) -> &[i64] {
        &self.coords[i * self.n..(i + 1) * self.n]
    }

    pub fn point(&self, i: usize) -> Vec<Q> {
        let c: Vec<Z> = self.coord(i).iter().map(|&x| Z::from(x)).collect();
        self.tri.point(&c)
    }

    pub fn draw<R: rand::Rng>(&self, rng: &mut R) -> usize {
        rng.gen_range(0..self.len())
    }

    /// `(lower, count, upper)` of the covering-radius sandwich; bounds are only meaningful when `b > 2 nu`.
    pub fn sandwich(&self, l: &Lattice) -> Result<(Q, usize, Q)> {
        let nu = covering_radius_bound(l)?;
        let det = l.det()?;
        let two_nu = qi(2) * &nu;
        let n = self.n as u32;
        let lower = if self.b > two_nu { pow(&(&self.b - &two_nu), n) / &det } else { Q::zero() };
        Ok((lower, self.len(), pow(&(&self.b + &two_nu), n) / &det))
    }
}

fn det_i128(rows: &[Vec<i128>]) -> i128 {
    // Bareiss fraction-free elimination
    let n = rows.len();
    let mut a = rows.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Do the vectors span `R^n` (exactly `n` of them)?
pub fn spans_space(coords: &[&[i64]]) -> bool {
    let n = coords.len();
    if n == 0 || coords.iter().any(|c| c.len() != n) {
        return false;
    }
    let rows: Vec<Vec<i128>> = coords.iter().map(|c| c.iter().map(|&x| x as i128).collect()).collect();
    det_i128(&rows) != 0
}

/// Do the coordinate vectors generate all of `Z^n`?
pub fn generates_lattice(coords: &[&[i64]], n: usize) -> bool {
    let cols: Vec<Vec<i128>> = coords.iter().map(|c| c.iter().map(|&x| x as i128).collect()).collect();
    let h = hnf(&cols, n);
    h.len() == n && (0..n).all(|j| h[j][j] == 1)
}

/// `max{8n - 2, n^((n-1)/2) 2^(n+1) - 2}`, rounded up when irrational.
pub fn span_window_factor(n: usize) -> Q {
    let a = qi(8 * n as i64 - 2);
    let root = sqrt_upper(&qz(num_traits::pow(Z::from(n as u64), n - 1)));
    let b = root * qi(1i64 << (n + 1)) - qi(2);
    if a > b {
        a
    } else {
        b
    }
}

/// Window sizes `(b, b0)` with `b = factor * nu(L)` and `b0 = 8 n^2 (n+1) b`.
pub fn generation_windows(l: &Lattice) -> Result<(Q, Q)> {
    let n = l.dim as i64;
    let nu = covering_radius_bound(l)?;
    let b = span_window_factor(l.dim) * nu;
    let b0 = qi(8 * n * n * (n + 1)) * &b;
    Ok((b, b0))
}

/// `n` uniform draws from the window; true when they span `R^n`.
pub fn span_probability_trial<R: rand::Rng>(ws: &WindowSample, rng: &mut R) -> bool {
    let idx: Vec<usize> = (0..ws.dim()).map(|_| ws.draw(rng)).collect();
    let cs: Vec<&[i64]> = idx.iter().map(|&i| ws.coord(i)).collect();
    spans_space(&cs)
}

/// `n` draws from the small window and `n + 1` from the large one; true when they generate `L`.
pub fn full_generation_trial<R: rand::Rng>(small: &WindowSample, large: &WindowSample, rng: &mut R) -> bool {
    let n = small.dim();
    let mut idx: Vec<(bool, usize)> = (0..n).map(|_| (false, small.draw(rng))).collect();
    idx.extend((0..=n).map(|_| (true, large.draw(rng))));
    let cs: Vec<&[i64]> = idx.iter().map(|&(big, i)| if big { large.coord(i) } else { small.coord(i) }).collect();
    generates_lattice(&cs, n)
}

/// Experimental: all `count` draws from one window.
pub fn single_window_generation_trial<R: rand::Rng>(ws: &WindowSample, count: usize, rng: &mut R) -> bool {
    let idx: Vec<usize> = (0..count).map(|_| ws.draw(rng)).collect();
    let cs: Vec<&[i64]> = idx.iter().map(|&i| ws.coord(i)).collect();
    generates_lattice(&cs, ws.dim())
}

/// Two draws from a one-dimensional window; true when they generate the lattice.
pub fn one_dim_pair_trial<R: rand::Rng>(ws: &WindowSample, rng: &mut R) -> bool {
    let a = ws.coord(ws.draw(rng))[0];
    let b = ws.coord(ws.draw(rng))[0];
    a.gcd(&b) == 1
}

/// Exact pair generation probability for the window `{0, v, ..., (k-1) v}`.
pub fn one_dim_pair_probability(k: u64) -> Q {
    let mut good = 0u64;
    for a in 0..k {
        for b in 0..k {
            if a.gcd(&b) == 1 {
                good += 1;
            }
        }
    }
    Q::new(Z::from(good), Z::from(k * k))
}

/// `27 / (8 pi^2)`.
pub fn one_dim_pair_bound() -> Ball {
    let p = pi();
    p.mul(&p).mul_q(&qi(8)).recip().mul_q(&qi(27))
}

/// Lower bound on the probability that `n + 1` uniform elements generate a group with `n` generators.
pub fn zeta_product_bound(n: u32) -> FInt {
    inv_zeta_product(n)
}

/// `prod_{i=1}^{n-1} (1 - 2^-i)`.
pub fn span_bound(n: u32) -> Q {
    span_product(n)
}

/// Finite abelian group `Z/d_1 x ... x Z/d_r`, `1 < d_1 | d_2 | ... | d_r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FiniteAbelianGroup {
    pub divisors: Vec<i64>,
}

impl FiniteAbelianGroup {
    pub fn new(divisors: Vec<i64>) -> Result<Self> {
        if divisors.iter().any(|&d| d < 2) {
            return Err(Error::invalid("invariant factors must exceed 1"));
        }
        if divisors.windows(2).any(|w| w[1] % w[0] != 0) {
            return Err(Error::invalid("invariant factors must divide each other"));
        }
        Ok(FiniteAbelianGroup { divisors })
    }

    pub fn order(&self) -> u64 {
        self.divisors.iter().map(|&d| d as u64).product()
    }

    pub fn rank(&self) -> usize {
        self.divisors.len()
    }

    pub fn elements(&self) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for &d in &self.divisors {
            out = out.into_iter().flat_map(|e: Vec<i64>| (0..d).map(move |x| [e.clone(), vec![x]].concat())).collect();
        }
        out
    }

    pub fn random_element<R: rand::Rng>(&self, rng: &mut R) -> Vec<i64> {
        self.divisors.iter().map(|&d| rng.gen_range(0..d)).collect()
    }

    fn relations(&self) -> Vec<Vec<i64>> {
        let r = self.rank();
        (0..r).map(|j| (0..r).map(|i| if i == j { self.divisors[j] } else { 0 }).collect()).collect()
    }

    /// HNF of the preimage in `Z^r` of the subgroup generated by `elems`.
    fn subgroup(&self, base: &[Vec<i64>], elems: &[&[i64]]) -> Vec<Vec<i64>> {
        let mut cols = base.to_vec();
        cols.extend(elems.iter().map(|e| e.to_vec()));
        hnf(&cols, self.rank())
    }

    pub fn generates(&self, elems: &[&[i64]]) -> bool {
        let r = self.rank();
        let h = self.subgroup(&self.relations(), elems);
        h.len() == r && (0..r).all(|j| h[j][j] == 1)
    }
}

/// Every abelian group of order `2..=max_order` (and the trivial group), by invariant factors.
pub fn abelian_groups_up_to(max_order: u64) -> Vec<FiniteAbelianGroup> {
    fn rec(prefix: &mut Vec<i64>, prod: u64, max: u64, out: &mut Vec<FiniteAbelianGroup>) {
        out.push(FiniteAbelianGroup { divisors: prefix.clone() });
        let start = prefix.last().copied().unwrap_or(1);
        let mut next = if start == 1 { 2 } else { start };
        while prod * next as u64 <= max {
            prefix.push(next);
            rec(prefix, prod * next as u64, max, out);
            prefix.pop();
            next += start;
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), 1, max_order, &mut out);
    out
}

pub fn group_generation_trial<R: rand::Rng>(g: &FiniteAbelianGroup, count: usize, rng: &mut R) -> bool {
    let es: Vec<Vec<i64>> = (0..count).map(|_| g.random_element(rng)).collect();
    let refs: Vec<&[i64]> = es.iter().map(|e| e.as_slice()).collect();
    g.generates(&refs)
}

/// Exact probability that `count` uniform elements generate `g`, by tracking the generated subgroup.
pub fn exact_generation_probability(g: &FiniteAbelianGroup, count: usize) -> Q {
    if g.rank() == 0 {
        return Q::one();
    }
    let elems = g.elements();
    let mut states: HashMap<Vec<Vec<i64>>, u64> = HashMap::new();
    states.insert(g.subgroup(&g.relations(), &[]), 1);
    let mut memo: HashMap<(Vec<Vec<i64>>, usize), Vec<Vec<i64>>> = HashMap::new();
    for _ in 0..count {
        let mut next: HashMap<Vec<Vec<i64>>, u64> = HashMap::new();
        for (s, c) in &states {
            for (i, e) in elems.iter().enumerate() {
                let t = memo.entry((s.clone(), i)).or_insert_with(|| g.subgroup(s, &[e.as_slice()])).clone();
                *next.entry(t).or_default() += c;
            }
        }
        states = next;
    }
    let r = g.rank();
    let full: u64 = states.iter().filter(|(h, _)| h.len() == r && (0..r).all(|j| h[j][j] == 1)).map(|(_, c)| c).sum();
    Q::new(Z::from(full), pow(&qi(g.order() as i64), count as u32).to_integer())
}

/// Probability by testing every tuple of elements.
pub fn brute_force_generation_probability(g: &FiniteAbelianGroup, count: usize) -> Q {
    let elems = g.elements();
    let m = elems.len();
    let total = (m as u64).pow(count as u32);
    let mut good = 0u64;
    for mut t in 0..total {
        let tuple: Vec<&[i64]> = (0..count)
            .map(|_| {
                let e = &elems[(t % m as u64) as usize];
                t /= m as u64;
                e.as_slice()
            })
            .collect();
        if g.generates(&tuple) {
            good += 1;
        }
    }
    Q::new(Z::from(good), Z::from(total))
}

/// `L / L0` with coset classification through the Smith form.
#[derive(Clone, Debug)]
pub struct QuotientGroup {
    pub divisors: Vec<Z>,
    pub index: Z,
    u: Vec<Vec<Z>>,
}

impl QuotientGroup {
    /// Coordinates are taken in the triangular basis of `l`.
    pub fn new(l: &Lattice, l0: &Lattice) -> Result<Self> {
        let tri = TriangularLattice::new(l)?;
        let n = l.dim;
        let mut cols = Vec::with_capacity(n);
        for v in &l0.basis {
            let (c, rem) = tri.reduce(v);
            if rem.iter().any(|x| !x.is_zero()) {
                return Err(Error::invalid("L0 is not a sublattice of L"));
            }
            cols.push(c);
        }
        let s = snf(&cols, n);
        let index: Z = s.diag.iter().product();
        let expect = l0.det()? / l.det()?;
        if qz(index.clone()) != expect {
            return Err(Error::CheckFailed("index differs from the determinant ratio".into()));
        }
        Ok(QuotientGroup { divisors: s.diag, index, u: s.u })
    }

    pub fn class_of(&self, coords: &[i64]) -> Vec<Z> {
        self.u
            .iter()
            .zip(&self.divisors)
            .map(|(row, d)| {
                let s: Z = row.iter().zip(coords).map(|(a, &c)| a * Z::from(c)).sum();
                s.mod_floor(d)
            })
            .collect()
    }
}

/// Exact total-variation distance of window samples modulo `L0` from uniform, with the analytic bound.
#[derive(Clone, Debug, Serialize)]
pub struct QuotientTv {
    pub index: String,
    pub points: usize,
    pub exact: f64,
    pub bound: f64,
    pub pass: bool,
    #[serde(skip)]
    pub exact_q: Q,
    #[serde(skip)]
    pub bound_q: Q,
}

pub fn quotient_uniformity_distance(l: &Lattice, l0: &Lattice, b0: &Q, budget: u64) -> Result<QuotientTv> {
    let nu = covering_radius_bound(l)?;
    let nu0 = covering_radius_bound(l0)?;
    let two = qi(2);
    if b0 <= &(&two * &nu0) {
        return Err(Error::precondition("window must exceed twice the covering radius of L0"));
    }
    let n = l.dim as u32;
    let bound = Q::one() - pow(&(b0 - &two * &nu0), n) / pow(&(b0 + &two * &nu), n);
    let qg = QuotientGroup::new(l, l0)?;
    let ws = WindowSample::new(l, b0, budget)?;
    let mut counts: HashMap<Vec<Z>, usize> = HashMap::new();
    for i in 0..ws.len() {
        *counts.entry(qg.class_of(ws.coord(i))).or_default() += 1;
    }
    let m = qz(qg.index.clone());
    let total = qi(ws.len() as i64);
    let uniform = Q::one() / &m;
    let mut tv: Q = counts.values().map(|&c| (qi(c as i64) / &total - &uniform).abs()).sum();
    let missing = &m - qi(counts.len() as i64);
    tv += missing * &uniform;
    let exact = tv / qi(2);
    Ok(QuotientTv {
        index: qg.index.to_string(),
        points: ws.len(),
        exact: crate::rational::to_f64(&exact),
        bound: crate::rational::to_f64(&bound),
        pass: exact <= bound,
        exact_q: exact,
        bound_q: bound,
    })
}

/// Monte Carlo tally with a 3-sigma Wilson interval.
#[derive(Clone, Debug, Serialize)]
pub struct TrialSummary {
    pub trials: u64,
    pub successes: u64,
    pub fraction: f64,
    pub stderr: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

impl TrialSummary {
    pub fn new(successes: u64, trials: u64) -> Self {
        let (lo, hi) = stats::wilson(successes, trials, SIGMAS);
        TrialSummary {
            trials,
            successes,
            fraction: successes as f64 / trials.max(1) as f64,
            stderr: stats::stderr(successes, trials),
            wilson_lo: lo,
            wilson_hi: hi,
        }
    }

    /// The bound is not contradicted at 3 sigma.
    pub fn consistent_with(&self, bound: f64) -> bool {
        self.wilson_hi >= bound
    }

    /// `fraction >= bound - 3 stderr`.
    pub fn meets(&self, bound: f64) -> bool {
        self.fraction >= bound - SIGMAS * self.stderr
    }
}

/// Run independent trials in parallel; trial `t` uses stream `(seed, tag, t)`.
pub fn run_trials<F>(seed: u64, tag: &str, trials: u64, f: F) -> TrialSummary
where
    F: Fn(&mut Rng) -> bool + Sync,
{
    let successes = (0..trials).into_par_iter().filter(|&t| f(&mut rng::stream(seed, tag, t))).count() as u64;
    TrialSummary::new(successes, trials)
}

/// Random full-rank sublattice `L0 = L T` with `T` upper triangular, diagonal in `1..=max_diag`.
pub fn random_sublattice<R: rand::Rng>(l: &Lattice, max_diag: i64, rng: &mut R) -> Lattice {
    let n = l.dim;
    let t: Vec<Vec<i64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { rng.gen_range(1..=max_diag) } else if i < j { rng.gen_range(-3..=3) } else { 0 }).collect())
        .collect();
    let cols = t
        .iter()
        .map(|tc| (0..n).map(|i| (0..n).map(|k| &l.basis[k][i] * qi(tc[k])).sum()).collect())
        .collect();
    Lattice::new(cols).expect("triangular transform with nonzero diagonal")
}

/// Window for the quotient experiment: `2 nu(L0)` times a factor in `[1.1, 3)`.
pub fn random_quotient_window<R: rand::Rng>(l0: &Lattice, rng: &mut R) -> Result<Q> {
    let nu0 = covering_radius_bound(l0)?;
    Ok(qi(2) * nu0 * q(rng.gen_range(11..30), 10))
}

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const GENERATION_BUDGET: u64 = WINDOW_BUDGET;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z2_two_draws() {
        let g = FiniteAbelianGroup::new(vec![2]).unwrap();
        assert_eq!(brute_force_generation_probability(&g, 2), q(3, 4));
        assert_eq!(exact_generation_probability(&g, 2), q(3, 4));
        let t = FiniteAbelianGroup::new(vec![]).unwrap();
        assert_eq!(exact_generation_probability(&t, 3), qi(1));
    }

    #[test]
    fn klein_three_draws() {
        // (Z/2)^2: three draws generate with probability (1 - 1/4)(1 - 1/8)... exact count 42/64
        let g = FiniteAbelianGroup::new(vec![2, 2]).unwrap();
        let b = brute_force_generation_probability(&g, 3);
        assert_eq!(b, q(42, 64));
        assert_eq!(exact_generation_probability(&g, 3), b);
        assert!(crate::rational::to_f64(&b) >= 0.505);
    }

    #[test]
    fn dp_matches_brute_force() {
        for g in abelian_groups_up_to(16).into_iter().filter(|g| g.rank() <= 2) {
            for count in 1..=3 {
                assert_eq!(exact_generation_probability(&g, count), brute_force_generation_probability(&g, count), "{g:?}");
            }
        }
    }

    #[test]
    fn group_count() {
        // number of abelian groups of order m, summed over m <= 16: 1+1+1+2+1+1+1+3+2+1+1+2+1+1+1+5
        assert_eq!(abelian_groups_up_to(16).len(), 25);
    }

    #[test]
    fn quotient_z_two_z() {
        let l = Lattice::from_ints(&[vec![1]]).unwrap();
        let l0 = Lattice::from_ints(&[vec![2]]).unwrap();
        let tv = quotient_uniformity_distance(&l, &l0, &qi(101), GENERATION_BUDGET).unwrap();
        assert_eq!(tv.exact_q, q(1, 202));
        assert!(tv.pass);
        let same = quotient_uniformity_distance(&l, &l, &qi(7), GENERATION_BUDGET).unwrap();
        assert_eq!(same.exact_q, Q::zero());
    }

    #[test]
    fn quotient_index_four() {
        let l = Lattice::from_ints(&[vec![1, 0], vec![0, 1]]).unwrap();
        let l0 = Lattice::from_ints(&[vec![2, 0], vec![1, 2]]).unwrap();
        let qg = QuotientGroup::new(&l, &l0).unwrap();
        assert_eq!(qg.index, Z::from(4));
        let tv = quotient_uniformity_distance(&l, &l0, &qi(9), GENERATION_BUDGET).unwrap();
        assert!(tv.pass, "{tv:?}");
    }

    #[test]
    fn one_dim_exact() {
        // {0,1,2,3}: coprime ordered pairs (0,1),(1,0),(1,1),(1,2),(2,1),(1,3),(3,1),(2,3),(3,2)
        assert_eq!(one_dim_pair_probability(4), q(9, 16));
        let b = one_dim_pair_bound();
        assert!(b.lo > q(3419, 10000) && b.hi < q(3420, 10000));
    }

    #[test]
    fn degenerate_draws() {
        let z: &[i64] = &[0, 0];
        assert!(!spans_space(&[z, z]));
        assert!(!generates_lattice(&[z, z, z, z, z], 2));
    }

    #[test]
    fn windows_for_z2() {
        let l = Lattice::from_ints(&[vec![1, 0], vec![0, 1]]).unwrap();
        let (b, b0) = generation_windows(&l).unwrap();
        assert!(b >= qi(14) * q(7, 10));
        assert_eq!(b0, qi(96) * &b);
    }
}
