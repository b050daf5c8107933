//! The sampled grid, the function `f` and the boundary sets, on fixed-denominator integers.
//!
//! Every coordinate is stored as an `i128` multiple of `1/scale`, where `scale`
//! is divisible by all denominators involved (geometry, `1/N`, the shift step
//! and `eps`). All tests below are therefore exact.

use super::{unflatten, BoxInfrastructure};
use crate::lattice::bounds::{TriangularLattice, WINDOW_BUDGET};
use crate::error::{Error, Result};
use crate::rational::{ceil, floor, qi, Q, Z};
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

/// Grid parameters: domain `{0..qN-1}^n`, shifts `(1/(NL)) {0..L-1}^n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: u64,
    pub q: u64,
    #[serde(rename = "L")]
    pub l: u64,
}

impl GridSpec {
    pub fn new(n: usize, big_n: u64, q: u64, l: u64) -> Self {
        GridSpec { n, big_n, q, l }
    }
    /// Points per axis of the evaluation domain, `qN`.
    pub fn side(&self) -> u64 {
        self.q * self.big_n
    }
    /// Outcomes per axis of the Fourier transform, `2nqN`.
    pub fn w_side(&self) -> u64 {
        2 * self.n as u64 * self.q * self.big_n
    }
    pub fn domain_size(&self) -> u128 {
        (self.side() as u128).pow(self.n as u32)
    }
    /// `1 / (2NL)`.
    pub fn eps(&self) -> Q {
        Q::new(Z::one(), Z::from(2 * self.big_n * self.l))
    }
    pub fn shift(&self, sigma: &[u64]) -> Vec<Q> {
        sigma.iter().map(|&s| Q::new(Z::from(s), Z::from(self.big_n * self.l))).collect()
    }
}

/// Value of `f`: a cell identifier and `floor(N t)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FRep {
    pub cell: usize,
    pub k: Vec<i64>,
}

#[derive(Clone, Debug)]
struct SCell {
    id: usize,
    ext: Vec<i128>,
    /// Half-open boxes relative to the corner.
    boxes: Vec<(Vec<i128>, Vec<i128>)>,
    /// Closed faces relative to the corner.
    faces: Vec<(usize, Vec<i128>, Vec<i128>)>,
}

#[derive(Clone, Debug)]
struct Translate {
    cell: usize,
    /// Absolute corner `corner + lambda`.
    origin: Vec<i128>,
}

/// Floor division for a positive divisor.
fn fdiv(a: i128, b: i128) -> i128 {
    a.div_euclid(b)
}

fn cdiv(a: i128, b: i128) -> i128 {
    -((-a).div_euclid(b))
}

fn to_i128(z: &Z) -> Result<i128> {
    z.to_i128().ok_or_else(|| Error::Capability("coordinate exceeds 128-bit range".into()))
}

/// Exact geometry of one infrastructure on one grid.
#[derive(Clone, Debug)]
pub struct GridContext {
    pub spec: GridSpec,
    pub scale: Z,
    n: usize,
    /// Grid step `1/N`.
    p: i128,
    /// Shift step `1/(NL)`.
    step: i128,
    /// Boundary thickness `eps`.
    e: i128,
    h: Vec<Vec<i128>>,
    cells: Vec<SCell>,
    near: Vec<Translate>,
    window: Vec<Translate>,
    sides: Vec<i128>,
    margin: i128,
    tri: TriangularLattice,
}

impl GridContext {
    /// Uses `eps = 1/(2NL)` unless another value is given.
    pub fn new(infra: &BoxInfrastructure, spec: &GridSpec, eps: Option<Q>) -> Result<Self> {
        Self::with_denominator(infra, spec, eps, &Z::one())
    }

    /// Like [`GridContext::new`], with `extra` dividing the scale so that query
    /// points with that denominator are representable.
    pub fn with_denominator(infra: &BoxInfrastructure, spec: &GridSpec, eps: Option<Q>, extra: &Z) -> Result<Self> {
        let n = infra.dim();
        if spec.n != n {
            return Err(Error::invalid("grid dimension differs from the infrastructure"));
        }
        if spec.big_n == 0 || spec.q == 0 || spec.l == 0 {
            return Err(Error::invalid("N, q and L must be positive"));
        }
        let eps = eps.unwrap_or_else(|| spec.eps());
        let tri = infra.triangular();
        let sides_q = tri.box_sides();
        let mut scale = Z::from(2 * spec.big_n * spec.l);
        scale = scale.lcm(eps.denom()).lcm(extra);
        for row in &tri.h {
            for x in row {
                scale = scale.lcm(&Q::new(x.clone(), tri.den.clone()).denom().clone());
            }
        }
        for c in &infra.cells {
            for x in c.corner.iter().chain(c.boxes.iter().flat_map(|b| b.offset.iter().chain(b.size.iter()))) {
                scale = scale.lcm(x.denom());
            }
        }
        let sq = Q::from_integer(scale.clone());
        let sc = |x: &Q| -> Result<i128> { to_i128(&(x * &sq).to_integer()) };
        let p = sc(&Q::new(Z::one(), Z::from(spec.big_n)))?;
        let step = sc(&Q::new(Z::one(), Z::from(spec.big_n * spec.l)))?;
        let e = sc(&eps)?;
        let h = (0..n)
            .map(|i| (0..n).map(|j| sc(&Q::new(tri.h[i][j].clone(), tri.den.clone()))).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut cells = Vec::new();
        for c in &infra.cells {
            let ext = c.extent().iter().map(&sc).collect::<Result<Vec<_>>>()?;
            let boxes = c
                .closed_boxes()
                .iter()
                .map(|(lo, hi)| Ok((lo.iter().map(&sc).collect::<Result<Vec<_>>>()?, hi.iter().map(&sc).collect::<Result<Vec<_>>>()?)))
                .collect::<Result<Vec<_>>>()?;
            let faces = c
                .faces()
                .iter()
                .map(|f| Ok((f.axis, f.lo.iter().map(&sc).collect::<Result<Vec<_>>>()?, f.hi.iter().map(&sc).collect::<Result<Vec<_>>>()?)))
                .collect::<Result<Vec<_>>>()?;
            cells.push(SCell { id: c.id, ext, boxes, faces });
        }
        let margin_q = Q::new(Z::from(2), Z::from(spec.big_n)) + &eps * qi(2);
        let lo: Vec<Q> = vec![-margin_q.clone(); n];
        let hi: Vec<Q> = sides_q.iter().map(|s| s + &margin_q).collect();
        let to_tr = |v: Vec<(usize, Vec<Q>)>| -> Result<Vec<Translate>> {
            v.into_iter()
                .map(|(ci, lam)| {
                    let origin = (0..n).map(|j| sc(&(&infra.cells[ci].corner[j] + &lam[j]))).collect::<Result<Vec<_>>>()?;
                    Ok(Translate { cell: ci, origin })
                })
                .collect()
        };
        let near = to_tr(infra.translates_meeting(&lo, &hi)?)?;
        let wlo: Vec<Q> = vec![-margin_q.clone(); n];
        let whi: Vec<Q> = vec![qi(spec.q as i64) + qi(1) + &margin_q; n];
        let window = to_tr(infra.translates_meeting(&wlo, &whi)?)?;
        let sides = sides_q.iter().map(&sc).collect::<Result<Vec<_>>>()?;
        let margin = sc(&margin_q)?;
        let tri = tri.clone();
        // Headroom check: the largest coordinate handled is about q + A, times the scale.
        let big = sc(&(qi(spec.q as i64) + &infra.a + qi(2)))?;
        if big.checked_mul(4 * (spec.side() as i128 + 1)).is_none() {
            return Err(Error::Capability("grid too large for 128-bit exact geometry".into()));
        }
        Ok(GridContext { spec: spec.clone(), scale, n, p, step, e, h, cells, near, window, sides, margin, tri })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn shift_scaled(&self, sigma: &[u64]) -> Vec<i128> {
        sigma.iter().map(|&s| s as i128 * self.step).collect()
    }

    /// Scaled grid point `s + v/N`.
    pub fn grid_point(&self, sigma: &[u64], v: &[u64]) -> Vec<i128> {
        (0..self.n).map(|j| sigma[j] as i128 * self.step + v[j] as i128 * self.p).collect()
    }

    /// Scaled form of a rational point; fails unless its denominators divide the scale.
    pub fn scale_point(&self, u: &[Q]) -> Result<Vec<i128>> {
        u.iter()
            .map(|x| {
                let y = x * Q::from_integer(self.scale.clone());
                if !y.is_integer() {
                    return Err(Error::invalid("point denominator does not divide the grid scale"));
                }
                to_i128(&y.to_integer())
            })
            .collect()
    }

    /// Rational value of a scaled point.
    pub fn to_q(&self, u: &[i128]) -> Vec<Q> {
        u.iter().map(|&x| Q::new(Z::from(x), self.scale.clone())).collect()
    }

    /// Reduce into the box fundamental domain; returns `(reduced, u - reduced)`.
    fn reduce(&self, u: &[i128]) -> (Vec<i128>, Vec<i128>) {
        let mut r = u.to_vec();
        for i in 0..self.n {
            let k = fdiv(r[i], self.h[i][i]);
            if k != 0 {
                for t in i..self.n {
                    r[t] -= k * self.h[t][i];
                }
            }
        }
        let shift = (0..self.n).map(|j| u[j] - r[j]).collect();
        (r, shift)
    }

    /// Cell index and absolute corner `xhat` with `u ∈ xhat + region`.
    pub fn locate(&self, u: &[i128]) -> Result<(usize, Vec<i128>)> {
        let (r, shift) = self.reduce(u);
        for tr in &self.near {
            let c = &self.cells[tr.cell];
            let inside = c.boxes.iter().any(|(lo, hi)| {
                (0..self.n).all(|j| {
                    let x = r[j] - tr.origin[j];
                    lo[j] <= x && x < hi[j]
                })
            });
            if inside {
                return Ok((tr.cell, (0..self.n).map(|j| tr.origin[j] + shift[j]).collect()));
            }
        }
        Err(Error::invalid("point not covered by the tiling"))
    }

    /// `f(v)` for the shift `sigma / (NL)`.
    pub fn f(&self, sigma: &[u64], v: &[u64]) -> Result<FRep> {
        let u = self.grid_point(sigma, v);
        let (ci, xhat) = self.locate(&u)?;
        let k = (0..self.n).map(|j| fdiv(u[j] - xhat[j], self.p) as i64).collect();
        Ok(FRep { cell: self.cells[ci].id, k })
    }

    /// `f` on the whole domain, index `v_0 + side * v_1 + ...`.
    pub fn f_all(&self, sigma: &[u64]) -> Result<Vec<FRep>> {
        let side = self.spec.side() as usize;
        let dims = vec![side; self.n];
        let total: usize = dims.iter().product();
        let mut out = Vec::with_capacity(total);
        for idx in 0..total {
            let v: Vec<u64> = unflatten(idx, &dims).iter().map(|&x| x as u64).collect();
            out.push(self.f(sigma, &v)?);
        }
        Ok(out)
    }

    /// All `v'` in the domain with `f(v') = f(v)`, in lexicographic order of the
    /// period-lattice translate that carries `v` to `v'`.
    pub fn collisions(&self, sigma: &[u64], v: &[u64]) -> Result<Vec<Vec<u64>>> {
        let n = self.n;
        let s = self.shift_scaled(sigma);
        let u = self.grid_point(sigma, v);
        let (ci, xhat) = self.locate(&u)?;
        let k: Vec<i128> = (0..n).map(|j| fdiv(u[j] - xhat[j], self.p)).collect();
        let side = self.spec.side() as i128;
        let sq = Q::from_integer(self.scale.clone());
        // base_j = xhat_j + k_j/N; need s_j - 1/N < base_j + lambda_j <= s_j + (side-1)/N
        let lo: Vec<Q> = (0..n).map(|j| Q::new(Z::from(s[j] - self.p - xhat[j] - k[j] * self.p), self.scale.clone())).collect();
        let hi: Vec<Q> = (0..n)
            .map(|j| Q::new(Z::from(s[j] + (side - 1) * self.p - xhat[j] - k[j] * self.p), self.scale.clone()))
            .collect();
        let cell = &self.cells[ci];
        let mut out = Vec::new();
        let mut err = None;
        self.tri.for_each_in_box(&lo, &hi, true, WINDOW_BUDGET, |c| {
            if err.is_some() {
                return;
            }
            let lam = self.tri.point(c);
            let lam: Vec<i128> = match lam.iter().map(|x| to_i128(&(x * &sq).to_integer())).collect::<Result<Vec<_>>>() {
                Ok(l) => l,
                Err(e) => {
                    err = Some(e);
                    return;
                }
            };
            let mut vp = Vec::with_capacity(n);
            for j in 0..n {
                let base = xhat[j] + lam[j] + k[j] * self.p;
                let w = cdiv(base - s[j], self.p);
                if w < 0 || w >= side {
                    return;
                }
                vp.push(w);
            }
            let inside = cell.boxes.iter().any(|(blo, bhi)| {
                (0..n).all(|j| {
                    let t = s[j] + vp[j] * self.p - xhat[j] - lam[j];
                    blo[j] <= t && t < bhi[j]
                })
            });
            if inside {
                out.push(vp.iter().map(|&x| x as u64).collect());
            }
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(out)
    }

    /// Translates whose expanded bounding box contains `r` (a reduced point).
    fn near_candidates(&self, r: &[i128], pad: i128) -> Vec<&Translate> {
        self.near
            .iter()
            .filter(|tr| {
                let c = &self.cells[tr.cell];
                (0..self.n).all(|j| tr.origin[j] - pad <= r[j] && r[j] <= tr.origin[j] + c.ext[j] + pad)
            })
            .collect()
    }

    /// `u ∈ H + [-eps, eps]^n`.
    pub fn in_h_eps(&self, u: &[i128]) -> bool {
        let (r, _) = self.reduce(u);
        let e = self.e;
        self.near_candidates(&r, e).into_iter().any(|tr| {
            self.cells[tr.cell].faces.iter().any(|(_, lo, hi)| {
                (0..self.n).all(|j| tr.origin[j] + lo[j] - e <= r[j] && r[j] <= tr.origin[j] + hi[j] + e)
            })
        })
    }

    /// `u ∈ (-1/N, 0]^n + H`.
    pub fn in_hbound(&self, u: &[i128]) -> bool {
        let (r, _) = self.reduce(u);
        let p = self.p;
        self.near_candidates(&r, p).into_iter().any(|tr| {
            self.cells[tr.cell].faces.iter().any(|(_, lo, hi)| {
                (0..self.n).all(|j| tr.origin[j] + lo[j] < r[j] + p && tr.origin[j] + hi[j] >= r[j])
            })
        })
    }

    /// `u` lies in the enhanced boundary `Hgrid(eps)`.
    pub fn in_hgrid(&self, u: &[i128]) -> bool {
        let (r, _) = self.reduce(u);
        let one = vec![1; self.n];
        self.near_candidates(&r, self.e).into_iter().any(|tr| self.translate_hits(tr, &r, &one))
    }

    /// Does some grid point `s_j + v_j / N` (`0 <= v_j < count_j`) fall into the
    /// enhanced boundary pieces of this translate?
    fn translate_hits(&self, tr: &Translate, start: &[i128], count: &[i128]) -> bool {
        let c = &self.cells[tr.cell];
        for (axis, flo, fhi) in &c.faces {
            for (blo, bhi) in &c.boxes {
                let ok = (0..self.n).all(|j| {
                    let o = tr.origin[j];
                    if j == *axis {
                        self.axis_hits_plane(o + flo[j], o + blo[j], o + bhi[j], start[j], count[j])
                    } else {
                        self.axis_hits_band(o + flo[j], o + fhi[j], o + blo[j], o + bhi[j], start[j], count[j])
                    }
                });
                if ok {
                    return true;
                }
            }
        }
        false
    }

    /// Face-normal axis: some `y = g + m/N ∈ [blo, bhi]` (`m >= 0`) within `eps` of a grid value.
    fn axis_hits_plane(&self, g: i128, blo: i128, bhi: i128, s: i128, count: i128) -> bool {
        let (p, e) = (self.p, self.e);
        let m_lo = cdiv(blo - g, p).max(0);
        let m_hi = fdiv(bhi - g, p);
        if m_lo > m_hi {
            return false;
        }
        let d_lo = cdiv(g - s - e, p).max(-m_hi);
        let d_hi = fdiv(g - s + e, p).min(count - 1 - m_lo);
        d_lo <= d_hi
    }

    /// Tangential axis: some translate `[flo, fhi] + m/N` clipped to `[blo, bhi]`
    /// comes within `eps` of a grid value.
    fn axis_hits_band(&self, flo: i128, fhi: i128, blo: i128, bhi: i128, s: i128, count: i128) -> bool {
        let (p, e) = (self.p, self.e);
        let m_lo = cdiv(blo - fhi, p).max(0);
        let m_hi = fdiv(bhi - flo, p);
        // Only translates reaching the grid span matter.
        let g_lo = s;
        let g_hi = s + (count - 1) * p;
        let m_lo = m_lo.max(cdiv(g_lo - e - fhi, p));
        let m_hi = m_hi.min(fdiv(g_hi + e - flo, p));
        let mut m = m_lo;
        while m <= m_hi {
            let lo = blo.max(flo + m * p) - e;
            let hi = bhi.min(fhi + m * p) + e;
            let v_lo = cdiv(lo - s, p).max(0);
            let v_hi = fdiv(hi - s, p).min(count - 1);
            if v_lo <= v_hi {
                return true;
            }
            m += 1;
        }
        false
    }

    /// `G(s) ∩ Hgrid(eps) = ∅`, decided piece by piece over the cells meeting the grid window.
    pub fn shift_is_good(&self, sigma: &[u64]) -> bool {
        let s = self.shift_scaled(sigma);
        let count = vec![self.spec.side() as i128; self.n];
        !self.window.iter().any(|tr| self.translate_hits(tr, &s, &count))
    }

    /// Reference implementation of [`GridContext::shift_is_good`], point by point.
    pub fn shift_is_good_pointwise(&self, sigma: &[u64]) -> bool {
        let side = self.spec.side() as usize;
        let dims = vec![side; self.n];
        let total: usize = dims.iter().product();
        (0..total).all(|idx| {
            let v: Vec<u64> = unflatten(idx, &dims).iter().map(|&x| x as u64).collect();
            !self.in_hgrid(&self.grid_point(sigma, &v))
        })
    }

    /// Number of grid points `v` with `s + v/N ∈ Hbound`.
    pub fn hbound_count(&self, sigma: &[u64]) -> u128 {
        let s = self.shift_scaled(sigma);
        let side = self.spec.side() as i128;
        let p = self.p;
        let mut boxes: Vec<(Vec<i128>, Vec<i128>)> = Vec::new();
        for tr in &self.window {
            for (_, lo, hi) in &self.cells[tr.cell].faces {
                let mut bl = Vec::with_capacity(self.n);
                let mut bh = Vec::with_capacity(self.n);
                let mut empty = false;
                for j in 0..self.n {
                    let flo = tr.origin[j] + lo[j];
                    let fhi = tr.origin[j] + hi[j];
                    // s + vP > flo - P  and  s + vP <= fhi
                    let a = (fdiv(flo - p - s[j], p) + 1).max(0);
                    let b = fdiv(fhi - s[j], p).min(side - 1);
                    if a > b {
                        empty = true;
                        break;
                    }
                    bl.push(a);
                    bh.push(b);
                }
                if !empty {
                    boxes.push((bl, bh));
                }
            }
        }
        union_count(&boxes, 0, self.n)
    }

    /// Reference count for [`GridContext::hbound_count`].
    pub fn hbound_count_pointwise(&self, sigma: &[u64]) -> u128 {
        let side = self.spec.side() as usize;
        let dims = vec![side; self.n];
        let total: usize = dims.iter().product();
        (0..total)
            .filter(|&idx| {
                let v: Vec<u64> = unflatten(idx, &dims).iter().map(|&x| x as u64).collect();
                self.in_hbound(&self.grid_point(sigma, &v))
            })
            .count() as u128
    }

    /// Is the anchor `v` admissible, i.e. `s + v/N ∉ Hbound`?
    pub fn anchor_ok(&self, sigma: &[u64], v: &[u64]) -> bool {
        !self.in_hbound(&self.grid_point(sigma, v))
    }

    pub fn scaled_eps(&self) -> i128 {
        self.e
    }

    pub fn scaled_step(&self) -> i128 {
        self.p
    }

    pub fn window_translates(&self) -> usize {
        self.window.len()
    }

    pub fn fundamental_sides(&self) -> Vec<Q> {
        self.to_q(&self.sides)
    }

    pub fn margin(&self) -> Q {
        Q::new(Z::from(self.margin), self.scale.clone())
    }
}

/// Number of integer points in a union of closed integer boxes.
fn union_count(boxes: &[(Vec<i128>, Vec<i128>)], axis: usize, n: usize) -> u128 {
    if boxes.is_empty() {
        return 0;
    }
    let mut cuts: Vec<i128> = boxes.iter().flat_map(|(lo, hi)| [lo[axis], hi[axis] + 1]).collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut total = 0u128;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let active: Vec<(Vec<i128>, Vec<i128>)> =
            boxes.iter().filter(|(lo, hi)| lo[axis] <= a && hi[axis] >= b - 1).cloned().collect();
        if active.is_empty() {
            continue;
        }
        let inner = if axis + 1 == n { 1 } else { union_count(&active, axis + 1, n) };
        total += inner * (b - a) as u128;
    }
    total
}

/// Behaviour of the rounding oracle within its allowed error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproxPolicy {
    /// The true cell and the nearest representable offset.
    Nearest,
    /// Any admissible answer that disagrees with the exact value, when one exists.
    Adversarial,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ApproxValue {
    pub rep: FRep,
    /// The oracle answer differs from the exact `f(v)`.
    pub corrupted: bool,
}

/// Model of a `2^-bits` rounding oracle evaluating `f(v)`.
///
/// Admissible answers are `(x, t)` with `t ∈ 2^-bits Z^n`, `|xhat + t - p|_inf <= 2^-bits`
/// and `xhat + region` meeting the open box `p + (-2^-bits, 2^-bits)^n`, where `p = s + v/N`.
pub fn eval_f_approx(
    infra: &BoxInfrastructure,
    spec: &GridSpec,
    sigma: &[u64],
    v: &[u64],
    bits: u32,
    policy: ApproxPolicy,
) -> Result<ApproxValue> {
    let n = infra.dim();
    let delta = Q::new(Z::one(), Z::one() << bits as u64);
    let nq = qi(spec.big_n as i64);
    let p: Vec<Q> = (0..n).map(|j| Q::new(Z::from(sigma[j]), Z::from(spec.big_n * spec.l)) + Q::new(Z::from(v[j]), Z::from(spec.big_n))).collect();
    let (true_ci, true_xhat) = infra.reduce_point(&p)?;
    let exact_k: Vec<i64> = (0..n).map(|j| floor(&((&p[j] - &true_xhat[j]) * &nq)).to_i64().unwrap()).collect();
    let exact = FRep { cell: infra.cells[true_ci].id, k: exact_k };
    let t_choices = |xhat: &[Q]| -> Vec<Vec<Q>> {
        (0..n)
            .map(|j| {
                let rel = &p[j] - &xhat[j];
                let lo = ceil(&((&rel - &delta) / &delta));
                let hi = floor(&((&rel + &delta) / &delta));
                let mut out = Vec::new();
                let mut m = lo;
                while m <= hi {
                    out.push(Q::from_integer(m.clone()) * &delta);
                    m += 1;
                }
                out
            })
            .collect()
    };
    let rep_of = |cell: usize, t: &[Q]| FRep { cell, k: t.iter().map(|x| floor(&(x * &nq)).to_i64().unwrap()).collect() };
    match policy {
        ApproxPolicy::Nearest => {
            let t: Vec<Q> = (0..n)
                .map(|j| Q::from_integer(crate::rational::round_half_up(&((&p[j] - &true_xhat[j]) / &delta))) * &delta)
                .collect();
            let rep = rep_of(exact.cell, &t);
            let corrupted = rep != exact;
            Ok(ApproxValue { rep, corrupted })
        }
        ApproxPolicy::Adversarial => {
            let lo: Vec<Q> = p.iter().map(|x| x - &delta).collect();
            let hi: Vec<Q> = p.iter().map(|x| x + &delta).collect();
            let mut best: Option<FRep> = None;
            for (ci, lam) in infra.translates_meeting(&lo, &hi)? {
                let cell = &infra.cells[ci];
                let meets = cell.boxes.iter().any(|b| {
                    (0..n).all(|j| {
                        let blo = &cell.corner[j] + &lam[j] + &b.offset[j];
                        let bhi = &blo + &b.size[j];
                        blo < hi[j] && bhi > lo[j]
                    })
                });
                if !meets {
                    continue;
                }
                let xhat: Vec<Q> = (0..n).map(|j| &cell.corner[j] + &lam[j]).collect();
                let choices = t_choices(&xhat);
                // Per axis, prefer an offset whose floor disagrees with the exact one.
                let t: Vec<Q> = (0..n)
                    .map(|j| {
                        choices[j]
                            .iter()
                            .find(|t| floor(&(*t * &nq)).to_i64().unwrap() != exact.k[j])
                            .unwrap_or(&choices[j][0])
                            .clone()
                    })
                    .collect();
                let rep = rep_of(cell.id, &t);
                if rep != exact {
                    return Ok(ApproxValue { rep, corrupted: true });
                }
                best.get_or_insert(rep);
            }
            let rep = best.unwrap_or(exact);
            Ok(ApproxValue { rep, corrupted: false })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infra::synth::from_corners_1d;
    use crate::rational::q;

    fn forty() -> BoxInfrastructure {
        from_corners_1d(&qi(40), &[qi(0), qi(13), qi(27)], &qi(1)).unwrap()
    }

    #[test]
    fn f_on_forty() {
        let infra = forty();
        let spec = GridSpec::new(1, 32, 160, 708);
        let ctx = GridContext::new(&infra, &spec, None).unwrap();
        let r = ctx.f(&[0], &[0]).unwrap();
        assert_eq!(r, FRep { cell: 0, k: vec![0] });
        // v = 13*32 lands on the second corner
        assert_eq!(ctx.f(&[0], &[416]).unwrap(), FRep { cell: 1, k: vec![0] });
        // periodicity: v and v + 40 N agree
        assert_eq!(ctx.f(&[5], &[100]).unwrap(), ctx.f(&[5], &[100 + 1280]).unwrap());
    }

    #[test]
    fn piecewise_and_pointwise_agree_1d() {
        let infra = forty();
        let spec = GridSpec::new(1, 4, 20, 12);
        let ctx = GridContext::new(&infra, &spec, None).unwrap();
        for s in 0..12 {
            assert_eq!(ctx.shift_is_good(&[s]), ctx.shift_is_good_pointwise(&[s]), "shift {s}");
            assert_eq!(ctx.hbound_count(&[s]), ctx.hbound_count_pointwise(&[s]), "shift {s}");
        }
    }

    #[test]
    fn integer_corners_1d_bad_only_at_zero_shift() {
        // With integer corners the enhanced boundary is (1/N)Z + [-eps, eps].
        let infra = forty();
        let spec = GridSpec::new(1, 8, 45, 20);
        let ctx = GridContext::new(&infra, &spec, None).unwrap();
        for s in 0..20 {
            assert_eq!(ctx.shift_is_good(&[s]), s != 0, "shift {s}");
        }
    }

    #[test]
    fn piecewise_and_pointwise_agree_2d() {
        use crate::infra::synth::{synth_box_infrastructure, SynthOptions};
        use crate::lattice::Lattice;
        let l = Lattice::new(vec![vec![qi(5), qi(1)], vec![qi(0), qi(4)]]).unwrap();
        let opts = SynthOptions { staircase: true, granularity: 2, ..Default::default() };
        let infra = synth_box_infrastructure(2, &l, 6, 11, &opts).unwrap();
        let spec = GridSpec::new(2, 2, 6, 4);
        let ctx = GridContext::new(&infra, &spec, None).unwrap();
        let mut goods = 0;
        for a in 0..4 {
            for b in 0..4 {
                let good = ctx.shift_is_good(&[a, b]);
                goods += good as u32;
                assert_eq!(good, ctx.shift_is_good_pointwise(&[a, b]), "shift {a},{b}");
                assert_eq!(ctx.hbound_count(&[a, b]), ctx.hbound_count_pointwise(&[a, b]));
            }
        }
        assert!(goods > 0);
    }

    #[test]
    fn approx_oracle_corrupts_only_near_boundary() {
        let infra = forty();
        let spec = GridSpec::new(1, 4, 20, 8);
        // eps = 1/64; 2^-7 = eps/2
        for s in 0..8u64 {
            for v in 0..80u64 {
                let ctx = GridContext::new(&infra, &spec, None).unwrap();
                let near = ctx.in_hgrid(&ctx.grid_point(&[s], &[v]));
                let a = eval_f_approx(&infra, &spec, &[s], &[v], 7, ApproxPolicy::Adversarial).unwrap();
                if !near {
                    assert!(!a.corrupted, "s={s} v={v}");
                }
                let nn = eval_f_approx(&infra, &spec, &[s], &[v], 7, ApproxPolicy::Nearest).unwrap();
                assert!(!nn.corrupted || near);
            }
        }
        // s = 0 puts v = 52 exactly on the corner 13: the adversary can answer with the previous cell.
        let a = eval_f_approx(&infra, &spec, &[0], &[52], 7, ApproxPolicy::Adversarial).unwrap();
        assert!(a.corrupted);
    }

    #[test]
    fn collisions_match_table_grouping() {
        use crate::infra::synth::{synth_box_infrastructure, SynthOptions};
        use crate::lattice::Lattice;
        use std::collections::HashMap;
        let l = Lattice::new(vec![vec![qi(3), qi(1)], vec![qi(0), q(5, 2)]]).unwrap();
        let opts = SynthOptions { staircase: true, granularity: 2, ..Default::default() };
        let infra = synth_box_infrastructure(2, &l, 4, 5, &opts).unwrap();
        let spec = GridSpec::new(2, 2, 7, 3);
        let ctx = GridContext::new(&infra, &spec, None).unwrap();
        let sigma = [1, 2];
        let table = ctx.f_all(&sigma).unwrap();
        let side = spec.side() as usize;
        let mut groups: HashMap<FRep, Vec<Vec<u64>>> = HashMap::new();
        for (idx, r) in table.iter().enumerate() {
            groups.entry(r.clone()).or_default().push(vec![(idx % side) as u64, (idx / side) as u64]);
        }
        for idx in (0..table.len()).step_by(7) {
            let v = vec![(idx % side) as u64, (idx / side) as u64];
            let mut got = ctx.collisions(&sigma, &v).unwrap();
            got.sort();
            let mut want = groups[&table[idx]].clone();
            want.sort();
            assert_eq!(got, want, "anchor {v:?}");
        }
    }

    #[test]
    fn union_count_overlaps() {
        let b = vec![(vec![0, 0], vec![2, 2]), (vec![1, 1], vec![3, 3])];
        assert_eq!(union_count(&b, 0, 2), 9 + 9 - 4);
    }
}
