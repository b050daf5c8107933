//! Post-transform outcome distribution with a certified error bound.
//!
//! Phases `v'.w / D` are reduced exactly in integers, so the only floating
//! error comes from the table of roots of unity and from summation. Both are
//! bounded explicitly; every probability carries the same absolute error `err`.

use crate::error::{Error, Result};
use crate::infra::GridSpec;
use crate::real::FInt;
use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Default cap on amplitude term evaluations.
pub const TERM_BUDGET: u128 = 1_000_000_000;

/// Absolute error of one table entry (argument rounding plus libm error, with room).
pub const TABLE_PAD: f64 = 4e-15;

const UNIT_ROUNDOFF: f64 = 1.2e-16;

/// `exp(2 pi i j / d)` for `0 <= j < d`.
pub struct PhaseTable {
    d: u64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl PhaseTable {
    pub fn new(d: u64) -> Self {
        let (cos, sin) = (0..d)
            .map(|j| {
                let a = std::f64::consts::TAU * (j as f64 / d as f64);
                (a.cos(), a.sin())
            })
            .unzip();
        PhaseTable { d, cos, sin }
    }
    #[inline]
    fn at(&self, j: u64) -> (f64, f64) {
        let j = (j % self.d) as usize;
        (self.cos[j], self.sin[j])
    }
}

/// Uniform absolute error bound on `|A|^2 / (M W)` for `M` terms.
pub fn probability_error(m: usize, w_total: f64) -> f64 {
    let mf = m as f64;
    let e = mf * TABLE_PAD + UNIT_ROUNDOFF * mf * mf;
    let amp = std::f64::consts::SQRT_2 * e;
    let abs_sq = 2.0 * mf * amp + amp * amp;
    (abs_sq / (mf * w_total)) * 1.01 + 4.5e-16 * (mf / w_total)
}

fn amplitude_direct(members: &[Vec<u64>], w: &[u64], table: &PhaseTable) -> (f64, f64) {
    let (mut re, mut im) = (0.0, 0.0);
    for m in members {
        let mut ph = 0u64;
        for (a, b) in m.iter().zip(w) {
            ph = (ph + (a * b) % table.d) % table.d;
        }
        let (c, s) = table.at(ph);
        re += c;
        im += s;
    }
    (re, im)
}

fn amplitude_factored(members: &[Vec<u64>], w: &[u64], table: &PhaseTable) -> (f64, f64) {
    let (mut re, mut im) = (0.0, 0.0);
    for m in members {
        let (mut c, mut s) = (1.0, 0.0);
        for (a, b) in m.iter().zip(w) {
            let (c2, s2) = table.at((a % table.d) * (b % table.d));
            let nc = c * c2 - s * s2;
            s = c * s2 + s * c2;
            c = nc;
        }
        re += c;
        im += s;
    }
    (re, im)
}

/// Exact outcome distribution over `{0..D-1}^n`, `D = 2nqN`, index `w_0 + D w_1 + ...`.
#[derive(Clone, Debug)]
pub struct FourierDistribution {
    pub n: usize,
    pub w_side: u64,
    pub m: usize,
    pub probs: Vec<f64>,
    /// Absolute error bound valid for every entry of `probs`.
    pub err: f64,
    /// Sum of all probabilities.
    pub total: f64,
    /// Largest difference between the direct and the per-axis factored evaluation.
    pub plancherel_max_diff: f64,
    pub certified: bool,
}

fn unflatten_w(mut idx: usize, side: u64, n: usize) -> Vec<u64> {
    let mut w = vec![0u64; n];
    for x in w.iter_mut() {
        *x = idx as u64 % side;
        idx /= side as usize;
    }
    w
}

pub fn flatten_w(w: &[u64], side: u64) -> usize {
    w.iter().rev().fold(0usize, |acc, &x| acc * side as usize + x as usize)
}

fn kahan_sum(xs: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for &x in xs {
        let y = x - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    }
    s
}

impl FourierDistribution {
    pub fn w_total(&self) -> f64 {
        (self.w_side as f64).powi(self.n as i32)
    }

    pub fn prob(&self, w: &[u64]) -> FInt {
        let p = self.probs[flatten_w(w, self.w_side)];
        FInt::new((p - self.err).max(0.0), p + self.err)
    }

    /// Certified enclosure of the mass of a set of outcomes.
    pub fn mass(&self, ws: &[Vec<u64>]) -> FInt {
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for w in ws {
            let p = self.prob(w);
            lo += p.lo;
            hi += p.hi;
        }
        let k = ws.len() as f64;
        FInt::new((lo * (1.0 - k * UNIT_ROUNDOFF)).max(0.0), hi * (1.0 + k * UNIT_ROUNDOFF))
    }

    /// Draw an outcome by inverse transform sampling.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<u64> {
        let u: f64 = rng.gen::<f64>() * self.total;
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return unflatten_w(i, self.w_side, self.n);
            }
        }
        let last = self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        unflatten_w(last, self.w_side, self.n)
    }
}

/// Full distribution by direct summation, with the factored evaluation as a second opinion.
pub fn exact_distribution(members: &[Vec<u64>], spec: &GridSpec, budget: u128) -> Result<FourierDistribution> {
    let n = spec.n;
    let d = spec.w_side();
    let w_count = (d as u128).pow(n as u32);
    let terms = w_count * members.len() as u128;
    if terms > budget {
        return Err(Error::budget("exact distribution terms (use targets-only mode)", terms.to_string(), budget));
    }
    if members.is_empty() {
        return Err(Error::invalid("empty collision set"));
    }
    let table = PhaseTable::new(d);
    let m = members.len();
    let w_total = w_count as f64;
    let norm = 1.0 / (m as f64 * w_total);
    let mut probs = Vec::with_capacity(w_count as usize);
    let mut max_diff = 0.0f64;
    for idx in 0..w_count as usize {
        let w = unflatten_w(idx, d, n);
        let (re, im) = amplitude_direct(members, &w, &table);
        let p = (re * re + im * im) * norm;
        let (re2, im2) = amplitude_factored(members, &w, &table);
        let p2 = (re2 * re2 + im2 * im2) * norm;
        max_diff = max_diff.max((p - p2).abs());
        probs.push(p);
    }
    let total = kahan_sum(&probs);
    Ok(FourierDistribution {
        n,
        w_side: d,
        m,
        probs,
        err: probability_error(m, w_total),
        total,
        plancherel_max_diff: max_diff,
        certified: true,
    })
}

/// One-dimensional distribution through an FFT of the indicator of the collision set.
/// Not certified; used to draw samples on large grids.
pub fn fft_distribution_1d(members: &[Vec<u64>], spec: &GridSpec) -> Result<FourierDistribution> {
    if spec.n != 1 {
        return Err(Error::invalid("FFT sampler is one-dimensional"));
    }
    let d = spec.w_side() as usize;
    let mut buf = vec![Complex::new(0.0f64, 0.0); d];
    for m in members {
        buf[m[0] as usize % d].re += 1.0;
    }
    FftPlanner::new().plan_fft_forward(d).process(&mut buf);
    let norm = 1.0 / (members.len() as f64 * d as f64);
    let probs: Vec<f64> = buf.iter().map(|c| c.norm_sqr() * norm).collect();
    let total = kahan_sum(&probs);
    Ok(FourierDistribution {
        n: 1,
        w_side: d as u64,
        m: members.len(),
        probs,
        err: f64::NAN,
        total,
        plancherel_max_diff: 0.0,
        certified: false,
    })
}

/// Certified probability of each listed outcome without forming the full distribution.
pub fn outcome_probabilities(members: &[Vec<u64>], spec: &GridSpec, ws: &[Vec<u64>]) -> Vec<FInt> {
    let d = spec.w_side();
    let table = PhaseTable::new(d);
    let m = members.len();
    let w_total = (d as f64).powi(spec.n as i32);
    let err = probability_error(m, w_total);
    let norm = 1.0 / (m as f64 * w_total);
    ws.iter()
        .map(|w| {
            let (re, im) = amplitude_direct(members, w, &table);
            let p = (re * re + im * im) * norm;
            FInt::new((p - err).max(0.0), p + err)
        })
        .collect()
}

/// Certified mass of a set of outcomes, summing amplitudes only for those outcomes.
pub fn targets_mass(members: &[Vec<u64>], spec: &GridSpec, ws: &[Vec<u64>]) -> FInt {
    let ps = outcome_probabilities(members, spec, ws);
    let k = ws.len() as f64;
    let lo: f64 = ps.iter().map(|p| p.lo).sum();
    let hi: f64 = ps.iter().map(|p| p.hi).sum();
    FInt::new((lo * (1.0 - k * UNIT_ROUNDOFF)).max(0.0), hi * (1.0 + k * UNIT_ROUNDOFF))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_member_is_uniform() {
        let spec = GridSpec::new(1, 4, 5, 3);
        let d = exact_distribution(&[vec![7]], &spec, TERM_BUDGET).unwrap();
        let u = 1.0 / 40.0;
        assert!(d.probs.iter().all(|p| (p - u).abs() <= d.err));
        assert!((d.total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_coset_supports_dual_multiples() {
        // members 0, 8, 16, ... on a domain of D = 40 outcomes: period 8 divides... support on multiples of 5
        let spec = GridSpec::new(1, 4, 5, 3);
        let members: Vec<Vec<u64>> = (0..5).map(|i| vec![i * 8]).collect();
        let d = exact_distribution(&members, &spec, TERM_BUDGET).unwrap();
        for (w, p) in d.probs.iter().enumerate() {
            if w % 5 == 0 {
                assert!((p - 1.0 / 8.0).abs() <= d.err, "w={w} p={p}");
            } else {
                assert!(*p <= d.err, "w={w} p={p}");
            }
        }
    }

    #[test]
    fn fft_agrees_with_direct() {
        let spec = GridSpec::new(1, 4, 10, 3);
        let members: Vec<Vec<u64>> = vec![vec![1], vec![14], vec![27]];
        let a = exact_distribution(&members, &spec, TERM_BUDGET).unwrap();
        let b = fft_distribution_1d(&members, &spec).unwrap();
        for (x, y) in a.probs.iter().zip(&b.probs) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn budget_refusal() {
        let spec = GridSpec::new(2, 4, 32, 3);
        assert!(matches!(exact_distribution(&[vec![0, 0]], &spec, 1000), Err(Error::Budget { .. })));
    }
}
