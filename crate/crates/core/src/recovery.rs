//! Approximate basis from an approximate generating set, and inversion to the dual.

use crate::check::Check;
use crate::error::{Error, Result};
use crate::lattice::{kz, lll, quality_factor_sq, Lattice, ReductionMode};
use crate::linalg::{inverse, transpose};
use crate::rational::{ceil, norm1, norm2, pow, qi, qz, sqrt_lower, sqrt_upper, to_f64, Q, Z};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

/// Rational vectors `a'_j` within `eps` of a generating set `a_j` of `L`,
/// with `mu <= lambda_1(L)` and `alpha >= max |a_j|`.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxGeneratingSet {
    pub vectors: Vec<Vec<Q>>,
    pub eps: Q,
    pub mu: Q,
    pub alpha: Q,
}

impl ApproxGeneratingSet {
    pub fn new(vectors: Vec<Vec<Q>>, eps: Q, mu: Q, alpha: Q) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::invalid("empty generating set"));
        }
        let n = vectors[0].len();
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::invalid("generators of unequal length"));
        }
        if eps.is_negative() || !mu.is_positive() || !alpha.is_positive() {
            return Err(Error::invalid("need eps >= 0 and mu, alpha > 0"));
        }
        Ok(ApproxGeneratingSet { vectors, eps, mu, alpha })
    }

    pub fn k(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    /// `sum z_j a'_j`.
    pub fn combine(&self, z: &[Z]) -> Vec<Q> {
        combine(&self.vectors, z)
    }
}

pub fn combine(vectors: &[Vec<Q>], z: &[Z]) -> Vec<Q> {
    let n = vectors[0].len();
    let mut out = vec![Q::zero(); n];
    for (v, c) in vectors.iter().zip(z) {
        if c.is_zero() {
            continue;
        }
        let cq = qz(c.clone());
        for (o, x) in out.iter_mut().zip(v) {
            *o += x * &cq;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelationVerdict {
    Relation,
    NotRelation,
    /// `2 eps |z|_1 >= mu`: the test cannot decide.
    Indeterminate,
}

/// `|sum z_j a'_j| <= eps |z|_1`, decisive when `2 eps |z|_1 < mu`.
pub fn is_relation(gs: &ApproxGeneratingSet, z: &[Z]) -> Result<RelationVerdict> {
    if z.len() != gs.k() {
        return Err(Error::invalid("relation length differs from generator count"));
    }
    if z.iter().all(|c| c.is_zero()) {
        return Err(Error::invalid("zero vector is not a relation"));
    }
    let l1: Q = z.iter().map(|c| qz(c.abs())).sum();
    let tol = &gs.eps * &l1;
    if qi(2) * &tol >= gs.mu {
        return Ok(RelationVerdict::Indeterminate);
    }
    let s = gs.combine(z);
    Ok(if norm2(&s) <= &tol * &tol { RelationVerdict::Relation } else { RelationVerdict::NotRelation })
}

/// Derived constants of the approximation lattice, all as rational enclosures.
#[derive(Clone, Debug, Serialize)]
pub struct ScalingPlan {
    pub k: usize,
    pub r: usize,
    pub mode: ReductionMode,
    #[serde(serialize_with = "ser_q")]
    pub f_sq: Q,
    /// Upper bound on `3 sqrt(k) alpha^r / det(L)`.
    #[serde(serialize_with = "ser_q")]
    pub lambda: Q,
    #[serde(serialize_with = "ser_q")]
    pub s: Q,
    /// Largest admissible `eps`, `mu / (2 f lambda sqrt(k))` rounded down.
    #[serde(serialize_with = "ser_q")]
    pub eps_max: Q,
    /// Upper bound on `sqrt(s^2 (alpha + eps)^2 + 1)`.
    #[serde(serialize_with = "ser_q")]
    pub alpha_tilde: Q,
    /// Upper bound on `g = f sqrt(k) alpha_tilde`.
    #[serde(serialize_with = "ser_q")]
    pub g: Q,
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(to_f64(x))
}

/// `max(1, 3 sqrt(k) alpha^r / det)`, rounded up.
pub fn lambda_bound(k: usize, r: usize, alpha: &Q, det_lower: &Q) -> Q {
    let v = qi(3) * sqrt_upper(&qi(k as i64)) * pow(alpha, r as u32) / det_lower;
    if v < Q::one() {
        Q::one()
    } else {
        v
    }
}

/// Scaling inside `(2 f lambda / mu, 4 f lambda / mu]`: the midpoint `3 f lambda / mu`, rounded up to an integer when that stays inside.
pub fn choose_scaling(f_sq: &Q, lambda: &Q, mu: &Q) -> Result<Q> {
    let f_up = sqrt_upper(f_sq);
    let f_lo = sqrt_lower(f_sq);
    let lo = qi(2) * &f_up * lambda / mu;
    let hi = qi(4) * &f_lo * lambda / mu;
    let mid = qi(3) * &f_up * lambda / mu;
    let rounded = qz(ceil(&mid));
    let s = if rounded <= hi { rounded } else { mid };
    if !(s > lo && s <= hi) {
        return Err(Error::precondition("empty scaling interval"));
    }
    Ok(s)
}

/// `mu / (2 f lambda sqrt(k))` rounded down, for `k` generators of norm at most `alpha`.
pub fn eps_max_for(k: usize, r: usize, alpha: &Q, mu: &Q, det_lower: &Q, mode: ReductionMode) -> Q {
    let f_up = sqrt_upper(&quality_factor_sq(mode, k));
    let sk = sqrt_upper(&qi(k as i64));
    mu / (qi(2) * f_up * lambda_bound(k, r, alpha, det_lower) * sk)
}

pub fn plan_scaling(gs: &ApproxGeneratingSet, r: usize, det_lower: &Q, mode: ReductionMode) -> Result<ScalingPlan> {
    let k = gs.k();
    if k < r {
        return Err(Error::invalid("fewer generators than the rank"));
    }
    let f_sq = quality_factor_sq(mode, k);
    let f_up = sqrt_upper(&f_sq);
    let sk = sqrt_upper(&qi(k as i64));
    let lambda = lambda_bound(k, r, &gs.alpha, det_lower);
    let s = choose_scaling(&f_sq, &lambda, &gs.mu)?;
    let eps_max = eps_max_for(k, r, &gs.alpha, &gs.mu, det_lower, mode);
    let ae = &gs.alpha + &gs.eps;
    let alpha_tilde = sqrt_upper(&(&s * &s * &ae * &ae + Q::one()));
    let g = &f_up * &sk * &alpha_tilde;
    Ok(ScalingPlan { k, r, mode, f_sq, lambda, s, eps_max, alpha_tilde, g })
}

/// Basis `e_j ⊕ s a'_j` of the approximation lattice.
pub fn approximation_lattice(gs: &ApproxGeneratingSet, s: &Q) -> Vec<Vec<Q>> {
    let k = gs.k();
    gs.vectors
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let mut v: Vec<Q> = (0..k).map(|i| if i == j { Q::one() } else { Q::zero() }).collect();
            v.extend(a.iter().map(|x| x * s));
            v
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Recovery {
    #[serde(skip)]
    pub basis: Vec<Vec<Q>>,
    /// Column `j` holds the coefficients of reduced vector `j`; the first `k - r` are relations.
    #[serde(skip)]
    pub transform: Vec<Vec<Z>>,
    pub plan: ScalingPlan,
    /// Lemma bound `f sqrt(k) alpha_tilde eps`.
    #[serde(serialize_with = "ser_q")]
    pub delta: Q,
    /// `max_j |m_{k-r+j}|_1 eps`, from the transform actually found.
    #[serde(serialize_with = "ser_q")]
    pub delta_observed: Q,
    pub relations: Vec<RelationVerdict>,
    pub checks: Vec<Check>,
}

/// Reduce the approximation lattice and read a basis off the transform.
pub fn recover_basis(gs: &ApproxGeneratingSet, r: usize, det_lower: &Q, mode: ReductionMode) -> Result<Recovery> {
    let plan = plan_scaling(gs, r, det_lower, mode)?;
    if gs.eps > plan.eps_max {
        return Err(Error::precondition(format!(
            "eps = {:.3e} exceeds the admissible {:.3e}",
            to_f64(&gs.eps),
            to_f64(&plan.eps_max)
        )));
    }
    let k = gs.k();
    let tilde = approximation_lattice(gs, &plan.s);
    let red = match mode {
        ReductionMode::Lll => lll(&tilde)?,
        ReductionMode::Kz => kz(&tilde)?,
    };
    let mut m = red.transform;
    let mut relations = Vec::with_capacity(k - r);
    for col in &m[..k - r] {
        relations.push(is_relation(gs, col)?);
    }
    let mut checks = vec![Check::holds(
        "leading transform columns are relations",
        "every verdict is relation",
        relations.iter().all(|v| *v == RelationVerdict::Relation),
    )];
    let reduced_ok = {
        let fa = sqrt_upper(&plan.f_sq) * &plan.alpha_tilde;
        m[k - r..].iter().all(|c| norm2(&c.iter().map(|x| qz(x.clone())).collect::<Vec<_>>()) <= &fa * &fa)
    };
    if k > r {
        let (rel, rest) = m.split_at_mut(k - r);
        for c in rest.iter_mut() {
            let shorter = shorten_against(rel, c)?;
            if l1(&shorter) < l1(c) {
                *c = shorter;
            }
        }
    }
    let basis: Vec<Vec<Q>> = m[k - r..].iter().map(|c| gs.combine(c)).collect();
    let delta = sqrt_upper(&plan.f_sq) * sqrt_upper(&qi(k as i64)) * &plan.alpha_tilde * &gs.eps;
    let delta_observed =
        m[k - r..].iter().map(|c| norm1(&c.iter().map(|x| qz(x.clone())).collect::<Vec<_>>()) * &gs.eps).max().unwrap_or_default();
    checks.push(Check::at_most("observed delta <= lemma delta", to_f64(&delta_observed), to_f64(&delta)));
    checks.push(Check::holds("trailing transform columns within f * alpha_tilde", "holds", reduced_ok));
    if !relations.iter().all(|v| *v == RelationVerdict::Relation) {
        return Err(Error::CheckFailed("reduced vectors are not relations; the samples may not generate the lattice".into()));
    }
    if crate::linalg::rank(&basis) < r {
        return Err(Error::CheckFailed("recovered vectors are rank deficient".into()));
    }
    Ok(Recovery { basis, transform: m, plan, delta, delta_observed, relations, checks })
}

fn l1(c: &[Z]) -> Z {
    c.iter().map(|x| x.abs()).sum()
}

/// Nearest-plane reduction of the coefficient vector `c` modulo the span of the relation columns.
/// Adding relations leaves the exact combination unchanged and shrinks the error it picks up.
fn shorten_against(rel: &[Vec<Z>], c: &[Z]) -> Result<Vec<Z>> {
    let relq: Vec<Vec<Q>> = rel.iter().map(|v| v.iter().map(|x| qz(x.clone())).collect()).collect();
    let gs = crate::lattice::gram_schmidt(&relq)?;
    let mut v: Vec<Z> = c.to_vec();
    for j in (0..rel.len()).rev() {
        let vq: Vec<Q> = v.iter().map(|x| qz(x.clone())).collect();
        let t = crate::rational::round_half_up(&(crate::rational::dot(&vq, &gs.bstar[j]) / &gs.norms[j]));
        if !t.is_zero() {
            for (x, y) in v.iter_mut().zip(&rel[j]) {
                *x -= &t * y;
            }
        }
    }
    Ok(v)
}

/// Comparison against known exact generators.
#[derive(Clone, Debug, Serialize)]
pub struct ExactComparison {
    pub hnf_equal: bool,
    pub max_distance: f64,
    pub delta_bound: f64,
    pub distance_ok: bool,
    pub norm_ok: bool,
}

/// Apply the transform to exact generators `a_j` and compare with `L`.
pub fn compare_with_exact(rec: &Recovery, exact: &[Vec<Q>], l: &Lattice, alpha: &Q) -> ExactComparison {
    let k = exact.len();
    let r = rec.plan.r;
    let b: Vec<Vec<Q>> = rec.transform[k - r..].iter().map(|c| combine(exact, c)).collect();
    let hnf_equal = Lattice::generated_by(&b).map(|lb| lb.same_lattice(l)).unwrap_or(false) && b.len() == l.basis.len();
    let mut max_d2 = Q::zero();
    for (bp, be) in rec.basis.iter().zip(&b) {
        let d: Vec<Q> = bp.iter().zip(be).map(|(x, y)| x - y).collect();
        let d2 = norm2(&d);
        if d2 > max_d2 {
            max_d2 = d2;
        }
    }
    let distance_ok = max_d2 <= &rec.delta * &rec.delta;
    let nb = sqrt_upper(&rec.plan.f_sq) * sqrt_upper(&qi(k as i64)) * &rec.plan.alpha_tilde * alpha;
    let norm_ok = b.iter().all(|v| norm2(v) <= &nb * &nb);
    ExactComparison {
        hnf_equal,
        max_distance: to_f64(&sqrt_upper(&max_d2)),
        delta_bound: to_f64(&rec.delta),
        distance_ok,
        norm_ok,
    }
}

/// Approximate dual basis `B'^{-T}` with the a-priori and a-posteriori error bounds.
#[derive(Clone, Debug, Serialize)]
pub struct DualRecovery {
    #[serde(skip)]
    pub basis: Vec<Vec<Q>>,
    /// `2 n^(5/2) g^(2n-1) alpha^(2(n-1)) eps / det^2`, when its precondition holds.
    pub gamma_lemma: Option<f64>,
    #[serde(skip)]
    pub gamma_lemma_q: Option<Q>,
    pub precondition: bool,
    /// `|X|^2 n delta / (1 - |X| n delta)` with `X = B'^{-1}` in the max-row-sum norm; pass the observed delta for the sharpest value.
    pub gamma_posteriori: Option<f64>,
    #[serde(skip)]
    pub gamma_posteriori_q: Option<Q>,
}

impl DualRecovery {
    /// Tightest certified bound available.
    pub fn gamma(&self) -> Option<&Q> {
        match (&self.gamma_lemma_q, &self.gamma_posteriori_q) {
            (Some(a), Some(b)) => Some(if a < b { a } else { b }),
            (a, b) => a.as_ref().or(b.as_ref()),
        }
    }
}

fn max_row_sum(m: &[Vec<Q>]) -> Q {
    // columns given; rows are m[..][i]
    let n = m[0].len();
    (0..n).map(|i| m.iter().map(|c| c[i].abs()).sum::<Q>()).max().unwrap_or_default()
}

/// Invert an approximate basis; `det` is the (lower bound on the) determinant of `L`, `alpha` bounds the generator norms.
pub fn dual_basis_from_approx(bprime: &[Vec<Q>], delta: &Q, eps: &Q, g: &Q, alpha: &Q, det: &Q) -> Result<DualRecovery> {
    let n = bprime.len();
    let inv = inverse(&bprime.to_vec()).map_err(|_| Error::CheckFailed("approximate basis is singular".into()))?;
    let basis = transpose(&inv);
    let nn = qi(n as i64);
    let n32 = sqrt_upper(&pow(&nn, 3));
    let n52 = sqrt_upper(&pow(&nn, 5));
    let pre_rhs = det / (qi(2) * n32 * pow(g, n as u32) * pow(alpha, (n - 1) as u32));
    let precondition = eps <= &pre_rhs;
    let gamma_lemma_q = precondition
        .then(|| qi(2) * n52 * pow(g, (2 * n - 1) as u32) * pow(alpha, (2 * (n - 1)) as u32) * eps / (det * det));
    let x = max_row_sum(&inv);
    let e = &nn * delta;
    let t = &x * &e;
    let gamma_posteriori_q = (t < Q::one()).then(|| &x * &x * &e / (Q::one() - &t));
    Ok(DualRecovery {
        basis,
        gamma_lemma: gamma_lemma_q.as_ref().map(to_f64),
        gamma_lemma_q,
        precondition,
        gamma_posteriori: gamma_posteriori_q.as_ref().map(to_f64),
        gamma_posteriori_q,
    })
}

/// Largest Euclidean distance between matching columns.
pub fn max_column_distance(a: &[Vec<Q>], b: &[Vec<Q>]) -> Q {
    a.iter()
        .zip(b)
        .map(|(x, y)| sqrt_upper(&norm2(&x.iter().zip(y).map(|(p, q)| p - q).collect::<Vec<_>>())))
        .max()
        .unwrap_or_default()
}

/// Result of turning dual samples into an approximate basis of the period lattice.
#[derive(Clone, Debug, Serialize)]
pub struct EndToEnd {
    #[serde(skip)]
    pub basis: Vec<Vec<Q>>,
    pub recovery: Recovery,
    pub dual: DualRecovery,
}

/// Samples approximate `Lambda*` within `eps`; `mu <= lambda_1(Lambda*)` and `det_dual_lower <= det(Lambda*)`.
pub fn end_to_end_recover(
    samples: &[Vec<Q>],
    eps: &Q,
    mu: &Q,
    det_dual_lower: &Q,
    mode: ReductionMode,
) -> Result<EndToEnd> {
    if samples.is_empty() {
        return Err(Error::invalid("no samples"));
    }
    let n = samples[0].len();
    if samples.len() < n {
        return Err(Error::CheckFailed("fewer samples than the dimension".into()));
    }
    // |a_j| <= |a'_j| + eps
    let alpha = samples.iter().map(|v| sqrt_upper(&norm2(v))).max().unwrap_or_default() + eps;
    let alpha = if alpha.is_positive() { alpha } else { Q::one() };
    let gs = ApproxGeneratingSet::new(samples.to_vec(), eps.clone(), mu.clone(), alpha.clone())?;
    let rec = recover_basis(&gs, n, det_dual_lower, mode)?;
    let mut basis_dual = rec.basis.clone();
    if n == 1 && basis_dual[0][0].is_negative() {
        basis_dual[0][0] = -basis_dual[0][0].clone();
    }
    let dual = dual_basis_from_approx(&basis_dual, &rec.delta_observed, eps, &rec.plan.g, &alpha, det_dual_lower)?;
    let basis = dual.basis.clone();
    Ok(EndToEnd { basis, recovery: rec, dual })
}

/// Largest `eps` meeting both the recovery and the dual-inversion preconditions
/// (with `g` evaluated at the recovery maximum, which only overestimates it).
pub fn admissible_eps(plan: &ScalingPlan, n: usize, alpha: &Q, det: &Q) -> Q {
    let nn = qi(n as i64);
    let dual = det / (qi(2) * sqrt_upper(&pow(&nn, 3)) * pow(&plan.g, n as u32) * pow(alpha, (n - 1) as u32));
    if dual < plan.eps_max {
        dual
    } else {
        plan.eps_max.clone()
    }
}

/// `x` rounded down to a multiple of `2^-bits`.
pub fn round_down_dyadic(x: &Q, bits: u32) -> Q {
    let sc = qz(Z::one() << bits);
    Q::new(crate::rational::floor(&(x * &sc)), Z::one() << bits)
}

/// Random test instance: a lattice, `k` exact generators and an approximate set at `eps_fraction` of the admissible error.
#[derive(Clone, Debug)]
pub struct RecoveryInstance {
    pub lattice: Lattice,
    pub exact: Vec<Vec<Q>>,
    pub approx: ApproxGeneratingSet,
    pub det: Q,
}

pub fn random_recovery_instance<R: rand::Rng>(n: usize, k: usize, eps_fraction: &Q, mode: ReductionMode, rng: &mut R) -> Result<RecoveryInstance> {
    let l = crate::lattice::random_lattice(n, 4, 2, rng);
    let det = l.det()?;
    let (_, l1sq) = crate::lattice::svp(&l.basis)?;
    let mu = sqrt_lower(&l1sq);
    // integer coefficient vectors that generate Z^n
    let coeffs: Vec<Vec<i64>> = loop {
        let mut c: Vec<Vec<i64>> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(-3..=3)).collect()).collect();
        let u = crate::lattice::random_unimodular(n, 6, 1, rng);
        c[..n].clone_from_slice(&u);
        let refs: Vec<&[i64]> = c.iter().map(|v| v.as_slice()).collect();
        if crate::generation::generates_lattice(&refs, n) {
            break c;
        }
    };
    let exact: Vec<Vec<Q>> = coeffs.iter().map(|c| combine(&l.basis, &c.iter().map(|&x| Z::from(x)).collect::<Vec<_>>())).collect();
    let alpha = exact.iter().map(|v| sqrt_upper(&norm2(v))).max().unwrap_or_default();
    let probe = ApproxGeneratingSet::new(exact.clone(), Q::zero(), mu.clone(), alpha.clone())?;
    let plan = plan_scaling(&probe, n, &det, mode)?;
    let target = admissible_eps(&plan, n, &alpha, &det) * eps_fraction;
    let bits = (-to_f64(&target).log2()).ceil().max(0.0) as u32 + 8;
    let eps = round_down_dyadic(&target, bits);
    let shrink = Q::new(crate::rational::floor(&(qi(64) / sqrt_upper(&qi(n as i64)))), Z::from(64));
    let approx: Vec<Vec<Q>> = exact
        .iter()
        .map(|v| v.iter().map(|x| x + Q::new(Z::from(rng.gen_range(-1000..=1000)), Z::from(1000)) * &eps * &shrink).collect())
        .collect();
    Ok(RecoveryInstance { lattice: l, exact, approx: ApproxGeneratingSet::new(approx, eps, mu, alpha)?, det })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn ints(v: &[i64]) -> Vec<Z> {
        v.iter().map(|&x| Z::from(x)).collect()
    }

    fn unit_square_set() -> ApproxGeneratingSet {
        let v = vec![vec![qi(1), qi(0)], vec![qi(0), qi(1)], vec![qi(1), qi(1)]];
        ApproxGeneratingSet::new(v, q(1, 100), q(1, 2), qi(2)).unwrap()
    }

    #[test]
    fn relation_examples() {
        let gs = unit_square_set();
        assert_eq!(is_relation(&gs, &ints(&[1, 1, -1])).unwrap(), RelationVerdict::Relation);
        assert_eq!(is_relation(&gs, &ints(&[1, 0, 0])).unwrap(), RelationVerdict::NotRelation);
        assert!(is_relation(&gs, &ints(&[0, 0, 0])).is_err());
        assert_eq!(is_relation(&gs, &ints(&[30, 0, 0])).unwrap(), RelationVerdict::Indeterminate);
    }

    #[test]
    fn scaling_midpoint() {
        assert_eq!(choose_scaling(&qi(1), &qi(3), &qi(1)).unwrap(), qi(9));
    }

    #[test]
    fn exact_generators_of_z2() {
        let v = vec![vec![qi(1), qi(0)], vec![qi(0), qi(1)], vec![qi(1), qi(1)]];
        let gs = ApproxGeneratingSet::new(v.clone(), Q::zero(), qi(1), sqrt_upper(&qi(2))).unwrap();
        let l = Lattice::from_ints(&[vec![1, 0], vec![0, 1]]).unwrap();
        for mode in [ReductionMode::Lll, ReductionMode::Kz] {
            let rec = recover_basis(&gs, 2, &qi(1), mode).unwrap();
            assert!(Lattice::generated_by(&rec.basis).unwrap().same_lattice(&l));
            let cmp = compare_with_exact(&rec, &v, &l, &gs.alpha);
            assert!(cmp.hnf_equal && cmp.distance_ok && cmp.norm_ok);
        }
    }

    #[test]
    fn exact_inverse_has_zero_gamma() {
        let b = vec![vec![qi(10), qi(0)], vec![qi(0), qi(10)]];
        let d = dual_basis_from_approx(&b, &Q::zero(), &Q::zero(), &qi(3), &qi(10), &qi(100)).unwrap();
        assert_eq!(d.basis, vec![vec![q(1, 10), qi(0)], vec![qi(0), q(1, 10)]]);
        assert_eq!(d.gamma_posteriori_q, Some(Q::zero()));
    }

    #[test]
    fn perturbed_diagonal_inverse() {
        // B = diag(10, 10), perturbation 1e-3 in one entry
        let b = vec![vec![qi(10), qi(0)], vec![qi(0), qi(10)]];
        let e = q(1, 1000);
        let bp = vec![vec![qi(10) + &e, qi(0)], vec![e.clone(), qi(10)]];
        let delta = e.clone();
        let (g, alpha) = (qi(1), qi(10));
        let d = dual_basis_from_approx(&bp, &delta, &e, &g, &alpha, &qi(100)).unwrap();
        assert!(d.precondition);
        let exact = transpose(&inverse(&b).unwrap());
        let dist = max_column_distance(&d.basis, &exact);
        assert!(dist <= *d.gamma_posteriori_q.as_ref().unwrap());
        assert!(dist <= *d.gamma_lemma_q.as_ref().unwrap());
        // |B^-1|_1 |E|_1 <= 1/2
        let x = max_row_sum(&inverse(&b).unwrap());
        assert!(x * qi(2) * &e <= q(1, 2));
    }

    #[test]
    fn one_dim_forty() {
        // dual of 40Z sampled with error <= eps
        let eps = q(1, 4 * 17080);
        let samples = vec![vec![q(3, 40) + q(1, 100_000)], vec![q(7, 40) - q(1, 90_000)]];
        let res = end_to_end_recover(&samples, &eps, &q(1, 40), &q(1, 40), ReductionMode::Kz).unwrap();
        let x = to_f64(&res.basis[0][0]);
        assert!((x - 40.0).abs() < 0.1, "{x}");
        let gamma = res.dual.gamma().unwrap();
        assert!((&res.basis[0][0] - qi(40)).abs() <= *gamma);
    }
}
