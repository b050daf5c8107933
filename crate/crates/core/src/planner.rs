//! Parameter planning, closed-form success bounds and the end-to-end factor audit.

use crate::error::{Error, Result};
use crate::lattice::lll::{quality_factor_sq, ReductionMode};
use crate::rational::{ceil, floor, pow, q, qi, qz, sqrt_lower, sqrt_upper, JsonQ, Q, Z};
use crate::real::{ball_from_fint, cos_pi, inv_zeta_product, render_sig, round_nearest_sig, round_up_sig, span_product, Ball};
use crate::recovery::{choose_scaling, eps_max_for, lambda_bound};
use crate::sampler::collision::m_lower;
use crate::sampler::targets::Rounding;
use crate::stats::{wilson, SIGMAS};
use num_integer::Roots;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// The angle numerator of the cosine floor at `qN = 32^2`, `kappa = 1/(9n)`:
/// `1/4 + 1/4096 + 2/9 = 17417/36864`.
pub const COSINE_ANGLE: (i64, i64) = (17417, 36864);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanMode {
    /// Every inequality of the final theorem (or its one-dimensional variant).
    Theorem,
    /// Only what the sampler needs: grid, window and cosine conditions plus the shift count.
    Desk,
    /// Desk conditions plus the recovery precondition for the sampled `eps`.
    DeskPipeline,
}

impl std::str::FromStr for PlanMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem" => Ok(PlanMode::Theorem),
            "desk" => Ok(PlanMode::Desk),
            "desk-pipeline" => Ok(PlanMode::DeskPipeline),
            _ => Err(Error::invalid(format!("unknown plan mode {s}"))),
        }
    }
}

/// Infrastructure constants and period-lattice data fed to the planner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerInput {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: JsonQ,
    #[serde(rename = "C")]
    pub c: JsonQ,
    #[serde(rename = "D")]
    pub d: JsonQ,
    pub lambda1: JsonQ,
    pub det: JsonQ,
    /// Covering radius bound; the Minkowski-type bound is used when absent.
    #[serde(default)]
    pub nu: Option<JsonQ>,
    pub gamma: JsonQ,
    /// Desk overrides.
    #[serde(default, rename = "N")]
    pub big_n: Option<u64>,
    #[serde(default, rename = "N0")]
    pub big_n0: Option<u64>,
    #[serde(default)]
    pub q: Option<u64>,
    #[serde(default)]
    pub kappa: Option<JsonQ>,
    #[serde(default)]
    pub reduction: Option<ReductionMode>,
}

impl PlannerInput {
    pub fn new(n: usize, a: Q, c: Q, d: Q, lambda1: Q, det: Q, gamma: Q) -> Self {
        PlannerInput {
            n,
            a: a.into(),
            c: c.into(),
            d: d.into(),
            lambda1: lambda1.into(),
            det: det.into(),
            nu: None,
            gamma: gamma.into(),
            big_n: None,
            big_n0: None,
            q: None,
            kappa: None,
            reduction: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, c, d) = (&self.a.0, &self.c.0, &self.d.0);
        if self.n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        if a < &Q::one() || !c.is_positive() || c > &Q::one() || !d.is_positive() {
            return Err(Error::invalid("need A >= 1, 0 < C <= 1, D > 0"));
        }
        if !self.lambda1.0.is_positive() || !self.det.0.is_positive() || !self.gamma.0.is_positive() {
            return Err(Error::invalid("lambda1, det and gamma must be positive"));
        }
        if self.n == 1 && self.lambda1.0 != self.det.0 {
            return Err(Error::invalid("in one dimension lambda1 equals det"));
        }
        if let Some(k) = &self.kappa {
            if !k.0.is_positive() {
                return Err(Error::invalid("kappa must be positive"));
            }
        }
        Ok(())
    }

    /// Covering radius bound: given, `det/2` in one dimension, else `n^((n+1)/2) det / (2 lambda1^(n-1))`.
    fn nu(&self) -> Surd {
        if let Some(v) = &self.nu {
            return Surd::q(v.0.clone());
        }
        let n = self.n as u32;
        let scale = &self.det.0 / (qi(2) * pow(&self.lambda1.0, n - 1));
        n_pow_half(self.n, n + 1).scale(&scale)
    }
}

/// Planner input for a known infrastructure: `A, C, D` from its metadata, `lambda1`
/// (rounded down) and a covering-radius bound from the period lattice.
pub fn input_from_infra(infra: &crate::infra::BoxInfrastructure, gamma: Q) -> Result<PlannerInput> {
    let n = infra.dim();
    let l = &infra.lambda;
    let det = l.det()?.abs();
    let lambda1 = if n == 1 { det.clone() } else { sqrt_lower(&crate::lattice::enumerate::svp(&l.basis)?.1) };
    let mut inp = PlannerInput::new(n, max_q_one(&infra.a), infra.c.clone(), qi(infra.d as i64), lambda1, det, gamma);
    inp.nu = Some(crate::lattice::bounds::covering_radius_bound(l)?.into());
    Ok(inp)
}

fn max_q_one(a: &Q) -> Q {
    crate::rational::max_q(a, &Q::one())
}

/// `a + b sqrt(m)` with rational `a, b` and `m >= 0`: every threshold below has this shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Surd {
    pub a: Q,
    pub b: Q,
    pub m: Q,
}

/// Sign of `x + y sqrt(m)`.
fn sign_surd(x: &Q, y: &Q, m: &Q) -> Ordering {
    let sx = x.cmp(&Q::zero());
    let sy = y.cmp(&Q::zero());
    if sy == Ordering::Equal || m.is_zero() {
        return sx;
    }
    if sx == Ordering::Equal || sx == sy {
        return sy;
    }
    // opposite signs: compare x^2 with y^2 m
    let lhs = x * x;
    let rhs = y * y * m;
    match lhs.cmp(&rhs) {
        Ordering::Greater => sx,
        Ordering::Less => sy,
        Ordering::Equal => Ordering::Equal,
    }
}

impl Surd {
    pub fn q(a: Q) -> Self {
        Surd { a, b: Q::zero(), m: Q::one() }
    }
    pub fn root(b: Q, m: Q) -> Self {
        Surd { a: Q::zero(), b, m }
    }
    pub fn add_q(&self, x: &Q) -> Surd {
        Surd { a: &self.a + x, b: self.b.clone(), m: self.m.clone() }
    }
    pub fn scale(&self, x: &Q) -> Surd {
        Surd { a: &self.a * x, b: &self.b * x, m: self.m.clone() }
    }
    /// Sum of two surds sharing the radicand (or with one of them rational).
    pub fn add(&self, o: &Surd) -> Surd {
        if self.b.is_zero() {
            return o.add_q(&self.a);
        }
        if o.b.is_zero() {
            return self.add_q(&o.a);
        }
        assert_eq!(self.m, o.m, "surds with different radicands");
        Surd { a: &self.a + &o.a, b: &self.b + &o.b, m: self.m.clone() }
    }
    /// Order of `x` relative to the value.
    pub fn cmp_q(&self, x: &Q) -> Ordering {
        // sign of x - value
        sign_surd(&(x - &self.a), &-self.b.clone(), &self.m)
    }
    pub fn le_q(&self, x: &Q) -> bool {
        self.cmp_q(x) != Ordering::Less
    }
    pub fn lt_q(&self, x: &Q) -> bool {
        self.cmp_q(x) == Ordering::Greater
    }
    /// Smallest integer `>=` (or `>` when `strict`) the value.
    pub fn min_int(&self, strict: bool) -> Z {
        let t: Z = Roots::sqrt(&floor(&(&self.b * &self.b * &self.m)));
        let lo = if self.b.is_negative() { &self.a - qz(&t + Z::one()) } else { &self.a + qz(t) };
        let mut c: Z = floor(&lo) - Z::one();
        loop {
            let x = qz(c.clone());
            let ok = if strict { self.lt_q(&x) } else { self.le_q(&x) };
            if ok {
                return c;
            }
            c += 1;
        }
    }
    pub fn upper(&self) -> Q {
        if self.b.is_negative() {
            &self.a + &self.b * sqrt_lower(&self.m)
        } else {
            &self.a + &self.b * sqrt_upper(&self.m)
        }
    }
    pub fn lower(&self) -> Q {
        if self.b.is_negative() {
            &self.a + &self.b * sqrt_upper(&self.m)
        } else {
            &self.a + &self.b * sqrt_lower(&self.m)
        }
    }
}

/// `n^(e/2)` as a surd.
fn n_pow_half(n: usize, e: u32) -> Surd {
    let nq = qi(n as i64);
    if e % 2 == 0 {
        Surd::q(pow(&nq, e / 2))
    } else {
        Surd::root(pow(&nq, e / 2), nq)
    }
}

/// Six significant digits, rounded up.
pub fn sci_up(x: &Q) -> String {
    if x.is_zero() {
        return "0".into();
    }
    if x.is_negative() {
        let (m, e) = round_up_sig(&-x.clone(), 6);
        return format!("-{}", render_sig(&m, e, 6));
    }
    let (m, e) = round_up_sig(x, 6);
    render_sig(&m, e, 6)
}

fn sci_int(z: &Z) -> String {
    if z.bits() < 60 {
        z.to_string()
    } else {
        sci_up(&qz(z.clone()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Lt => "<",
            Relation::Le => "<=",
        }
    }
}

/// One inequality `param relation required` with both sides materialized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub param: String,
    pub relation: Relation,
    pub required: String,
    pub chosen: String,
    pub satisfied: bool,
}

impl Condition {
    fn check(param: &str, chosen: &Q, rel: Relation, bound: &Surd) -> Condition {
        let ord = bound.cmp_q(chosen);
        let satisfied = match rel {
            Relation::Ge => ord != Ordering::Less,
            Relation::Gt => ord == Ordering::Greater,
            Relation::Lt => ord == Ordering::Less,
            Relation::Le => ord != Ordering::Greater,
        };
        let shown = match rel {
            Relation::Ge | Relation::Gt => bound.upper(),
            Relation::Lt | Relation::Le => bound.lower(),
        };
        let chosen_s = if chosen.is_integer() { sci_int(&chosen.to_integer()) } else { sci_up(chosen) };
        Condition { param: param.into(), relation: rel, required: sci_up(&shown), chosen: chosen_s, satisfied }
    }
}

/// Assumption identifiers in ledger order.
pub const ASSUMPTIONS: [&str; 13] = ["I", "II", "III", "IV", "IV1", "IV2", "V", "VI", "VI2", "VII", "VII1", "VII2", "VIII"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub id: String,
    /// Whether the selected mode relies on this entry.
    pub required: bool,
    pub satisfied: bool,
    pub conditions: Vec<Condition>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannedParameters {
    pub mode: PlanMode,
    pub input: PlannerInput,
    #[serde(rename = "N")]
    pub big_n: String,
    #[serde(rename = "N0")]
    pub big_n0: Option<String>,
    pub q: String,
    #[serde(rename = "L")]
    pub l: String,
    pub kappa: JsonQ,
    /// Accuracy of the sampled generating set, `1/(4 sqrt(n) q)` (upper bound).
    pub eps: JsonQ,
    pub ledger: Vec<LedgerEntry>,
}

impl PlannedParameters {
    pub fn n(&self) -> usize {
        self.input.n
    }
    fn parse(s: &str) -> Z {
        s.parse().expect("planner integers are decimal")
    }
    pub fn big_n_z(&self) -> Z {
        Self::parse(&self.big_n)
    }
    pub fn big_n0_z(&self) -> Option<Z> {
        self.big_n0.as_deref().map(Self::parse)
    }
    pub fn q_z(&self) -> Z {
        Self::parse(&self.q)
    }
    pub fn l_z(&self) -> Z {
        Self::parse(&self.l)
    }
    /// `(N, N0, q, L)` when all fit in machine words.
    pub fn desk_values(&self) -> Result<(u64, u64, u64, u64)> {
        let cv = |z: Z, what: &str| z.to_u64().ok_or_else(|| Error::Capability(format!("{what} = {} exceeds 64 bits", sci_int(&z))));
        let n = cv(self.big_n_z(), "N")?;
        let n0 = match self.big_n0_z() {
            Some(z) => cv(z, "N0")?,
            None => n,
        };
        Ok((n, n0, cv(self.q_z(), "q")?, cv(self.l_z(), "L")?))
    }
    /// Every entry the mode relies on is satisfied.
    pub fn mode_satisfied(&self) -> bool {
        self.ledger.iter().filter(|e| e.required).all(|e| e.satisfied)
    }
    pub fn entry(&self, id: &str) -> Option<&LedgerEntry> {
        self.ledger.iter().find(|e| e.id == id)
    }
}

fn max_z(xs: impl IntoIterator<Item = Z>) -> Z {
    xs.into_iter().max().expect("non-empty")
}

fn required_ids(mode: PlanMode, n: usize) -> &'static [&'static str] {
    match (mode, n) {
        (PlanMode::Theorem, 1) => &["I", "II", "III", "IV2", "V", "VI2", "VII2"],
        (PlanMode::Theorem, _) => &["I", "II", "III", "IV1", "V", "VI", "VII1", "VIII"],
        (PlanMode::Desk, _) => &["I", "III", "IV", "V"],
        (PlanMode::DeskPipeline, _) => &["I", "III", "IV", "V", "recovery"],
    }
}

/// Chosen values for the ledger; `n0` only for `n >= 2`.
struct Chosen {
    big_n: Q,
    big_n0: Option<Q>,
    q: Q,
    l: Q,
    kappa: Q,
}

/// `4 n D (q + A + C + 2)^n / C^n`.
fn shift_count_bound(inp: &PlannerInput, q: &Q) -> Q {
    let n = inp.n as u32;
    let (a, c, d) = (&inp.a.0, &inp.c.0, &inp.d.0);
    qi(4 * inp.n as i64) * d * pow(&((q + a + c + qi(2)) / c), n)
}

/// `max{4/A, 8(n+1) n 2^n D A^(n-1) / (3 C^n)}` as two thresholds.
fn grid_count_bounds(inp: &PlannerInput) -> [Q; 2] {
    let n = inp.n as u32;
    let ni = inp.n as i64;
    let (a, c, d) = (&inp.a.0, &inp.c.0, &inp.d.0);
    [qi(4) / a, qi(8 * (ni + 1) * ni * (1i64 << n)) * d * pow(a, n - 1) / (qi(3) * pow(c, n))]
}

fn window_factors(n: usize) -> [Surd; 2] {
    // max{8n-2, n^((n-1)/2) 2^(n+1) - 2}
    let ni = n as i64;
    [Surd::q(qi(8 * ni - 2)), n_pow_half(n, n as u32 - 1).scale(&qi(1i64 << (n + 1))).add_q(&qi(-2))]
}

fn ledger(inp: &PlannerInput, ch: &Chosen, mode: PlanMode) -> Vec<LedgerEntry> {
    let n = inp.n;
    let ni = n as i64;
    let nq = qi(ni);
    let (a, det, l1) = (&inp.a.0, &inp.det.0, &inp.lambda1.0);
    let nu = inp.nu();
    let kappa = &ch.kappa;
    let qq = &ch.q;
    let mut grids = vec![("N", ch.big_n.clone())];
    if let Some(n0) = &ch.big_n0 {
        grids.push(("N0", n0.clone()));
    }
    let big_n = &ch.big_n;
    let mut out = Vec::new();
    let mut push = |id: &str, conds: Vec<Condition>| {
        let satisfied = conds.iter().all(|c| c.satisfied);
        out.push(LedgerEntry { id: id.into(), required: required_ids(mode, n).contains(&id), satisfied, conditions: conds });
    };
    // (I)
    push(
        "I",
        vec![
            Condition::check("L", &ch.l, Relation::Ge, &Surd::q(shift_count_bound(inp, qq))),
            // eps is defined as 1/(2NL) by the grid
            Condition::check("eps*2NL", &Q::one(), Relation::Le, &Surd::q(Q::one())),
        ],
    );
    // (II)
    let mut c2 = vec![Condition::check("q", qq, Relation::Ge, &Surd::q(qi(9) * crate::rational::max_q(&Q::one(), a)))];
    for (name, g) in &grids {
        for b in grid_count_bounds(inp) {
            c2.push(Condition::check(name, g, Relation::Ge, &Surd::q(b)));
        }
    }
    push("II", c2);
    // (III)
    let c3 = grids.iter().map(|(name, g)| Condition::check(name, g, Relation::Ge, &Surd::root(qi(2) / l1, nq.clone()))).collect();
    push("III", c3);
    // (IV)
    let iv = nu.scale(&qi(2 * ni)).add_q(&(qi(3 * ni) / big_n));
    push("IV", vec![Condition::check("q", qq, Relation::Gt, &iv)]);
    let iv1 = nu.scale(&qi(4 * ni * (ni + 1))).add_q(&(qi(6 * ni * ni) / big_n));
    push("IV1", vec![Condition::check("q", qq, Relation::Ge, &iv1)]);
    let iv2 = Surd::q(qi(12) / big_n + qi(4) * det);
    push("IV2", vec![Condition::check("q", qq, Relation::Ge, &iv2)]);
    // (V)
    let v = Q::new(Z::one(), Z::from(8 * ni)) - Q::one() / (qi(4 * ni) * qq * big_n);
    push("V", vec![Condition::check("kappa", kappa, Relation::Lt, &Surd::q(v))]);
    // (VI)
    let tail = Q::one() / (qi(2 * ni) * qq);
    let c6 = window_factors(n)
        .iter()
        .map(|w| Condition::check("N", big_n, Relation::Ge, &w.scale(&(&nq / (qi(2) * l1))).add_q(&tail).scale(&(Q::one() / kappa))))
        .collect();
    push("VI", c6);
    let vi2 = (qi(3) / det + Q::one() + Q::one() / (qi(2) * qq)) / kappa;
    push("VI2", vec![Condition::check("N", big_n, Relation::Ge, &Surd::q(vi2))]);
    // (VII)
    let vii = (Q::one() / (qi(2) * qq) + &nq * &nq / l1) / kappa;
    push("VII", vec![Condition::check("N", big_n, Relation::Gt, &Surd::q(vii))]);
    let vii1 = (&nq / qq + qi(2) * pow(&nq, 3) / l1) / kappa;
    push("VII1", vec![Condition::check("N", big_n, Relation::Ge, &Surd::q(vii1))]);
    let vii2 = (qi(2) / qq + qi(4) / det) / kappa;
    push("VII2", vec![Condition::check("N", big_n, Relation::Ge, &Surd::q(vii2))]);
    // (VIII)
    let c8 = match &ch.big_n0 {
        Some(n0) => vec![Condition::check("N0", n0, Relation::Ge, &Surd::q(qi(8 * ni * ni * (ni + 1)) * big_n))],
        None => vec![],
    };
    push("VIII", c8);
    out
}

/// Per-mode dimension-dependent recovery data.
struct RecoveryShape {
    k: usize,
    /// Lower bound on `lambda_1(Lambda*)`.
    mu: Q,
    /// `det(Lambda*)`.
    det_dual: Q,
    mode: ReductionMode,
}

fn recovery_shape(inp: &PlannerInput) -> RecoveryShape {
    let n = inp.n;
    let det = &inp.det.0;
    let k = if n == 1 { 2 } else { 2 * n + 1 };
    // lambda_1(Lambda*) >= 1/lambda_n(Lambda) >= lambda_1^(n-1) / (n^(n/2) det)
    let mu = if n == 1 {
        Q::one() / det
    } else {
        pow(&inp.lambda1.0, n as u32 - 1) / (n_pow_half(n, n as u32).upper() * det)
    };
    RecoveryShape { k, mu, det_dual: Q::one() / det, mode: inp.reduction.unwrap_or(ReductionMode::Kz) }
}

/// `(mu, det(Lambda*), reduction)` used to recover from the planned samples.
pub fn recovery_inputs(p: &PlannedParameters) -> (Q, Q, ReductionMode) {
    recovery_parameters(&p.input)
}

/// `(mu, det(Lambda*), reduction)` for a period lattice described by `inp`.
pub fn recovery_parameters(inp: &PlannerInput) -> (Q, Q, ReductionMode) {
    let s = recovery_shape(inp);
    (s.mu, s.det_dual, s.mode)
}

/// `1/(4 sqrt(n) q)`, rounded up.
pub fn sample_eps(n: usize, q: &Q) -> Q {
    Q::one() / (qi(4) * sqrt_lower(&qi(n as i64)) * q)
}

/// Generator norm bound `sqrt(n) kappa N_top + 2 eps`.
fn alpha_bound(n: usize, kappa: &Q, n_top: &Q, eps: &Q) -> Q {
    sqrt_upper(&qi(n as i64)) * kappa * n_top + qi(2) * eps
}

/// Recovery and dual-inversion preconditions at the planned `eps`.
fn recovery_entries(inp: &PlannerInput, ch: &Chosen, mode: PlanMode) -> Vec<LedgerEntry> {
    let n = inp.n;
    let shape = recovery_shape(inp);
    let eps = sample_eps(n, &ch.q);
    let top = ch.big_n0.clone().unwrap_or_else(|| ch.big_n.clone());
    let alpha = alpha_bound(n, &ch.kappa, &top, &eps);
    let eps_max = eps_max_for(shape.k, n, &alpha, &shape.mu, &shape.det_dual, shape.mode);
    let rec = Condition::check("eps", &eps, Relation::Le, &Surd::q(eps_max));
    let mut dual_conds = vec![];
    let lam = lambda_bound(shape.k, n, &alpha, &shape.det_dual);
    let f_sq = quality_factor_sq(shape.mode, shape.k);
    if let Ok(s) = choose_scaling(&f_sq, &lam, &shape.mu) {
        let ae = &alpha + &eps;
        let alpha_tilde = sqrt_upper(&(&s * &s * &ae * &ae + Q::one()));
        let g = sqrt_upper(&f_sq) * sqrt_upper(&qi(shape.k as i64)) * alpha_tilde;
        let nq = qi(n as i64);
        let bound = &shape.det_dual / (qi(2) * sqrt_upper(&pow(&nq, 3)) * pow(&g, n as u32) * pow(&alpha, n as u32 - 1));
        dual_conds.push(Condition::check("eps", &eps, Relation::Le, &Surd::q(bound)));
    }
    let req = required_ids(mode, n);
    let mk = |id: &str, conds: Vec<Condition>| LedgerEntry {
        id: id.into(),
        required: req.contains(&id),
        satisfied: conds.iter().all(|c| c.satisfied),
        conditions: conds,
    };
    vec![mk("recovery", vec![rec]), mk("dual", dual_conds)]
}

fn theorem_params(inp: &PlannerInput) -> Chosen {
    let n = inp.n;
    let ni = n as i64;
    let nq = qi(ni);
    let (a, c, d, det, l1, gamma) = (&inp.a.0, &inp.c.0, &inp.d.0, &inp.det.0, &inp.lambda1.0, &inp.gamma.0);
    let ceil_q = |x: Q| ceil(&x);
    if n == 1 {
        let kappa = q(1, 9);
        let big_n = max_z([
            Z::from(32),
            ceil_q(qi(4) / a),
            ceil_q(qi(32) * d / (qi(3) * c)),
            ceil_q(qi(36) / det + q(9, 16)),
            ceil_q(qi(27) / det + qi(9) + q(9, 16)),
        ]);
        let nn = qz(big_n.clone());
        let ratio = crate::rational::max_q(&Q::one(), &(det / gamma));
        let big_q = max_z([
            Z::from(32),
            ceil_q(qi(9) * a),
            ceil_q(qi(12) / &nn + qi(4) * det),
            ceil_q(q(195, 10) / qi(81) * &nn * &nn * pow(det, 3) * ratio),
        ]);
        let qq = qz(big_q);
        let l = qz(ceil_q(shift_count_bound(inp, &qq)));
        return Chosen { big_n: nn, big_n0: None, q: qq, l, kappa };
    }
    let kappa = Q::new(Z::one(), Z::from(9 * ni));
    let n_u = n as u32;
    let mut ns = vec![Z::from(32)];
    ns.push(ceil_q(grid_count_bounds(inp)[1].clone()));
    ns.push(ceil_q(qi(9 * ni * ni) / qi(32) + qi(18) * pow(&nq, 4) / l1));
    for w in window_factors(n) {
        ns.push(w.scale(&(qi(9 * ni * ni) / (qi(2) * l1))).add_q(&q(9, 64)).min_int(false));
    }
    let big_n = max_z(ns);
    let nn = qz(big_n);
    let n0 = qz(ceil_q(qi(8 * ni * ni * (ni + 1)) * &nn));
    let poly = Q::one() + q(5, 2 * ni) + Q::one() / (&nq * &nq);
    let t195 = q(195, 10);
    let nine = qi(9);
    // 6n^2/N + 2 n^((n+1)/2+1) (n+1) det / lambda1^(n-1)
    let third = n_pow_half(n, n_u + 3)
        .scale(&(qi(2 * (ni + 1)) * det / pow(l1, n_u - 1)))
        .add_q(&(qi(6 * ni * ni) / &nn));
    let e4 = n_u * n_u + 2 * n_u - 1;
    let fourth = n_pow_half(n, 2 * n_u + 3).scale(
        &(pow(&t195, n_u) * pow(&poly, n_u) * pow(&n0, e4) * pow(det, 2 * n_u + 1)
            / (qi(2) * pow(&nine, e4) * pow(l1, n_u * n_u - n_u))),
    );
    let e5 = 2 * n_u * n_u + 3 * n_u - 3;
    let fifth = n_pow_half(n, 4 * n_u + 3).scale(
        &(pow(&t195, 2 * n_u) * pow(&poly, 2 * n_u - 1) * pow(&n0, e5) * pow(det, 4 * n_u)
            / (gamma * qi(39) * pow(&nine, e5) * pow(l1, 2 * n_u * n_u - 3 * n_u - 1))),
    );
    let big_q = max_z([Z::from(32), ceil_q(qi(9) * a), third.min_int(false), fourth.min_int(false), fifth.min_int(false)]);
    let qq = qz(big_q);
    let l = qz(ceil_q(shift_count_bound(inp, &qq)));
    Chosen { big_n: nn, big_n0: Some(n0), q: qq, l, kappa }
}

fn desk_params(inp: &PlannerInput, pipeline: bool) -> Result<Chosen> {
    let n = inp.n;
    let ni = n as i64;
    let nq = qi(ni);
    let kappa = inp.kappa.as_ref().map(|k| k.0.clone()).unwrap_or_else(|| Q::new(Z::one(), Z::from(9 * ni)));
    let eighth = Q::new(Z::one(), Z::from(8 * ni));
    if kappa >= eighth {
        return Err(Error::invalid("kappa must be below 1/(8n)"));
    }
    let big_n = match inp.big_n {
        Some(v) => qi(v as i64),
        None => qz(crate::rational::max_q(&Q::one(), &qz(Surd::root(qi(2) / &inp.lambda1.0, nq.clone()).min_int(false))).to_integer()),
    };
    let big_n0 = if n >= 2 {
        Some(match inp.big_n0 {
            Some(v) => qi(v as i64),
            None => qz(ceil(&(qi(8 * ni * ni * (ni + 1)) * &big_n))),
        })
    } else {
        None
    };
    let mut big_q = match inp.q {
        Some(v) => Z::from(v),
        None => {
            let iv = inp.nu().scale(&qi(2 * ni)).add_q(&(qi(3 * ni) / &big_n)).min_int(true);
            // (V): qN > 1 / (4n (1/(8n) - kappa))
            let v = Surd::q(Q::one() / (qi(4 * ni) * (&eighth - &kappa) * &big_n)).min_int(true);
            iv.max(v).max(Z::one())
        }
    };
    if pipeline && inp.q.is_none() {
        let shape = recovery_shape(inp);
        let top = big_n0.clone().unwrap_or_else(|| big_n.clone());
        loop {
            let qq = qz(big_q.clone());
            let eps = sample_eps(n, &qq);
            let alpha = alpha_bound(n, &kappa, &top, &eps);
            let eps_max = eps_max_for(shape.k, n, &alpha, &shape.mu, &shape.det_dual, shape.mode);
            if eps <= eps_max {
                break;
            }
            // eps shrinks like 1/q, so jump straight to the requirement at the current alpha
            let need = ceil(&(Q::one() / (qi(4) * sqrt_lower(&nq) * &eps_max)));
            big_q = if need > big_q { need } else { big_q + 1 };
        }
    }
    let qq = qz(big_q);
    let l = qz(ceil(&shift_count_bound(inp, &qq)));
    Ok(Chosen { big_n, big_n0, q: qq, l, kappa })
}

/// Plan grid sizes, precision and shift count for the given mode.
pub fn plan(inp: &PlannerInput, mode: PlanMode) -> Result<PlannedParameters> {
    inp.validate()?;
    let ch = match mode {
        PlanMode::Theorem => theorem_params(inp),
        PlanMode::Desk => desk_params(inp, false)?,
        PlanMode::DeskPipeline => desk_params(inp, true)?,
    };
    let mut led = ledger(inp, &ch, mode);
    led.extend(recovery_entries(inp, &ch, mode));
    let eps = sample_eps(inp.n, &ch.q);
    Ok(PlannedParameters {
        mode,
        input: inp.clone(),
        big_n: ch.big_n.to_integer().to_string(),
        big_n0: ch.big_n0.as_ref().map(|x| x.to_integer().to_string()),
        q: ch.q.to_integer().to_string(),
        l: ch.l.to_integer().to_string(),
        kappa: ch.kappa.into(),
        eps: eps.into(),
        ledger: led,
    })
}

/// Human-readable ledger table.
pub fn ledger_table(p: &PlannedParameters) -> String {
    let mut s = format!(
        "mode {:?}  n={}  N={}  N0={}  q={}  L={}  kappa={}\n",
        p.mode,
        p.n(),
        sci_int(&p.big_n_z()),
        p.big_n0_z().map(|z| sci_int(&z)).unwrap_or_else(|| "-".into()),
        sci_int(&p.q_z()),
        sci_int(&p.l_z()),
        p.kappa.0
    );
    s.push_str(&format!("{:<9} {:<4} {:<7} {:<4} {:>16} {:>16}  {}\n", "entry", "used", "param", "rel", "required", "chosen", "ok"));
    for e in &p.ledger {
        for c in &e.conditions {
            s.push_str(&format!(
                "{:<9} {:<4} {:<7} {:<4} {:>16} {:>16}  {}\n",
                e.id,
                if e.required { "yes" } else { "no" },
                c.param,
                c.relation.symbol(),
                c.required,
                c.chosen,
                if c.satisfied { "pass" } else { "FAIL" }
            ));
        }
    }
    s
}

/// Cosine floor `cos^2(pi * 17417/36864)`.
pub fn cosine_floor() -> Ball {
    let c = cosine_root();
    c.mul(&c)
}

/// `cos(pi * COSINE_ANGLE)`.
fn cosine_root() -> Ball {
    static C: std::sync::OnceLock<Ball> = std::sync::OnceLock::new();
    C.get_or_init(|| cos_pi(&q(COSINE_ANGLE.0, COSINE_ANGLE.1))).clone()
}

/// `cos^2(pi (1/4 + 1/(4 qN) + 2 kappa n))` with `kappa = 1/(9n)`.
pub fn cosine_at(qn: u64) -> Ball {
    let angle = q(1, 4) + Q::new(Z::one(), Z::from(4 * qn)) + q(2, 9);
    let c = cos_pi(&angle);
    c.mul(&c)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuccessBound {
    pub n: usize,
    /// Lower bound with the exact cosine constant and zeta products.
    #[serde(skip)]
    pub exact: Ball,
    pub exact_lower: f64,
    /// The printed simplified decimal lower bound.
    #[serde(skip)]
    pub simplified: Q,
    pub simplified_value: String,
    /// Expected iterations, `1/exact`, rounded up to three significant digits.
    pub inverse: String,
    /// The general-n formula evaluated at this `n` (differs from `exact` only for `n = 1`).
    pub general_inverse: String,
}

fn general_formula(n: usize) -> Ball {
    let nu = n as u32;
    let cosine = cosine_root().powi(4 * nu + 2);
    let e = 4 * nu * nu + 2 * nu;
    let denom = pow(&qi(2), 2 * nu + 6) * pow(&qi(3), e) * pow(&qi(n as i64), e);
    let zeta = ball_from_fint(inv_zeta_product(nu)).sub(&Ball::exact(q(1, 4)));
    cosine.mul(&zeta).mul_q(&(span_product(nu) / denom))
}

fn inverse_string(b: &Ball) -> String {
    let inv_hi = Q::one() / &b.lo;
    let (m, e) = round_up_sig(&inv_hi, 3);
    render_sig(&m, e, 3)
}

/// Closed-form lower bound on the success probability of one full run.
pub fn success_lower_bound(n: usize) -> Result<SuccessBound> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let general = general_formula(n);
    let nu = n as u32;
    let (exact, simplified) = if n == 1 {
        let c4 = cosine_root().powi(4);
        (c4.mul_q(&q(1, 7776)), Q::new(Z::from(7163), Z::from(10).pow(12)))
    } else {
        let num = q(6_198_327, 1_000_000) * pow(&q(154_587_777, 100_000_000), nu);
        let den = pow(&qi(10), 6 * nu + 6) * pow(&qi(81), nu * nu) * pow(&qi(n as i64), 4 * nu * nu + 2 * nu);
        (general.clone(), num / den)
    };
    Ok(SuccessBound {
        n,
        exact_lower: crate::rational::f64_lower(&exact.lo),
        simplified_value: sci_up(&simplified),
        inverse: inverse_string(&exact),
        general_inverse: inverse_string(&general),
        exact,
        simplified,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompetitorBound {
    pub n: usize,
    /// `2^-(20n^2 + 12n + 2) n^-(4n^2)`.
    #[serde(skip)]
    pub bound: Q,
    pub inverse: String,
    /// `log10` of our bound over the competitor's.
    pub log10_ratio: f64,
    /// Whether the ratio is at least `2^(n^2 - 1)`.
    pub improvement_claim: bool,
}

pub fn competitor_bound(n: usize) -> Result<CompetitorBound> {
    let ours = success_lower_bound(n)?;
    let nu = n as u32;
    let inv = pow(&qi(2), 20 * nu * nu + 12 * nu + 2) * pow(&qi(n as i64), 4 * nu * nu);
    let bound = Q::one() / &inv;
    // an exact integer, so nearest rounding reproduces it
    let (m, e) = round_nearest_sig(&inv, 3);
    let ratio = &ours.exact.lo / &bound;
    let log10_ratio = log10_q(&ratio);
    let improvement_claim = ratio >= pow(&qi(2), nu * nu - 1);
    Ok(CompetitorBound { n, bound, inverse: render_sig(&m, e, 3), log10_ratio, improvement_claim })
}

/// `log10` of a positive rational, safe outside the f64 range.
pub fn log10_q(x: &Q) -> f64 {
    let (m, e) = crate::real::sci_of(x, 12);
    m.log10() + e as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub ours_inverse: String,
    pub competitor_inverse: String,
    pub log10_ratio: f64,
    pub zeta_product: f64,
    pub span_product: f64,
}

/// The expected-iteration tables for `n = 1..=n_max`.
pub fn iteration_table(n_max: usize) -> Result<Vec<TableRow>> {
    (1..=n_max)
        .map(|n| {
            let ours = success_lower_bound(n)?;
            let comp = competitor_bound(n)?;
            Ok(TableRow {
                n,
                ours_inverse: ours.inverse,
                competitor_inverse: comp.inverse,
                log10_ratio: comp.log10_ratio,
                zeta_product: inv_zeta_product(n as u32).mid(),
                span_product: crate::rational::to_f64(&span_product(n as u32)),
            })
        })
        .collect()
}

/// Outcome of one sample inside an end-to-end attempt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFactors {
    #[serde(rename = "N")]
    pub big_n: u64,
    pub anchor_ok: bool,
    pub hit: bool,
}

/// Outcome of one end-to-end attempt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttemptFactors {
    pub good_shift: bool,
    pub samples: Vec<SampleFactors>,
    /// Whether the hit targets generate the dual lattice (only when every sample hit).
    pub generated: Option<bool>,
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorAudit {
    pub factor: String,
    pub trials: u64,
    pub successes: u64,
    pub empirical: f64,
    pub bound: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub pass: bool,
}

impl FactorAudit {
    fn new(factor: &str, successes: u64, trials: u64, bound: f64) -> Self {
        let (lo, hi) = wilson(successes, trials, SIGMAS);
        let empirical = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        FactorAudit { factor: factor.into(), trials, successes, empirical, bound, wilson_lo: lo, wilson_hi: hi, pass: trials > 0 && hi >= bound }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointAudit {
    pub factors: Vec<FactorAudit>,
    /// Exact guard products that the stricter conditions promise, with their floor.
    pub guards: Vec<(String, f64, f64, bool)>,
    /// Product of the per-factor bounds, the end-to-end lower bound at these parameters.
    pub product_bound: f64,
    pub pass: bool,
}

/// `[1 - (1/(2q) + n^2/lambda1)/(kappa N)]`.
fn window_guard(n: usize, q: &Q, big_n: &Q, kappa: &Q, l1: &Q) -> Q {
    let nq = qi(n as i64);
    Q::one() - (Q::one() / (qi(2) * q) + &nq * &nq / l1) / (kappa * big_n)
}

/// `[1 - 3n/(qN) - 2n nu/q]`.
fn collision_guard(n: usize, q: &Q, big_n: &Q, nu: &Q) -> Q {
    let nq = qi(n as i64);
    Q::one() - qi(3) * &nq / (q * big_n) - qi(2) * &nq * nu / q
}

/// Lower bound on hitting some in-window target in one sample on an `N` grid.
pub fn hit_probability_bound(p: &PlannedParameters, big_n: u64, rounding: Rounding) -> Result<f64> {
    let n = p.n();
    let (_, _, q_u, _) = p.desk_values()?;
    let inp = &p.input;
    let nu = inp.nu().upper();
    let det = &inp.det.0;
    let kappa = &p.kappa.0;
    let qq = qi(q_u as i64);
    let nn = qi(big_n as i64);
    let ml = m_lower(n, q_u, big_n, det, &nu);
    let ll = pow(&(kappa * &nn), n as u32) * det * window_guard(n, &qq, &nn, kappa, &inp.lambda1.0);
    let w = pow(&(qi(2 * n as i64) * &qq * &nn), n as u32);
    let (factor, form) = match rounding {
        Rounding::Floor => (qi(1i64 << (n - 1)), crate::sampler::targets::CosineForm::Half),
        Rounding::Nearest => (Q::one(), crate::sampler::targets::CosineForm::Quarter),
    };
    let spec = crate::infra::grid::GridSpec::new(n, big_n, q_u, 1);
    let c = crate::sampler::targets::cosine_constant(&spec, kappa, form);
    let v = c.mul_q(&(factor * ml * ll / w));
    Ok(if v.lo.is_negative() { 0.0 } else { crate::rational::f64_lower(&v.lo) })
}

/// Split the end-to-end success of `attempts` into its factors and compare each with its bound.
pub fn joint_probability_audit(p: &PlannedParameters, attempts: &[AttemptFactors], rounding: Rounding) -> Result<JointAudit> {
    let n = p.n();
    let inp = &p.input;
    let mut factors = Vec::new();
    let total = attempts.len() as u64;
    let good: Vec<&AttemptFactors> = attempts.iter().filter(|a| a.good_shift).collect();
    factors.push(FactorAudit::new("good shift", good.len() as u64, total, 0.5));
    let samples: Vec<&SampleFactors> = good.iter().flat_map(|a| a.samples.iter()).collect();
    let clean = samples.iter().filter(|s| s.anchor_ok).count() as u64;
    let anchor_bound = 1.0 - 1.0 / (4.0 * (n as f64 + 1.0));
    factors.push(FactorAudit::new("anchor outside boundary", clean, samples.len() as u64, anchor_bound));
    let mut grids: Vec<u64> = samples.iter().map(|s| s.big_n).collect();
    grids.sort_unstable();
    grids.dedup();
    let mut product = 0.5;
    let (_, n0, _, _) = p.desk_values()?;
    for g in &grids {
        let on: Vec<&&SampleFactors> = samples.iter().filter(|s| s.big_n == *g).collect();
        let hits = on.iter().filter(|s| s.hit).count() as u64;
        let bound = hit_probability_bound(p, *g, rounding)?;
        let reps = if n == 1 { 2 } else if *g == n0 && n0 != p.desk_values()?.0 { n + 1 } else { n };
        product *= bound.powi(reps as i32);
        factors.push(FactorAudit::new(&format!("target hit N={g}"), hits, on.len() as u64, bound));
    }
    let all_hit: Vec<&&AttemptFactors> = good.iter().filter(|a| a.generated.is_some()).collect();
    let gens = all_hit.iter().filter(|a| a.generated == Some(true)).count() as u64;
    let gen_bound = if n == 1 {
        1.0 / 3.0
    } else {
        crate::rational::f64_lower(&span_product(n as u32)) * (inv_zeta_product(n as u32).lo - 0.25)
    };
    product *= gen_bound;
    factors.push(FactorAudit::new("generation", gens, all_hit.len() as u64, gen_bound));
    let succ = attempts.iter().filter(|a| a.success).count() as u64;
    factors.push(FactorAudit::new("end to end", succ, total, product));

    let mut guards = Vec::new();
    let (nn, n0, q_u, _) = p.desk_values()?;
    let qq = qi(q_u as i64);
    let nu = inp.nu().upper();
    let kappa = &p.kappa.0;
    let l1 = &inp.lambda1.0;
    if n == 1 {
        let w = window_guard(1, &qq, &qi(nn as i64), kappa, l1);
        let c = collision_guard(1, &qq, &qi(nn as i64), &nu);
        for (name, v) in [("window guard squared", &w * &w), ("collision guard squared", &c * &c)] {
            guards.push((name.to_string(), crate::rational::to_f64(&v), 0.5, v >= q(1, 2)));
        }
    } else {
        let nu32 = n as u32;
        let w = pow(&window_guard(n, &qq, &qi(nn as i64), kappa, l1), nu32) * pow(&window_guard(n, &qq, &qi(n0 as i64), kappa, l1), nu32 + 1);
        let c = pow(&collision_guard(n, &qq, &qi(nn as i64), &nu), nu32) * pow(&collision_guard(n, &qq, &qi(n0 as i64), &nu), nu32 + 1);
        for (name, v) in [("window guard product", w), ("collision guard product", c)] {
            guards.push((name.to_string(), crate::rational::to_f64(&v), 0.25, v >= q(1, 4)));
        }
    }
    let pass = factors.iter().all(|f| f.pass);
    Ok(JointAudit { factors, guards, product_bound: product, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forty() -> PlannerInput {
        PlannerInput::new(1, qi(1), qi(1), qi(1), qi(40), qi(40), qi(1))
    }

    #[test]
    fn surd_rounding() {
        let s = Surd::root(qi(1), qi(2));
        assert_eq!(s.min_int(false), Z::from(2));
        let s = Surd::root(qi(2), qi(4));
        assert_eq!(s.min_int(false), Z::from(4));
        assert_eq!(s.min_int(true), Z::from(5));
        let s = Surd { a: qi(10), b: qi(-1), m: qi(2) };
        assert_eq!(s.min_int(false), Z::from(9));
    }

    #[test]
    fn one_dim_theorem_plan() {
        let p = plan(&forty(), PlanMode::Theorem).unwrap();
        assert_eq!(p.kappa.0, q(1, 9));
        assert_eq!(p.big_n_z(), Z::from(32));
        // 19.5/81 * 32^2 * 40^3 * 40
        assert_eq!(p.q_z(), ceil(&(q(195, 810) * qi(1024) * qi(64000) * qi(40))));
        assert!(p.mode_satisfied(), "{}", ledger_table(&p));
    }

    #[test]
    fn kappa_two_dims() {
        let inp = PlannerInput::new(2, qi(1), qi(1), qi(1), qi(10), qi(100), qi(1));
        let p = plan(&inp, PlanMode::Theorem).unwrap();
        assert_eq!(p.kappa.0, q(1, 18));
        assert!(p.mode_satisfied(), "{}", ledger_table(&p));
    }

    #[test]
    fn desk_two_dims() {
        let mut inp = PlannerInput::new(2, qi(10), qi(1), qi(1), qi(10), qi(100), qi(1));
        inp.big_n = Some(4);
        inp.q = Some(32);
        inp.kappa = Some(q(1, 17).into());
        // covering radius of 10Z^2 is 5 sqrt(2)
        inp.nu = Some(sqrt_upper(&qi(50)).into());
        let p = plan(&inp, PlanMode::Desk).unwrap();
        assert!(p.mode_satisfied(), "{}", ledger_table(&p));
        assert_eq!(p.l_z(), Z::from(16200));
    }

    #[test]
    fn pipeline_one_dim() {
        let mut inp = forty();
        inp.big_n = Some(32);
        let p = plan(&inp, PlanMode::DeskPipeline).unwrap();
        assert!(p.mode_satisfied(), "{}", ledger_table(&p));
        let qv = p.q_z().to_u64().unwrap();
        assert!(qv > 16000 && qv < 18000, "{qv}");
    }

    #[test]
    fn first_table_entries() {
        assert_eq!(success_lower_bound(1).unwrap().inverse, "1.40e8");
        assert_eq!(success_lower_bound(2).unwrap().inverse, "1.27e30");
        assert_eq!(competitor_bound(1).unwrap().inverse, "1.72e10");
        assert!(cosine_at(1024).lo > q(746, 100000));
    }
}
