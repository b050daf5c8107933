//! Certified real enclosures.
//!
//! [`Ball`] keeps exact rational endpoints rounded outward to a fixed number of
//! significant bits. [`FInt`] is a cheap f64 interval with one-ulp outward steps
//! after every correctly rounded operation.

use crate::rational::{pow, q, qi, qz, Q, Z};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Significant bits kept by [`Ball`] endpoints.
pub const BALL_BITS: i64 = 160;

fn bit_exponent(x: &Q) -> i64 {
    x.numer().abs().bits() as i64 - x.denom().bits() as i64
}

fn round_dir(x: &Q, up: bool) -> Q {
    if x.is_zero() {
        return Q::zero();
    }
    let shift = BALL_BITS - bit_exponent(x);
    let scale = if shift >= 0 {
        qz(Z::one() << shift as u64)
    } else {
        Q::new(Z::one(), Z::one() << (-shift) as u64)
    };
    let y = x * &scale;
    let r = if up { y.ceil() } else { y.floor() };
    r / scale
}

/// Closed interval `[lo, hi]` of reals with rational endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub lo: Q,
    pub hi: Q,
}

impl Ball {
    pub fn exact(x: Q) -> Self {
        Ball { lo: x.clone(), hi: x }
    }
    pub fn int(n: i64) -> Self {
        Ball::exact(qi(n))
    }
    pub fn new(lo: Q, hi: Q) -> Self {
        assert!(lo <= hi, "empty interval");
        Ball { lo: round_dir(&lo, false), hi: round_dir(&hi, true) }
    }
    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }
    pub fn contains(&self, x: &Q) -> bool {
        &self.lo <= x && x <= &self.hi
    }
    pub fn add(&self, o: &Ball) -> Ball {
        Ball::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }
    pub fn sub(&self, o: &Ball) -> Ball {
        Ball::new(&self.lo - &o.hi, &self.hi - &o.lo)
    }
    pub fn neg(&self) -> Ball {
        Ball { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }
    pub fn mul(&self, o: &Ball) -> Ball {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Ball::new(lo, hi)
    }
    pub fn mul_q(&self, x: &Q) -> Ball {
        self.mul(&Ball::exact(x.clone()))
    }
    pub fn recip(&self) -> Ball {
        assert!(self.lo.is_positive() || self.hi.is_negative(), "reciprocal of interval containing 0");
        Ball::new(self.hi.recip(), self.lo.recip())
    }
    pub fn div(&self, o: &Ball) -> Ball {
        self.mul(&o.recip())
    }
    pub fn powi(&self, e: u32) -> Ball {
        let mut r = Ball::int(1);
        let mut b = self.clone();
        let mut e = e;
        // Even powers of intervals straddling zero are handled by the sign split below.
        if self.lo.is_negative() && self.hi.is_positive() {
            let m = if -self.lo.clone() > self.hi { -self.lo.clone() } else { self.hi.clone() };
            let top = pow(&m, e);
            return if e % 2 == 0 {
                Ball::new(Q::zero(), top)
            } else {
                Ball::new(pow(&self.lo, e), pow(&self.hi, e))
            };
        }
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        r
    }
    pub fn sqrt(&self) -> Ball {
        assert!(!self.lo.is_negative());
        Ball::new(crate::rational::sqrt_lower(&self.lo), crate::rational::sqrt_upper(&self.hi))
    }
    pub fn le(&self, o: &Ball) -> bool {
        self.hi <= o.lo
    }
    pub fn lt(&self, o: &Ball) -> bool {
        self.hi < o.lo
    }
    pub fn mid_f64(&self) -> f64 {
        crate::rational::to_f64(&((&self.lo + &self.hi) / qi(2)))
    }
    pub fn to_finterval(&self) -> FInt {
        FInt::new(crate::rational::f64_lower(&self.lo), crate::rational::f64_upper(&self.hi))
    }
    /// Decimal scientific rendering `(mantissa, exponent)` of the midpoint, safe for
    /// values far outside the f64 range.
    pub fn sci(&self, digits: usize) -> (f64, i64) {
        sci_of(&((&self.lo + &self.hi) / qi(2)), digits)
    }
}

/// `(m, e)` with `x ~ m * 10^e`, `1 <= |m| < 10`.
pub fn sci_of(x: &Q, digits: usize) -> (f64, i64) {
    if x.is_zero() {
        return (0.0, 0);
    }
    let ax = x.abs();
    let approx = (ax.numer().bits() as f64 - ax.denom().bits() as f64) * std::f64::consts::LOG10_2;
    let mut e = approx.floor() as i64;
    let ten = qi(10);
    let scaled = |e: i64| -> Q {
        if e >= 0 { &ax / pow(&ten, e as u32) } else { &ax * pow(&ten, (-e) as u32) }
    };
    let mut m = scaled(e);
    while m >= ten {
        e += 1;
        m = scaled(e);
    }
    while m < Q::one() {
        e -= 1;
        m = scaled(e);
    }
    let p = 10f64.powi(digits as i32 - 1);
    let mf = (crate::rational::to_f64(&m) * p).round() / p;
    let mf = if x.is_negative() { -mf } else { mf };
    (mf, e)
}

/// Smallest `k`-significant-digit decimal `>= x`, as `(mantissa digits, exponent)`.
pub fn round_up_sig(x: &Q, digits: u32) -> (Z, i64) {
    let (_, e) = sci_of(x, 3);
    let shift = e - (digits as i64 - 1);
    let ten = qi(10);
    let scaled = if shift >= 0 { x / pow(&ten, shift as u32) } else { x * pow(&ten, (-shift) as u32) };
    let mut m = scaled.ceil().to_integer();
    let mut exp = shift;
    if m >= num_traits::pow(Z::from(10), digits as usize) {
        // ceil landed exactly on the next power of ten
        m /= 10;
        exp += 1;
    }
    (m, exp)
}

/// Nearest `k`-significant-digit decimal to `x`, ties away from zero.
pub fn round_nearest_sig(x: &Q, digits: u32) -> (Z, i64) {
    let (_, e) = sci_of(x, 3);
    let shift = e - (digits as i64 - 1);
    let ten = qi(10);
    let scaled = if shift >= 0 { x / pow(&ten, shift as u32) } else { x * pow(&ten, (-shift) as u32) };
    let m = (scaled + q(1, 2)).floor().to_integer();
    (m, shift)
}

/// Render `(mantissa digits, exponent)` from the rounding helpers as `d.dde<exp>`.
pub fn render_sig(m: &Z, exp: i64, digits: u32) -> String {
    let s = m.to_string();
    let e = exp + digits as i64 - 1;
    if digits == 1 {
        format!("{s}e{e}")
    } else {
        format!("{}.{}e{}", &s[..1], &s[1..], e)
    }
}

fn atan_inv(k: i64) -> Ball {
    // atan(1/k) = sum (-1)^j / ((2j+1) k^(2j+1)), alternating with decreasing terms.
    let kk = Z::from(k) * Z::from(k);
    let mut sum = Q::zero();
    let mut pw = Z::from(k);
    let tol = Q::new(Z::one(), Z::one() << (BALL_BITS as u64 + 8));
    let mut j: i64 = 0;
    loop {
        let term = Q::new(Z::one(), Z::from(2 * j + 1) * &pw);
        if term < tol {
            return Ball::new(&sum - &term, &sum + &term);
        }
        if j % 2 == 0 { sum += term } else { sum -= term }
        pw *= &kk;
        j += 1;
    }
}

/// Enclosure of pi from Machin's formula.
pub fn pi() -> Ball {
    static PI: OnceLock<Ball> = OnceLock::new();
    PI.get_or_init(|| atan_inv(5).mul_q(&qi(16)).sub(&atan_inv(239).mul_q(&qi(4)))).clone()
}

/// Enclosure of cos(x) for a rational `0 <= x <= 4`.
///
/// Taylor series in fixed point with `BALL_BITS + 64` fractional bits and a running
/// bound on the accumulated truncation error, counted in units of the last place.
pub fn cos_q(x: &Q) -> Ball {
    assert!(!x.is_negative() && x <= &qi(4));
    let bits = (BALL_BITS + 64) as u64;
    let one = Z::one() << bits;
    let x2q = x * x;
    let x2 = (&x2q * qz(one.clone())).floor().to_integer();
    let x2_ceil = x2q.ceil().to_integer();
    let tol = Z::one() << 48u64;
    let mut term = one.clone();
    let mut term_err = Z::zero();
    let mut sum = Z::zero();
    let mut err = Z::zero();
    let mut k: i64 = 0;
    loop {
        let size = term.abs() + &term_err;
        // past the peak the alternating tail is bounded by the next term
        if size < tol && k > 2 {
            err += size;
            break;
        }
        sum += &term;
        err += &term_err;
        let d = Z::from((2 * k + 1) * (2 * k + 2));
        let next = -((&term * &x2) >> bits) / &d;
        let carried = &term_err * &x2_ceil + (term.abs() >> bits) + 2u32;
        term_err = carried / &d + 2u32;
        term = next;
        k += 1;
    }
    let s = qz(one);
    Ball::new(qz(&sum - &err) / &s, qz(&sum + &err) / &s)
}

/// Enclosure of cos(pi * r) for rational `0 <= r <= 1`.
pub fn cos_pi(r: &Q) -> Ball {
    assert!(!r.is_negative() && r <= &qi(1));
    let p = pi();
    let a = &p.lo * r;
    let b = &p.hi * r;
    // cos is decreasing on [0, pi].
    let hi = cos_q(&a).hi;
    let lo = cos_q(&b).lo;
    Ball::new(lo, hi)
}

/// Closed f64 interval with outward rounding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FInt {
    pub lo: f64,
    pub hi: f64,
}

impl FInt {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "empty FInt {lo} {hi}");
        FInt { lo, hi }
    }
    pub fn point(x: f64) -> Self {
        FInt { lo: x, hi: x }
    }
    pub fn add(self, o: FInt) -> FInt {
        FInt::new((self.lo + o.lo).next_down(), (self.hi + o.hi).next_up())
    }
    pub fn sub(self, o: FInt) -> FInt {
        FInt::new((self.lo - o.hi).next_down(), (self.hi - o.lo).next_up())
    }
    pub fn mul(self, o: FInt) -> FInt {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        FInt::new(lo.next_down(), hi.next_up())
    }
    pub fn div(self, o: FInt) -> FInt {
        assert!(o.lo > 0.0 || o.hi < 0.0);
        let c = [self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        FInt::new(lo.next_down(), hi.next_up())
    }
    pub fn mid(self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
    pub fn width(self) -> f64 {
        self.hi - self.lo
    }
}

/// Primes below `limit` by a plain sieve.
pub fn primes_below(limit: usize) -> Vec<u64> {
    let mut sieve = vec![true; limit.max(2)];
    sieve[0] = false;
    if limit > 1 {
        sieve[1] = false;
    }
    let mut i = 2;
    while i * i < limit {
        if sieve[i] {
            let mut j = i * i;
            while j < limit {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve.iter().enumerate().filter(|(_, &p)| p).map(|(i, _)| i as u64).collect()
}

/// Prime cut-off of the Euler products.
pub const EULER_PRIME_LIMIT: usize = 1_000_000;

/// Enclosure of 1/zeta(s) for integer `s >= 2` from the Euler product over the
/// given primes (all primes below `limit`) with a certified tail factor.
pub fn inv_zeta(s: u32, primes: &[u64], limit: u64) -> FInt {
    assert!(s >= 2);
    let mut acc = FInt::point(1.0);
    for &p in primes {
        let mut pw = FInt::point(1.0);
        let pf = FInt::point(p as f64);
        for _ in 0..s {
            pw = pw.mul(pf);
        }
        let t = FInt::point(1.0).div(pw);
        acc = acc.mul(FInt::point(1.0).sub(t));
    }
    // prod_{p >= P} (1 - p^-s) >= 1 - sum_{m >= P} m^-s >= 1 - 1/((s-1)(P-1)^(s-1)).
    let mut denom = FInt::point((s - 1) as f64);
    let base = FInt::point((limit - 1) as f64);
    for _ in 0..(s - 1) {
        denom = denom.mul(base);
    }
    let tail = FInt::point(1.0).sub(FInt::point(1.0).div(denom));
    FInt::new(acc.mul(tail).lo, acc.hi)
}

/// Enclosure of `prod_{i=2}^{n+1} 1/zeta(i)`.
pub fn inv_zeta_product(n: u32) -> FInt {
    let mut acc = FInt::point(1.0);
    for i in 2..=(n + 1) {
        acc = acc.mul(inv_zeta_cached(i));
    }
    acc
}

/// [`inv_zeta`] over the default prime range, memoized per exponent.
pub fn inv_zeta_cached(s: u32) -> FInt {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    static CACHE: OnceLock<Mutex<HashMap<u32, FInt>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&s) {
        return *v;
    }
    let primes = PRIMES.get_or_init(|| primes_below(EULER_PRIME_LIMIT));
    let v = inv_zeta(s, primes, EULER_PRIME_LIMIT as u64);
    cache.lock().unwrap().insert(s, v);
    v
}

/// Exact `prod_{i=1}^{n-1} (1 - 2^-i)`.
pub fn span_product(n: u32) -> Q {
    let mut acc = Q::one();
    for i in 1..n {
        acc *= Q::one() - Q::new(Z::one(), Z::one() << i as u64);
    }
    acc
}

/// Convert an f64 interval into an exact-endpoint [`Ball`].
pub fn ball_from_fint(f: FInt) -> Ball {
    Ball::new(crate::rational::from_f64_exact(f.lo), crate::rational::from_f64_exact(f.hi))
}

pub fn ball_pow_int(base: i64, e: u32) -> Ball {
    Ball::exact(qz(num_traits::pow(BigInt::from(base), e as usize)))
}

pub fn ball_to_f64(b: &Ball) -> f64 {
    b.mid_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn pi_encloses() {
        let p = pi();
        assert!(p.lo.to_f64().unwrap() <= std::f64::consts::PI + 1e-15);
        assert!(p.hi.to_f64().unwrap() >= std::f64::consts::PI - 1e-15);
        assert!(p.width() < Q::new(Z::one(), Z::one() << 100));
    }

    #[test]
    fn cos_pi_values() {
        let c = cos_pi(&q(1, 3));
        assert!(c.contains(&q(1, 2)) || (c.lo.to_f64().unwrap() - 0.5).abs() < 1e-30);
        let c0 = cos_pi(&Q::zero());
        assert!(c0.hi >= Q::one() && c0.lo <= Q::one());
        let half = cos_pi(&q(1, 2));
        assert!(half.contains(&Q::zero()) && half.width() < Q::new(Z::one(), Z::one() << 120));
        for (x, want) in [(q(1, 1), 1f64.cos()), (qi(4), 4f64.cos()), (q(5, 2), 2.5f64.cos())] {
            let c = cos_q(&x);
            assert!(c.lo.to_f64().unwrap() <= want + 1e-15 && c.hi.to_f64().unwrap() >= want - 1e-15);
            assert!(c.width() < Q::new(Z::one(), Z::one() << 140));
        }
    }

    #[test]
    fn zeta_inverse_of_two() {
        let primes = primes_below(10_000);
        let z = inv_zeta(2, &primes, 10_000);
        let want = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
        assert!(z.lo <= want && want <= z.hi, "{z:?}");
        assert!(z.width() < 1e-4);
    }

    #[test]
    fn sig_rounding() {
        let (m, e) = round_up_sig(&q(12641, 10), 3);
        assert_eq!(render_sig(&m, e, 3), "1.27e3");
        let (m, e) = round_nearest_sig(&q(12641, 10), 3);
        assert_eq!(render_sig(&m, e, 3), "1.26e3");
    }
}
