//! Exact rational helpers: rounding, certified square roots, f64 enclosures and
//! the `["num","den"]` wire format.

use crate::error::{Error, Result};
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use std::fmt;

pub type Q = BigRational;
pub type Z = BigInt;

/// Bits of precision used by the certified square-root bounds.
pub const SQRT_BITS: u64 = 96;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(Z::from(n), Z::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(Z::from(n))
}

pub fn qz(n: Z) -> Q {
    Q::from_integer(n)
}

pub fn floor(x: &Q) -> Z {
    x.floor().to_integer()
}

pub fn ceil(x: &Q) -> Z {
    x.ceil().to_integer()
}

/// Nearest integer, ties rounded up.
pub fn round_half_up(x: &Q) -> Z {
    floor(&(x + q(1, 2)))
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

pub fn pow(x: &Q, e: u32) -> Q {
    // a reduced fraction stays reduced under powers
    Q::new_raw(x.numer().pow(e), x.denom().pow(e))
}

pub fn max_q(a: &Q, b: &Q) -> Q {
    if a >= b { a.clone() } else { b.clone() }
}

pub fn min_q(a: &Q, b: &Q) -> Q {
    if a <= b { a.clone() } else { b.clone() }
}

fn isqrt(n: &Z) -> Z {
    if n.is_zero() { Z::zero() } else { n.sqrt() }
}

/// Returns `Some(r)` when `x` is the square of a rational.
pub fn exact_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let (n, d) = (x.numer(), x.denom());
    let (rn, rd) = (isqrt(n), isqrt(d));
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(Q::new(rn, rd))
    } else {
        None
    }
}

/// Rational `r` with `r >= sqrt(x)` and `r - sqrt(x) <= 2^-SQRT_BITS * scale`; exact on squares.
pub fn sqrt_upper(x: &Q) -> Q {
    assert!(!x.is_negative(), "sqrt of negative rational");
    if let Some(r) = exact_sqrt(x) {
        return r;
    }
    let (n, d) = (x.numer(), x.denom());
    let shift = Z::one() << (2 * SQRT_BITS);
    let m = n * d * &shift;
    let s = isqrt(&m);
    let s = if &s * &s == m { s } else { s + 1 };
    Q::new(s, d * (Z::one() << SQRT_BITS))
}

/// Rational `r` with `0 <= r <= sqrt(x)`; exact on squares.
pub fn sqrt_lower(x: &Q) -> Q {
    assert!(!x.is_negative(), "sqrt of negative rational");
    if let Some(r) = exact_sqrt(x) {
        return r;
    }
    let (n, d) = (x.numer(), x.denom());
    let m = n * d * (Z::one() << (2 * SQRT_BITS));
    Q::new(isqrt(&m), d * (Z::one() << SQRT_BITS))
}

/// Compare `sqrt(a)` with a rational `b` exactly.
pub fn sqrt_le(a: &Q, b: &Q) -> bool {
    !b.is_negative() && a <= &(b * b)
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// f64 value `<= x`.
pub fn f64_lower(x: &Q) -> f64 {
    let v = to_f64(x);
    if v.is_finite() { v.next_down() } else { v }
}

/// f64 value `>= x`.
pub fn f64_upper(x: &Q) -> f64 {
    let v = to_f64(x);
    if v.is_finite() { v.next_up() } else { v }
}

/// Exact conversion of a finite f64 into a rational.
pub fn from_f64_exact(v: f64) -> Q {
    Q::from_float(v).expect("finite f64")
}

/// Squared Euclidean norm.
pub fn norm2(v: &[Q]) -> Q {
    v.iter().fold(Q::zero(), |acc, x| acc + x * x)
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn norm1(v: &[Q]) -> Q {
    v.iter().fold(Q::zero(), |acc, x| acc + x.abs())
}

pub fn norm_inf(v: &[Q]) -> Q {
    v.iter().fold(Q::zero(), |acc, x| max_q(&acc, &x.abs()))
}

/// Upper bound on the Euclidean norm.
pub fn norm_upper(v: &[Q]) -> Q {
    sqrt_upper(&norm2(v))
}

pub fn lcm_denominators<'a>(xs: impl IntoIterator<Item = &'a Q>) -> Z {
    xs.into_iter().fold(Z::one(), |acc, x| acc.lcm(x.denom()))
}

/// Decimal string with `digits` significant digits, for human output.
pub fn fmt_sci(x: &Q, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), to_f64(x))
}

/// Parse "a", "a/b" or a decimal like "0.25".
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: Z = a.trim().parse().map_err(|_| Error::Parse(format!("bad rational {s}")))?;
        let d: Z = b.trim().parse().map_err(|_| Error::Parse(format!("bad rational {s}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s}")));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches('-'), fp);
        let n: Z = digits.parse().map_err(|_| Error::Parse(format!("bad decimal {s}")))?;
        let d = num_traits::pow(Z::from(10), fp.len());
        let v = Q::new(n, d);
        return Ok(if neg { -v } else { v });
    }
    let n: Z = s.parse().map_err(|_| Error::Parse(format!("bad integer {s}")))?;
    Ok(qz(n))
}

pub fn q_to_pair(x: &Q) -> [String; 2] {
    [x.numer().to_string(), x.denom().to_string()]
}

/// Rational on the wire: `["num","den"]`; integers and `"a/b"` strings are also accepted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JsonQ(pub Q);

impl From<Q> for JsonQ {
    fn from(x: Q) -> Self {
        JsonQ(x)
    }
}

impl Serialize for JsonQ {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(&self.0.numer().to_string())?;
        seq.serialize_element(&self.0.denom().to_string())?;
        seq.end()
    }
}

fn parse_int_value<E: de::Error>(v: &serde_json::Value) -> std::result::Result<Z, E> {
    match v {
        serde_json::Value::String(s) => s.trim().parse().map_err(|_| E::custom(format!("bad integer {s}"))),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Z::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(Z::from(u))
            } else {
                Err(E::custom("non-integer number in rational"))
            }
        }
        _ => Err(E::custom("expected integer or string")),
    }
}

impl<'de> Deserialize<'de> for JsonQ {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = JsonQ;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as [num, den], an integer, or a string")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<JsonQ, A::Error> {
                let n: serde_json::Value = seq.next_element()?.ok_or_else(|| de::Error::custom("missing numerator"))?;
                let d: serde_json::Value = seq.next_element()?.ok_or_else(|| de::Error::custom("missing denominator"))?;
                let n = parse_int_value::<A::Error>(&n)?;
                let d = parse_int_value::<A::Error>(&d)?;
                if d.is_zero() {
                    return Err(de::Error::custom("zero denominator"));
                }
                Ok(JsonQ(Q::new(n, d)))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<JsonQ, E> {
                Ok(JsonQ(qi(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<JsonQ, E> {
                Ok(JsonQ(qz(Z::from(v))))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<JsonQ, E> {
                parse_q(v).map(JsonQ).map_err(|e| E::custom(e.to_string()))
            }
        }
        d.deserialize_any(V)
    }
}

pub fn to_json_vec(v: &[Q]) -> Vec<JsonQ> {
    v.iter().cloned().map(JsonQ).collect()
}

pub fn from_json_vec(v: &[JsonQ]) -> Vec<Q> {
    v.iter().map(|x| x.0.clone()).collect()
}

/// Sign-aware exact comparison helper used in tests and checks.
pub fn is_integer(x: &Q) -> bool {
    x.is_integer()
}

pub fn sign(x: &Z) -> i32 {
    match x.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_bounds_bracket() {
        for (n, d) in [(2, 1), (3, 7), (50, 1), (1, 3)] {
            let x = q(n, d);
            let lo = sqrt_lower(&x);
            let hi = sqrt_upper(&x);
            assert!(&lo * &lo <= x && x <= &hi * &hi);
            assert!(&hi - &lo < q(1, 1 << 40));
        }
        assert_eq!(sqrt_upper(&q(9, 4)), q(3, 2));
        assert_eq!(sqrt_lower(&q(400, 1)), qi(20));
    }

    #[test]
    fn wire_format_roundtrip() {
        let x = JsonQ(q(-3, 8));
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"["-3","8"]"#);
        let y: JsonQ = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
        let z: JsonQ = serde_json::from_str("[6, 4]").unwrap();
        assert_eq!(z.0, q(3, 2));
        let w: JsonQ = serde_json::from_str("\"0.125\"").unwrap();
        assert_eq!(w.0, q(1, 8));
    }

    #[test]
    fn rounding() {
        assert_eq!(floor(&q(-1, 2)), Z::from(-1));
        assert_eq!(ceil(&q(-1, 2)), Z::from(0));
        assert_eq!(round_half_up(&q(5, 2)), Z::from(3));
        assert_eq!(round_half_up(&q(-5, 2)), Z::from(-2));
    }
}
