//! Exact rational scalars used by graphs and piecewise-linear maps.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational with 128-bit numerator and denominator.
pub type Q = Ratio<i128>;

/// Largest denominator used when approximating a float by a rational.
pub const MAX_APPROX_DENOM: i128 = 1 << 31;

pub fn q(num: i128, den: i128) -> Q {
    Q::new(num, den)
}

pub fn qi(num: i128) -> Q {
    Q::from_integer(num)
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

pub fn half() -> Q {
    q(1, 2)
}

pub fn add(a: &Q, b: &Q) -> Result<Q> {
    a.checked_add(b).ok_or(Error::Overflow)
}

pub fn sub(a: &Q, b: &Q) -> Result<Q> {
    a.checked_sub(b).ok_or(Error::Overflow)
}

pub fn mul(a: &Q, b: &Q) -> Result<Q> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

pub fn div(a: &Q, b: &Q) -> Result<Q> {
    if b.is_zero() {
        return Err(Error::Map("division by zero".into()));
    }
    a.checked_div(b).ok_or(Error::Overflow)
}

/// `a * t + b`, checked.
pub fn affine(a: &Q, t: &Q, b: &Q) -> Result<Q> {
    add(&mul(a, t)?, b)
}

pub fn to_f64(x: &Q) -> f64 {
    // Ratio::to_f64 rounds correctly for i128 parts.
    x.to_f64().unwrap_or_else(|| *x.numer() as f64 / *x.denom() as f64)
}

/// Parses `"p/q"`, `"p"`, or a decimal literal such as `"0.125"` (exactly).
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(q(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.trim_start().starts_with('-');
        let ip_abs = ip.trim_start_matches(['-', '+']);
        if fp.is_empty() || fp.len() > 30 || !fp.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: i128 = if ip_abs.is_empty() { 0 } else { ip_abs.parse().map_err(|_| bad())? };
        let frac: i128 = fp.parse().map_err(|_| bad())?;
        let den = 10i128.checked_pow(fp.len() as u32).ok_or_else(bad)?;
        let mag = whole.checked_mul(den).and_then(|w| w.checked_add(frac)).ok_or_else(bad)?;
        return Ok(q(if neg { -mag } else { mag }, den));
    }
    let n: i128 = s.parse().map_err(|_| bad())?;
    Ok(qi(n))
}

/// Formats as `p/q` (or `p` for integers).
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Exact rational value of a finite float, if it fits in `i128`.
pub fn from_f64_exact(x: f64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    if x == 0.0 {
        return Some(zero());
    }
    let bits = x.to_bits();
    let neg = bits >> 63 == 1;
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut m, mut e) = if exp == 0 { (frac as i128, -1074) } else { ((frac | (1 << 52)) as i128, exp - 1075) };
    while m & 1 == 0 && e < 0 {
        m >>= 1;
        e += 1;
    }
    let m = if neg { -m } else { m };
    if e >= 0 {
        let scale = 1i128.checked_shl(e as u32).filter(|_| e < 126)?;
        Some(qi(m.checked_mul(scale)?))
    } else if -e < 127 {
        Some(q(m, 1i128 << (-e)))
    } else {
        None
    }
}

/// Best rational approximation with denominator at most `max_den`
/// (continued-fraction convergents).
pub fn approximate(x: f64, max_den: i128) -> Q {
    assert!(x.is_finite(), "cannot approximate a non-finite value");
    let exact = match from_f64_exact(x) {
        Some(r) => r,
        None => return qi(x.round() as i128),
    };
    if *exact.denom() <= max_den {
        return exact;
    }
    // continued fraction of the exact binary value
    let (mut num, mut den) = (*exact.numer(), *exact.denom());
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    while den != 0 {
        let a = num.div_euclid(den);
        let (Some(p2), Some(q2)) = (
            a.checked_mul(p1).and_then(|v| v.checked_add(p0)),
            a.checked_mul(q1).and_then(|v| v.checked_add(q0)),
        ) else {
            break;
        };
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        (num, den) = (den, num.rem_euclid(den));
    }
    q(p1, q1)
}

/// Least common multiple helper for iteration counts.
pub fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_q("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_q(" -2 ").unwrap(), qi(-2));
        assert_eq!(parse_q("0.125").unwrap(), q(1, 8));
        assert_eq!(parse_q("-1.5").unwrap(), q(-3, 2));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
    }

    #[test]
    fn golden_mean_convergent() {
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let r = approximate(phi, MAX_APPROX_DENOM);
        assert!(*r.denom() <= MAX_APPROX_DENOM);
        assert!((to_f64(&r) - phi).abs() < 1e-15);
        assert_eq!(approximate(0.375, 1000), q(3, 8));
        assert_eq!(approximate(std::f64::consts::PI, 200), q(355, 113));
    }

    #[test]
    fn checked_overflow_is_reported() {
        let big = qi(i128::MAX / 2);
        assert!(matches!(mul(&big, &qi(4)), Err(Error::Overflow)));
    }
}
