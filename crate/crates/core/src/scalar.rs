//! Scalar arithmetic used by every matrix in the crate.
//!
//! Two modes share one interface: `f64` for general data and exact
//! rationals for constructions whose entries stay in Q. `Scalar::EXACT`
//! tells reporting code which mode produced a value; `try_sqrt` is the
//! only fallible operation (an exact square root may not exist).

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{LatticeError, Result};

pub type Rat = BigRational;

pub trait Scalar:
    Clone + PartialEq + PartialOrd + Debug + Display + Signed + Send + Sync + 'static
{
    /// True when arithmetic in this scalar is exact (no rounding).
    const EXACT: bool;

    fn from_ratio(r: &Rat) -> Self;

    /// Exact image of a finite float (floats are dyadic rationals).
    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// Exact division by two (exact in both modes: the float mantissa is
    /// untouched, only the exponent moves).
    fn halve(&self) -> Self;

    /// Square root, `None` when none exists in this scalar (negative
    /// input, or a rational that is not a perfect square).
    fn try_sqrt(&self) -> Option<Self>;

    /// Cell text for CSV dumps; must round-trip through `parse_token`.
    fn to_token(&self) -> String;

    fn parse_token(s: &str) -> Result<Self>;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_ratio(r: &Rat) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn halve(&self) -> Self {
        self * 0.5
    }

    fn try_sqrt(&self) -> Option<Self> {
        if *self < 0.0 {
            None
        } else {
            Some(self.sqrt())
        }
    }

    fn to_token(&self) -> String {
        // 17 significant digits: enough for exact f64 round-trips.
        format!("{:.16e}", self)
    }

    fn parse_token(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: f64 = n.trim().parse().map_err(|_| bad_parse(s, "numerator"))?;
            let d: f64 = d.trim().parse().map_err(|_| bad_parse(s, "denominator"))?;
            if d == 0.0 {
                return Err(bad_parse(s, "zero denominator"));
            }
            return Ok(n / d);
        }
        t.parse().map_err(|_| bad_parse(s, "not a float"))
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn from_ratio(r: &Rat) -> Self {
        r.clone()
    }

    fn from_f64(x: f64) -> Self {
        Rat::from_float(x).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn halve(&self) -> Self {
        self / Rat::from_integer(BigInt::from(2))
    }

    fn try_sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let sn = self.numer().sqrt();
        let sd = self.denom().sqrt();
        if &(&sn * &sn) == self.numer() && &(&sd * &sd) == self.denom() {
            Some(Rat::new(sn, sd))
        } else {
            None
        }
    }

    fn to_token(&self) -> String {
        self.to_string()
    }

    fn parse_token(s: &str) -> Result<Self> {
        parse_ratio(s)
    }
}

fn bad_parse(input: &str, reason: &'static str) -> LatticeError {
    LatticeError::Parse {
        input: input.to_string(),
        reason,
    }
}

/// Parses "3/4", "-2", "0.25", "2.5e-3" into an exact rational. Decimal
/// text maps to the exact decimal fraction, not the nearest float.
pub fn parse_ratio(s: &str) -> Result<Rat> {
    let t = s.trim();
    if t.is_empty() {
        return Err(bad_parse(s, "empty"));
    }
    if let Some((n, d)) = t.split_once('/') {
        let num = BigInt::from_str(n.trim()).map_err(|_| bad_parse(s, "numerator"))?;
        let den = BigInt::from_str(d.trim()).map_err(|_| bad_parse(s, "denominator"))?;
        if den.is_zero() {
            return Err(bad_parse(s, "zero denominator"));
        }
        return Ok(Rat::new(num, den));
    }

    let (mantissa, exp) = match t.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i32 = e.parse().map_err(|_| bad_parse(s, "exponent"))?;
            (m, exp)
        }
        None => (t, 0),
    };

    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (Sign::Minus, rest),
        None => (Sign::Plus, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad_parse(s, "no digits"));
    }
    let mut all = String::with_capacity(int_part.len() + frac_part.len());
    all.push_str(int_part);
    all.push_str(frac_part);
    let unsigned = BigInt::from_str(if all.is_empty() { "0" } else { &all })
        .map_err(|_| bad_parse(s, "mantissa"))?;
    if unsigned.is_negative() {
        return Err(bad_parse(s, "malformed sign"));
    }
    let mantissa_int = match sign {
        Sign::Minus => -unsigned,
        _ => unsigned,
    };

    let shift = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let scale = ten.pow(shift.unsigned_abs());
    Ok(if shift >= 0 {
        Rat::from_integer(mantissa_int * scale)
    } else {
        Rat::new(mantissa_int, scale)
    })
}

/// Convenience: exact rational 2^-k.
pub fn dyadic_weight(k: usize) -> Rat {
    Rat::new(BigInt::one(), BigInt::from(2).pow(k as u32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_ratio("3/4").unwrap(), Rat::new(3.into(), 4.into()));
        assert_eq!(parse_ratio("-1/2").unwrap(), Rat::new((-1).into(), 2.into()));
        assert_eq!(parse_ratio("0.25").unwrap(), Rat::new(1.into(), 4.into()));
        assert_eq!(parse_ratio("2.5e-3").unwrap(), Rat::new(1.into(), 400.into()));
        assert_eq!(parse_ratio("1e2").unwrap(), Rat::from_integer(100.into()));
        assert_eq!(parse_ratio("-0.5").unwrap(), Rat::new((-1).into(), 2.into()));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("abc").is_err());
    }

    #[test]
    fn exact_sqrt_only_for_perfect_squares() {
        let r = parse_ratio("9/16").unwrap();
        assert_eq!(r.try_sqrt().unwrap(), parse_ratio("3/4").unwrap());
        assert!(parse_ratio("1/2").unwrap().try_sqrt().is_none());
        assert!(parse_ratio("-4").unwrap().try_sqrt().is_none());
        assert_eq!(Rat::zero().try_sqrt().unwrap(), Rat::zero());
    }

    #[test]
    fn float_tokens_round_trip() {
        for &x in &[0.0, 1.0, -1.5, 0.1, 1.0 / 3.0, 2.0_f64.powi(-40), 1e300] {
            let t = x.to_token();
            assert_eq!(f64::parse_token(&t).unwrap(), x, "token {t}");
        }
        assert_eq!(f64::parse_token("1/2").unwrap(), 0.5);
    }

    #[test]
    fn rational_tokens_round_trip() {
        for s in ["0", "5", "-7/3", "1/1048576"] {
            let r = parse_ratio(s).unwrap();
            assert_eq!(Rat::parse_token(&r.to_token()).unwrap(), r);
        }
    }

    #[test]
    fn dyadic_weights_are_powers_of_two() {
        assert_eq!(dyadic_weight(1), parse_ratio("1/2").unwrap());
        assert_eq!(dyadic_weight(3), parse_ratio("1/8").unwrap());
    }

    #[test]
    fn halving_is_exact() {
        assert_eq!(1.0_f64.halve(), 0.5);
        assert_eq!(parse_ratio("3/4").unwrap().halve(), parse_ratio("3/8").unwrap());
    }
}
