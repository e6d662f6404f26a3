//! Exact rational scalars and vectors.
//!
//! Everything geometric in this crate runs on `Rat` (arbitrary-precision
//! rationals). Reals only appear at the quadrature boundary and in reports.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

use crate::error::Error;

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"`, or a decimal string like `"-1.25"`.
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let sign = if int.trim_start().starts_with('-') { -1 } else { 1 };
        let i: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse()
                .map_err(|_| Error::Parse(format!("bad decimal {s:?}")))?
        };
        let fdigits = frac.len() as u32;
        let f: BigInt = if frac.is_empty() {
            BigInt::zero()
        } else {
            frac.parse()
                .map_err(|_| Error::Parse(format!("bad decimal {s:?}")))?
        };
        let den = BigInt::from(10u8).pow(fdigits);
        return Ok(Rat::new(i * &den + BigInt::from(sign) * f, den));
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    Ok(Rat::from_integer(n))
}

/// Canonical `"p/q"` form; integers print without the denominator.
pub fn format_rat(r: &Rat) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // out of f64 range; fall back through the sign
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact rational with the same value as the given finite float.
pub fn rat_from_f64(x: f64) -> Rat {
    Rat::from_float(x).expect("finite float")
}

/// A point of ℚⁿ. Used for polytope vertices, dual slopes and lattice data.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QVec(pub Vec<Rat>);

impl QVec {
    pub fn zero(dim: usize) -> Self {
        QVec(vec![Rat::zero(); dim])
    }

    pub fn from_ints(v: &[i64]) -> Self {
        QVec(v.iter().map(|&x| rat_i(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &QVec) -> Rat {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a * b)
            .fold(Rat::zero(), |acc, x| acc + x)
    }

    pub fn add(&self, other: &QVec) -> QVec {
        debug_assert_eq!(self.dim(), other.dim());
        QVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &QVec) -> QVec {
        debug_assert_eq!(self.dim(), other.dim());
        QVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: &Rat) -> QVec {
        QVec(self.0.iter().map(|a| a * c).collect())
    }

    pub fn neg(&self) -> QVec {
        QVec(self.0.iter().map(|a| -a).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|a| a.is_zero())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rat_to_f64).collect()
    }

    /// Lexicographic comparison; the canonical vertex order everywhere.
    pub fn lex_cmp(&self, other: &QVec) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.0.len().cmp(&other.0.len())
    }
}

/// Formats a real with 12 significant digits; reports use this everywhere so
/// identical runs produce identical bytes.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let s = format!("{:.11e}", x);
    // trim trailing zeros in the mantissa, keep the exponent
    if let Some((mant, exp)) = s.split_once('e') {
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        format!("{mant}e{exp}")
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-7").unwrap(), rat_i(-7));
        assert_eq!(parse_rat("1.25").unwrap(), rat(5, 4));
        assert_eq!(parse_rat("-0.5").unwrap(), rat(-1, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
    }

    #[test]
    fn format_roundtrip() {
        for s in ["3/4", "-7", "22/7"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
        }
    }

    #[test]
    fn real_format_deterministic() {
        assert_eq!(format_real(0.5), "5e-1");
        assert_eq!(format_real(0.0), "0");
        let a = format_real(std::f64::consts::LN_2);
        assert_eq!(a, format_real(2.0_f64.ln()));
    }

    #[test]
    fn lex_order() {
        let a = QVec::from_ints(&[0, 1]);
        let b = QVec::from_ints(&[1, 0]);
        assert_eq!(a.lex_cmp(&b), Ordering::Less);
    }
}
