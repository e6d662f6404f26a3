//! Heights of toric cycles by convex geometry: exact mixed volumes and mixed
//! integrals, Ronkin roof functions per place, cyclotomic Weil heights,
//! resultant heights and Mahler-measure estimates, with seeded quadrature
//! where integrals are genuinely transcendental.

pub mod error;
pub mod rat;

pub mod lp;

pub mod hull;
pub mod mahler;
pub mod polytope;

pub mod laurent;

pub mod concave;
pub mod sampled;
pub mod quad;
pub mod resultants;
pub mod spoly;
pub mod toric;
pub mod ronkin;
pub mod cyclo;
pub mod dd;
pub mod heights;

pub use error::{Error, Result};

/// Parses a rational from a JSON value: `"p/q"` string, `[num, den]` pair, or
/// a plain integer.
pub fn json_rat(v: &serde_json::Value) -> Result<rat::Rat> {
    use num_bigint::BigInt;
    match v {
        serde_json::Value::String(s) => rat::parse_rat(s),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(rat::Rat::from_integer(BigInt::from(i)))
            } else {
                Err(Error::Parse(format!("non-integer numeric rational {n}")))
            }
        }
        serde_json::Value::Array(a) if a.len() == 2 => {
            let num = a[0]
                .as_i64()
                .ok_or_else(|| Error::Parse("bad [num,den] pair".into()))?;
            let den = a[1]
                .as_i64()
                .ok_or_else(|| Error::Parse("bad [num,den] pair".into()))?;
            if den == 0 {
                return Err(Error::Parse("zero denominator".into()));
            }
            Ok(rat::Rat::new(BigInt::from(num), BigInt::from(den)))
        }
        _ => Err(Error::Parse(format!("cannot read rational from {v}"))),
    }
}
