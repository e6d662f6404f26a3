//! Laurent polynomials with exact rational coefficients, keyed by integer
//! exponent vectors.

use crate::error::{Error, Result};
use crate::rat::{format_rat, Rat};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentPolynomial {
    n_vars: usize,
    terms: BTreeMap<Vec<i64>, Rat>,
}

impl LaurentPolynomial {
    /// Builds a Laurent polynomial; zero coefficients are dropped and the
    /// result must be nonzero.
    pub fn new(n_vars: usize, terms: impl IntoIterator<Item = (Vec<i64>, Rat)>) -> Result<Self> {
        let mut map: BTreeMap<Vec<i64>, Rat> = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != n_vars {
                return Err(Error::DimensionMismatch(format!(
                    "exponent vector of length {}, expected {n_vars}",
                    e.len()
                )));
            }
            if c.is_zero() {
                continue;
            }
            let entry = map.entry(e).or_insert_with(Rat::zero);
            *entry += c;
            if entry.is_zero() {
                // removed below
            }
        }
        map.retain(|_, c| !c.is_zero());
        if map.is_empty() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(LaurentPolynomial { n_vars, terms: map })
    }

    pub fn from_ints(n_vars: usize, terms: &[(&[i64], i64)]) -> Self {
        Self::new(
            n_vars,
            terms
                .iter()
                .map(|(e, c)| (e.to_vec(), Rat::from_integer((*c).into()))),
        )
        .expect("nonzero")
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i64>, Rat> {
        &self.terms
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// Applies a lattice map γ: ℤⁿ → ℤᵐ to the exponents, i.e. the ring map
    /// x^e ↦ x^{γe}. Colliding images have their coefficients added; full
    /// cancellation yields an error.
    pub fn monomial_substitution(&self, gamma: &[Vec<i64>]) -> Result<LaurentPolynomial> {
        let m = gamma.len();
        for row in gamma {
            if row.len() != self.n_vars {
                return Err(Error::DimensionMismatch(
                    "lattice map has wrong source dimension".into(),
                ));
            }
        }
        LaurentPolynomial::new(
            m,
            self.terms.iter().map(|(e, c)| {
                let img: Vec<i64> = gamma
                    .iter()
                    .map(|row| row.iter().zip(e).map(|(a, b)| a * b).sum())
                    .collect();
                (img, c.clone())
            }),
        )
    }

    /// All primes dividing a numerator or denominator of some coefficient.
    pub fn coefficient_primes(&self) -> Vec<u64> {
        use num_bigint::BigInt;
        use num_traits::Signed;
        let mut primes = std::collections::BTreeSet::new();
        let mut push_factors = |n: &BigInt| {
            let mut n = n.abs();
            let mut p = BigInt::from(2u8);
            while &p * &p <= n {
                if (&n % &p).is_zero() {
                    primes.insert(u64::try_from(&p).expect("coefficient primes fit u64"));
                    while (&n % &p).is_zero() {
                        n /= &p;
                    }
                }
                p += 1;
            }
            if n > BigInt::from(1u8) {
                primes.insert(u64::try_from(&n).expect("coefficient primes fit u64"));
            }
        };
        for c in self.terms.values() {
            push_factors(c.numer());
            push_factors(c.denom());
        }
        primes.into_iter().collect()
    }

    /// Evaluates |f| at the complex point with |x_j| = e^{−u_j} and angles
    /// `phases` (radians).
    pub fn eval_abs_on_fiber(&self, u: &[f64], phases: &[f64]) -> f64 {
        let mut re = 0.0f64;
        let mut im = 0.0f64;
        for (e, c) in &self.terms {
            let mut logmod = 0.0;
            let mut arg = 0.0;
            for j in 0..self.n_vars {
                let ej = e[j] as f64;
                logmod += -u[j] * ej;
                arg += phases[j] * ej;
            }
            let m = crate::rat::rat_to_f64(c) * logmod.exp();
            re += m * arg.cos();
            im += m * arg.sin();
        }
        (re * re + im * im).sqrt()
    }
}

// ---------------------------------------------------------------------------
// JSON schema: {"vars": n, "terms": [{"exp": […], "coef": "p/q"}]}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct LaurentJson {
    pub vars: usize,
    pub terms: Vec<LaurentTermJson>,
}

#[derive(Serialize, Deserialize)]
pub struct LaurentTermJson {
    pub exp: Vec<i64>,
    pub coef: serde_json::Value,
}

impl LaurentPolynomial {
    pub fn to_json(&self) -> LaurentJson {
        LaurentJson {
            vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| LaurentTermJson {
                    exp: e.clone(),
                    coef: serde_json::Value::String(format_rat(c)),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &LaurentJson) -> Result<LaurentPolynomial> {
        LaurentPolynomial::new(
            j.vars,
            j.terms
                .iter()
                .map(|t| Ok((t.exp.clone(), crate::json_rat(&t.coef)?)))
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::newton_polytope;
    use crate::polytope::Polytope;
    use crate::rat::rat_i;

    #[test]
    fn newton_polytopes() {
        // x + y + 1
        let f = LaurentPolynomial::from_ints(2, &[(&[1, 0], 1), (&[0, 1], 1), (&[0, 0], 1)]);
        assert_eq!(
            newton_polytope(&f),
            Polytope::from_ints(2, &[&[0, 0], &[1, 0], &[0, 1]])
        );
        // 5 x² y⁻¹
        let g = LaurentPolynomial::from_ints(2, &[(&[2, -1], 5)]);
        assert_eq!(newton_polytope(&g), Polytope::from_ints(2, &[&[2, -1]]));
        // 1 + 2x
        let h = LaurentPolynomial::from_ints(1, &[(&[0], 1), (&[1], 2)]);
        assert_eq!(newton_polytope(&h), Polytope::from_ints(1, &[&[0], &[1]]));
    }

    #[test]
    fn zero_rejected() {
        assert!(LaurentPolynomial::new(1, vec![(vec![0], rat_i(0))]).is_err());
        assert!(LaurentPolynomial::new(
            1,
            vec![(vec![0], rat_i(1)), (vec![0], rat_i(-1))]
        )
        .is_err());
    }

    #[test]
    fn substitution_diagonal() {
        // m ↦ (m, m): 1 + 2x becomes 1 + 2 x₁x₂
        let f = LaurentPolynomial::from_ints(1, &[(&[0], 1), (&[1], 2)]);
        let g = f.monomial_substitution(&[vec![1], vec![1]]).unwrap();
        assert_eq!(
            g,
            LaurentPolynomial::from_ints(2, &[(&[0, 0], 1), (&[1, 1], 2)])
        );
    }

    #[test]
    fn coefficient_primes_found() {
        let f = LaurentPolynomial::new(
            1,
            vec![(vec![0], crate::rat::rat(3, 10)), (vec![1], rat_i(7))],
        )
        .unwrap();
        assert_eq!(f.coefficient_primes(), vec![2, 3, 5, 7]);
    }
}
