//! Arithmetic in the cyclotomic fields ℚ(ζ_N): exact ring/field operations
//! modulo the N-th cyclotomic polynomial, conductor embeddings and complex
//! embeddings at both f64 and double-double precision.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::rat::{rat_to_f64, Rat};
use num_bigint::BigInt;
use num_traits::{One, Zero};

pub fn euler_phi(n: u64) -> u64 {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

pub fn prime_factors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            out.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Integer coefficients of the N-th cyclotomic polynomial, low degree first.
pub fn cyclotomic_poly(n: u64) -> Vec<BigInt> {
    // Φ_N = (x^N − 1) / ∏_{d|N, d<N} Φ_d, by exact polynomial division.
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = -BigInt::one();
    num[n as usize] = BigInt::one();
    let mut divisors: Vec<u64> = (1..n).filter(|d| n % d == 0).collect();
    divisors.sort_unstable();
    let mut quotient = num;
    for d in divisors {
        let phi_d = cyclotomic_poly(d);
        quotient = poly_div_exact(&quotient, &phi_d);
    }
    quotient
}

/// Exact division of integer polynomials (panics if not divisible; used only
/// on cyclotomic factors).
fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dn = num.len() - 1;
    let dd = den.len() - 1;
    assert!(dn >= dd);
    let mut rem: Vec<BigInt> = num.to_vec();
    let mut q = vec![BigInt::zero(); dn - dd + 1];
    let lc = &den[dd];
    for k in (0..=dn - dd).rev() {
        let c = &rem[dd + k] / lc;
        if !c.is_zero() {
            for j in 0..=dd {
                let t = &c * &den[j];
                rem[j + k] -= t;
            }
        }
        q[k] = c;
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()), "non-exact division");
    q
}

/// An element of ℚ(ζ_N): rational coefficients of 1, ζ, …, ζ^{φ(N)−1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cyclotomic {
    conductor: u64,
    coeffs: Vec<Rat>,
}

impl Cyclotomic {
    pub fn new(conductor: u64, mut coeffs: Vec<Rat>) -> Result<Self> {
        if conductor == 0 {
            return Err(Error::Invalid("conductor must be ≥ 1".into()));
        }
        let phi = euler_phi(conductor) as usize;
        if coeffs.len() > phi {
            coeffs = reduce_mod_cyclotomic(conductor, coeffs);
        }
        coeffs.resize(phi, Rat::zero());
        Ok(Cyclotomic { conductor, coeffs })
    }

    pub fn zero(conductor: u64) -> Self {
        Cyclotomic {
            conductor,
            coeffs: vec![Rat::zero(); euler_phi(conductor) as usize],
        }
    }

    pub fn one(conductor: u64) -> Self {
        let mut c = Cyclotomic::zero(conductor);
        c.coeffs[0] = Rat::one();
        c
    }

    pub fn from_rat(conductor: u64, r: Rat) -> Self {
        let mut c = Cyclotomic::zero(conductor);
        c.coeffs[0] = r;
        c
    }

    /// ζ_N^k.
    pub fn zeta_power(conductor: u64, k: i64) -> Self {
        let kk = k.rem_euclid(conductor as i64) as usize;
        let mut coeffs = vec![Rat::zero(); kk + 1];
        coeffs[kk] = Rat::one();
        Cyclotomic::new(conductor, coeffs).expect("valid conductor")
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> Option<&Rat> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    pub fn add(&self, other: &Cyclotomic) -> Result<Cyclotomic> {
        let (a, b) = same_conductor(self, other)?;
        Ok(Cyclotomic {
            conductor: a.conductor,
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| x + y)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Cyclotomic) -> Result<Cyclotomic> {
        let (a, b) = same_conductor(self, other)?;
        Ok(Cyclotomic {
            conductor: a.conductor,
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| x - y)
                .collect(),
        })
    }

    pub fn neg(&self) -> Cyclotomic {
        Cyclotomic {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|x| -x).collect(),
        }
    }

    pub fn mul(&self, other: &Cyclotomic) -> Result<Cyclotomic> {
        let (a, b) = same_conductor(self, other)?;
        let mut prod = vec![Rat::zero(); a.coeffs.len() + b.coeffs.len()];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                prod[i + j] += x * y;
            }
        }
        Ok(Cyclotomic {
            conductor: a.conductor,
            coeffs: {
                let mut c = reduce_mod_cyclotomic(a.conductor, prod);
                c.resize(euler_phi(a.conductor) as usize, Rat::zero());
                c
            },
        })
    }

    pub fn scale(&self, r: &Rat) -> Cyclotomic {
        Cyclotomic {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|x| x * r).collect(),
        }
    }

    /// Multiplicative inverse by the extended Euclidean algorithm in ℚ[x]
    /// modulo Φ_N.
    pub fn inverse(&self) -> Result<Cyclotomic> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let phi: Vec<Rat> = cyclotomic_poly(self.conductor)
            .into_iter()
            .map(Rat::from_integer)
            .collect();
        // extended gcd(self, Φ) = 1 in ℚ[x]
        let (g, s) = poly_ext_gcd(&self.coeffs, &phi);
        // g is a nonzero constant for a field element
        let g0 = g
            .iter()
            .rev()
            .find(|c| !c.is_zero())
            .ok_or(Error::DivisionByZero)?;
        if g.iter().skip(1).any(|c| !c.is_zero()) {
            // cannot happen in a field; guards internal bugs
            return Err(Error::Invalid("non-invertible cyclotomic element".into()));
        }
        let inv_coeffs: Vec<Rat> = s.iter().map(|c| c / g0).collect();
        Cyclotomic::new(self.conductor, inv_coeffs)
    }

    pub fn div(&self, other: &Cyclotomic) -> Result<Cyclotomic> {
        let (a, b) = same_conductor(self, other)?;
        a.mul(&b.inverse()?)
    }

    /// Re-expresses the element in the field of conductor `m` (requires
    /// N | m): ζ_N = ζ_m^{m/N}.
    pub fn embed(&self, m: u64) -> Result<Cyclotomic> {
        if m == self.conductor {
            return Ok(self.clone());
        }
        if m % self.conductor != 0 {
            return Err(Error::ConductorMismatch(self.conductor, m));
        }
        let step = (m / self.conductor) as usize;
        let mut coeffs = vec![Rat::zero(); self.coeffs.len() * step + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                coeffs[j * step] += c;
            }
        }
        Cyclotomic::new(m, coeffs)
    }

    /// σ_k(x) = x(ζ^k) as a complex number, f64 precision.
    pub fn embedding_f64(&self, k: u64) -> (f64, f64) {
        let n = self.conductor;
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cf = rat_to_f64(c);
            let ang = 2.0 * std::f64::consts::PI * ((j as u64 * k) % n) as f64 / n as f64;
            re += cf * ang.cos();
            im += cf * ang.sin();
        }
        (re, im)
    }

    /// σ_k(x) at double-double precision.
    pub fn embedding_dd(&self, k: u64) -> (Dd, Dd) {
        let n = self.conductor as i64;
        let (mut re, mut im) = (Dd::zero(), Dd::zero());
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let cf = dd_from_rat(c);
            let num = (j as i64 * k as i64) % n;
            let (s, co) = Dd::sincos_2pi_frac(num, n);
            re = re.add(cf.mul(co));
            im = im.add(cf.mul(s));
        }
        (re, im)
    }

    /// Denominator lcm across coefficients.
    pub fn denom_lcm(&self) -> BigInt {
        let mut l = BigInt::one();
        for c in &self.coeffs {
            l = num_integer::lcm(l, c.denom().clone());
        }
        l
    }

    /// Integer coefficient vector (requires an integral element).
    pub fn integer_coeffs(&self) -> Option<Vec<BigInt>> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            if !c.denom().is_one() {
                return None;
            }
            out.push(c.numer().clone());
        }
        Some(out)
    }
}

pub fn dd_from_rat(r: &Rat) -> Dd {
    let hi = rat_to_f64(r);
    let rest = r - crate::rat::rat_from_f64(hi);
    Dd {
        hi,
        lo: rat_to_f64(&rest),
    }
}

fn same_conductor<'a>(
    a: &'a Cyclotomic,
    b: &'a Cyclotomic,
) -> Result<(Cyclotomic, Cyclotomic)> {
    if a.conductor == b.conductor {
        return Ok((a.clone(), b.clone()));
    }
    let m = num_integer::lcm(a.conductor, b.conductor);
    Ok((a.embed(m)?, b.embed(m)?))
}

/// Reduces a coefficient vector modulo Φ_N (degree < φ(N) afterwards).
fn reduce_mod_cyclotomic(n: u64, mut coeffs: Vec<Rat>) -> Vec<Rat> {
    let phi: Vec<BigInt> = cyclotomic_poly(n);
    let deg = phi.len() - 1;
    while coeffs.len() > deg {
        let k = coeffs.len() - 1;
        let lead = coeffs[k].clone();
        if !lead.is_zero() {
            // x^k ≡ −(Φ − x^deg)·x^{k−deg} (Φ monic)
            for j in 0..deg {
                let t = lead.clone() * Rat::from_integer(phi[j].clone());
                coeffs[k - deg + j] -= t;
            }
        }
        coeffs.pop();
    }
    coeffs
}

/// Extended gcd in ℚ[x]: returns (g, s) with s·a ≡ g (mod b).
fn poly_ext_gcd(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut r0: Vec<Rat> = trim(a.to_vec());
    let mut r1: Vec<Rat> = trim(b.to_vec());
    let mut s0 = vec![Rat::one()];
    let mut s1: Vec<Rat> = vec![];
    while !r1.is_empty() {
        let (q, r) = poly_div_rem(&r0, &r1);
        let s = poly_sub(&s0, &poly_mul(&q, &s1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    (r0, s0)
}

fn trim(mut v: Vec<Rat>) -> Vec<Rat> {
    while v.last().map_or(false, |c| c.is_zero()) {
        v.pop();
    }
    v
}

fn poly_div_rem(a: &[Rat], b: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    let lc = &b[db];
    if rem.len() < b.len() {
        return (vec![], trim(rem));
    }
    let mut q = vec![Rat::zero(); rem.len() - db];
    for k in (0..q.len()).rev() {
        let c = rem[db + k].clone() / lc;
        if !c.is_zero() {
            for j in 0..=db {
                let t = c.clone() * &b[j];
                rem[j + k] -= t;
            }
        }
        q[k] = c;
    }
    (trim(q), trim(rem))
}

fn poly_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Rat::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

fn poly_sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut out = a.to_vec();
    out.resize(out.len().max(b.len()), Rat::zero());
    for (j, y) in b.iter().enumerate() {
        out[j] -= y;
    }
    trim(out)
}

/// The units k coprime to N, i.e. the embedding indices.
pub fn coprime_residues(n: u64) -> Vec<u64> {
    if n == 1 {
        return vec![0];
    }
    (1..n).filter(|k| num_integer::gcd(*k, n) == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i};

    #[test]
    fn phi_and_cyclotomics() {
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(8), 4);
        assert_eq!(euler_phi(24), 8);
        assert_eq!(euler_phi(1201), 1200);
        // Φ_1 = x − 1, Φ_4 = x² + 1, Φ_6 = x² − x + 1
        assert_eq!(cyclotomic_poly(1), vec![BigInt::from(-1), BigInt::from(1)]);
        assert_eq!(
            cyclotomic_poly(4),
            vec![BigInt::from(1), BigInt::from(0), BigInt::from(1)]
        );
        assert_eq!(
            cyclotomic_poly(6),
            vec![BigInt::from(1), BigInt::from(-1), BigInt::from(1)]
        );
        // Φ_105 has a −2 coefficient (degree 7 term)
        let c105 = cyclotomic_poly(105);
        assert_eq!(c105[7], BigInt::from(-2));
    }

    #[test]
    fn zeta4_squared_is_minus_one() {
        let z = Cyclotomic::zeta_power(4, 1);
        let z2 = z.mul(&z).unwrap();
        assert_eq!(z2, Cyclotomic::from_rat(4, rat_i(-1)));
    }

    #[test]
    fn zeta3_relation() {
        // ζ₃ + ζ₃² = −1
        let z = Cyclotomic::zeta_power(3, 1);
        let z2 = Cyclotomic::zeta_power(3, 2);
        let s = z.add(&z2).unwrap();
        assert_eq!(s, Cyclotomic::from_rat(3, rat_i(-1)));
    }

    #[test]
    fn inverse_roundtrip() {
        // (1+ζ₅)⁻¹ · (1+ζ₅) = 1
        let x = Cyclotomic::one(5)
            .add(&Cyclotomic::zeta_power(5, 1))
            .unwrap();
        let prod = x.inverse().unwrap().mul(&x).unwrap();
        assert_eq!(prod, Cyclotomic::one(5));
        assert!(Cyclotomic::zero(5).inverse().is_err());
    }

    #[test]
    fn conductor_embedding() {
        // ζ₃ in ℚ(ζ₁₂): ζ₁₂⁴; check by multiplying out ζ₃³ = 1
        let z3 = Cyclotomic::zeta_power(3, 1).embed(12).unwrap();
        let cube = z3.mul(&z3).unwrap().mul(&z3).unwrap();
        assert_eq!(cube, Cyclotomic::one(12));
        // mixed-conductor addition
        let a = Cyclotomic::zeta_power(3, 1);
        let b = Cyclotomic::zeta_power(4, 1);
        let s = a.add(&b).unwrap();
        assert_eq!(s.conductor(), 12);
    }

    #[test]
    fn embeddings_unit_modulus() {
        let z = Cyclotomic::zeta_power(7, 3);
        for k in coprime_residues(7) {
            let (re, im) = z.embedding_f64(k);
            assert!((re * re + im * im - 1.0).abs() < 1e-12);
            let (red, imd) = z.embedding_dd(k);
            let m2 = red.mul(red).add(imd.mul(imd)).to_f64();
            assert!((m2 - 1.0).abs() < 1e-28);
        }
    }

    #[test]
    fn embedding_respects_arithmetic() {
        let x = Cyclotomic::new(5, vec![rat_i(1), rat(1, 2), rat_i(0), rat_i(-2)]).unwrap();
        let y = Cyclotomic::zeta_power(5, 2)
            .add(&Cyclotomic::from_rat(5, rat_i(3)))
            .unwrap();
        let prod = x.mul(&y).unwrap();
        for k in coprime_residues(5) {
            let (xr, xi) = x.embedding_f64(k);
            let (yr, yi) = y.embedding_f64(k);
            let (pr, pi) = prod.embedding_f64(k);
            assert!((pr - (xr * yr - xi * yi)).abs() < 1e-10);
            assert!((pi - (xr * yi + xi * yr)).abs() < 1e-10);
        }
    }
}
