//! Mahler measures of complex polynomials: the torus measure, Fubini–Study
//! sphere and product-of-spheres variants, exact univariate evaluation by
//! Jensen's formula, polydisc sup norms, and the printed comparison bounds
//! as batch validators.

use crate::error::{Error, Result};
use crate::quad::{mc_mean, qmc_mean, sphere_point, sub_rng, Estimate, QuadratureConfig};
use crate::rat::{rat_to_f64, Rat};
use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A complex rational coefficient (re, im).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CRat {
    pub re: Rat,
    pub im: Rat,
}

impl CRat {
    pub fn real(re: Rat) -> CRat {
        CRat {
            re,
            im: Rat::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// |c|² as an exact rational.
    pub fn abs2(&self) -> Rat {
        self.re.clone() * &self.re + self.im.clone() * &self.im
    }

    pub fn abs_f64(&self) -> f64 {
        rat_to_f64(&self.abs2()).sqrt()
    }
}

/// A polynomial with exact complex-rational coefficients whose variables are
/// partitioned into groups (for the mixed sphere measures).
#[derive(Debug, Clone, PartialEq)]
pub struct PolyC {
    groups: Vec<usize>,
    terms: BTreeMap<Vec<u32>, CRat>,
}

impl PolyC {
    pub fn new(groups: Vec<usize>, terms: impl IntoIterator<Item = (Vec<u32>, CRat)>) -> Result<Self> {
        let n: usize = groups.iter().sum();
        let mut map = BTreeMap::new();
        for (e, c) in terms {
            if e.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "exponent length {} vs {} variables",
                    e.len(),
                    n
                )));
            }
            if c.is_zero() {
                continue;
            }
            map.insert(e, c);
        }
        if map.is_empty() {
            return Err(Error::ZeroPolynomial);
        }
        Ok(PolyC { groups, terms: map })
    }

    pub fn from_ints(groups: Vec<usize>, terms: &[(&[u32], i64)]) -> Self {
        PolyC::new(
            groups,
            terms
                .iter()
                .map(|(e, c)| (e.to_vec(), CRat::real(Rat::from_integer(BigInt::from(*c))))),
        )
        .expect("nonzero")
    }

    pub fn n_vars(&self) -> usize {
        self.groups.iter().sum()
    }

    pub fn groups(&self) -> &[usize] {
        &self.groups
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, CRat> {
        &self.terms
    }

    /// Degree in each group.
    pub fn group_degrees(&self) -> Vec<u32> {
        let mut degs = vec![0u32; self.groups.len()];
        for e in self.terms.keys() {
            let mut off = 0;
            for (gi, &size) in self.groups.iter().enumerate() {
                degs[gi] = degs[gi].max(e[off..off + size].iter().sum());
                off += size;
            }
        }
        degs
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// |P(z)| at a complex point given as interleaved (re, im).
    pub fn eval_abs(&self, z: &[f64]) -> f64 {
        let (mut sr, mut si) = (0.0f64, 0.0f64);
        for (e, c) in &self.terms {
            let (mut re, mut im) = (rat_to_f64(&c.re), rat_to_f64(&c.im));
            for (j, &ej) in e.iter().enumerate() {
                for _ in 0..ej {
                    let (zr, zi) = (z[2 * j], z[2 * j + 1]);
                    let nr = re * zr - im * zi;
                    im = re * zi + im * zr;
                    re = nr;
                }
            }
            sr += re;
            si += im;
        }
        (sr * sr + si * si).sqrt()
    }

    fn eval_abs_on_torus(&self, t: &[f64]) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let z: Vec<f64> = t
            .iter()
            .flat_map(|&x| {
                let a = two_pi * x;
                [a.cos(), a.sin()]
            })
            .collect();
        self.eval_abs(&z)
    }
}

/// Max |coefficient| (the norm ‖P‖ of the comparison bounds). The maximum is
/// selected by exact comparison of |c|².
pub fn norm_inf(p: &PolyC) -> f64 {
    let best = p
        .terms
        .values()
        .max_by(|a, b| a.abs2().cmp(&b.abs2()))
        .expect("nonzero polynomial");
    best.abs_f64()
}

/// Randomized-QMC estimate of the logarithmic Mahler measure
/// m(P) = ∫ log|P| over the unit torus.
pub fn mahler_torus(p: &PolyC, cfg: &QuadratureConfig) -> Result<Estimate> {
    let n = p.n_vars();
    qmc_mean(n, cfg, "mahler-torus", |t| {
        let a = p.eval_abs_on_torus(t);
        if a == 0.0 {
            None
        } else {
            Some(a.ln())
        }
    })
}

/// Exact univariate Mahler measure by Jensen's formula:
/// m(P) = log|λ| + Σ max(0, log|α_i|), with the roots computed numerically
/// (Durand–Kerner plus Newton polish) and a residual-based error estimate.
pub fn mahler_univariate_exact(p: &PolyC) -> Result<(f64, f64)> {
    if p.n_vars() != 1 {
        return Err(Error::DimensionMismatch(
            "mahler_univariate_exact needs one variable".into(),
        ));
    }
    let deg = p.total_degree() as usize;
    if deg == 0 {
        let c = p.terms.values().next().unwrap();
        return Ok((c.abs_f64().ln(), 1e-15));
    }
    let mut coeffs = vec![(0.0f64, 0.0f64); deg + 1];
    for (e, c) in &p.terms {
        coeffs[e[0] as usize] = (rat_to_f64(&c.re), rat_to_f64(&c.im));
    }
    let roots = durand_kerner(&coeffs);
    let lead = coeffs[deg];
    let lead_abs = (lead.0 * lead.0 + lead.1 * lead.1).sqrt();
    let mut m = lead_abs.ln();
    let mut err = 1e-14;
    for &(re, im) in &roots {
        let r = (re * re + im * im).sqrt();
        if r > 1.0 {
            m += r.ln();
        }
        // residual / derivative conditioning
        let res = eval_poly(&coeffs, (re, im));
        let dres = eval_poly_derivative(&coeffs, (re, im));
        let dnorm = (dres.0 * dres.0 + dres.1 * dres.1).sqrt().max(1e-30);
        let delta = (res.0 * res.0 + res.1 * res.1).sqrt() / dnorm;
        if r > 0.5 {
            err += delta / r.max(1.0);
        } else {
            err += delta;
        }
    }
    Ok((m, err))
}

fn eval_poly(c: &[(f64, f64)], z: (f64, f64)) -> (f64, f64) {
    let mut acc = (0.0f64, 0.0f64);
    for &(re, im) in c.iter().rev() {
        let nr = acc.0 * z.0 - acc.1 * z.1 + re;
        acc.1 = acc.0 * z.1 + acc.1 * z.0 + im;
        acc.0 = nr;
    }
    acc
}

fn eval_poly_derivative(c: &[(f64, f64)], z: (f64, f64)) -> (f64, f64) {
    let mut acc = (0.0f64, 0.0f64);
    for (k, &(re, im)) in c.iter().enumerate().rev().take(c.len() - 1) {
        let kr = k as f64;
        let nr = acc.0 * z.0 - acc.1 * z.1 + kr * re;
        acc.1 = acc.0 * z.1 + acc.1 * z.0 + kr * im;
        acc.0 = nr;
    }
    acc
}

fn durand_kerner(coeffs: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg];
    let ln2 = (lead.0 * lead.0 + lead.1 * lead.1).max(1e-300);
    // monic normalization
    let monic: Vec<(f64, f64)> = coeffs
        .iter()
        .map(|&(re, im)| {
            (
                (re * lead.0 + im * lead.1) / ln2,
                (im * lead.0 - re * lead.1) / ln2,
            )
        })
        .collect();
    let mut z: Vec<(f64, f64)> = (0..deg)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.7;
            (1.3 * ang.cos(), 1.3 * ang.sin())
        })
        .collect();
    for _ in 0..400 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let p = eval_poly(&monic, z[i]);
            let mut den = (1.0f64, 0.0f64);
            for j in 0..deg {
                if i != j {
                    let d = (z[i].0 - z[j].0, z[i].1 - z[j].1);
                    den = (den.0 * d.0 - den.1 * d.1, den.0 * d.1 + den.1 * d.0);
                }
            }
            let dn = (den.0 * den.0 + den.1 * den.1).max(1e-300);
            let q = ((p.0 * den.0 + p.1 * den.1) / dn, (p.1 * den.0 - p.0 * den.1) / dn);
            z[i] = (z[i].0 - q.0, z[i].1 - q.1);
            moved = moved.max((q.0 * q.0 + q.1 * q.1).sqrt());
        }
        if moved < 1e-14 {
            break;
        }
    }
    // Newton polish
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let p = eval_poly(&monic, *zi);
            let d = eval_poly_derivative(&monic, *zi);
            let dn = (d.0 * d.0 + d.1 * d.1).max(1e-300);
            let q = ((p.0 * d.0 + p.1 * d.1) / dn, (p.1 * d.0 - p.0 * d.1) / dn);
            *zi = (zi.0 - q.0, zi.1 - q.1);
        }
    }
    z
}

/// Monte Carlo over uniform unit spheres, one per group: the mixed
/// Fubini–Study Mahler measure (a single group of all variables gives the
/// plain sphere measure).
pub fn mahler_multisphere(p: &PolyC, cfg: &QuadratureConfig) -> Result<Estimate> {
    let sizes = p.groups.to_vec();
    mc_mean(
        cfg,
        "mahler-sphere",
        |rng| {
            let mut flat = Vec::new();
            let mut z = Vec::new();
            for &s in &sizes {
                sphere_point(rng, s, &mut z);
                flat.extend_from_slice(&z);
            }
            flat
        },
        |flat| {
            let a = p.eval_abs(flat);
            if a == 0.0 {
                None
            } else {
                Some(a.ln())
            }
        },
    )
}

/// Sphere Mahler measure m_{𝕊ₙ}: all variables on one unit sphere of ℂⁿ.
pub fn mahler_sphere(p: &PolyC, cfg: &QuadratureConfig) -> Result<Estimate> {
    let flat = PolyC {
        groups: vec![p.n_vars()],
        terms: p.terms.clone(),
    };
    mahler_multisphere(&flat, cfg)
}

/// Lower-biased estimate of S(P) = sup over the closed polydisc, by torus
/// sampling plus coordinate-wise golden-section ascent on the angles (the
/// maximum principle puts the sup on the distinguished boundary). Returned
/// with the printed enclosure ‖P‖ ≤ S(P) ≤ C(n+d, n)·‖P‖.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupEstimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn sup_polydisc(p: &PolyC, cfg: &QuadratureConfig) -> Result<SupEstimate> {
    cfg.validate()?;
    let n = p.n_vars();
    let mut rng = sub_rng(cfg.seed, "sup-polydisc", 0);
    let mut best = 0.0f64;
    let mut best_t = vec![0.0f64; n];
    let tries = (cfg.budget / 4).max(8);
    for _ in 0..tries {
        let t: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let v = p.eval_abs_on_torus(&t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    // include the all-ones corner (frequent maximizer for positive coeffs)
    let ones = vec![0.0f64; n];
    if p.eval_abs_on_torus(&ones) > best {
        best = p.eval_abs_on_torus(&ones);
        best_t = ones;
    }
    // coordinate-wise golden-section ascent
    let gr = 0.618_033_988_749_894_9_f64;
    for _ in 0..6 {
        for j in 0..n {
            let (mut a, mut b) = (best_t[j] - 0.25, best_t[j] + 0.25);
            for _ in 0..24 {
                let x1 = b - gr * (b - a);
                let x2 = a + gr * (b - a);
                let mut t1 = best_t.clone();
                t1[j] = x1.rem_euclid(1.0);
                let mut t2 = best_t.clone();
                t2[j] = x2.rem_euclid(1.0);
                if p.eval_abs_on_torus(&t1) < p.eval_abs_on_torus(&t2) {
                    a = x1;
                } else {
                    b = x2;
                }
            }
            let mid = (0.5 * (a + b)).rem_euclid(1.0);
            let mut tm = best_t.clone();
            tm[j] = mid;
            let v = p.eval_abs_on_torus(&tm);
            if v > best {
                best = v;
                best_t = tm;
            }
        }
    }
    let norm = norm_inf(p);
    let d = p.total_degree() as usize;
    let binom = crate::resultants::binomial(n + d, n);
    Ok(SupEstimate {
        value: best,
        lower: norm,
        upper: rat_to_f64(&Rat::from_integer(binom)) * norm,
    })
}

/// MC estimate of ∫|P|² over the torus against the exact Parseval value
/// Σ|a_k|²; reports the z-score.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParsevalReport {
    pub estimate: f64,
    pub std_err: f64,
    pub exact: f64,
    pub z_score: f64,
}

pub fn parseval_check(p: &PolyC, cfg: &QuadratureConfig) -> Result<ParsevalReport> {
    let exact: Rat = p
        .terms
        .values()
        .map(|c| c.abs2())
        .fold(Rat::zero(), |a, b| a + b);
    let exact = rat_to_f64(&exact);
    let est = qmc_mean(p.n_vars(), cfg, "parseval", |t| {
        let a = p.eval_abs_on_torus(t);
        Some(a * a)
    })?;
    let z = (est.value - exact) / est.std_err.max(1e-300);
    Ok(ParsevalReport {
        estimate: est.value,
        std_err: est.std_err,
        exact,
        z_score: z,
    })
}

// ---------------------------------------------------------------------------
// Bound suite
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundSuiteReport {
    pub polynomials: usize,
    pub coefficient_bound_violations: usize,
    pub torus_bound_violations: usize,
    pub sphere_bound_violations: usize,
    pub mixed_bound_violations: usize,
    /// Worst margins (bound − |gap|, negative = violation) per family.
    pub min_coefficient_margin: f64,
    pub min_torus_margin: f64,
    pub min_sphere_margin: f64,
    pub min_mixed_margin: f64,
}

fn multinomial(d: u32, parts: &[u32]) -> BigInt {
    let rest: u32 = d - parts.iter().sum::<u32>();
    let mut all: Vec<u32> = parts.to_vec();
    all.push(rest);
    let mut c = BigInt::from(1);
    let mut total = 0u32;
    for &p in &all {
        for i in 1..=p {
            total += 1;
            c = c * BigInt::from(total) / BigInt::from(i);
        }
    }
    c
}

/// Validates the appendix comparison bounds over a random integer-coefficient
/// corpus (coефficients in [−9,9], ≤ 3 groups of size ≤ 3, degrees ≤ 4):
/// the coefficient bound |a_k| ≤ C(d;k)·e^{m(P)}, the torus bound
/// |m − log‖P‖| ≤ d·log(n+1), the sphere bound with 2d, and the mixed bound
/// Σ d_i(log(m_i+1) + ½H_{m_i−1}); all with 3σ Monte Carlo margins.
pub fn bound_suite(corpus: usize, cfg: &QuadratureConfig) -> Result<BoundSuiteReport> {
    let mut rng = sub_rng(cfg.seed, "bound-suite", 1);
    let mut rep = BoundSuiteReport {
        polynomials: 0,
        coefficient_bound_violations: 0,
        torus_bound_violations: 0,
        sphere_bound_violations: 0,
        mixed_bound_violations: 0,
        min_coefficient_margin: f64::INFINITY,
        min_torus_margin: f64::INFINITY,
        min_sphere_margin: f64::INFINITY,
        min_mixed_margin: f64::INFINITY,
    };
    for i in 0..corpus {
        let n_groups = rng.gen_range(1usize..=3);
        let groups: Vec<usize> = (0..n_groups).map(|_| rng.gen_range(1usize..=3)).collect();
        let n: usize = groups.iter().sum();
        let max_deg = rng.gen_range(1u32..=4);
        let n_terms = rng.gen_range(2usize..=6);
        let mut terms = Vec::new();
        for _ in 0..n_terms {
            // random exponent of total degree ≤ max_deg per group
            let mut e = vec![0u32; n];
            let mut off = 0;
            for &size in &groups {
                let mut left = max_deg;
                for j in 0..size {
                    let v = rng.gen_range(0..=left);
                    e[off + j] = v;
                    left -= v;
                }
                off += size;
            }
            let c = rng.gen_range(-9i64..=9);
            if c != 0 {
                terms.push((e, CRat::real(Rat::from_integer(BigInt::from(c)))));
            }
        }
        let Ok(p) = PolyC::new(groups.clone(), terms) else {
            continue;
        };
        rep.polynomials += 1;
        let mut c = cfg.clone();
        c.seed = cfg.seed.wrapping_add(i as u64).wrapping_mul(0x9e3779b9);
        let log_norm = norm_inf(&p).ln();
        let nf = n as f64;
        let d = p.total_degree() as f64;
        let degs = p.group_degrees();

        let m = mahler_torus(&p, &c)?;
        // coefficient bound per group-multinomial product
        for (e, coeff) in p.terms() {
            let mut bound = Rat::from_integer(BigInt::from(1));
            let mut off = 0;
            for (gi, &size) in p.groups().iter().enumerate() {
                bound *= Rat::from_integer(multinomial(degs[gi], &e[off..off + size]));
                off += size;
            }
            let rhs = rat_to_f64(&bound).ln() + m.value + 3.0 * m.std_err;
            let margin = rhs - coeff.abs_f64().ln();
            rep.min_coefficient_margin = rep.min_coefficient_margin.min(margin);
            if margin < 0.0 {
                rep.coefficient_bound_violations += 1;
            }
        }
        // torus bound
        let gap = (m.value - log_norm).abs() - 3.0 * m.std_err;
        let margin = d * (nf + 1.0).ln() - gap;
        rep.min_torus_margin = rep.min_torus_margin.min(margin);
        if margin < 0.0 {
            rep.torus_bound_violations += 1;
        }
        // sphere bound
        let s = mahler_sphere(&p, &c)?;
        let gap = (s.value - log_norm).abs() - 3.0 * s.std_err;
        let margin = 2.0 * d * (nf + 1.0).ln() - gap;
        rep.min_sphere_margin = rep.min_sphere_margin.min(margin);
        if margin < 0.0 {
            rep.sphere_bound_violations += 1;
        }
        // mixed bound
        let mx = mahler_multisphere(&p, &c)?;
        let bound: f64 = p
            .groups()
            .iter()
            .zip(&degs)
            .map(|(&mi, &di)| {
                di as f64 * ((mi as f64 + 1.0).ln() + 0.5 * crate::resultants::harmonic(mi - 1))
            })
            .sum();
        let gap = (mx.value - log_norm).abs() - 3.0 * mx.std_err;
        let margin = bound - gap;
        rep.min_mixed_margin = rep.min_mixed_margin.min(margin);
        if margin < 0.0 {
            rep.mixed_bound_violations += 1;
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qcfg(budget: usize, seed: u64) -> QuadratureConfig {
        QuadratureConfig::new(budget, seed)
    }

    #[test]
    fn norms() {
        let p = PolyC::from_ints(vec![1], &[(&[0], 1), (&[1], 2)]);
        assert_eq!(norm_inf(&p), 2.0);
        let q = PolyC::from_ints(vec![2], &[(&[1, 0], 1), (&[0, 1], 1), (&[0, 0], 1)]);
        assert_eq!(norm_inf(&q), 1.0);
        let r = PolyC::from_ints(vec![1], &[(&[2], 3), (&[0], -5)]);
        assert_eq!(norm_inf(&r), 5.0);
    }

    #[test]
    fn torus_measures() {
        // m(2x+1) = log 2
        let p = PolyC::from_ints(vec![1], &[(&[1], 2), (&[0], 1)]);
        let e = mahler_torus(&p, &qcfg(1 << 15, 3)).unwrap();
        assert!((e.value - 2f64.ln()).abs() < 3.0 * e.std_err + 5e-3, "{e:?}");

        // m(x+y+1) ≈ 0.3230659
        let p = PolyC::from_ints(vec![2], &[(&[1, 0], 1), (&[0, 1], 1), (&[0, 0], 1)]);
        let e = mahler_torus(&p, &qcfg(1 << 16, 5)).unwrap();
        assert!((e.value - 0.3230659).abs() < 3.0 * e.std_err + 3e-3, "{e:?}");

        // m(x₁x₂ + 5) = log 5
        let p = PolyC::from_ints(vec![2], &[(&[1, 1], 1), (&[0, 0], 5)]);
        let e = mahler_torus(&p, &qcfg(1 << 15, 7)).unwrap();
        assert!((e.value - 5f64.ln()).abs() < 3.0 * e.std_err + 5e-3, "{e:?}");
    }

    #[test]
    fn univariate_exact() {
        let p = PolyC::from_ints(vec![1], &[(&[1], 2), (&[0], 1)]);
        let (m, err) = mahler_univariate_exact(&p).unwrap();
        assert!((m - 2f64.ln()).abs() < err + 1e-10, "{m} ± {err}");

        let p = PolyC::from_ints(vec![1], &[(&[2], 1), (&[0], -2)]);
        let (m, err) = mahler_univariate_exact(&p).unwrap();
        assert!((m - 2f64.ln()).abs() < err + 1e-10, "{m} ± {err}");

        let p = PolyC::from_ints(vec![1], &[(&[1], 1), (&[0], -1)]);
        let (m, err) = mahler_univariate_exact(&p).unwrap();
        assert!(m.abs() < err + 1e-10, "{m} ± {err}");
    }

    #[test]
    fn torus_vs_exact_univariate() {
        let p = PolyC::from_ints(vec![1], &[(&[3], 1), (&[1], -3), (&[0], 1)]);
        let (me, err) = mahler_univariate_exact(&p).unwrap();
        let mt = mahler_torus(&p, &qcfg(1 << 16, 11)).unwrap();
        assert!(
            (me - mt.value).abs() < 3.0 * mt.std_err + err + 5e-3,
            "exact {me} vs torus {mt:?}"
        );
    }

    #[test]
    fn sphere_constant() {
        // m_{𝕊₂}(z₀) = −1/2
        let p = PolyC::from_ints(vec![2], &[(&[1, 0], 1)]);
        let e = mahler_sphere(&p, &qcfg(1 << 16, 13)).unwrap();
        assert!((e.value + 0.5).abs() < 3.0 * e.std_err + 0.01, "{e:?}");

        // independence across sphere factors: z₀·z₀′ on 𝕊₂×𝕊₂ → −1
        let p = PolyC::from_ints(vec![2, 2], &[(&[1, 0, 1, 0], 1)]);
        let e = mahler_multisphere(&p, &qcfg(1 << 16, 17)).unwrap();
        assert!((e.value + 1.0).abs() < 3.0 * e.std_err + 0.02, "{e:?}");

        // constants are exact
        let p = PolyC::from_ints(vec![1], &[(&[0], 5)]);
        let e = mahler_sphere(&p, &qcfg(1 << 10, 19)).unwrap();
        assert!((e.value - 5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn sup_polydisc_examples() {
        let cfg = qcfg(1 << 10, 23);
        let p = PolyC::from_ints(vec![1], &[(&[1], 1)]);
        let s = sup_polydisc(&p, &cfg).unwrap();
        assert!((s.value - 1.0).abs() < 1e-6, "{s:?}");

        let p = PolyC::from_ints(vec![1], &[(&[1], 1), (&[0], 1)]);
        let s = sup_polydisc(&p, &cfg).unwrap();
        assert!((s.value - 2.0).abs() < 1e-6, "{s:?}");
        assert!(s.lower <= s.value + 1e-9 && s.value <= s.upper + 1e-9);

        let p = PolyC::from_ints(vec![2], &[(&[1, 0], 1), (&[0, 1], 1), (&[0, 0], 1)]);
        let s = sup_polydisc(&p, &cfg).unwrap();
        assert!((s.value - 3.0).abs() < 1e-6, "{s:?}");
    }

    #[test]
    fn parseval() {
        let cfg = qcfg(1 << 14, 29);
        for (p, expect) in [
            (PolyC::from_ints(vec![1], &[(&[0], 1), (&[1], 1)]), 2.0),
            (
                PolyC::from_ints(vec![2], &[(&[0, 0], 1), (&[1, 0], 1), (&[0, 1], 1)]),
                3.0,
            ),
            (PolyC::from_ints(vec![1], &[(&[1], 2), (&[0], 3)]), 13.0),
        ] {
            let r = parseval_check(&p, &cfg).unwrap();
            assert_eq!(r.exact, expect);
            assert!(r.z_score.abs() < 4.0, "{r:?}");
        }
    }

    #[test]
    fn additivity_of_torus_measure() {
        // m(PQ) = m(P) + m(Q)
        let p = PolyC::from_ints(vec![1], &[(&[1], 2), (&[0], 1)]);
        let q = PolyC::from_ints(vec![1], &[(&[1], 1), (&[0], 3)]);
        // product (2x+1)(x+3) = 2x² + 7x + 3
        let pq = PolyC::from_ints(vec![1], &[(&[2], 2), (&[1], 7), (&[0], 3)]);
        let cfg = qcfg(1 << 15, 31);
        let (ep, eq, epq) = (
            mahler_torus(&p, &cfg).unwrap(),
            mahler_torus(&q, &cfg).unwrap(),
            mahler_torus(&pq, &cfg).unwrap(),
        );
        let gap = (epq.value - ep.value - eq.value).abs();
        assert!(gap < 3.0 * (ep.std_err + eq.std_err + epq.std_err) + 5e-3);
    }

    #[test]
    fn bound_suite_small_corpus() {
        let rep = bound_suite(25, &qcfg(1 << 12, 37)).unwrap();
        assert!(rep.polynomials >= 20);
        assert_eq!(rep.coefficient_bound_violations, 0, "{rep:?}");
        assert_eq!(rep.torus_bound_violations, 0, "{rep:?}");
        assert_eq!(rep.sphere_bound_violations, 0, "{rep:?}");
        assert_eq!(rep.mixed_bound_violations, 0, "{rep:?}");
    }

    #[test]
    fn jensen_cube_example() {
        // (x+1)³: m = 0, ‖P‖ = 3, gap log 3 ≤ 3 log 2
        let p = PolyC::from_ints(vec![1], &[(&[3], 1), (&[2], 3), (&[1], 3), (&[0], 1)]);
        let (m, err) = mahler_univariate_exact(&p).unwrap();
        assert!(m.abs() < err + 1e-9);
        let gap = (m - norm_inf(&p).ln()).abs();
        assert!(gap <= 3.0 * 2f64.ln() + 1e-9);
    }
}
