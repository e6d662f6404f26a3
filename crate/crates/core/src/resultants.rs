//! Resultant forms at desk scale: the classical Sylvester resultant of two
//! generic binary forms and the point/Veronese linear forms, their exact
//! coefficient-tuple heights, Fubini–Study sphere-integral heights with the
//! harmonic correction, and the convergence law h(R_n)/n^{d+1} → intersection
//! number.

use crate::error::{Error, Result};
use crate::quad::{mc_mean, sphere_point, sub_rng, QuadratureConfig};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// An integer polynomial in groups of coefficient indeterminates, of fixed
/// degree in each group. Keys are exponent vectors over all variables,
/// concatenated group by group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiForm {
    /// (group size r_i + 1, degree δ_i) per group.
    pub groups: Vec<(usize, u32)>,
    pub terms: BTreeMap<Vec<u32>, BigInt>,
}

impl MultiForm {
    pub fn n_vars(&self) -> usize {
        self.groups.iter().map(|(s, _)| s).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// gcd of the coefficients (1 for primitive forms).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    /// Degree in each group (recomputed from the terms).
    pub fn group_degrees(&self) -> Vec<u32> {
        let mut degs = vec![0u32; self.groups.len()];
        for e in self.terms.keys() {
            let mut off = 0;
            for (gi, (size, _)) in self.groups.iter().enumerate() {
                let d: u32 = e[off..off + size].iter().sum();
                degs[gi] = degs[gi].max(d);
                off += size;
            }
        }
        degs
    }

    /// Evaluates at exact rational points, one coefficient vector per group.
    pub fn evaluate_exact(&self, points: &[Vec<Rat>]) -> Result<Rat> {
        self.check_points(points.iter().map(|p| p.len()))?;
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut t = Rat::from_integer(c.clone());
            let mut off = 0;
            for (gi, (size, _)) in self.groups.iter().enumerate() {
                for j in 0..*size {
                    let k = e[off + j];
                    for _ in 0..k {
                        t *= &points[gi][j];
                    }
                }
                off += size;
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Evaluates |R(z)| at complex points given as interleaved (re, im) per
    /// group.
    pub fn evaluate_abs_complex(&self, points: &[Vec<f64>]) -> f64 {
        let mut re_acc = 0.0f64;
        let mut im_acc = 0.0f64;
        for (e, c) in &self.terms {
            let (mut re, mut im) = (c.to_f64().unwrap_or(0.0), 0.0);
            let mut off = 0;
            for (gi, (size, _)) in self.groups.iter().enumerate() {
                for j in 0..*size {
                    for _ in 0..e[off + j] {
                        let (zr, zi) = (points[gi][2 * j], points[gi][2 * j + 1]);
                        let nr = re * zr - im * zi;
                        im = re * zi + im * zr;
                        re = nr;
                    }
                }
                off += size;
            }
            re_acc += re;
            im_acc += im;
        }
        (re_acc * re_acc + im_acc * im_acc).sqrt()
    }

    fn check_points(&self, lens: impl Iterator<Item = usize>) -> Result<()> {
        let lens: Vec<usize> = lens.collect();
        if lens.len() != self.groups.len()
            || lens
                .iter()
                .zip(&self.groups)
                .any(|(l, (size, _))| l != size)
        {
            return Err(Error::DimensionMismatch(
                "evaluation points must match the group sizes".into(),
            ));
        }
        Ok(())
    }

    /// Divides out the content and fixes the sign so the lexicographically
    /// largest monomial has a positive coefficient.
    pub fn primitive(mut self) -> MultiForm {
        let c = self.content();
        if !c.is_one() && !c.is_zero() {
            for v in self.terms.values_mut() {
                *v /= &c;
            }
        }
        if let Some((_, lead)) = self.terms.iter().next_back() {
            if lead.is_negative() {
                for v in self.terms.values_mut() {
                    *v = -v.clone();
                }
            }
        }
        self
    }
}

// ---------------------------------------------------------------------------
// Sparse multivariate integer polynomials for the Bareiss elimination
// ---------------------------------------------------------------------------

type Poly = BTreeMap<Vec<u32>, BigInt>;

fn poly_var(n_vars: usize, idx: usize) -> Poly {
    let mut e = vec![0u32; n_vars];
    e[idx] = 1;
    let mut p = Poly::new();
    p.insert(e, BigInt::one());
    p
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let c = out.entry(e).or_insert_with(BigInt::zero);
            *c += ca * cb;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn poly_sub(a: &Poly, b: &Poly) -> Poly {
    let mut out = a.clone();
    for (e, c) in b {
        let v = out.entry(e.clone()).or_insert_with(BigInt::zero);
        *v -= c;
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Exact division by a divisor that is known to divide evenly
/// (the Bareiss pivot), by leading-term elimination in lex order.
fn poly_div_exact(num: &Poly, den: &Poly) -> Poly {
    let mut rem = num.clone();
    let mut q = Poly::new();
    let (de, dc) = den.iter().next_back().expect("nonzero divisor");
    while let Some((re, rc)) = rem.iter().next_back().map(|(e, c)| (e.clone(), c.clone())) {
        let e: Vec<u32> = re
            .iter()
            .zip(de)
            .map(|(a, b)| a.checked_sub(*b).expect("exact division"))
            .collect();
        let c = &rc / dc;
        debug_assert_eq!(&c * dc, rc, "exact division");
        let mut t = Poly::new();
        t.insert(e.clone(), c.clone());
        rem = poly_sub(&rem, &poly_mul(&t, den));
        let qc = q.entry(e).or_insert_with(BigInt::zero);
        *qc += c;
    }
    q
}

pub const SYLVESTER_CAP: u32 = 5;

/// The classical resultant of two generic binary forms of degree n, as a
/// primitive integer MultiForm in the coefficient groups (a_0..a_n),
/// (b_0..b_n); computed by the subresultant pseudo-remainder sequence over
/// the coefficient symbol ring.
pub fn sylvester_resultant_form(n: u32) -> Result<MultiForm> {
    if n < 1 || n > SYLVESTER_CAP {
        return Err(Error::CapExceeded(format!(
            "sylvester resultant supports 1 ≤ n ≤ {SYLVESTER_CAP}, got {n}"
        )));
    }
    let nn = n as usize;
    let n_vars = 2 * (nn + 1);
    use crate::spoly::Spoly;
    let a: Vec<Spoly> = (0..=nn).map(|i| Spoly::var(n_vars, i)).collect();
    let b: Vec<Spoly> = (0..=nn).map(|i| Spoly::var(n_vars, nn + 1 + i)).collect();
    let res = crate::spoly::resultant_prs(&a, &b);
    let mut terms = BTreeMap::new();
    for (key, c) in res.terms {
        let e = crate::spoly::unpack(key, n_vars);
        terms.insert(e, BigInt::from(c));
    }
    let form = MultiForm {
        groups: vec![(nn + 1, n), (nn + 1, n)],
        terms,
    };
    Ok(form.primitive())
}

/// Independent fraction-free route: the Sylvester determinant by Bareiss
/// elimination over the polynomial ring. Slower; the cross-check oracle.
pub fn sylvester_resultant_form_bareiss(n: u32) -> Result<MultiForm> {
    if n < 1 || n > SYLVESTER_CAP {
        return Err(Error::CapExceeded(format!(
            "sylvester resultant supports 1 ≤ n ≤ {SYLVESTER_CAP}, got {n}"
        )));
    }
    let nn = n as usize;
    let n_vars = 2 * (nn + 1);
    let size = 2 * nn;
    // Sylvester matrix: n rows of a-coefficients, n of b-coefficients.
    // Row i (0 ≤ i < n): entries a_{n−(j−i)} at column j for i ≤ j ≤ i+n.
    let mut m: Vec<Vec<Poly>> = vec![vec![Poly::new(); size]; size];
    for i in 0..nn {
        for k in 0..=nn {
            m[i][i + k] = poly_var(n_vars, nn - k); // a_{n−k}
            m[nn + i][i + k] = poly_var(n_vars, nn + 1 + nn - k); // b_{n−k}
        }
    }
    let det = bareiss_det(m)?;
    let form = MultiForm {
        groups: vec![(nn + 1, n), (nn + 1, n)],
        terms: det,
    };
    Ok(form.primitive())
}

/// Fraction-free Bareiss determinant of a matrix of integer polynomials.
fn bareiss_det(mut m: Vec<Vec<Poly>>) -> Result<Poly> {
    let n = m.len();
    let one: Poly = {
        let mut p = Poly::new();
        p.insert(vec![0u32; if n > 0 && !m[0].is_empty() { key_len(&m) } else { 0 }], BigInt::one());
        p
    };
    let mut prev = one;
    let mut sign = 1i8;
    for k in 0..n {
        if m[k][k].is_empty() {
            let Some(swap) = (k + 1..n).find(|&r| !m[r][k].is_empty()) else {
                return Ok(Poly::new()); // singular
            };
            m.swap(k, swap);
            sign = -sign;
        }
        let pivot = m[k][k].clone();
        for i in k + 1..n {
            for j in k + 1..n {
                let t = poly_sub(&poly_mul(&m[i][j], &pivot), &poly_mul(&m[i][k], &m[k][j]));
                m[i][j] = if prev_is_one(&prev) {
                    t
                } else {
                    poly_div_exact(&t, &prev)
                };
            }
            m[i][k] = Poly::new();
        }
        prev = pivot;
    }
    let mut det = m[n - 1][n - 1].clone();
    if sign < 0 {
        det = poly_sub(&Poly::new(), &det);
    }
    Ok(det)
}

fn key_len(m: &[Vec<Poly>]) -> usize {
    for row in m {
        for p in row {
            if let Some(e) = p.keys().next() {
                return e.len();
            }
        }
    }
    0
}

fn prev_is_one(p: &Poly) -> bool {
    p.len() == 1
        && p.iter()
            .next()
            .map(|(e, c)| e.iter().all(|&x| x == 0) && c.is_one())
            .unwrap_or(false)
}

/// The resultant of a point p ∈ ℙʳ with respect to the n-th Veronese
/// embedding: the linear form on S^n V^∨ with coefficient p^I at the degree-n
/// monomial index I (lexicographic order of multi-indices).
pub fn point_resultant_form(p: &[i64], n: u32) -> Result<MultiForm> {
    if p.iter().all(|&x| x == 0) {
        return Err(Error::ZeroInput("point_resultant_form of zero".into()));
    }
    let r = p.len() - 1;
    let idxs = multi_indices(r + 1, n);
    let n_vars = idxs.len();
    let mut terms = BTreeMap::new();
    for (j, i_vec) in idxs.iter().enumerate() {
        let mut c = BigInt::one();
        for (x, &e) in p.iter().zip(i_vec) {
            c *= BigInt::from(*x).pow(e);
        }
        if !c.is_zero() {
            let mut key = vec![0u32; n_vars];
            key[j] = 1;
            terms.insert(key, c);
        }
    }
    Ok(MultiForm {
        groups: vec![(n_vars, 1)],
        terms,
    }
    .primitive())
}

/// All multi-indices of total degree n in k variables, lexicographic.
pub fn multi_indices(k: usize, n: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; k];
    fn rec(k: usize, pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos == k - 1 {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for v in (0..=left).rev() {
            cur[pos] = v;
            rec(k, pos + 1, left - v, cur, out);
        }
    }
    rec(k, 0, n, &mut cur, &mut out);
    out
}

/// GVF height over ℚ of the coefficient tuple: log(max |c| / content).
pub fn form_height(r: &MultiForm) -> Result<f64> {
    if r.is_zero() {
        return Err(Error::ZeroInput("form_height of the zero form".into()));
    }
    let m = r.max_abs_coeff();
    let c = r.content();
    Ok(crate::heights::big_ln(&m) - crate::heights::big_ln(&c))
}

pub fn harmonic(k: usize) -> f64 {
    (1..=k).map(|l| 1.0 / l as f64).sum()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FsHeightEstimate {
    /// Exact sum of the finite-place terms: −ln(content).
    pub finite: f64,
    pub sphere_integral: f64,
    pub sphere_std_err: f64,
    pub correction: f64,
    pub total: f64,
}

/// Fubini–Study height of the form: finite-place terms (exact) + sphere
/// integral of log|R| over the product of unit spheres (Monte Carlo with
/// normalized complex Gaussians) + the harmonic correction
/// ½ Σ_i δ_i Σ_{l=1}^{r_i} 1/l. ν(Ω_∞) = 1 for ℚ.
pub fn fs_height_estimate(r: &MultiForm, cfg: &QuadratureConfig) -> Result<FsHeightEstimate> {
    if r.is_zero() {
        return Err(Error::ZeroInput("fs_height_estimate of the zero form".into()));
    }
    let content = r.content();
    let finite = -crate::heights::big_ln(&content);
    let degs = r.group_degrees();
    let correction: f64 = r
        .groups
        .iter()
        .zip(&degs)
        .map(|((size, _), &d)| 0.5 * d as f64 * harmonic(size - 1))
        .sum();
    let sizes: Vec<usize> = r.groups.iter().map(|(s, _)| *s).collect();
    let est = mc_mean(
        cfg,
        "fs-height",
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
            let mut points = Vec::with_capacity(sizes.len());
            let mut off = 0;
            for &s in &sizes {
                points.push(flat[off..off + 2 * s].to_vec());
                off += 2 * s;
            }
            let a = r.evaluate_abs_complex(&points);
            if a == 0.0 {
                None
            } else {
                Some(a.ln())
            }
        },
    )?;
    Ok(FsHeightEstimate {
        finite,
        sphere_integral: est.value,
        sphere_std_err: est.std_err,
        correction,
        total: finite + est.value + correction,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u32,
    pub height: f64,
    pub normalized: f64,
    pub envelope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConvergenceCase {
    Sylvester,
    Point,
}

/// Heights of the resultant sequence and their normalizations
/// h(R_n)/n^{d+1}. For the Sylvester case (d = 1, canonical metrics, limit
/// 0) the envelope column is C·ln(n)/n with C fitted at n = 2; for a point
/// (d = 0) the normalized value is exactly the point height for every n.
pub fn convergence_table(
    case: ConvergenceCase,
    point: Option<&[i64]>,
    n_max: u32,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::new();
    match case {
        ConvergenceCase::Sylvester => {
            let mut c_fit = 0.0f64;
            for n in 1..=n_max {
                let r = sylvester_resultant_form(n)?;
                let h = form_height(&r)?;
                let normalized = h / (n as f64).powi(2);
                if n == 2 {
                    c_fit = normalized / ((2f64).ln() / 2.0);
                }
                let envelope = if n == 1 {
                    0.0
                } else {
                    c_fit * (n as f64).ln() / n as f64
                };
                rows.push(ConvergenceRow {
                    n,
                    height: h,
                    normalized,
                    envelope,
                });
            }
        }
        ConvergenceCase::Point => {
            let p = point.ok_or_else(|| Error::Invalid("point case needs coordinates".into()))?;
            for n in 1..=n_max {
                let r = point_resultant_form(p, n)?;
                let h = form_height(&r)?;
                let normalized = h / n as f64;
                rows.push(ConvergenceRow {
                    n,
                    height: h,
                    normalized,
                    envelope: normalized,
                });
            }
        }
    }
    Ok(rows)
}

/// Sampled supremum over sphere points of the gap between the Weil metric
/// and the n-th root of the Veronese-pulled-back Fubini–Study metric:
/// |log max_i |z_i| − (1/2n)·log Σ_{|I|=n} |z^I|²|, with the proven bound
/// (1/2n)·log C(r+n, n) ≤ r log n / n for n ≥ r + 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VeroneseGap {
    pub r: usize,
    pub n: u32,
    pub observed_sup: f64,
    pub binomial_bound: f64,
    pub stated_bound: f64,
}

pub fn veronese_gap(r: usize, n: u32, cfg: &QuadratureConfig) -> Result<VeroneseGap> {
    if (n as usize) < r + 1 {
        return Err(Error::Invalid("veronese_gap needs n ≥ r + 1".into()));
    }
    cfg.validate()?;
    let idxs = multi_indices(r + 1, n);
    let mut rng = sub_rng(cfg.seed, "veronese", (r as u64) << 32 | n as u64);
    let mut sup = 0.0f64;
    let mut z = Vec::new();
    for _ in 0..cfg.budget {
        sphere_point(&mut rng, r + 1, &mut z);
        let mods2: Vec<f64> = (0..r + 1)
            .map(|j| z[2 * j] * z[2 * j] + z[2 * j + 1] * z[2 * j + 1])
            .collect();
        let max2 = mods2.iter().fold(0.0f64, |a, &b| a.max(b));
        // Σ_{|I|=n} ∏ |z_j|^{2 I_j}
        let mut sum = 0.0f64;
        for i_vec in &idxs {
            let mut t = 1.0f64;
            for (j, &e) in i_vec.iter().enumerate() {
                t *= mods2[j].powi(e as i32);
            }
            sum += t;
        }
        let gap = (0.5 * max2.ln() - sum.ln() / (2.0 * n as f64)).abs();
        if gap > sup {
            sup = gap;
        }
    }
    let binom = binomial(r + n as usize, n as usize);
    let binomial_bound = crate::heights::big_ln(&binom) / (2.0 * n as f64);
    let stated_bound = r as f64 * (n as f64).ln() / n as f64;
    Ok(VeroneseGap {
        r,
        n,
        observed_sup: sup,
        binomial_bound,
        stated_bound,
    })
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..k.min(n - k) {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

/// Exact resultant of two rational univariate polynomials by the
/// subresultant (fraction-free) PRS: the independent oracle for the symbolic
/// Sylvester form under specialization.
pub fn resultant_univariate_exact(a: &[Rat], b: &[Rat]) -> Rat {
    fn trim(mut v: Vec<Rat>) -> Vec<Rat> {
        while v.last().map_or(false, |c| c.is_zero()) {
            v.pop();
        }
        v
    }
    let mut f = trim(a.to_vec());
    let mut g = trim(b.to_vec());
    if f.is_empty() || g.is_empty() {
        return Rat::zero();
    }
    let mut res = Rat::one();
    loop {
        if g.len() == 1 {
            let df = f.len() - 1;
            let mut p = Rat::one();
            for _ in 0..df {
                p *= &g[0];
            }
            return res * p;
        }
        // remainder of f by g over ℚ
        let mut rem = f.clone();
        let dg = g.len() - 1;
        let lc = g[dg].clone();
        while rem.len() > dg {
            let k = rem.len() - 1;
            let c = rem[k].clone() / &lc;
            if !c.is_zero() {
                for j in 0..=dg {
                    let t = c.clone() * &g[j];
                    rem[j + k - dg] -= t;
                }
            }
            rem.pop();
            rem = trim(rem);
            if rem.is_empty() {
                return Rat::zero();
            }
        }
        let (df, dgg, dr) = (f.len() - 1, g.len() - 1, rem.len() - 1);
        let mut lead_pow = Rat::one();
        for _ in 0..df - dr {
            lead_pow *= &g[dgg];
        }
        res *= lead_pow;
        if (df & 1) == 1 && (dgg & 1) == 1 {
            res = -res;
        }
        f = g;
        g = rem;
    }
}

/// Specializes a MultiForm group structure to two generic binary forms from
/// integer roots: A = ∏(x − α_i y).
pub fn binary_form_from_roots(roots: &[i64]) -> Vec<Rat> {
    // coefficients of ∏ (x − α y) as a polynomial in x (coefficients of y
    // powers absorbed): coefficient vector c_0..c_n with
    // A(x, 1) = Σ c_k x^k.
    let mut coeffs: Vec<BigInt> = vec![BigInt::one()];
    for &a in roots {
        let mut next = vec![BigInt::zero(); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= BigInt::from(a) * c;
        }
        coeffs = next;
    }
    coeffs.into_iter().map(Rat::from_integer).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_i;

    #[test]
    fn sylvester_n1() {
        // a₀b₁ − a₁b₀
        let r = sylvester_resultant_form(1).unwrap();
        assert_eq!(r.terms.len(), 2);
        let e1 = vec![1u32, 0, 0, 1];
        let e2 = vec![0u32, 1, 1, 0];
        assert_eq!(r.terms.get(&e1), Some(&BigInt::from(1)));
        assert_eq!(r.terms.get(&e2), Some(&BigInt::from(-1)));
        assert!((form_height(&r).unwrap() - 0.0).abs() < 1e-15);
    }

    #[test]
    fn sylvester_n2_expansion() {
        // (a₀b₂−a₂b₀)² − (a₀b₁−a₁b₀)(a₁b₂−a₂b₁), expanded by hand:
        // a₀²b₂² − 2a₀a₂b₀b₂ + a₂²b₀² − a₀a₁b₁b₂ + a₀a₂b₁² + a₁²b₀b₂ − a₁a₂b₀b₁
        let r = sylvester_resultant_form(2).unwrap();
        let expect: Vec<(Vec<u32>, i64)> = vec![
            (vec![2, 0, 0, 0, 0, 2], 1),
            (vec![1, 0, 1, 1, 0, 1], -2),
            (vec![0, 0, 2, 2, 0, 0], 1),
            (vec![1, 1, 0, 0, 1, 1], -1),
            (vec![1, 0, 1, 0, 2, 0], 1),
            (vec![0, 2, 0, 1, 0, 1], 1),
            (vec![0, 1, 1, 1, 1, 0], -1),
        ];
        assert_eq!(r.terms.len(), expect.len());
        for (e, c) in expect {
            assert_eq!(r.terms.get(&e), Some(&BigInt::from(c)), "term {e:?}");
        }
        assert!((form_height(&r).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn sylvester_vanishing_iff_common_root() {
        // planted common root: (x−y)(x−2y) and (x−y)(x−3y)
        let r = sylvester_resultant_form(2).unwrap();
        let a = binary_form_from_roots(&[1, 2]);
        let b = binary_form_from_roots(&[1, 3]);
        assert_eq!(r.evaluate_exact(&[a, b]).unwrap(), Rat::zero());
        // disjoint roots: product formula res = ∏ (α_i − β_j)
        let a = binary_form_from_roots(&[1, 2]);
        let b = binary_form_from_roots(&[4, 7]);
        let v = r.evaluate_exact(&[a, b]).unwrap();
        let expected = rat_i((1 - 4) * (1 - 7) * (2 - 4) * (2 - 7));
        assert!(v == expected || v == -expected.clone(), "{v} vs {expected}");
    }

    #[test]
    fn sylvester_specializations_match_prs_oracle() {
        use rand::Rng;
        for n in 1..=4u32 {
            let r = sylvester_resultant_form(n).unwrap();
            let mut rng = sub_rng(1000 + n as u64, "sylv-prs", 0);
            for _ in 0..8 {
                let a: Vec<Rat> = (0..=n).map(|_| rat_i(rng.gen_range(-9i64..=9))).collect();
                let b: Vec<Rat> = (0..=n).map(|_| rat_i(rng.gen_range(-9i64..=9))).collect();
                if a[n as usize].is_zero() || b[n as usize].is_zero() {
                    continue;
                }
                let sym = r.evaluate_exact(&[a.clone(), b.clone()]).unwrap();
                let prs = resultant_univariate_exact(&a, &b);
                assert!(sym == prs || sym == -prs.clone(), "n={n}: {sym} vs {prs}");
            }
        }
    }

    #[test]
    fn multidegree_and_primitivity() {
        for n in 1..=4u32 {
            let r = sylvester_resultant_form(n).unwrap();
            assert_eq!(r.group_degrees(), vec![n, n], "n={n}");
            assert!(r.content().is_one(), "n={n}");
        }
    }

    #[test]
    fn point_forms() {
        // p = [2,3], n = 3 → coefficients (8,12,18,27), h = log 27
        let r = point_resultant_form(&[2, 3], 3).unwrap();
        let coeffs: Vec<i64> = r.terms.values().map(|c| c.to_i64().unwrap()).collect();
        let mut sorted = coeffs.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![8, 12, 18, 27]);
        assert!((form_height(&r).unwrap() - 27f64.ln()).abs() < 1e-12);

        // p = [1,0]: single coefficient 1
        let r = point_resultant_form(&[1, 0], 5).unwrap();
        assert_eq!(r.terms.len(), 1);
        assert!((form_height(&r).unwrap()).abs() < 1e-15);

        // p = [1,1], n = 2: (1,1,1)
        let r = point_resultant_form(&[1, 1], 2).unwrap();
        assert_eq!(r.terms.len(), 3);
        assert!((form_height(&r).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn point_height_exactness() {
        let p = [6i64, 10, 15];
        let hp = crate::heights::height_tuple_q(&[rat_i(6), rat_i(10), rat_i(15)]);
        for n in 1..=6u32 {
            let r = point_resultant_form(&p, n).unwrap();
            let h = form_height(&r).unwrap();
            assert!(
                (h / n as f64 - hp).abs() < 1e-12,
                "n={n}: {} vs {hp}",
                h / n as f64
            );
        }
    }

    #[test]
    fn convergence_rows() {
        let rows = convergence_table(ConvergenceCase::Sylvester, None, 3).unwrap();
        assert_eq!(rows[0].normalized, 0.0);
        assert!((rows[1].normalized - 2f64.ln() / 4.0).abs() < 1e-15);
        // fitted envelope holds for n ≥ 2
        for row in &rows[1..] {
            assert!(row.normalized <= row.envelope + 1e-12, "{row:?}");
        }
        let rows = convergence_table(ConvergenceCase::Point, Some(&[2, 3]), 5).unwrap();
        for row in rows {
            assert!((row.normalized - 3f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn fs_height_monomial_zero() {
        // single monomial z₀ with coefficient 1 on one group of size 2,
        // degree 1: sphere integral −1/2 cancels the correction +1/2.
        let mut terms = BTreeMap::new();
        terms.insert(vec![1u32, 0], BigInt::one());
        let r = MultiForm {
            groups: vec![(2, 1)],
            terms,
        };
        let est = fs_height_estimate(&r, &QuadratureConfig::new(1 << 15, 21)).unwrap();
        assert!((est.correction - 0.5).abs() < 1e-15);
        assert!(
            est.total.abs() < 3.0 * est.sphere_std_err + 0.01,
            "{est:?}"
        );
    }

    #[test]
    fn fs_height_sylvester_within_printed_bound() {
        let r = sylvester_resultant_form(1).unwrap();
        let est = fs_height_estimate(&r, &QuadratureConfig::new(1 << 14, 5)).unwrap();
        let h = form_height(&r).unwrap();
        // |estimate − h| ≤ Σ δ_i (log(r_i+1) + H_{r_i−1}) = 2 log 2
        let bound = 2.0 * 2f64.ln();
        assert!(
            (est.total - h).abs() <= bound + 3.0 * est.sphere_std_err,
            "{est:?}"
        );
    }

    #[test]
    fn veronese_gaps() {
        let cfg = QuadratureConfig::new(2000, 13);
        // coordinate points have zero gap: included in the sampled sup
        let g = veronese_gap(1, 2, &cfg).unwrap();
        assert!(g.observed_sup <= g.binomial_bound + 1e-12, "{g:?}");
        assert!(g.binomial_bound <= g.stated_bound + 1e-12, "{g:?}");
        let g = veronese_gap(2, 3, &cfg).unwrap();
        assert!((g.binomial_bound - (10f64).ln() / 6.0).abs() < 1e-12);
        assert!((g.stated_bound - 2.0 * 3f64.ln() / 3.0).abs() < 1e-12);
        assert!(g.observed_sup <= g.binomial_bound + 1e-12);
    }

    #[test]
    fn prs_oracle_basics() {
        // res(x−2, x−5) = −3... up to the convention: deg 1 × deg 1
        let a = vec![rat_i(-2), rat_i(1)];
        let b = vec![rat_i(-5), rat_i(1)];
        let r = resultant_univariate_exact(&a, &b);
        assert!(r == rat_i(3) || r == rat_i(-3), "{r}");
        // common root → 0
        let c = vec![rat_i(-2), rat_i(1)];
        assert_eq!(resultant_univariate_exact(&a, &c), Rat::zero());
    }
}
