//! Heights over ℚ and the cyclotomic fields: exact tuple heights, projective
//! Weil heights (archimedean embeddings plus the exact content-ideal norm),
//! and an executable check suite for the height axioms.
//!
//! The finite places are handled in aggregate: for integral coordinates the
//! sum of the non-archimedean contributions is −log N(𝔞)/φ(N), where N(𝔞)
//! is the index of the coordinate ideal's ℤ-lattice in ℤ[ζ_N], computed by
//! exact Hermite normal form (with a resultant/valuation fast path for large
//! conductors).

use crate::cyclo::{coprime_residues, cyclotomic_poly, euler_phi, Cyclotomic};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::rat::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// ln of a positive big integer (accurate to ~1e-14 relative).
pub fn big_ln(n: &BigInt) -> f64 {
    debug_assert!(n.is_positive());
    let bits = n.bits();
    if bits <= 900 {
        return n.to_f64().expect("fits").ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().expect("64 bits fit").ln() + shift as f64 * std::f64::consts::LN_2
}

/// Clears a rational tuple to coprime integers; `None` for the zero tuple.
pub fn clear_to_coprime(xs: &[Rat]) -> Option<Vec<BigInt>> {
    if xs.iter().all(|x| x.is_zero()) {
        return None;
    }
    let mut l = BigInt::one();
    for x in xs {
        l = l.lcm(x.denom());
    }
    let ints: Vec<BigInt> = xs
        .iter()
        .map(|x| x.numer() * (&l / x.denom()))
        .collect();
    let mut g = BigInt::zero();
    for v in &ints {
        g = g.gcd(v);
    }
    Some(ints.into_iter().map(|v| v / &g).collect())
}

/// GVF height of a rational tuple: Σ_v log max_i |x_i|_v, computed exactly by
/// clearing to a coprime integer tuple and taking log of the max absolute
/// value. Returns −∞ for the zero tuple.
pub fn height_tuple_q(xs: &[Rat]) -> f64 {
    match height_tuple_q_exact(xs) {
        Some(m) => big_ln(&m),
        None => f64::NEG_INFINITY,
    }
}

/// The exact integer whose log is the tuple height.
pub fn height_tuple_q_exact(xs: &[Rat]) -> Option<BigInt> {
    let ints = clear_to_coprime(xs)?;
    Some(ints.into_iter().map(|v| v.abs()).max().expect("nonempty"))
}

// ---------------------------------------------------------------------------
// Content-ideal norms
// ---------------------------------------------------------------------------

/// Index of the ℤ-lattice spanned by the rows in ℤ^d, via integer
/// Hermite-style elimination. `None` if the span has rank < d.
pub fn lattice_index(mut rows: Vec<Vec<BigInt>>, d: usize) -> Option<BigInt> {
    let mut pivot_rows = 0usize;
    for col in 0..d {
        loop {
            // smallest nonzero entry in this column among unprocessed rows
            let mut best: Option<(usize, BigInt)> = None;
            for (r, row) in rows.iter().enumerate().skip(pivot_rows) {
                let v = row[col].abs();
                if !v.is_zero() && best.as_ref().map_or(true, |(_, b)| v < *b) {
                    best = Some((r, v));
                }
            }
            let Some((r0, _)) = best else { break };
            rows.swap(pivot_rows, r0);
            let mut done = true;
            let pivot = rows[pivot_rows][col].clone();
            for r in pivot_rows + 1..rows.len() {
                if !rows[r][col].is_zero() {
                    let q = rounded_div(&rows[r][col], &pivot);
                    if !q.is_zero() {
                        for c in 0..d {
                            let t = &q * &rows[pivot_rows][c];
                            rows[r][c] -= t;
                        }
                    }
                    if !rows[r][col].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                pivot_rows += 1;
                break;
            }
        }
    }
    if pivot_rows < d {
        return None;
    }
    // product of pivot entries over the echelon structure
    let mut det = BigInt::one();
    let mut r = 0usize;
    for col in 0..d {
        if r < rows.len() && !rows[r][col].is_zero() {
            det *= rows[r][col].abs();
            r += 1;
        }
    }
    if r < d {
        return None;
    }
    Some(det)
}

fn rounded_div(a: &BigInt, b: &BigInt) -> BigInt {
    // nearest-integer division, ties toward zero
    let (q, r) = a.div_rem(b);
    let two_r: BigInt = &r * 2;
    if two_r.abs() > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

/// Norm of the content ideal (x_1, …, x_k) ⊆ ℤ[ζ_N] for integral entries:
/// the index of the ℤ-lattice spanned by all x_i·ζ^j. Errors on the all-zero
/// input.
pub fn content_norm(xs: &[Cyclotomic], conductor: u64) -> Result<BigInt> {
    let phi = euler_phi(conductor) as usize;
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    for x in xs {
        if x.conductor() != conductor {
            return Err(Error::ConductorMismatch(x.conductor(), conductor));
        }
        if x.is_zero() {
            continue;
        }
        let ints = x
            .integer_coeffs()
            .ok_or_else(|| Error::Invalid("content_norm needs integral entries".into()))?;
        let _ = ints;
        // all ζ-multiples of x
        let mut cur = x.clone();
        for _ in 0..phi {
            rows.push(
                cur.integer_coeffs()
                    .ok_or_else(|| Error::Invalid("content_norm needs integral entries".into()))?,
            );
            cur = cur
                .mul(&Cyclotomic::zeta_power(conductor, 1))
                .expect("same conductor");
        }
    }
    if rows.is_empty() {
        return Err(Error::ZeroInput("content_norm of the zero ideal".into()));
    }
    lattice_index(rows, phi).ok_or_else(|| {
        Error::Invalid("coordinate lattice is not of full rank (zero ideal?)".into())
    })
}

// ---------------------------------------------------------------------------
// Fast content norms for large conductors (resultants + local valuations)
// ---------------------------------------------------------------------------

/// |N_{K/ℚ}(x)| = |Res(Φ_N, x)| for an integral x, by CRT over word-size
/// primes.
pub fn norm_abs(x: &Cyclotomic) -> Result<BigInt> {
    if x.is_zero() {
        return Ok(BigInt::zero());
    }
    let n = x.conductor();
    let coeffs = x
        .integer_coeffs()
        .ok_or_else(|| Error::Invalid("norm_abs needs an integral element".into()))?;
    if let Some(r) = x.is_rational() {
        return Ok(r.numer().abs().pow(euler_phi(n) as u32));
    }
    let phi_poly = cyclotomic_poly(n);
    // Hadamard-style bound: |N(x)| ≤ (Σ|c_j|)^φ
    let size: BigInt = coeffs.iter().map(|c| c.abs()).sum();
    let log2_bound = euler_phi(n) as f64 * big_ln(&(size + 1)) / std::f64::consts::LN_2;
    let n_primes = (log2_bound / 30.0).ceil() as usize + 2;
    let primes = crt_primes(n_primes);

    let residues: Vec<u64> = primes
        .par_iter()
        .map(|&q| {
            let a: Vec<u64> = phi_poly.iter().map(|c| bigint_mod_u64(c, q)).collect();
            let b: Vec<u64> = coeffs.iter().map(|c| bigint_mod_u64(c, q)).collect();
            resultant_mod(&a, &b, q)
        })
        .collect();
    Ok(crt_reconstruct(&primes, &residues).abs())
}

fn bigint_mod_u64(c: &BigInt, q: u64) -> u64 {
    let m = c.mod_floor(&BigInt::from(q));
    m.to_u64().expect("reduced")
}

/// Primes just below 2^31, deterministic list.
fn crt_primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut cand: u64 = (1 << 31) - 1;
    while out.len() < count {
        if is_prime_u64(cand) {
            out.push(cand);
        }
        cand -= 2;
    }
    out
}

fn is_prime_u64(n: u64) -> bool {
    if n < 4 {
        return n >= 2;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Resultant of a (monic lead preserved) and b over 𝔽_q by the Euclidean
/// chain.
fn resultant_mod(a: &[u64], b: &[u64], q: u64) -> u64 {
    let mut a: Vec<u64> = trim_mod(a.to_vec());
    let mut b: Vec<u64> = trim_mod(b.to_vec());
    let mut res: u64 = 1;
    loop {
        if b.is_empty() {
            return 0;
        }
        let (da, db) = (a.len() - 1, b.len() - 1);
        if db == 0 {
            return mulmod(res, powmod(b[0], da as u64, q), q);
        }
        let r = poly_mod_mod(&a, &b, q);
        let dr = if r.is_empty() { 0 } else { r.len() - 1 };
        let lcb = *b.last().unwrap();
        res = mulmod(res, powmod(lcb, (da - dr) as u64, q), q);
        if (da & 1) == 1 && (db & 1) == 1 {
            res = q - res % q;
            if res == q {
                res = 0;
            }
        }
        a = b;
        b = r;
    }
}

fn trim_mod(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn mulmod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, q: u64) -> u64 {
    let mut r = 1u64;
    b %= q;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b, q);
        }
        b = mulmod(b, b, q);
        e >>= 1;
    }
    r
}

fn poly_mod_mod(a: &[u64], b: &[u64], q: u64) -> Vec<u64> {
    let db = b.len() - 1;
    let lc_inv = powmod(b[db], q - 2, q);
    let mut rem: Vec<u64> = a.to_vec();
    while rem.len() > db {
        let k = rem.len() - 1;
        let c = mulmod(rem[k], lc_inv, q);
        if c != 0 {
            for j in 0..=db {
                let t = mulmod(c, b[j], q);
                let idx = k - db + j;
                rem[idx] = (rem[idx] + q - t) % q;
            }
        }
        rem.pop();
        while rem.last() == Some(&0) {
            rem.pop();
        }
    }
    rem
}

fn crt_reconstruct(primes: &[u64], residues: &[u64]) -> BigInt {
    let mut modulus = BigInt::one();
    let mut acc = BigInt::zero();
    for (&q, &r) in primes.iter().zip(residues) {
        let qb = BigInt::from(q);
        // solve acc' ≡ acc (mod modulus), acc' ≡ r (mod q)
        let m_inv = mod_inverse(&modulus.mod_floor(&qb), &qb);
        let diff = (BigInt::from(r) - acc.mod_floor(&qb)).mod_floor(&qb);
        let t = (diff * m_inv).mod_floor(&qb);
        acc += &modulus * t;
        modulus *= qb;
    }
    // symmetric representative
    let half = &modulus >> 1;
    if acc > half {
        acc -= modulus;
    }
    acc
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    e.x.mod_floor(m)
}

/// p-adic valuation of the index of the ideal (xs) in ℤ[ζ_N], by triangular
/// reduction of the ideal's polynomial generators over ℤ/p^K with
/// K = `vcap` + 1 (valid whenever the true valuation is ≤ `vcap`).
pub fn ideal_index_vp(xs: &[Cyclotomic], n: u64, p: u64, vcap: u32) -> Result<u32> {
    let phi = euler_phi(n) as usize;
    let k_exp = vcap + 1;
    let pk = BigInt::from(p).pow(k_exp);
    let phi_poly: Vec<BigInt> = cyclotomic_poly(n);
    let p_big = BigInt::from(p);

    let val_of = |c: &BigInt| -> u32 {
        if c.is_zero() {
            return k_exp;
        }
        let mut v = 0u32;
        let mut t = c.clone();
        while (&t % &p_big).is_zero() {
            t /= &p_big;
            v += 1;
            if v >= k_exp {
                break;
            }
        }
        v
    };

    let reduce = |g: &mut Vec<BigInt>| {
        for c in g.iter_mut() {
            *c = c.mod_floor(&pk);
        }
        while g.last().map_or(false, |c| c.is_zero()) {
            g.pop();
        }
    };

    let mut queue: Vec<Vec<BigInt>> = Vec::new();
    for x in xs {
        if x.is_zero() {
            continue;
        }
        let mut g = x
            .integer_coeffs()
            .ok_or_else(|| Error::Invalid("integral entries required".into()))?;
        let mut gv = g.drain(..).collect::<Vec<_>>();
        reduce(&mut gv);
        if !gv.is_empty() {
            queue.push(gv);
        }
    }
    let mut pivots: Vec<Option<(Vec<BigInt>, u32)>> = vec![None; phi];

    while let Some(mut g) = queue.pop() {
        loop {
            reduce(&mut g);
            let Some(lead) = g.last().cloned() else { break };
            let d = g.len() - 1;
            let a = val_of(&lead);
            if a >= k_exp {
                g.pop();
                continue;
            }
            // normalize: leading coefficient becomes exactly p^a
            let unit = &lead / p_big.pow(a);
            let unit_inv = mod_inverse(&unit.mod_floor(&pk), &pk);
            for c in g.iter_mut() {
                *c = (&*c * &unit_inv).mod_floor(&pk);
            }
            match &pivots[d] {
                None => {
                    // store pivot, enqueue its ζ-multiple (module closure)
                    let mut shifted = vec![BigInt::zero()];
                    shifted.extend(g.iter().cloned());
                    reduce_poly_mod_phi(&mut shifted, &phi_poly);
                    pivots[d] = Some((g, a));
                    queue.push(shifted);
                    break;
                }
                Some((h, b)) => {
                    if a >= *b {
                        let scale = p_big.pow(a - b);
                        for (c, hc) in g.iter_mut().zip(h) {
                            *c = (&*c - &scale * hc).mod_floor(&pk);
                        }
                        // leading term cancels; loop
                    } else {
                        let (h_old, _) = pivots[d].replace((g, a)).unwrap();
                        let mut shifted = vec![BigInt::zero()];
                        {
                            let stored = &pivots[d].as_ref().unwrap().0;
                            shifted.extend(stored.iter().cloned());
                        }
                        reduce_poly_mod_phi(&mut shifted, &phi_poly);
                        queue.push(shifted);
                        g = h_old;
                    }
                }
            }
        }
    }

    let mut total = 0u32;
    for d in 0..phi {
        match &pivots[d] {
            Some((_, a)) => total += a,
            None => return Ok(vcap + 1), // index not p^{≤vcap}-bounded; flag
        }
        if total > vcap {
            return Ok(vcap + 1);
        }
    }
    Ok(total)
}

fn reduce_poly_mod_phi(g: &mut Vec<BigInt>, phi_poly: &[BigInt]) {
    let deg = phi_poly.len() - 1;
    while g.len() > deg {
        let k = g.len() - 1;
        let lead = g[k].clone();
        if !lead.is_zero() {
            for j in 0..deg {
                let t = &lead * &phi_poly[j];
                g[k - deg + j] -= t;
            }
        }
        g.pop();
    }
}

/// Content-ideal norm via the gcd-of-norms certificate: exact, and fast for
/// large conductors. Falls back on local valuations for the common divisor.
pub fn content_norm_fast(xs: &[Cyclotomic], conductor: u64) -> Result<BigInt> {
    let nz: Vec<&Cyclotomic> = xs.iter().filter(|x| !x.is_zero()).collect();
    if nz.is_empty() {
        return Err(Error::ZeroInput("content_norm of the zero ideal".into()));
    }
    let mut g = BigInt::zero();
    for x in &nz {
        g = g.gcd(&norm_abs(x)?);
        if g.is_one() {
            return Ok(BigInt::one());
        }
    }
    // factor g (norm gcds are small in practice)
    let factors = factor_bigint(&g).ok_or_else(|| {
        Error::Invalid(format!("could not factor the norm gcd {g}"))
    })?;
    let owned: Vec<Cyclotomic> = nz.iter().map(|x| (*x).clone()).collect();
    let mut out = BigInt::one();
    for (p, vmax) in factors {
        let v = ideal_index_vp(&owned, conductor, p, vmax)?;
        if v > vmax {
            return Err(Error::Invalid(format!(
                "local index at {p} exceeded its certificate bound"
            )));
        }
        out *= BigInt::from(p).pow(v);
    }
    Ok(out)
}

/// Factors n into (prime, multiplicity) pairs; `None` if an unfactorable
/// composite above the rho budget remains.
pub fn factor_bigint(n: &BigInt) -> Option<Vec<(u64, u32)>> {
    let mut n = n.abs();
    let mut out: Vec<(u64, u32)> = Vec::new();
    let push = |p: u64, out: &mut Vec<(u64, u32)>, n: &mut BigInt| {
        let pb = BigInt::from(p);
        let mut m = 0u32;
        while (&*n % &pb).is_zero() {
            *n /= &pb;
            m += 1;
        }
        if m > 0 {
            out.push((p, m));
        }
    };
    for p in 2u64..100_000 {
        if n.is_one() {
            break;
        }
        if p > 2 && p % 2 == 0 {
            continue;
        }
        push(p, &mut out, &mut n);
        if &BigInt::from(p) * BigInt::from(p) > n {
            break;
        }
    }
    if !n.is_one() {
        // remaining cofactor: small enough for u64 rho?
        let rest = n.to_u64()?;
        let mut stack = vec![rest];
        while let Some(m) = stack.pop() {
            if m == 1 {
                continue;
            }
            if is_prime_u64_mr(m) {
                let e = out.iter_mut().find(|(p, _)| *p == m);
                match e {
                    Some((_, c)) => *c += 1,
                    None => out.push((m, 1)),
                }
                continue;
            }
            let d = pollard_rho(m)?;
            stack.push(d);
            stack.push(m / d);
        }
    }
    out.sort_unstable();
    // merge duplicates from the rho path
    let mut merged: Vec<(u64, u32)> = Vec::new();
    for (p, c) in out {
        match merged.last_mut() {
            Some((q, m)) if *q == p => *m += c,
            _ => merged.push((p, c)),
        }
    }
    Some(merged)
}

fn is_prime_u64_mr(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> Option<u64> {
    if n % 2 == 0 {
        return Some(2);
    }
    let mut c = 1u64;
    for _ in 0..20 {
        let f = |x: u64| (mulmod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = num_integer::gcd(x.abs_diff(y), n);
        }
        if d != n {
            return Some(d);
        }
        c += 1;
    }
    None
}

// ---------------------------------------------------------------------------
// Projective heights over ℚ(ζ_N)
// ---------------------------------------------------------------------------

/// A projective point over ℚ(ζ_N).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    pub conductor: u64,
    pub coords: Vec<Cyclotomic>,
}

impl ProjectivePoint {
    pub fn new(conductor: u64, coords: Vec<Cyclotomic>) -> Result<Self> {
        if coords.iter().all(|c| c.is_zero()) {
            return Err(Error::ZeroInput("projective point needs a nonzero coordinate".into()));
        }
        let coords = coords
            .into_iter()
            .map(|c| c.embed(conductor))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProjectivePoint { conductor, coords })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeightBreakdown {
    pub archimedean: f64,
    pub arch_err: f64,
    /// Exact norm of the content ideal (finite part = −ln(norm)/φ(N)).
    pub content_norm: String,
    pub finite: f64,
    pub total: f64,
    pub err: f64,
}

/// Height of a tuple of cyclotomic numbers (the affine GVF height; the
/// projective height of [x₀:…:xₙ] is the same number). Precision is the
/// requested certified bound on the archimedean sum; f64 evaluation escalates
/// to double-double before giving up.
pub fn height_tuple_cyclo(
    coords: &[Cyclotomic],
    conductor: u64,
    precision: f64,
    fast_content: bool,
) -> Result<HeightBreakdown> {
    if coords.iter().all(|c| c.is_zero()) {
        return Err(Error::ZeroInput("height of the zero tuple".into()));
    }
    let phi = euler_phi(conductor) as f64;
    // clear denominators and the rational content
    let mut l = BigInt::one();
    for c in coords {
        l = l.lcm(&c.denom_lcm());
    }
    let lr = Rat::from_integer(l);
    let mut ints: Vec<Cyclotomic> = coords
        .iter()
        .map(|c| c.embed(conductor).map(|c| c.scale(&lr)))
        .collect::<Result<Vec<_>>>()?;
    let mut g = BigInt::zero();
    for x in &ints {
        for c in x.integer_coeffs().expect("cleared") {
            g = g.gcd(&c);
        }
    }
    if !g.is_one() {
        let ginv = Rat::new(BigInt::one(), g);
        ints = ints.iter().map(|x| x.scale(&ginv)).collect();
    }

    let norm = if fast_content {
        content_norm_fast(&ints, conductor)?
    } else {
        content_norm(&ints, conductor)?
    };
    let finite = -big_ln(&norm) / phi;

    // archimedean sum with certification ladder: f64 → double-double
    let (arch, arch_err) = match arch_sum_f64(&ints, conductor, precision) {
        Some(v) => v,
        None => arch_sum_dd(&ints, conductor, precision)?,
    };

    Ok(HeightBreakdown {
        archimedean: arch,
        arch_err,
        content_norm: norm.to_string(),
        finite,
        total: arch + finite,
        err: arch_err,
    })
}

pub fn projective_height(p: &ProjectivePoint, precision: f64, fast_content: bool) -> Result<HeightBreakdown> {
    height_tuple_cyclo(&p.coords, p.conductor, precision, fast_content)
}

fn arch_sum_f64(ints: &[Cyclotomic], conductor: u64, precision: f64) -> Option<(f64, f64)> {
    let phi = euler_phi(conductor) as f64;
    let sizes: Vec<f64> = ints
        .iter()
        .map(|x| {
            x.coeffs()
                .iter()
                .map(|c| crate::rat::rat_to_f64(c).abs())
                .sum::<f64>()
        })
        .collect();
    if sizes.iter().any(|s| !s.is_finite()) {
        return None;
    }
    let ks = coprime_residues(conductor);
    let terms: Vec<Option<(f64, f64)>> = ks
        .par_iter()
        .map(|&k| {
            let mut best = 0.0f64;
            let mut best_delta = 0.0f64;
            for (x, s) in ints.iter().zip(&sizes) {
                let (re, im) = x.embedding_f64(k);
                let m = (re * re + im * im).sqrt();
                if m > best {
                    best = m;
                    best_delta = 8.0 * f64::EPSILON * s + 1e-300;
                }
            }
            if best <= 2.0 * best_delta {
                return None; // cancellation; escalate
            }
            Some((best.ln(), best_delta / (best - best_delta)))
        })
        .collect();
    let mut sum = 0.0;
    let mut err = 0.0;
    for t in terms {
        let (v, e) = t?;
        sum += v;
        err += e;
    }
    let sum = sum / phi;
    let err = err / phi + 1e-14 * (1.0 + sum.abs());
    if err <= precision {
        Some((sum, err))
    } else {
        None
    }
}

fn arch_sum_dd(ints: &[Cyclotomic], conductor: u64, precision: f64) -> Result<(f64, f64)> {
    let phi = euler_phi(conductor) as f64;
    let ks = coprime_residues(conductor);
    let terms: Vec<Result<(f64, f64)>> = ks
        .par_iter()
        .map(|&k| {
            let mut best = Dd::zero();
            let mut size = 0.0f64;
            for x in ints {
                let (re, im) = x.embedding_dd(k);
                let m2 = re.mul(re).add(im.mul(im));
                if m2.to_f64() > best.to_f64() {
                    best = m2;
                }
                size += x
                    .coeffs()
                    .iter()
                    .map(|c| crate::rat::rat_to_f64(c).abs())
                    .sum::<f64>();
            }
            let delta = 1e-28 * size + 1e-300;
            let m = best.sqrt();
            if m.to_f64() <= 2.0 * delta {
                return Err(Error::Precision {
                    target: 0.0,
                    achieved: f64::INFINITY,
                });
            }
            Ok((m.ln().to_f64(), delta / m.to_f64()))
        })
        .collect();
    let mut sum = 0.0;
    let mut err = 0.0;
    for t in terms {
        let (v, e) = t?;
        sum += v;
        err += e;
    }
    let sum = sum / phi;
    let err = err / phi + 1e-26 * (1.0 + sum.abs());
    if err <= precision {
        Ok((sum, err))
    } else {
        Err(Error::Precision {
            target: precision,
            achieved: err,
        })
    }
}

// ---------------------------------------------------------------------------
// Axiom suite
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomReport {
    pub samples: usize,
    pub height_of_one: f64,
    pub max_symmetry: f64,
    pub max_monotonicity: f64,
    pub max_additivity: f64,
    pub max_triangle: f64,
    pub max_product_formula: f64,
    pub max_violation: f64,
}

/// Checks the height axioms on random rational and cyclotomic samples.
/// Violations are positive; residuals of equalities are absolute values.
pub fn gvf_axiom_suite(seed: u64, samples: usize) -> Result<AxiomReport> {
    let mut rng = crate::quad::sub_rng(seed, "gvf-axioms", 0);
    let mut rep = AxiomReport {
        samples,
        height_of_one: height_tuple_q(&[Rat::one(), Rat::one()]).abs(),
        max_symmetry: 0.0,
        max_monotonicity: 0.0,
        max_additivity: 0.0,
        max_triangle: 0.0,
        max_product_formula: 0.0,
        max_violation: 0.0,
    };
    let conductors = [1u64, 3, 4, 5, 7, 8, 9, 12, 16, 24];
    let e_arch = std::f64::consts::LN_2;
    let prec = 1e-11;

    let rand_rat = |rng: &mut rand_chacha::ChaCha8Rng| -> Rat {
        let n = rng.gen_range(-99i64..=99);
        let d = rng.gen_range(1i64..=99);
        Rat::new(BigInt::from(n), BigInt::from(d))
    };

    for i in 0..samples {
        // rational tuples
        let n = rng.gen_range(1usize..=3);
        let m = rng.gen_range(1usize..=3);
        let xs: Vec<Rat> = (0..n).map(|_| rand_rat(&mut rng)).collect();
        let ys: Vec<Rat> = (0..m).map(|_| rand_rat(&mut rng)).collect();
        if xs.iter().all(|x| x.is_zero()) || ys.iter().all(|y| y.is_zero()) {
            continue;
        }
        let hx = height_tuple_q(&xs);
        let hy = height_tuple_q(&ys);
        // symmetry: reverse
        let mut xr = xs.clone();
        xr.reverse();
        rep.max_symmetry = rep.max_symmetry.max((height_tuple_q(&xr) - hx).abs());
        // monotonicity
        let mut xy = xs.clone();
        xy.extend(ys.iter().cloned());
        let hxy = height_tuple_q(&xy);
        rep.max_monotonicity = rep.max_monotonicity.max(hx - hxy);
        // Segre additivity
        let mut seg = Vec::new();
        for a in &xs {
            for b in &ys {
                seg.push(a * b);
            }
        }
        if !seg.iter().all(|v| v.is_zero()) {
            let hseg = height_tuple_q(&seg);
            rep.max_additivity = rep.max_additivity.max((hseg - hx - hy).abs());
        }
        // triangle on equal lengths
        if n == m {
            let sum: Vec<Rat> = xs.iter().zip(&ys).map(|(a, b)| a + b).collect();
            if !sum.iter().all(|v| v.is_zero()) {
                let hsum = height_tuple_q(&sum);
                rep.max_triangle = rep.max_triangle.max(hsum - (hxy + e_arch));
            }
        }
        // product formula on a single rational
        let x = &xs[0];
        if !x.is_zero() {
            rep.max_product_formula = rep
                .max_product_formula
                .max(height_tuple_q(&[x.clone()]).abs());
        }

        // cyclotomic samples (cheaper cadence)
        if i % 4 == 0 {
            let nn = conductors[rng.gen_range(0..conductors.len())];
            let phi = euler_phi(nn) as usize;
            let rand_cyclo = |rng: &mut rand_chacha::ChaCha8Rng| -> Cyclotomic {
                Cyclotomic::new(
                    nn,
                    (0..phi)
                        .map(|_| Rat::from_integer(BigInt::from(rng.gen_range(-5i64..=5))))
                        .collect(),
                )
                .expect("valid")
            };
            let x = rand_cyclo(&mut rng);
            let y = rand_cyclo(&mut rng);
            if x.is_zero() || y.is_zero() {
                continue;
            }
            // product formula for x ∈ K^×
            let h = height_tuple_cyclo(&[x.clone()], nn, prec, false)?;
            rep.max_product_formula = rep.max_product_formula.max(h.total.abs());
            // additivity on 2-tuples ⊗
            let pair_x = [x.clone(), Cyclotomic::one(nn)];
            let pair_y = [y.clone(), Cyclotomic::one(nn)];
            let seg = [
                x.mul(&y).expect("same conductor"),
                x.clone(),
                y.clone(),
                Cyclotomic::one(nn),
            ];
            let hx = height_tuple_cyclo(&pair_x, nn, prec, false)?;
            let hy = height_tuple_cyclo(&pair_y, nn, prec, false)?;
            let hs = height_tuple_cyclo(&seg, nn, prec, false)?;
            rep.max_additivity = rep
                .max_additivity
                .max((hs.total - hx.total - hy.total).abs() - hs.err - hx.err - hy.err)
                .max(0.0);
            // monotonicity
            let h1 = height_tuple_cyclo(&[x.clone()], nn, prec, false)?;
            let h2 = height_tuple_cyclo(&[x.clone(), y.clone()], nn, prec, false)?;
            rep.max_monotonicity = rep
                .max_monotonicity
                .max(h1.total - h2.total - h1.err - h2.err);
        }
    }
    rep.max_violation = rep
        .height_of_one
        .max(rep.max_symmetry)
        .max(rep.max_monotonicity)
        .max(rep.max_additivity)
        .max(rep.max_triangle)
        .max(rep.max_product_formula);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_i};

    #[test]
    fn tuple_heights_q() {
        assert!((height_tuple_q(&[rat_i(1), rat_i(2)]) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(height_tuple_q(&[rat_i(1), rat_i(1)]), 0.0);
        // additivity on the Segre product (1,2)⊗(1,3)
        let h = height_tuple_q(&[rat_i(1), rat_i(3), rat_i(2), rat_i(6)]);
        assert!((h - 6f64.ln()).abs() < 1e-15);
        assert_eq!(height_tuple_q(&[rat_i(0)]), f64::NEG_INFINITY);
        // clearing: (1/2, 1/3) → (3, 2)
        assert!((height_tuple_q(&[rat(1, 2), rat(1, 3)]) - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn content_norms() {
        // (1) in ℤ[ζ_5]
        let one = Cyclotomic::one(5);
        assert_eq!(content_norm(&[one], 5).unwrap(), BigInt::from(1));
        // (2) in ℤ (N = 1)
        let two = Cyclotomic::from_rat(1, rat_i(2));
        assert_eq!(content_norm(&[two], 1).unwrap(), BigInt::from(2));
        // (1−ζ₃): norm 3
        let x = Cyclotomic::one(3)
            .sub(&Cyclotomic::zeta_power(3, 1))
            .unwrap();
        assert_eq!(content_norm(&[x], 3).unwrap(), BigInt::from(3));
    }

    #[test]
    fn fast_content_agrees_with_hnf() {
        use rand::Rng;
        let mut rng = crate::quad::sub_rng(5, "content-test", 0);
        for n in [3u64, 5, 7, 8, 12] {
            let phi = euler_phi(n) as usize;
            for _ in 0..6 {
                let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                    Cyclotomic::new(
                        n,
                        (0..phi)
                            .map(|_| Rat::from_integer(BigInt::from(rng.gen_range(-6i64..=6))))
                            .collect(),
                    )
                    .unwrap()
                };
                let xs = [mk(&mut rng), mk(&mut rng)];
                if xs.iter().all(|x| x.is_zero()) {
                    continue;
                }
                let slow = content_norm(&xs, n).unwrap();
                let fast = content_norm_fast(&xs, n).unwrap();
                assert_eq!(slow, fast, "N={n}, xs={xs:?}");
            }
        }
    }

    #[test]
    fn norm_via_resultant_matches_embeddings() {
        let x = Cyclotomic::new(7, vec![rat_i(2), rat_i(-1), rat_i(0), rat_i(1), rat_i(0), rat_i(3)]).unwrap();
        let n = norm_abs(&x).unwrap();
        // product of |σ(x)| over embeddings
        let mut prod = 1.0f64;
        for k in coprime_residues(7) {
            let (re, im) = x.embedding_f64(k);
            prod *= (re * re + im * im).sqrt();
        }
        let nf = n.to_f64().unwrap();
        assert!((prod / nf - 1.0).abs() < 1e-9, "prod={prod} norm={nf}");
    }

    #[test]
    fn projective_height_examples() {
        // [1 : 2] over ℚ
        let p = ProjectivePoint::new(
            1,
            vec![Cyclotomic::one(1), Cyclotomic::from_rat(1, rat_i(2))],
        )
        .unwrap();
        let h = projective_height(&p, 1e-10, false).unwrap();
        assert!((h.total - 2f64.ln()).abs() < 1e-10);

        // [1 : ζ₅] has height 0
        let p = ProjectivePoint::new(5, vec![Cyclotomic::one(5), Cyclotomic::zeta_power(5, 1)]).unwrap();
        let h = projective_height(&p, 1e-10, false).unwrap();
        assert!(h.total.abs() < 1e-10, "{h:?}");

        // [2 : 3] over ℚ(ζ₈) equals its height over ℚ
        let p = ProjectivePoint::new(
            8,
            vec![
                Cyclotomic::from_rat(8, rat_i(2)),
                Cyclotomic::from_rat(8, rat_i(3)),
            ],
        )
        .unwrap();
        let h = projective_height(&p, 1e-10, false).unwrap();
        assert!((h.total - 3f64.ln()).abs() < 1e-9, "{h:?}");
    }

    #[test]
    fn projective_invariance_under_scaling() {
        // multiply by a random λ ∈ ℚ(ζ₁₂)^×: height unchanged
        let n = 12;
        let x = Cyclotomic::new(n, vec![rat_i(1), rat_i(2), rat_i(0), rat_i(-1)]).unwrap();
        let y = Cyclotomic::new(n, vec![rat_i(3), rat_i(0), rat_i(1), rat_i(1)]).unwrap();
        let lam = Cyclotomic::new(n, vec![rat(1, 3), rat_i(1), rat_i(0), rat_i(2)]).unwrap();
        let h1 = height_tuple_cyclo(&[x.clone(), y.clone()], n, 1e-10, false).unwrap();
        let h2 = height_tuple_cyclo(
            &[x.mul(&lam).unwrap(), y.mul(&lam).unwrap()],
            n,
            1e-10,
            false,
        )
        .unwrap();
        assert!((h1.total - h2.total).abs() < 1e-9, "{} vs {}", h1.total, h2.total);
    }

    #[test]
    fn torsion_points_have_zero_height() {
        for n in [2u64, 3, 5, 12, 30, 50] {
            let p = ProjectivePoint::new(
                n,
                vec![Cyclotomic::one(n), Cyclotomic::zeta_power(n, 1)],
            )
            .unwrap();
            let h = projective_height(&p, 1e-10, false).unwrap();
            assert!(h.total.abs() <= 1e-9, "N={n}: {}", h.total);
        }
    }

    #[test]
    fn product_formula_cyclotomic() {
        // x = 1 + ζ₃
        let x = Cyclotomic::one(3).add(&Cyclotomic::zeta_power(3, 1)).unwrap();
        let h = height_tuple_cyclo(&[x], 3, 1e-10, false).unwrap();
        assert!(h.total.abs() < 1e-9, "{h:?}");
        // x = 7/3 over ℚ
        let h = height_tuple_q(&[rat(7, 3)]);
        assert_eq!(h, 0.0);
    }

    #[test]
    fn axiom_suite_small() {
        let rep = gvf_axiom_suite(11, 60).unwrap();
        assert!(rep.max_violation <= 1e-9, "{rep:?}");
    }

    #[test]
    fn ideal_index_vp_matches_hnf() {
        // ideal (1−ζ₃) has norm 3 = 3^1
        let x = Cyclotomic::one(3).sub(&Cyclotomic::zeta_power(3, 1)).unwrap();
        assert_eq!(ideal_index_vp(&[x.clone()], 3, 3, 4).unwrap(), 1);
        // (2) in ℚ(ζ₃): norm 4
        let two = Cyclotomic::from_rat(3, rat_i(2));
        assert_eq!(ideal_index_vp(&[two], 3, 2, 4).unwrap(), 2);
    }

    #[test]
    fn factoring() {
        assert_eq!(
            factor_bigint(&BigInt::from(2 * 2 * 3 * 101 * 101i64)).unwrap(),
            vec![(2, 2), (3, 1), (101, 2)]
        );
        assert_eq!(factor_bigint(&BigInt::from(1)).unwrap(), vec![]);
    }
}
