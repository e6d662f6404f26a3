//! Packed sparse integer polynomials and the subresultant PRS, sized for the
//! generic-coefficient Sylvester resultants (≤ 16 variables, per-variable
//! degree < 256, i128 coefficients with overflow checks).

use std::collections::HashMap;

pub const MAX_VARS: usize = 16;

/// Terms sorted by packed key ascending; key = exponents in 8-bit lanes,
/// variable 0 in the highest lane (packed order = lex order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spoly {
    pub terms: Vec<(u128, i128)>,
}

pub fn pack(exps: &[u32]) -> u128 {
    debug_assert!(exps.len() <= MAX_VARS);
    let mut k: u128 = 0;
    for &e in exps {
        debug_assert!(e < 256);
        k = (k << 8) | e as u128;
    }
    k
}

pub fn unpack(mut key: u128, n_vars: usize) -> Vec<u32> {
    let mut out = vec![0u32; n_vars];
    for i in (0..n_vars).rev() {
        out[i] = (key & 0xff) as u32;
        key >>= 8;
    }
    out
}

impl Spoly {
    pub fn zero() -> Spoly {
        Spoly { terms: vec![] }
    }

    pub fn constant(c: i128) -> Spoly {
        if c == 0 {
            Spoly::zero()
        } else {
            Spoly {
                terms: vec![(0, c)],
            }
        }
    }

    pub fn var(n_vars: usize, idx: usize) -> Spoly {
        let mut e = vec![0u32; n_vars];
        e[idx] = 1;
        Spoly {
            terms: vec![(pack(&e), 1)],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn neg(&self) -> Spoly {
        Spoly {
            terms: self.terms.iter().map(|&(k, c)| (k, -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Spoly) -> Spoly {
        let work = self.terms.len() as u64 * other.terms.len() as u64;
        if work > 1 << 22 {
            return self.mul_parallel(other);
        }
        let mut acc: HashMap<u128, i128> = HashMap::with_capacity(self.terms.len() * 2);
        for &(ka, ca) in &self.terms {
            for &(kb, cb) in &other.terms {
                let k = ka + kb; // disjoint 8-bit lanes: addition = exponent sum
                let c = ca.checked_mul(cb).expect("coefficient overflow");
                let slot = acc.entry(k).or_insert(0);
                *slot = slot.checked_add(c).expect("coefficient overflow");
            }
        }
        let mut terms: Vec<(u128, i128)> = acc.into_iter().filter(|&(_, c)| c != 0).collect();
        terms.sort_unstable_by_key(|&(k, _)| k);
        Spoly { terms }
    }

    fn mul_parallel(&self, other: &Spoly) -> Spoly {
        use rayon::prelude::*;
        let (big, small) = if self.terms.len() >= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let chunk = (big.terms.len() / (rayon::current_num_threads() * 4)).max(1024);
        let partials: Vec<HashMap<u128, i128>> = big
            .terms
            .par_chunks(chunk)
            .map(|terms| {
                let mut acc: HashMap<u128, i128> = HashMap::with_capacity(terms.len() * 2);
                for &(ka, ca) in terms {
                    for &(kb, cb) in &small.terms {
                        let k = ka + kb;
                        let c = ca.checked_mul(cb).expect("coefficient overflow");
                        let slot = acc.entry(k).or_insert(0);
                        *slot = slot.checked_add(c).expect("coefficient overflow");
                    }
                }
                acc
            })
            .collect();
        let mut acc: HashMap<u128, i128> = HashMap::new();
        for p in partials {
            for (k, c) in p {
                let slot = acc.entry(k).or_insert(0);
                *slot = slot.checked_add(c).expect("coefficient overflow");
            }
        }
        let mut terms: Vec<(u128, i128)> = acc.into_iter().filter(|&(_, c)| c != 0).collect();
        terms.sort_unstable_by_key(|&(k, _)| k);
        Spoly { terms }
    }

    pub fn sub(&self, other: &Spoly) -> Spoly {
        // sorted merge
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            if j >= other.terms.len()
                || (i < self.terms.len() && self.terms[i].0 < other.terms[j].0)
            {
                out.push(self.terms[i]);
                i += 1;
            } else if i >= self.terms.len() || other.terms[j].0 < self.terms[i].0 {
                out.push((other.terms[j].0, -other.terms[j].1));
                j += 1;
            } else {
                let c = self.terms[i]
                    .1
                    .checked_sub(other.terms[j].1)
                    .expect("coefficient overflow");
                if c != 0 {
                    out.push((self.terms[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
        Spoly { terms: out }
    }

    /// Exact division (panics if not divisible): leading-term elimination in
    /// the packed lex order.
    pub fn div_exact(&self, den: &Spoly) -> Spoly {
        let (dk, dc) = *den.terms.last().expect("nonzero divisor");
        let mut rem = self.clone();
        let mut q: Vec<(u128, i128)> = Vec::new();
        while let Some(&(rk, rc)) = rem.terms.last() {
            let k = rk.checked_sub(dk).expect("exact division (exponents)");
            // verify no borrow across lanes
            debug_assert!(
                unpack(rk, MAX_VARS)
                    .iter()
                    .zip(unpack(dk, MAX_VARS).iter())
                    .all(|(a, b)| a >= b),
                "exact division (lanes)"
            );
            assert_eq!(rc % dc, 0, "exact division (coefficients)");
            let c = rc / dc;
            let t = Spoly {
                terms: vec![(k, c)],
            };
            rem = rem.sub(&t.mul(den));
            q.push((k, c));
        }
        q.sort_unstable_by_key(|&(k, _)| k);
        Spoly { terms: q }
    }

    pub fn pow(&self, e: u32) -> Spoly {
        let mut acc = Spoly::constant(1);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Resultant of two polynomials in R[x] with coefficients in the symbol ring
/// (low x-degree first), by the subresultant pseudo-remainder sequence.
pub fn resultant_prs(a: &[Spoly], b: &[Spoly]) -> Spoly {
    let mut f: Vec<Spoly> = trim(a.to_vec());
    let mut g: Vec<Spoly> = trim(b.to_vec());
    if f.is_empty() || g.is_empty() {
        return Spoly::zero();
    }
    let mut sign = 1i8;
    if f.len() < g.len() {
        if (f.len() - 1) % 2 == 1 && (g.len() - 1) % 2 == 1 {
            sign = -sign;
        }
        std::mem::swap(&mut f, &mut g);
    }
    let mut gg = Spoly::constant(1);
    let mut h = Spoly::constant(1);
    loop {
        let (df, dg) = (f.len() - 1, g.len() - 1);
        if dg == 0 {
            // res = sign · lc(g)^{df} / h^{df−1}
            let num = g[0].pow(df as u32);
            let res = if df >= 1 {
                num.div_exact(&h.pow(df as u32 - 1))
            } else {
                Spoly::constant(1)
            };
            return if sign < 0 { res.neg() } else { res };
        }
        let d = (df - dg) as u32;
        if df % 2 == 1 && dg % 2 == 1 {
            sign = -sign;
        }
        let r = pseudo_rem(&f, &g);
        if r.is_empty() {
            return Spoly::zero();
        }
        f = g;
        let div = gg.mul(&h.pow(d));
        g = r.into_iter().map(|c| c.div_exact(&div)).collect();
        gg = f.last().unwrap().clone();
        h = if d == 0 {
            h
        } else {
            gg.pow(d).div_exact(&h.pow(d - 1))
        };
    }
}

/// Pseudo-remainder: lc(g)^{deg f − deg g + 1} · f reduced by g.
fn pseudo_rem(f: &[Spoly], g: &[Spoly]) -> Vec<Spoly> {
    let dg = g.len() - 1;
    let lc = g.last().unwrap();
    let mut rem: Vec<Spoly> = f.to_vec();
    let mut e = (f.len() - g.len() + 1) as i64;
    loop {
        rem = trim(rem);
        if rem.len() <= dg {
            break;
        }
        // rem ← lc(g)·rem − lc(rem)·x^{deg−dg}·g: the lead cancels exactly
        let k = rem.len() - 1;
        let c = rem[k].clone();
        for item in rem.iter_mut() {
            *item = item.mul(lc);
        }
        for j in 0..=dg {
            let t = c.mul(&g[j]);
            rem[k - dg + j] = rem[k - dg + j].sub(&t);
        }
        e -= 1;
    }
    if e > 0 && !rem.is_empty() {
        let boost = lc.pow(e as u32);
        for item in rem.iter_mut() {
            *item = item.mul(&boost);
        }
    }
    rem
}

fn trim(mut v: Vec<Spoly>) -> Vec<Spoly> {
    while v.last().map_or(false, |c| c.is_zero()) {
        v.pop();
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_roundtrip() {
        let e = vec![1u32, 0, 3, 7];
        assert_eq!(unpack(pack(&e), 4), e);
    }

    #[test]
    fn arithmetic() {
        let x = Spoly::var(2, 0);
        let y = Spoly::var(2, 1);
        let p = x.mul(&y).sub(&Spoly::constant(2));
        let q = p.mul(&p);
        // (xy − 2)² = x²y² − 4xy + 4
        assert_eq!(q.terms.len(), 3);
        assert_eq!(q.div_exact(&p), p);
    }

    #[test]
    fn resultant_integers() {
        // res(x−2, x−5) over constants = ±3
        let a = vec![Spoly::constant(-2), Spoly::constant(1)];
        let b = vec![Spoly::constant(-5), Spoly::constant(1)];
        let r = resultant_prs(&a, &b);
        assert_eq!(r.terms.len(), 1);
        assert_eq!(r.terms[0].1.abs(), 3);
    }

    #[test]
    fn resultant_generic_deg1() {
        // res(a0 + a1 x, b0 + b1 x) = ±(a0 b1 − a1 b0)
        let a0 = Spoly::var(4, 0);
        let a1 = Spoly::var(4, 1);
        let b0 = Spoly::var(4, 2);
        let b1 = Spoly::var(4, 3);
        let r = resultant_prs(&[a0, a1], &[b0, b1]);
        assert_eq!(r.terms.len(), 2);
        let coeffs: Vec<i128> = r.terms.iter().map(|&(_, c)| c).collect();
        assert_eq!(coeffs.iter().map(|c| c.abs()).sum::<i128>(), 2);
    }
}
