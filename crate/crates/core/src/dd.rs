//! Double-double arithmetic (~31 significant digits).
//!
//! One precision doubling step above f64 is all the height computations
//! need: archimedean embedding sums are certified by evaluating at f64 and,
//! if the error interval is too wide, re-evaluating here.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

pub const DD_PI: Dd = Dd {
    hi: std::f64::consts::PI,
    lo: 1.2246467991473532e-16,
};
pub const DD_2PI: Dd = Dd {
    hi: 6.283185307179586,
    lo: 2.4492935982947064e-16,
};
pub const DD_LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.3190468138462996e-17,
};
const DD_SQRT_HALF: Dd = Dd {
    hi: std::f64::consts::FRAC_1_SQRT_2,
    lo: -4.833646656726457e-17,
};

impl Dd {
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn from_i64(x: i64) -> Dd {
        // i64 may exceed 2^53; split exactly
        let hi = x as f64;
        let lo = (x - hi as i64) as f64;
        Dd { hi, lo }
    }

    pub fn zero() -> Dd {
        Dd { hi: 0.0, lo: 0.0 }
    }

    pub fn one() -> Dd {
        Dd { hi: 1.0, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let (s1b, s2b) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1b, s2b + t2);
        Dd { hi, lo }
    }

    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, o.hi);
        let p2 = p2 + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    pub fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(Dd::from_f64(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(Dd::from_f64(q2)));
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from_f64(q3))
    }

    pub fn scale(self, c: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, c);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * c);
        Dd { hi, lo }
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            self.neg()
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::zero();
        }
        let y0 = self.hi.sqrt();
        // one Newton step in dd: y = (y0 + x/y0) / 2
        let y = Dd::from_f64(y0)
            .add(self.div(Dd::from_f64(y0)))
            .scale(0.5);
        // second step for full dd accuracy
        y.add(self.div(y)).scale(0.5)
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -709.0 {
            return Dd::zero();
        }
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = self.sub(DD_LN2.scale(k));
        // Taylor on |r| ≤ ln2/2
        let mut term = Dd::one();
        let mut sum = Dd::one();
        for n in 1..40i64 {
            term = term.mul(r).div(Dd::from_i64(n));
            sum = sum.add(term);
            if term.hi.abs() < 1e-35 {
                break;
            }
        }
        let p = 2f64.powi(k as i32);
        sum.scale(p)
    }

    pub fn ln(self) -> Dd {
        debug_assert!(self.hi > 0.0);
        let y0 = self.hi.ln();
        // Newton for e^y = x: y ← y + x·e^{−y} − 1
        let y = Dd::from_f64(y0);
        let corr = self.mul(y.neg().exp()).sub(Dd::one());
        y.add(corr)
    }

    pub fn ln_u64(p: u64) -> Dd {
        Dd::from_i64(p as i64).ln()
    }

    /// (sin, cos) of 2π·(num/den), with exact rational octant reduction.
    pub fn sincos_2pi_frac(num: i64, den: i64) -> (Dd, Dd) {
        assert!(den > 0);
        let num = num.rem_euclid(den);
        // octant o = floor(8 num / den), residue num/den − o/8
        let o = (8 * num) / den;
        let res_num = 8 * num - o * den; // residue ∈ [0, den)
        // angle = 2π/8 · (o + res_num/den); small part θ = (π/4)(res_num/den)
        let theta = DD_PI
            .scale(0.25)
            .mul(Dd::from_i64(res_num).div(Dd::from_i64(den)));
        let (s, c) = sincos_taylor(theta);
        // rotate by o·π/4
        let (so, co) = octant_sincos(o as usize % 8);
        let sin = s.mul(co).add(c.mul(so));
        let cos = c.mul(co).sub(s.mul(so));
        (sin, cos)
    }
}

fn sincos_taylor(x: Dd) -> (Dd, Dd) {
    // |x| ≤ π/4
    let x2 = x.mul(x);
    let mut s = x;
    let mut term = x;
    let mut n = 1i64;
    loop {
        term = term.mul(x2).div(Dd::from_i64(-(n + 1) * (n + 2)));
        s = s.add(term);
        n += 2;
        if term.hi.abs() < 1e-35 || n > 40 {
            break;
        }
    }
    let mut c = Dd::one();
    let mut term = Dd::one();
    let mut n = 0i64;
    loop {
        term = term.mul(x2).div(Dd::from_i64(-(n + 1) * (n + 2)));
        c = c.add(term);
        n += 2;
        if term.hi.abs() < 1e-35 || n > 40 {
            break;
        }
    }
    (s, c)
}

fn octant_sincos(o: usize) -> (Dd, Dd) {
    let h = DD_SQRT_HALF;
    match o {
        0 => (Dd::zero(), Dd::one()),
        1 => (h, h),
        2 => (Dd::one(), Dd::zero()),
        3 => (h, h.neg()),
        4 => (Dd::zero(), Dd::one().neg()),
        5 => (h.neg(), h.neg()),
        6 => (Dd::one().neg(), Dd::zero()),
        7 => (h.neg(), h),
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, b: f64, tol: f64) {
        assert!(
            (a.to_f64() - b).abs() < tol,
            "dd {} vs {b}",
            a.to_f64()
        );
    }

    #[test]
    fn basic_arith() {
        let a = Dd::from_f64(0.1);
        let b = Dd::from_f64(0.2);
        close(a.add(b), 0.3, 1e-16);
        close(a.mul(b), 0.02, 1e-17);
        close(Dd::from_i64(1).div(Dd::from_i64(3)).scale(3.0), 1.0, 1e-30);
    }

    #[test]
    fn ln_and_exp() {
        close(Dd::ln_u64(2), std::f64::consts::LN_2, 1e-16);
        // residual of exp(ln x) − x at dd precision
        for p in [2u64, 3, 5, 7, 101, 1201] {
            let l = Dd::ln_u64(p);
            let back = l.exp().sub(Dd::from_i64(p as i64));
            assert!(back.to_f64().abs() < 1e-27 * p as f64, "p={p}");
        }
    }

    #[test]
    fn sqrt_newton() {
        let two = Dd::from_i64(2);
        let r = two.sqrt();
        let back = r.mul(r).sub(two);
        assert!(back.to_f64().abs() < 1e-30);
    }

    #[test]
    fn sincos_special_angles() {
        // cos(2π/6) = 1/2, sin(2π/4) = 1
        let (_, c) = Dd::sincos_2pi_frac(1, 6);
        assert!((c.to_f64() - 0.5).abs() < 1e-30);
        let (s, c) = Dd::sincos_2pi_frac(1, 4);
        assert!((s.to_f64() - 1.0).abs() < 1e-30);
        assert!(c.to_f64().abs() < 1e-30);
        // pythagorean identity at an awkward fraction
        let (s, c) = Dd::sincos_2pi_frac(5, 1201);
        let one = s.mul(s).add(c.mul(c));
        assert!((one.to_f64() - 1.0).abs() < 1e-30);
        // against f64 for sanity
        let th = 2.0 * std::f64::consts::PI * 5.0 / 1201.0;
        assert!((s.to_f64() - th.sin()).abs() < 1e-14);
    }

    #[test]
    fn negative_fractions_reduce() {
        let (s1, c1) = Dd::sincos_2pi_frac(-3, 7);
        let (s2, c2) = Dd::sincos_2pi_frac(4, 7);
        assert!((s1.to_f64() - s2.to_f64()).abs() < 1e-30);
        assert!((c1.to_f64() - c2.to_f64()).abs() < 1e-30);
    }
}
