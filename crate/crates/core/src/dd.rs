//! Double-double arithmetic (an unevaluated sum `hi + lo` of two `f64`s,
//! about 106 significant bits). Only what the mirror map needs: `ln(1 + t)`
//! and `exp(t) - 1`.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `1/n!` for `n = 0..=12`.
fn inverse_factorials() -> &'static [Dd; 13] {
    static TABLE: OnceLock<[Dd; 13]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [Dd::ONE; 13];
        for n in 1..13 {
            t[n] = t[n - 1].div_f64(n as f64);
        }
        t
    })
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn from_f64(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    /// Exact product of two doubles.
    pub fn product(a: f64, b: f64) -> Self {
        let (p, e) = two_prod(a, b);
        Dd { hi: p, lo: e }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        quick_two_sum(p, e + self.lo * b)
    }

    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - Dd::product(q1, b);
        let q2 = r.hi / b;
        let r = r - Dd::product(q2, b);
        let q3 = r.hi / b;
        quick_two_sum(q1, q2) + Dd::from_f64(q3)
    }

    /// `e^self = (1 + s) 2^k` with `|s| < 4e-4`.
    fn exp_parts(self) -> (Dd, i32) {
        let k = (self.hi / LN2.hi).round();
        // r = (x - k ln 2) / 2^10, |r| <= 3.4e-4
        let r = (self - LN2.mul_f64(k)).mul_f64(1.0 / 1024.0);
        // e^r - 1 by Taylor series
        let inv = inverse_factorials();
        let mut pow = r;
        let mut sum = r;
        for f in &inv[2..] {
            pow = pow * r;
            let term = pow * *f;
            sum = sum + term;
            if term.hi.abs() < 1e-34 * sum.hi.abs() {
                break;
            }
        }
        // (1 + s)^2 - 1 = s (2 + s)
        for _ in 0..10 {
            sum = sum * (sum + Dd::from_f64(2.0));
        }
        (sum, k as i32)
    }

    /// `exp(self)`; overflows to infinity past `ln(f64::MAX)`.
    pub fn exp(self) -> Self {
        if self.hi > 709.78 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let (s, k) = self.exp_parts();
        (s + Dd::ONE).mul_f64(2f64.powi(k))
    }

    /// `exp(self) - 1`, accurate for small and large arguments alike.
    pub fn exp_m1(self) -> Self {
        if self.hi == 0.0 {
            return self;
        }
        if self.hi > 709.78 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return -Dd::ONE;
        }
        let (s, k) = self.exp_parts();
        if k == 0 {
            return s;
        }
        (s + Dd::ONE).mul_f64(2f64.powi(k)) - Dd::ONE
    }

    /// `ln(1 + self)` for `self > -1`.
    pub fn ln_1p(self) -> Self {
        let t = self.to_f64();
        if t == 0.0 {
            return self;
        }
        let y = Dd::from_f64(t.ln_1p());
        // one Newton step on exp(y) = 1 + t
        if t.abs() < 0.5 {
            // y += (1 + t) e^{-y} - 1 = t + m + t m with m = e^{-y} - 1
            let m = (-y).exp_m1();
            y + (self + m + self * m)
        } else {
            y + ((self + Dd::ONE) * (-y).exp() - Dd::ONE)
        }
    }
}

impl Add for Dd {
    type Output = Dd;

    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }
}

impl Sub for Dd {
    type Output = Dd;

    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Neg for Dd {
    type Output = Dd;

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;

    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        quick_two_sum(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_m1_matches_std_to_double_precision() {
        for &x in &[1e-20, 1e-8, -3e-5, 0.3, 1.0, -1.0, 7.5, 20.7, 300.0, -40.0] {
            let got = Dd::from_f64(x).exp_m1().to_f64();
            let want = x.exp_m1();
            assert!(((got - want) / want).abs() < 4e-16, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn exp_of_ln2_is_two() {
        let one = LN2.exp_m1();
        assert!((one - Dd::ONE).to_f64().abs() < 1e-30);
    }

    #[test]
    fn ln_1p_inverts_exp_m1() {
        for &x in &[1e-250, 1e-12, 0.5, 3.0, 20.0, 500.0] {
            let t = Dd::from_f64(x).exp_m1();
            let back = t.ln_1p();
            assert!(((back - Dd::from_f64(x)).to_f64() / x).abs() < 1e-28, "x={x}");
        }
    }

    #[test]
    fn division_is_accurate() {
        let q = Dd::ONE.div_f64(3.0);
        let r = q.mul_f64(3.0) - Dd::ONE;
        assert!(r.to_f64().abs() < 1e-31);
    }
}
