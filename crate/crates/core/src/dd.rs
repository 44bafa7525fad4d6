//! Double-double arithmetic (`hi + lo`, about 32 significant digits) for
//! cost values that must resolve changes far below one f64 ulp.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
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

const FRAC_PI_2: Dd = Dd {
    hi: std::f64::consts::FRAC_PI_2,
    lo: 6.123_233_995_736_766e-17,
};

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let r = self - Dd::from(b).mul_f64(q1);
        let q2 = r.hi / b;
        let r = r - Dd::from(b).mul_f64(q2);
        let q3 = r.hi / b;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from(q3)
    }

    /// `(sin x, cos x)` by reduction modulo `π/2` and Taylor series.
    pub fn sin_cos(self) -> (Dd, Dd) {
        if !self.is_finite() {
            return (Dd::from(f64::NAN), Dd::from(f64::NAN));
        }
        let k = (self.hi / FRAC_PI_2.hi).round();
        let r = self - FRAC_PI_2.mul_f64(k);
        let r2 = r * r;
        let (mut s, mut c) = (r, Dd::from(1.0));
        let (mut ts, mut tc) = (r, Dd::from(1.0));
        // |r| ≤ π/4 after reduction, so 20 terms reach below 1e-34.
        for j in 1..=20 {
            let j = j as f64;
            ts = -(ts * r2).div_f64((2.0 * j) * (2.0 * j + 1.0));
            tc = -(tc * r2).div_f64((2.0 * j - 1.0) * (2.0 * j));
            s = s + ts;
            c = c + tc;
            if ts.hi.abs() < 1e-34 && tc.hi.abs() < 1e-34 {
                break;
            }
        }
        match (k as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
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

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_sums_and_products() {
        let a = Dd::from(1.0) + Dd::from(1e-20);
        assert_eq!((a.hi, a.lo), (1.0, 1e-20));
        let third = Dd::from(1.0).div_f64(3.0);
        let back = third.mul_f64(3.0) - Dd::from(1.0);
        assert!(back.hi.abs() < 1e-31);
        assert!(Dd::from(1.0) + Dd::from(1e-25) > Dd::from(1.0));
    }

    #[test]
    fn trig_matches_f64_and_identity() {
        for x in [0.0, 1e-8, 0.3, 0.785, 1.6, -2.9, 3.2, 7.5, -40.0, 300.0] {
            let (s, c) = Dd::from(x).sin_cos();
            assert!((s.hi - x.sin()).abs() <= 2.0 * f64::EPSILON, "{x}");
            assert!((c.hi - x.cos()).abs() <= 2.0 * f64::EPSILON, "{x}");
            let one = s * s + c * c - Dd::from(1.0);
            assert!(one.hi.abs() < 1e-30, "{x}: {one:?}");
        }
        assert!(Dd::from(f64::NAN).sin_cos().0.hi.is_nan());
        assert!(Dd::from(f64::INFINITY).sin_cos().1.hi.is_nan());
    }

    #[test]
    fn trig_reference_values() {
        // sin(1) and cos(1) to 34 digits.
        let (s, c) = Dd::from(1.0).sin_cos();
        let sin1 = Dd::new(0.8414709848078965, 1.776845092935536e-18);
        let cos1 = Dd::new(0.5403023058681398, -4.760954612604417e-17);
        assert!((s - sin1).hi.abs() < 1e-30, "{:?}", s - sin1);
        assert!((c - cos1).hi.abs() < 1e-30, "{:?}", c - cos1);
    }
}
