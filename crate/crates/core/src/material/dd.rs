//! Double-double arithmetic (about 32 significant digits).
//!
//! Used by the finite-difference oracle: central second differences at step
//! `1e-5` lose ten digits to cancellation, which plain `f64` cannot spare.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

const LN2: DoubleDouble = DoubleDouble { hi: std::f64::consts::LN_2, lo: 2.319_046_813_846_299_6e-17 };

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub fn new(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    fn scale_pow2(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Self { hi: self.hi * f, lo: self.lo * f }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self - o * Self::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Self::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + Self::new(q3)
    }
}

macro_rules! mixed {
    ($tr:ident, $f:ident) => {
        impl $tr<f64> for DoubleDouble {
            type Output = Self;
            fn $f(self, o: f64) -> Self {
                $tr::$f(self, DoubleDouble::new(o))
            }
        }
    };
}
mixed!(Add, add);
mixed!(Sub, sub);
mixed!(Mul, mul);
mixed!(Div, div);

impl Scalar for DoubleDouble {
    fn cst(v: f64) -> Self {
        Self::new(v)
    }

    fn re(&self) -> f64 {
        self.hi
    }

    fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Self::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::new(0.0);
        }
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = (self - LN2 * k).scale_pow2(-10);
        // Taylor series of exp(r) - 1 with |r| < 4e-4
        let mut term = r;
        let mut sum = r;
        for n in 2..14 {
            term = term * r / n as f64;
            sum = sum + term;
        }
        // (1 + s)^2 - 1 = 2s + s^2, applied ten times
        for _ in 0..10 {
            sum = sum * 2.0 + sum * sum;
        }
        (sum + 1.0).scale_pow2(k as i32)
    }

    fn ln(self) -> Self {
        let y = Self::new(self.hi.ln());
        y + self * (-y).exp() - 1.0
    }

    fn sqrt(self) -> Self {
        let y = Self::new(self.hi.sqrt());
        y + (self - y * y) / (y * 2.0)
    }
}
