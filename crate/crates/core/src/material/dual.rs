//! Second-order forward-mode dual numbers with `N` independent variables.
//!
//! Each value carries its gradient and the upper triangle of its Hessian;
//! products and elementary functions propagate both by the chain rule.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual2<const N: usize> {
    pub re: f64,
    pub g: [f64; N],
    /// Hessian entries `h[i][j]` with `j >= i`; the lower triangle is not maintained.
    pub h: [[f64; N]; N],
}

impl<const N: usize> Dual2<N> {
    pub fn constant(re: f64) -> Self {
        Self { re, g: [0.0; N], h: [[0.0; N]; N] }
    }

    /// The `i`-th independent variable with value `re`.
    pub fn var(re: f64, i: usize) -> Self {
        let mut d = Self::constant(re);
        d.g[i] = 1.0;
        d
    }

    /// Seeds all variables from `values`.
    pub fn vars(values: [f64; N]) -> [Self; N] {
        std::array::from_fn(|i| Self::var(values[i], i))
    }

    /// `f(self)` given `f`, `f'` and `f''` at `self.re`.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f0);
        for i in 0..N {
            out.g[i] = f1 * self.g[i];
        }
        for i in 0..N {
            let gi = f2 * self.g[i];
            for j in i..N {
                out.h[i][j] = f1 * self.h[i][j] + gi * self.g[j];
            }
        }
        out
    }

    /// Symmetric Hessian entry.
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.h[i.min(j)][i.max(j)]
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.re;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}

impl<const N: usize> Add for Dual2<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self.re += o.re;
        for i in 0..N {
            self.g[i] += o.g[i];
            for j in i..N {
                self.h[i][j] += o.h[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Dual2<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<const N: usize> Neg for Dual2<N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.re = -self.re;
        for i in 0..N {
            self.g[i] = -self.g[i];
            for j in i..N {
                self.h[i][j] = -self.h[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Mul for Dual2<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut out = Self::constant(self.re * o.re);
        for i in 0..N {
            out.g[i] = self.re * o.g[i] + o.re * self.g[i];
            for j in i..N {
                out.h[i][j] = self.re * o.h[i][j]
                    + o.re * self.h[i][j]
                    + self.g[i] * o.g[j]
                    + o.g[i] * self.g[j];
            }
        }
        out
    }
}

impl<const N: usize> Div for Dual2<N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<const N: usize> Add<f64> for Dual2<N> {
    type Output = Self;
    fn add(mut self, o: f64) -> Self {
        self.re += o;
        self
    }
}

impl<const N: usize> Sub<f64> for Dual2<N> {
    type Output = Self;
    fn sub(mut self, o: f64) -> Self {
        self.re -= o;
        self
    }
}

impl<const N: usize> Mul<f64> for Dual2<N> {
    type Output = Self;
    fn mul(mut self, o: f64) -> Self {
        self.re *= o;
        for i in 0..N {
            self.g[i] *= o;
            for j in i..N {
                self.h[i][j] *= o;
            }
        }
        self
    }
}

impl<const N: usize> Div<f64> for Dual2<N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: f64) -> Self {
        self * (1.0 / o)
    }
}

impl<const N: usize> Scalar for Dual2<N> {
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }
    fn re(&self) -> f64 {
        self.re
    }
    fn ln(self) -> Self {
        let r = 1.0 / self.re;
        self.chain(self.re.ln(), r, -r * r)
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e, e)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.re))
    }
    fn powf(self, p: f64) -> Self {
        let v = self.re.powf(p);
        self.chain(v, p * v / self.re, p * (p - 1.0) * v / (self.re * self.re))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_and_hessian() {
        let [x, y] = Dual2::<2>::vars([2.0, 3.0]);
        let f = x * x * y;
        assert_eq!(f.re, 12.0);
        assert_eq!(f.g, [12.0, 4.0]);
        assert_eq!([f.hess(0, 0), f.hess(0, 1), f.hess(1, 0), f.hess(1, 1)], [6.0, 4.0, 4.0, 0.0]);
    }

    #[test]
    fn elementary_functions() {
        let [x] = Dual2::<1>::vars([0.7]);
        let e = x.exp();
        assert!((e.h[0][0] - 0.7f64.exp()).abs() < 1e-15);
        let l = x.ln();
        assert!((l.g[0] - 1.0 / 0.7).abs() < 1e-15);
        assert!((l.h[0][0] + 1.0 / 0.49).abs() < 1e-13);
        let p = x.powf(-2.0 / 3.0);
        let expect = (-2.0 / 3.0) * (-5.0 / 3.0) * 0.7f64.powf(-8.0 / 3.0);
        assert!((p.h[0][0] - expect).abs() < 1e-13);
        let s = x.sqrt();
        assert!((s.h[0][0] + 0.25 * 0.7f64.powf(-1.5)).abs() < 1e-14);
        let q = x / (x + 1.0);
        assert!((q.g[0] - 1.0 / 1.7f64.powi(2)).abs() < 1e-15);
    }
}
