//! Scaled monomial bases `m_a(x) = ((x - x_E)/h_E)^a1 ((y - y_E)/h_E)^a2`.
//!
//! Members are ordered by total degree, then by decreasing power of x:
//! `1, xi, eta, xi^2, xi eta, eta^2, ...`.

use crate::mesh::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMonomialBasis {
    pub centroid: Point,
    pub diameter: f64,
    pub order: usize,
    exponents: Vec<[usize; 2]>,
}

/// Number of monomials of total degree at most `order` in two variables.
pub fn basis_dim(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// Exponents of the basis members in canonical order.
pub fn exponents(order: usize) -> Vec<[usize; 2]> {
    (0..=order).flat_map(|d| (0..=d).map(move |j| [d - j, j])).collect()
}

/// Index of the monomial with exponents `a` in the canonical order.
pub fn index_of(a: [usize; 2]) -> usize {
    let d = a[0] + a[1];
    basis_dim(d) - (d + 1) + a[1]
}

/// Result of [`monomial_eval`]: one row per basis member.
#[derive(Debug, Clone, PartialEq)]
pub enum MonomialValues {
    Value(Vec<f64>),
    Gradient(Vec<[f64; 2]>),
    Hessian(Vec<[[f64; 2]; 2]>),
}

impl ScaledMonomialBasis {
    pub fn new(centroid: Point, diameter: f64, order: usize) -> Self {
        Self { centroid, diameter, order, exponents: exponents(order) }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[[usize; 2]] {
        &self.exponents
    }

    fn scaled(&self, x: Point) -> [f64; 2] {
        [(x[0] - self.centroid[0]) / self.diameter, (x[1] - self.centroid[1]) / self.diameter]
    }

    /// Powers `xi^0..=xi^order` and likewise for eta.
    fn powers(&self, x: Point) -> [Vec<f64>; 2] {
        let s = self.scaled(x);
        let mut out = [vec![1.0; self.order + 1], vec![1.0; self.order + 1]];
        for (d, pw) in out.iter_mut().enumerate() {
            for p in 1..=self.order {
                pw[p] = pw[p - 1] * s[d];
            }
        }
        out
    }

    pub fn eval(&self, x: Point) -> Vec<f64> {
        let [px, py] = self.powers(x);
        self.exponents.iter().map(|a| px[a[0]] * py[a[1]]).collect()
    }

    pub fn grad(&self, x: Point) -> Vec<[f64; 2]> {
        let [px, py] = self.powers(x);
        let h = self.diameter;
        let d = |pw: &[f64], a: usize| if a == 0 { 0.0 } else { a as f64 * pw[a - 1] };
        self.exponents
            .iter()
            .map(|a| [d(&px, a[0]) * py[a[1]] / h, px[a[0]] * d(&py, a[1]) / h])
            .collect()
    }

    pub fn hessian(&self, x: Point) -> Vec<[[f64; 2]; 2]> {
        let [px, py] = self.powers(x);
        let h2 = self.diameter * self.diameter;
        let d = |pw: &[f64], a: usize| if a == 0 { 0.0 } else { a as f64 * pw[a - 1] };
        let dd = |pw: &[f64], a: usize| if a < 2 { 0.0 } else { (a * (a - 1)) as f64 * pw[a - 2] };
        self.exponents
            .iter()
            .map(|a| {
                let xy = d(&px, a[0]) * d(&py, a[1]) / h2;
                [[dd(&px, a[0]) * py[a[1]] / h2, xy], [xy, px[a[0]] * dd(&py, a[1]) / h2]]
            })
            .collect()
    }

    /// Constant Laplacian of each member for degree <= 2; general members are evaluated at `x`.
    pub fn laplacian(&self, x: Point) -> Vec<f64> {
        self.hessian(x).iter().map(|h| h[0][0] + h[1][1]).collect()
    }
}

pub fn monomial_eval(basis: &ScaledMonomialBasis, x: Point, deriv: usize) -> MonomialValues {
    match deriv {
        0 => MonomialValues::Value(basis.eval(x)),
        1 => MonomialValues::Gradient(basis.grad(x)),
        2 => MonomialValues::Hessian(basis.hessian(x)),
        _ => panic!("derivative order {deriv} not supported (0, 1 or 2)"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ordering_and_index() {
        assert_eq!(exponents(2), vec![[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]);
        for (i, a) in exponents(5).into_iter().enumerate() {
            assert_eq!(index_of(a), i);
        }
        assert_eq!(basis_dim(3), 10);
    }

    #[test]
    fn value_at_centroid() {
        let b = ScaledMonomialBasis::new([0.3, -0.2], 0.7, 3);
        let v = b.eval([0.3, -0.2]);
        assert_eq!(v[0], 1.0);
        assert!(v[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gradient_of_xi() {
        let b = ScaledMonomialBasis::new([0.0, 0.0], 0.5, 2);
        for x in [[0.1, 0.2], [-0.3, 0.7]] {
            assert_eq!(b.grad(x)[1], [2.0, 0.0]);
        }
    }

    #[test]
    fn hessian_of_xi_eta() {
        let b = ScaledMonomialBasis::new([1.0, 1.0], 0.5, 2);
        let h = b.hessian([1.3, 0.4])[index_of([1, 1])];
        assert_eq!(h, [[0.0, 4.0], [4.0, 0.0]]);
        match monomial_eval(&b, [1.0, 1.0], 2) {
            MonomialValues::Hessian(hs) => assert_eq!(hs.len(), 6),
            _ => unreachable!(),
        }
    }

    proptest! {
        #[test]
        fn hessian_matches_fd_of_gradient(cx in -1.0..1.0f64, cy in -1.0..1.0f64, h in 0.1..2.0f64,
                                          dx in -0.5..0.5f64, dy in -0.5..0.5f64) {
            let b = ScaledMonomialBasis::new([cx, cy], h, 4);
            let x = [cx + dx * h, cy + dy * h];
            let step = 1e-5 * h;
            let hess = b.hessian(x);
            for k in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[k] += step;
                xm[k] -= step;
                let (gp, gm) = (b.grad(xp), b.grad(xm));
                for a in 0..b.dim() {
                    for i in 0..2 {
                        let fd = (gp[a][i] - gm[a][i]) / (2.0 * step);
                        let exact = hess[a][i][k];
                        let scale = exact.abs().max(1.0 / (h * h));
                        prop_assert!((fd - exact).abs() <= 1e-6 * scale, "a={a} i={i} k={k} fd={fd} exact={exact}");
                    }
                }
            }
        }
    }
}
