//! Quadrature on polygons (centroid fan of triangles) and on straight edges.
//!
//! Triangles use symmetric positive-weight rules up to degree 8 and a
//! collapsed tensor Gauss–Legendre rule above that.

use crate::mesh::{distance, polygon_geometry, signed_area, Point};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("polygon is not star-shaped w.r.t. centroid (fan triangle {triangle} has area {area:e})")]
    NotStarShaped { triangle: usize, area: f64 },
    #[error("zero-length edge")]
    ZeroLengthEdge,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss rule on segment a-b exact to `degree`; weights sum to the length.
pub fn edge_quadrature(a: Point, b: Point, degree: usize) -> Result<QuadratureRule, QuadratureError> {
    let len = distance(a, b);
    if len == 0.0 {
        return Err(QuadratureError::ZeroLengthEdge);
    }
    let (nodes, weights) = gauss_legendre(degree / 2 + 1);
    let points = nodes
        .iter()
        .map(|&s| {
            let t = 0.5 * (s + 1.0);
            [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
        })
        .collect();
    Ok(QuadratureRule { points, weights: weights.iter().map(|w| 0.5 * w * len).collect() })
}

/// Barycentric points and weights (summing to 1) of a triangle rule exact to `degree`.
fn triangle_rule(degree: usize) -> Vec<([f64; 3], f64)> {
    let mut rule = Vec::new();
    match degree {
        0 | 1 => {
            rule.push(([1.0 / 3.0; 3], 1.0));
            return rule;
        }
        2 => {
            push_orbit3(&mut rule, 2.0 / 3.0, 1.0 / 3.0);
            return rule;
        }
        3 | 4 => {
            push_orbit3(&mut rule, 0.108103018168070, 0.223381589678011);
            push_orbit3(&mut rule, 0.816847572980459, 0.109951743655322);
            return rule;
        }
        5 => {
            rule.push(([1.0 / 3.0; 3], 0.225));
            push_orbit3(&mut rule, 0.059715871789770, 0.132394152788506);
            push_orbit3(&mut rule, 0.797426985353087, 0.125939180544827);
            return rule;
        }
        6 => {
            push_orbit3(&mut rule, 0.501426509658179, 0.116786275726379);
            push_orbit3(&mut rule, 0.873821971016996, 0.050844906370207);
            push_orbit6(&mut rule, 0.053145049844817, 0.310352451033784, 0.082851075618374);
            return rule;
        }
        7 | 8 => {
            rule.push(([1.0 / 3.0; 3], 0.144315607677787));
            push_orbit3(&mut rule, 0.081414823414554, 0.095091634267285);
            push_orbit3(&mut rule, 0.658861384496480, 0.103217370534718);
            push_orbit3(&mut rule, 0.898905543365938, 0.032458497623198);
            push_orbit6(&mut rule, 0.008394777409958, 0.263112829634638, 0.027230314174435);
            return rule;
        }
        _ => {}
    }
    // collapsed square: x = u, y = v (1 - u), Jacobian (1 - u)
    let (nodes, weights) = gauss_legendre(degree.div_ceil(2) + 1);
    for (&su, &wu) in nodes.iter().zip(&weights) {
        let u = 0.5 * (su + 1.0);
        for (&sv, &wv) in nodes.iter().zip(&weights) {
            let v = 0.5 * (sv + 1.0);
            let (x, y) = (u, v * (1.0 - u));
            // reference triangle area is 1/2, so normalized weight carries a factor 2
            rule.push(([1.0 - x - y, x, y], 2.0 * 0.25 * wu * wv * (1.0 - u)));
        }
    }
    rule
}

/// Orbit of (a, b, b) with b = (1 - a)/2.
fn push_orbit3(rule: &mut Vec<([f64; 3], f64)>, a: f64, w: f64) {
    let b = 0.5 * (1.0 - a);
    rule.extend([([a, b, b], w), ([b, a, b], w), ([b, b, a], w)]);
}

/// Orbit of all permutations of (a, b, 1 - a - b).
fn push_orbit6(rule: &mut Vec<([f64; 3], f64)>, a: f64, b: f64, w: f64) {
    let c = 1.0 - a - b;
    for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        rule.push((p, w));
    }
}

/// Rule on the triangle (p0, p1, p2), exact to `degree`.
pub fn triangle_quadrature(tri: [Point; 3], degree: usize) -> QuadratureRule {
    let area = signed_area(&tri);
    let rule = triangle_rule(degree);
    let mut out = QuadratureRule { points: Vec::with_capacity(rule.len()), weights: Vec::with_capacity(rule.len()) };
    for (bc, w) in rule {
        let x = bc[0] * tri[0][0] + bc[1] * tri[1][0] + bc[2] * tri[2][0];
        let y = bc[0] * tri[0][1] + bc[1] * tri[1][1] + bc[2] * tri[2][1];
        out.points.push([x, y]);
        out.weights.push(w * area);
    }
    out
}

/// Centroid-fan rule over a counter-clockwise polygon, exact to `degree`.
pub fn polygon_quadrature(ring: &[Point], degree: usize) -> Result<QuadratureRule, QuadratureError> {
    let c = polygon_geometry(ring).centroid;
    let n = ring.len();
    let mut out = QuadratureRule::default();
    for i in 0..n {
        let tri = [c, ring[i], ring[(i + 1) % n]];
        let area = signed_area(&tri);
        if area <= 0.0 {
            return Err(QuadratureError::NotStarShaped { triangle: i, area });
        }
        let t = triangle_quadrature(tri, degree);
        out.points.extend(t.points);
        out.weights.extend(t.weights);
    }
    Ok(out)
}
