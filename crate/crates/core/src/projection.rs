//! Element projectors for second-order virtual elements and the operators B1, B2.
//!
//! Scalar local DOFs of an element with `N` vertices are ordered as
//! `[vertex values (N), edge-midpoint values (N), mean over E (1)]`, with the
//! ring rotated to start at its lowest global vertex id and edge `i` joining
//! ring vertices `i` and `i + 1`. Vector DOFs interleave components: local
//! vector DOF `2a + c` is component `c` at scalar slot `a`.
//!
//! Flattened gradients use `F^[i + 2j] = F_ij` and
//! `gradF^[i + 2j + 4k] = dF_ij/dX_k`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::{basis_dim, ScaledMonomialBasis};
use crate::mesh::{polygon_geometry, ElementGeometry, Point, PolygonalMesh};
use crate::quadrature::{edge_quadrature, polygon_quadrature, QuadratureError, QuadratureRule};

/// Polynomial order of the virtual element space.
pub const ORDER: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProjectionError {
    #[error("element {element}: {source}")]
    Quadrature { element: usize, source: QuadratureError },
    #[error("element {element}: singular {which} matrix")]
    Singular { element: usize, which: &'static str },
}

/// How the volume term of the gradient projection evaluates `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolumeProjector {
    /// Second-order H1 projection (reproduces gradients of all quadratics).
    #[default]
    H1Order2,
    /// First-order H1 projection with the mean fixed by the moment DOF.
    H1Order1,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectionSettings {
    pub volume_projector: VolumeProjector,
    /// Volume quadrature degree; `None` selects `2l + 2`.
    pub quadrature_degree: Option<usize>,
}

/// Largest increase of `l` over [`choose_l`] tried for degenerate polygons.
const MAX_EXTRA_ORDER: usize = 8;

/// Smallest `l >= max(k + 1, 3)` with `n_vertices <= 2l - 2k + 5`.
pub fn choose_l(n_vertices: usize, k: usize) -> usize {
    let mut l = (k + 1).max(3);
    while n_vertices + 2 * k > 2 * l + 5 {
        l += 1;
    }
    l
}

/// Global DOF numbering: scalar slots are vertices, then edge midpoints, then element moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    pub n_vertices: usize,
    pub n_edges: usize,
    pub n_elements: usize,
}

impl DofLayout {
    pub fn new(mesh: &PolygonalMesh) -> Self {
        Self { n_vertices: mesh.n_vertices(), n_edges: mesh.n_edges(), n_elements: mesh.n_elements() }
    }

    pub fn n_scalar(&self) -> usize {
        self.n_vertices + self.n_edges + self.n_elements
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.n_scalar()
    }

    pub fn vertex_slot(&self, v: usize) -> usize {
        v
    }

    pub fn edge_slot(&self, edge: usize) -> usize {
        self.n_vertices + edge
    }

    pub fn moment_slot(&self, e: usize) -> usize {
        self.n_vertices + self.n_edges + e
    }

    /// Ring of `e` rotated to start at its lowest vertex id, and the element's global scalar slots.
    pub fn element_slots(&self, mesh: &PolygonalMesh, e: usize) -> (Vec<usize>, Vec<usize>) {
        let ring = rotated_ring(mesh.element(e));
        let n = ring.len();
        let mut slots: Vec<usize> = ring.iter().map(|&v| self.vertex_slot(v)).collect();
        for i in 0..n {
            let edge = mesh.edge_between(ring[i], ring[(i + 1) % n]).expect("ring edge in edge table");
            slots.push(self.edge_slot(edge));
        }
        slots.push(self.moment_slot(e));
        (ring, slots)
    }
}

pub fn rotated_ring(ring: &[usize]) -> Vec<usize> {
    let start = (0..ring.len()).min_by_key(|&i| ring[i]).unwrap_or(0);
    ring[start..].iter().chain(&ring[..start]).copied().collect()
}

/// Interleaved vector slots `2s + c` for scalar slots `s`.
pub fn vector_slots(scalar: &[usize]) -> Vec<usize> {
    scalar.iter().flat_map(|&s| [2 * s, 2 * s + 1]).collect()
}

/// Values of the projected gradient and of its derivatives at one point,
/// one entry per scalar local DOF.
#[derive(Debug, Clone, PartialEq)]
pub struct PointShapes {
    /// `g[j][a]`: d/dX_j of the projected field for unit DOF `a`.
    pub g: [Vec<f64>; 2],
    /// `dg[j][k][a]`: d/dX_k of `g[j]`.
    pub dg: [[Vec<f64>; 2]; 2],
}

#[derive(Debug, Clone)]
pub struct ElementOperators {
    pub element: usize,
    /// Global vertex ids in local (rotated) order.
    pub ring: Vec<usize>,
    pub points: Vec<Point>,
    pub geometry: ElementGeometry,
    pub l: usize,
    pub basis_k: ScaledMonomialBasis,
    pub basis_l: ScaledMonomialBasis,
    /// `dim(P_2) x n_scalar`.
    pub pi_nabla: DMatrix<f64>,
    /// `2 dim(P_l) x n_scalar`; row `c dim(P_l) + b` is the coefficient of `m_b e_c`.
    pub pi_m: DMatrix<f64>,
    pub quadrature: QuadratureRule,
    /// Shapes at each quadrature point.
    pub shapes: Vec<PointShapes>,
}

fn quadratic_trace(t: f64) -> [f64; 3] {
    [(1.0 - t) * (1.0 - 2.0 * t), 4.0 * t * (1.0 - t), t * (2.0 * t - 1.0)]
}

/// H1 projector of order `order` (1 or 2) from the element DOFs.
fn h1_projector(
    element: usize,
    points: &[Point],
    geometry: &ElementGeometry,
    order: usize,
    moments: &DVector<f64>,
) -> Result<DMatrix<f64>, ProjectionError> {
    let n = points.len();
    let ns = 2 * n + 1;
    let basis = ScaledMonomialBasis::new(geometry.centroid, geometry.diameter, order);
    let dim = basis.dim();
    let mut b = DMatrix::zeros(dim, ns);
    b[(0, 2 * n)] = 1.0;
    for i in 0..n {
        let (pa, pb) = (points[i], points[(i + 1) % n]);
        let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        // outward normal times length
        let nl = [pb[1] - pa[1], pa[0] - pb[0]];
        let (ga, gm, gb) = (basis.grad(pa), basis.grad(mid), basis.grad(pb));
        for a in 1..dim {
            let dn = |g: [f64; 2]| (g[0] * nl[0] + g[1] * nl[1]) / 6.0;
            b[(a, i)] += dn(ga[a]);
            b[(a, n + i)] += 4.0 * dn(gm[a]);
            b[(a, (i + 1) % n)] += dn(gb[a]);
        }
    }
    let lap = basis.laplacian(geometry.centroid);
    for a in 1..dim {
        b[(a, 2 * n)] -= lap[a] * geometry.area;
    }
    // D: DOF functionals of each monomial
    let mut d = DMatrix::zeros(ns, dim);
    for i in 0..n {
        let (pa, pb) = (points[i], points[(i + 1) % n]);
        let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
        let (va, vm) = (basis.eval(pa), basis.eval(mid));
        for a in 0..dim {
            d[(i, a)] = va[a];
            d[(n + i, a)] = vm[a];
        }
    }
    for a in 0..dim {
        d[(2 * n, a)] = moments[a];
    }
    let g = &b * &d;
    let lu = g.lu();
    lu.solve(&b).ok_or(ProjectionError::Singular { element, which: "H1 projector" })
}

impl ElementOperators {
    pub fn new(
        mesh: &PolygonalMesh,
        e: usize,
        settings: &ProjectionSettings,
    ) -> Result<Self, ProjectionError> {
        let ring = rotated_ring(mesh.element(e));
        let points: Vec<Point> = ring.iter().map(|&v| mesh.vertices()[v]).collect();
        Self::from_points(e, ring, points, settings)
    }

    /// Operators for a standalone polygon; `ring` only labels the vertices.
    ///
    /// Starts from [`choose_l`] and raises `l` while the projected gradient
    /// has a kernel beyond the constants, which happens when several edges
    /// are collinear (hanging nodes).
    pub fn from_points(
        element: usize,
        ring: Vec<usize>,
        points: Vec<Point>,
        settings: &ProjectionSettings,
    ) -> Result<Self, ProjectionError> {
        let l0 = choose_l(points.len(), ORDER);
        let mut l = l0;
        loop {
            let ops = Self::with_order(element, ring.clone(), points.clone(), settings, l)?;
            if ops.gradient_kernel_dim() == 1 || l >= l0 + MAX_EXTRA_ORDER {
                return Ok(ops);
            }
            l += 1;
        }
    }

    /// Operators with a prescribed gradient projection order `l`.
    pub fn with_order(
        element: usize,
        ring: Vec<usize>,
        points: Vec<Point>,
        settings: &ProjectionSettings,
        l: usize,
    ) -> Result<Self, ProjectionError> {
        let geometry = polygon_geometry(&points);
        let n = points.len();
        let ns = 2 * n + 1;
        let basis_k = ScaledMonomialBasis::new(geometry.centroid, geometry.diameter, ORDER);
        let basis_l = ScaledMonomialBasis::new(geometry.centroid, geometry.diameter, l);
        let nl = basis_l.dim();
        let nk = basis_k.dim();
        let qerr = |source| ProjectionError::Quadrature { element, source };

        // exact rule for products up to degree 2l
        let mass_rule = polygon_quadrature(&points, 2 * l).map_err(qerr)?;
        let mut mass = DMatrix::<f64>::zeros(nl, nl);
        let mut mixed = [DMatrix::<f64>::zeros(nl, nk), DMatrix::<f64>::zeros(nl, nk)];
        let mut moments_k = DVector::<f64>::zeros(nk);
        for (p, &w) in mass_rule.points.iter().zip(&mass_rule.weights) {
            let ml = basis_l.eval(*p);
            let gl = basis_l.grad(*p);
            let mk = basis_k.eval(*p);
            for a in 0..nl {
                for b in 0..nl {
                    mass[(a, b)] += w * ml[a] * ml[b];
                }
                for b in 0..nk {
                    mixed[0][(a, b)] += w * gl[a][0] * mk[b];
                    mixed[1][(a, b)] += w * gl[a][1] * mk[b];
                }
            }
            for b in 0..nk {
                moments_k[b] += w * mk[b] / geometry.area;
            }
        }

        let pi_nabla = h1_projector(element, &points, &geometry, ORDER, &moments_k)?;
        let pi_volume = match settings.volume_projector {
            VolumeProjector::H1Order2 => pi_nabla.clone(),
            VolumeProjector::H1Order1 => {
                let p1 = h1_projector(element, &points, &geometry, 1, &moments_k.rows(0, 3).into_owned())?;
                let mut padded = DMatrix::zeros(nk, ns);
                padded.rows_mut(0, 3).copy_from(&p1);
                padded
            }
        };

        // right-hand side b[(c, beta), a]
        let mut rhs = DMatrix::<f64>::zeros(2 * nl, ns);
        for i in 0..n {
            let (pa, pb) = (points[i], points[(i + 1) % n]);
            let len = crate::mesh::distance(pa, pb);
            let normal = [(pb[1] - pa[1]) / len, (pa[0] - pb[0]) / len];
            let rule = edge_quadrature(pa, pb, l + ORDER).map_err(qerr)?;
            for (p, &w) in rule.points.iter().zip(&rule.weights) {
                let t = crate::mesh::distance(pa, *p) / len;
                let tr = quadratic_trace(t);
                let slots = [i, n + i, (i + 1) % n];
                let ml = basis_l.eval(*p);
                for c in 0..2 {
                    for beta in 0..nl {
                        let f = w * ml[beta] * normal[c];
                        for (s, &slot) in slots.iter().enumerate() {
                            rhs[(c * nl + beta, slot)] += f * tr[s];
                        }
                    }
                }
            }
        }
        for c in 0..2 {
            for beta in 1..nl {
                if beta < 3 {
                    // derivative of a linear monomial is constant: use the moment exactly
                    let dc = if beta == c + 1 { 1.0 / geometry.diameter } else { 0.0 };
                    rhs[(c * nl + beta, 2 * n)] -= dc * geometry.area;
                } else {
                    for a in 0..ns {
                        let mut s = 0.0;
                        for alpha in 0..nk {
                            s += mixed[c][(beta, alpha)] * pi_volume[(alpha, a)];
                        }
                        rhs[(c * nl + beta, a)] -= s;
                    }
                }
            }
        }
        let chol = mass.cholesky().ok_or(ProjectionError::Singular { element, which: "monomial mass" })?;
        let mut pi_m = DMatrix::zeros(2 * nl, ns);
        for c in 0..2 {
            let block = chol.solve(&rhs.rows(c * nl, nl).into_owned());
            pi_m.rows_mut(c * nl, nl).copy_from(&block);
        }

        let degree = settings.quadrature_degree.unwrap_or(2 * l + 2);
        let quadrature = polygon_quadrature(&points, degree).map_err(qerr)?;
        let mut ops = Self {
            element,
            ring,
            points,
            geometry,
            l,
            basis_k,
            basis_l,
            pi_nabla,
            pi_m,
            quadrature,
            shapes: Vec::new(),
        };
        ops.shapes = ops.quadrature.points.iter().map(|&p| ops.shapes_at(p)).collect();
        Ok(ops)
    }

    /// Dimension of the kernel of `v -> Pi_l grad v` over the local space,
    /// measured on the volume rule.
    pub fn gradient_kernel_dim(&self) -> usize {
        let ns = self.n_scalar();
        let mut gram = DMatrix::<f64>::zeros(ns, ns);
        for (s, &w) in self.shapes.iter().zip(&self.quadrature.weights) {
            for g in &s.g {
                for a in 0..ns {
                    for b in 0..ns {
                        gram[(a, b)] += w * g[a] * g[b];
                    }
                }
            }
        }
        let eig = gram.symmetric_eigenvalues();
        let max = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        eig.iter().filter(|v| v.abs() < 1e-10 * max).count()
    }

    pub fn n_vertices(&self) -> usize {
        self.points.len()
    }

    pub fn n_scalar(&self) -> usize {
        2 * self.points.len() + 1
    }

    pub fn n_vector(&self) -> usize {
        2 * self.n_scalar()
    }

    pub fn shapes_at(&self, x: Point) -> PointShapes {
        let nl = self.basis_l.dim();
        let ns = self.n_scalar();
        let m = self.basis_l.eval(x);
        let dm = self.basis_l.grad(x);
        let mut g = [vec![0.0; ns], vec![0.0; ns]];
        let mut dg = [[vec![0.0; ns], vec![0.0; ns]], [vec![0.0; ns], vec![0.0; ns]]];
        for j in 0..2 {
            for beta in 0..nl {
                let row = self.pi_m.row(j * nl + beta);
                for a in 0..ns {
                    let c = row[a];
                    g[j][a] += m[beta] * c;
                    dg[j][0][a] += dm[beta][0] * c;
                    dg[j][1][a] += dm[beta][1] * c;
                }
            }
        }
        PointShapes { g, dg }
    }

    /// Projected value of the scalar field with DOFs `dofs` (order-2 H1 projection).
    pub fn project_value(&self, dofs: &[f64], x: Point) -> f64 {
        let m = self.basis_k.eval(x);
        (0..self.basis_k.dim())
            .map(|a| m[a] * self.pi_nabla.row(a).iter().zip(dofs).map(|(p, d)| p * d).sum::<f64>())
            .sum()
    }

    /// Scalar DOFs of a smooth function: vertex and midpoint values, mean by quadrature.
    pub fn interpolate(&self, f: impl Fn(Point) -> f64) -> Vec<f64> {
        let n = self.points.len();
        let mut out: Vec<f64> = self.points.iter().map(|&p| f(p)).collect();
        for i in 0..n {
            let (pa, pb) = (self.points[i], self.points[(i + 1) % n]);
            out.push(f([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]));
        }
        let rule = polygon_quadrature(&self.points, 12).expect("element accepted at construction");
        out.push(rule.integrate(&f) / self.geometry.area);
        out
    }

    /// Interleaved vector DOFs of a smooth displacement field.
    pub fn interpolate_vector(&self, f: impl Fn(Point) -> [f64; 2]) -> Vec<f64> {
        let ux = self.interpolate(|p| f(p)[0]);
        let uy = self.interpolate(|p| f(p)[1]);
        ux.iter().zip(&uy).flat_map(|(&x, &y)| [x, y]).collect()
    }
}

/// Flattened displacement gradient `B1 u` from precomputed shapes.
pub fn apply_b1(shapes: &PointShapes, u: &[f64]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (a, uv) in u.chunks_exact(2).enumerate() {
        for j in 0..2 {
            let g = shapes.g[j][a];
            out[2 * j] += g * uv[0];
            out[1 + 2 * j] += g * uv[1];
        }
    }
    out
}

/// Flattened gradient of the displacement gradient `B2 u`.
pub fn apply_b2(shapes: &PointShapes, u: &[f64]) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (a, uv) in u.chunks_exact(2).enumerate() {
        for j in 0..2 {
            for k in 0..2 {
                let g = shapes.dg[j][k][a];
                out[2 * j + 4 * k] += g * uv[0];
                out[1 + 2 * j + 4 * k] += g * uv[1];
            }
        }
    }
    out
}

/// Dense 4 x (4N + 2) matrix B1 at `x`.
pub fn b1_matrix(ops: &ElementOperators, x: Point) -> DMatrix<f64> {
    b1_from_shapes(&ops.shapes_at(x))
}

pub fn b1_from_shapes(shapes: &PointShapes) -> DMatrix<f64> {
    let ns = shapes.g[0].len();
    let mut b = DMatrix::zeros(4, 2 * ns);
    for a in 0..ns {
        for i in 0..2 {
            for j in 0..2 {
                b[(i + 2 * j, 2 * a + i)] = shapes.g[j][a];
            }
        }
    }
    b
}

/// Dense 8 x (4N + 2) matrix B2 at `x`.
pub fn b2_matrix(ops: &ElementOperators, x: Point) -> DMatrix<f64> {
    b2_from_shapes(&ops.shapes_at(x))
}

pub fn b2_from_shapes(shapes: &PointShapes) -> DMatrix<f64> {
    let ns = shapes.g[0].len();
    let mut b = DMatrix::zeros(8, 2 * ns);
    for a in 0..ns {
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    b[(i + 2 * j + 4 * k, 2 * a + i)] = shapes.dg[j][k][a];
                }
            }
        }
    }
    b
}

/// Plane-strain linear elastic tensor in the flattened gradient ordering.
pub fn linear_elastic_flat(lambda: f64, mu: f64) -> nalgebra::SMatrix<f64, 4, 4> {
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    nalgebra::SMatrix::from_fn(|r, s| {
        let (i, j) = (r % 2, r / 2);
        let (k, l) = (s % 2, s / 2);
        lambda * delta(i, j) * delta(k, l) + mu * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k))
    })
}

/// `int_E B1^T C B1` for a constant flattened tensor `c`.
pub fn linear_stiffness(ops: &ElementOperators, c: &nalgebra::SMatrix<f64, 4, 4>) -> DMatrix<f64> {
    let nv = ops.n_vector();
    let mut k = DMatrix::zeros(nv, nv);
    let c = DMatrix::from_column_slice(4, 4, c.as_slice());
    for (shapes, &w) in ops.shapes.iter().zip(&ops.quadrature.weights) {
        let b1 = b1_from_shapes(shapes);
        k += (b1.transpose() * &c * &b1) * w;
    }
    k
}

/// Number of polynomial coefficients handled by [`ElementOperators::pi_m`] for order `l`.
pub fn gradient_space_dim(l: usize) -> usize {
    2 * basis_dim(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ops_for(points: Vec<Point>) -> ElementOperators {
        let ring = (0..points.len()).collect();
        ElementOperators::from_points(0, ring, points, &ProjectionSettings::default()).unwrap()
    }

    fn square() -> Vec<Point> {
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    }

    #[test]
    fn collinear_hanging_nodes_raise_the_order() {
        let pts = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.75, 1.0], [0.5, 1.0], [0.25, 1.0], [0.0, 1.0]];
        let low = ElementOperators::with_order(0, (0..7).collect(), pts.clone(), &ProjectionSettings::default(), 3).unwrap();
        assert!(low.gradient_kernel_dim() > 1);
        let ops = ops_for(pts);
        assert!(ops.l > 3);
        assert_eq!(ops.gradient_kernel_dim(), 1);
        assert_eq!(ops_for(square()).l, 3);
    }

    #[test]
    fn choose_l_examples() {
        assert_eq!(choose_l(4, 2), 3);
        assert_eq!(choose_l(3, 2), 3);
        assert_eq!(choose_l(7, 2), 3);
        assert_eq!(choose_l(8, 2), 4);
        assert_eq!(choose_l(9, 2), 4);
        assert_eq!(choose_l(10, 2), 5);
    }

    #[test]
    fn rotated_ring_starts_at_lowest_id() {
        assert_eq!(rotated_ring(&[7, 3, 9, 5]), vec![3, 9, 5, 7]);
    }

    #[test]
    fn h1_projector_reproduces_monomials() {
        let ops = ops_for(vec![[0.1, 0.0], [1.2, 0.2], [1.4, 1.1], [0.5, 1.5], [-0.2, 0.7]]);
        for alpha in 0..6 {
            let dofs = ops.interpolate(|p| ops.basis_k.eval(p)[alpha]);
            let coeffs = &ops.pi_nabla * DVector::from_vec(dofs);
            for beta in 0..6 {
                let expect = if alpha == beta { 1.0 } else { 0.0 };
                assert!((coeffs[beta] - expect).abs() < 1e-12, "{alpha} {beta} {}", coeffs[beta]);
            }
        }
    }

    #[test]
    fn gradient_of_x_is_unit_vector() {
        let ops = ops_for(square());
        let u = ops.interpolate_vector(|p| [p[0], 0.0]);
        for s in &ops.shapes {
            let f = apply_b1(s, &u);
            assert!((f[0] - 1.0).abs() < 1e-13 && f[1].abs() < 1e-13 && f[2].abs() < 1e-13 && f[3].abs() < 1e-13);
        }
    }

    #[test]
    fn b1_orderings() {
        let ops = ops_for(vec![[0.0, 0.0], [2.0, 0.0], [2.5, 1.0], [1.0, 2.0], [-0.5, 1.0]]);
        let x = [1.0, 0.8];
        let b1 = b1_matrix(&ops, x);
        let cases: [(fn(Point) -> [f64; 2], [f64; 4]); 3] = [
            (|p| [p[0], 0.0], [1.0, 0.0, 0.0, 0.0]),
            (|p| [0.0, p[1]], [0.0, 0.0, 0.0, 1.0]),
            (|p| [p[1], 0.0], [0.0, 0.0, 1.0, 0.0]),
        ];
        for (f, expect) in cases {
            let u = DVector::from_vec(ops.interpolate_vector(f));
            let got = &b1 * u;
            for r in 0..4 {
                assert!((got[r] - expect[r]).abs() < 1e-12, "{got} vs {expect:?}");
            }
        }
    }

    #[test]
    fn b2_orderings() {
        let ops = ops_for(vec![[0.0, 0.0], [2.0, 0.0], [2.5, 1.0], [1.0, 2.0], [-0.5, 1.0]]);
        let x = [1.1, 0.7];
        let b2 = b2_matrix(&ops, x);
        let u = DVector::from_vec(ops.interpolate_vector(|p| [p[0] * p[0], 0.0]));
        let got = &b2 * u;
        for r in 0..8 {
            let expect = if r == 0 { 2.0 } else { 0.0 };
            assert!((got[r] - expect).abs() < 1e-11, "row {r}: {}", got[r]);
        }
        let u = DVector::from_vec(ops.interpolate_vector(|p| [p[0] * p[1], 0.0]));
        let got = &b2 * u;
        for r in 0..8 {
            let expect = if r == 2 || r == 4 { 1.0 } else { 0.0 };
            assert!((got[r] - expect).abs() < 1e-11, "row {r}: {}", got[r]);
        }
        assert!((got[2] - got[4]).abs() < 1e-12);
        let u = DVector::from_vec(ops.interpolate_vector(|p| [0.3 + 2.0 * p[0] - p[1], -1.0 + 0.5 * p[1]]));
        assert!((&b2 * u).amax() < 1e-11);
    }

    #[test]
    fn linear_stiffness_has_three_rigid_modes() {
        for points in [
            square(),
            vec![[0.0, 0.0], [1.0, 0.0], [0.2, 0.9]],
            (0..7)
                .map(|i| {
                    let t = i as f64 * 2.0 * std::f64::consts::PI / 7.0;
                    [t.cos(), t.sin()]
                })
                .collect(),
        ] {
            let ops = ops_for(points);
            let (k, mu) = (20.0, 10.0);
            let c = linear_elastic_flat(k - 2.0 * mu / 3.0, mu);
            let stiff = linear_stiffness(&ops, &c);
            let eig = stiff.symmetric_eigen().eigenvalues;
            let max = eig.amax();
            let zeros = eig.iter().filter(|&&v| v.abs() < 1e-10 * max).count();
            assert_eq!(zeros, 3, "{eig}");
        }
    }

    #[test]
    fn first_order_volume_variant_still_reproduces_linear_gradients() {
        let settings = ProjectionSettings { volume_projector: VolumeProjector::H1Order1, quadrature_degree: None };
        let ops = ElementOperators::from_points(0, vec![0, 1, 2, 3], square(), &settings).unwrap();
        let u = ops.interpolate_vector(|p| [2.0 * p[0] + p[1], -p[0]]);
        for s in &ops.shapes {
            let f = apply_b1(s, &u);
            for (got, want) in f.iter().zip([2.0, -1.0, 1.0, 0.0]) {
                assert!((got - want).abs() < 1e-12);
            }
        }
    }
}
