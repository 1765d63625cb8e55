//! Vertical gap between two deformed surface chains.

use serde::{Deserialize, Serialize};

use crate::mesh::PolygonalMesh;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GapError {
    #[error("unknown boundary set `{0}`")]
    UnknownSet(String),
    #[error("gap chain `{0}` is empty")]
    EmptyChain(&'static str),
    #[error("gap chains share vertex {0}")]
    Overlapping(usize),
    #[error("vertex {0} is outside the mesh")]
    OutOfRange(usize),
    #[error("no upper vertex lies above the lower chain")]
    NoOverlap,
    #[error("deformed position is not finite")]
    NonFinite,
}

/// Names of the boundary sets bounding the gap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapProbeConfig {
    pub upper: String,
    pub lower: String,
}

/// Vertex chains of the two surfaces, ordered by reference `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProbe {
    pub upper: Vec<usize>,
    pub lower: Vec<usize>,
}

impl GapProbe {
    pub fn new(mesh: &PolygonalMesh, upper: Vec<usize>, lower: Vec<usize>) -> Result<Self, GapError> {
        if upper.is_empty() {
            return Err(GapError::EmptyChain("upper"));
        }
        if lower.is_empty() {
            return Err(GapError::EmptyChain("lower"));
        }
        if let Some(&v) = upper.iter().chain(&lower).find(|&&v| v >= mesh.n_vertices()) {
            return Err(GapError::OutOfRange(v));
        }
        if let Some(&v) = upper.iter().find(|v| lower.contains(v)) {
            return Err(GapError::Overlapping(v));
        }
        let sorted = |mut c: Vec<usize>| {
            c.sort_by(|&a, &b| mesh.vertices()[a][0].total_cmp(&mesh.vertices()[b][0]));
            c
        };
        Ok(Self { upper: sorted(upper), lower: sorted(lower) })
    }

    pub fn from_sets(mesh: &PolygonalMesh, config: &GapProbeConfig) -> Result<Self, GapError> {
        let chain = |name: &str| {
            mesh.boundary_set(name)
                .map(|s| s.vertices.clone())
                .ok_or_else(|| GapError::UnknownSet(name.to_string()))
        };
        Self::new(mesh, chain(&config.upper)?, chain(&config.lower)?)
    }
}

/// Deformed position of a global node (vertex or edge midpoint) given its
/// reference position and scalar slot.
fn node(reference: [f64; 2], slot: usize, u: &[f64]) -> Result<[f64; 2], GapError> {
    let d = u.get(2 * slot..2 * slot + 2).ok_or(GapError::OutOfRange(slot))?;
    let q = [reference[0] + d[0], reference[1] + d[1]];
    if q[0].is_finite() && q[1].is_finite() {
        Ok(q)
    } else {
        Err(GapError::NonFinite)
    }
}

/// Deformed quadratic trace `[start, midpoint, end]` of each lower-chain
/// segment. Consecutive vertices without a mesh edge get a straight segment.
fn lower_curves(mesh: &PolygonalMesh, u: &[f64], chain: &[usize]) -> Result<Vec<[[f64; 2]; 3]>, GapError> {
    let x = mesh.vertices();
    chain
        .windows(2)
        .map(|w| {
            let (a, b) = (node(x[w[0]], w[0], u)?, node(x[w[1]], w[1], u)?);
            let m = match mesh.edge_between(w[0], w[1]) {
                Some(id) => {
                    let r = [0.5 * (x[w[0]][0] + x[w[1]][0]), 0.5 * (x[w[0]][1] + x[w[1]][1])];
                    node(r, mesh.n_vertices() + id, u)?
                }
                None => [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
            };
            Ok([a, m, b])
        })
        .collect()
}

/// Heights of the curve `c` above abscissa `px`.
fn heights_at(c: &[[f64; 2]; 3], px: f64) -> Vec<f64> {
    let [a, m, b] = *c;
    let coef = |i: usize| (2.0 * a[i] - 4.0 * m[i] + 2.0 * b[i], -3.0 * a[i] + 4.0 * m[i] - b[i], a[i]);
    let (x2, x1, x0) = coef(0);
    let (y2, y1, y0) = coef(1);
    let c0 = x0 - px;
    let scale = x2.abs().max(x1.abs()).max(c0.abs()).max(f64::MIN_POSITIVE);
    let mut roots = Vec::new();
    if x2.abs() <= 1e-12 * scale {
        if x1 != 0.0 {
            roots.push(-c0 / x1);
        }
    } else {
        let disc = x1 * x1 - 4.0 * x2 * c0;
        if disc >= 0.0 {
            let q = -0.5 * (x1 + x1.signum() * disc.sqrt());
            if q != 0.0 {
                roots.push(c0 / q);
            }
            roots.push(q / x2);
        }
    }
    roots
        .into_iter()
        .filter(|s| (-1e-12..=1.0 + 1e-12).contains(s))
        .map(|s| {
            let s = s.clamp(0.0, 1.0);
            y0 + s * (y1 + s * y2)
        })
        .collect()
}

/// Smallest vertical distance from the upper-chain nodes (vertices and edge
/// midpoints) down to the lower chain, whose edges are followed along their
/// quadratic traces, in the configuration displaced by `u` (global
/// interleaved DOFs). Clipped at zero.
pub fn measure_gap(mesh: &PolygonalMesh, u: &[f64], probe: &GapProbe) -> Result<f64, GapError> {
    let x = mesh.vertices();
    let mut upper = Vec::new();
    for (i, &v) in probe.upper.iter().enumerate() {
        upper.push(node(x[v], v, u)?);
        if let Some(&w) = probe.upper.get(i + 1) {
            if let Some(id) = mesh.edge_between(v, w) {
                let r = [0.5 * (x[v][0] + x[w][0]), 0.5 * (x[v][1] + x[w][1])];
                upper.push(node(r, mesh.n_vertices() + id, u)?);
            }
        }
    }
    let mut best = f64::INFINITY;
    if probe.lower.len() == 1 {
        let l = node(x[probe.lower[0]], probe.lower[0], u)?;
        for p in &upper {
            if (p[0] - l[0]).abs() <= 1e-12 {
                best = best.min(p[1] - l[1]);
            }
        }
    } else {
        let curves = lower_curves(mesh, u, &probe.lower)?;
        for p in &upper {
            for c in &curves {
                for y in heights_at(c, p[0]) {
                    best = best.min(p[1] - y);
                }
            }
        }
    }
    if best.is_finite() {
        Ok(best.max(0.0))
    } else {
        Err(GapError::NoOverlap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_benchmark_mesh, BenchmarkId, BoxGeometry};

    #[test]
    fn undeformed_box_gap_is_the_cavity_height() {
        let mesh = generate_benchmark_mesh(BenchmarkId::BoxSelfContact, 1);
        let cfg = GapProbeConfig { upper: "upper-flange-inner".into(), lower: "lower-flange-inner".into() };
        let probe = GapProbe::from_sets(&mesh, &cfg).unwrap();
        let u = vec![0.0; 2 * (mesh.n_vertices() + mesh.n_edges())];
        let g = measure_gap(&mesh, &u, &probe).unwrap();
        assert!((g - BoxGeometry::default().initial_gap()).abs() < 1e-12);

        let mut shifted = u.clone();
        for (i, &v) in probe.upper.iter().enumerate() {
            shifted[2 * v + 1] = -0.05;
            if let Some(id) = probe.upper.get(i + 1).and_then(|&w| mesh.edge_between(v, w)) {
                shifted[2 * (mesh.n_vertices() + id) + 1] = -0.05;
            }
        }
        let g2 = measure_gap(&mesh, &shifted, &probe).unwrap();
        assert!((g2 - (g - 0.05)).abs() < 1e-12);
        for d in shifted.iter_mut().skip(1).step_by(2) {
            if *d < 0.0 {
                *d = -1.0;
            }
        }
        assert_eq!(measure_gap(&mesh, &shifted, &probe).unwrap(), 0.0);
    }

    #[test]
    fn curved_lower_edge_is_followed_exactly() {
        // lower edge bent into y = 0.4 x (1 - x) by its midpoint; upper point above x = 0.25
        let mesh = PolygonalMesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.25, 1.0]],
            vec![vec![0, 1, 2, 3]],
            vec![crate::mesh::Region::ThirdMedium],
            Default::default(),
        );
        let probe = GapProbe::new(&mesh, vec![3], vec![0, 1]).unwrap();
        let mut u = vec![0.0; 2 * (mesh.n_vertices() + mesh.n_edges())];
        let id = mesh.edge_between(0, 1).unwrap();
        u[2 * (4 + id) + 1] = 0.1;
        let g = measure_gap(&mesh, &u, &probe).unwrap();
        assert!((g - (1.0 - 0.4 * 0.25 * 0.75)).abs() < 1e-14);
    }

    #[test]
    fn invalid_chains() {
        let mesh = generate_benchmark_mesh(BenchmarkId::BoxSelfContact, 0);
        assert_eq!(GapProbe::new(&mesh, vec![], vec![1]), Err(GapError::EmptyChain("upper")));
        assert_eq!(GapProbe::new(&mesh, vec![1], vec![1]), Err(GapError::Overlapping(1)));
        assert_eq!(GapProbe::new(&mesh, vec![usize::MAX], vec![1]), Err(GapError::OutOfRange(usize::MAX)));
        let cfg = GapProbeConfig { upper: "nope".into(), lower: "lower-flange-inner".into() };
        assert_eq!(GapProbe::from_sets(&mesh, &cfg), Err(GapError::UnknownSet("nope".into())));
    }
}
