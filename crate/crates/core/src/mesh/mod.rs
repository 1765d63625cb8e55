//! Polygonal meshes with region tags and named boundary sets.
//!
//! Elements are counter-clockwise vertex rings. Hanging nodes need no special
//! treatment: a vertex sitting on the side of a coarser neighbour is simply an
//! extra ring vertex of that neighbour, so the edge table stays conforming.

mod generate;
mod io;

pub use generate::{box_mesh, generate_benchmark_mesh, BenchmarkId, BoxGeometry};
pub use io::{load_mesh, mesh_from_json, mesh_to_json, save_mesh};

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

/// 2D coordinate.
pub type Point = [f64; 2];

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("unknown benchmark id `{0}`")]
    UnknownBenchmark(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid mesh: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("element index {0} out of range")]
    ElementIndex(usize),
    #[error("unknown region tag `{0}`")]
    UnknownRegion(String),
}

/// Region tag of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Body(u32),
    ThirdMedium,
}

impl Region {
    pub fn is_medium(self) -> bool {
        matches!(self, Region::ThirdMedium)
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Body(id) => write!(f, "body:{id}"),
            Region::ThirdMedium => f.write_str("medium"),
        }
    }
}

impl std::str::FromStr for Region {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "medium" {
            return Ok(Region::ThirdMedium);
        }
        s.strip_prefix("body:")
            .and_then(|id| id.parse().ok())
            .map(Region::Body)
            .ok_or_else(|| MeshError::UnknownRegion(s.to_string()))
    }
}

/// Named collection of vertices and edges used for boundary conditions and probes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundarySet {
    pub vertices: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
}

/// An undirected mesh edge with its incident elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub elements: Vec<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.elements.len() == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub centroid: Point,
    pub area: f64,
    /// Largest distance between two vertices of the ring.
    pub diameter: f64,
    pub n_vertices: usize,
}

/// Problems found by [`PolygonalMesh::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    DegenerateRing { element: usize },
    VertexOutOfRange { element: usize, vertex: usize },
    NegativeArea { element: usize, area: f64 },
    NonConformingEdge { edge: [usize; 2], reason: String },
    IsolatedMediumElement { element: usize },
    RegionCount { elements: usize, regions: usize },
    BadBoundarySet { name: String, reason: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DegenerateRing { element } => write!(f, "degenerate ring, element {element}"),
            Diagnostic::VertexOutOfRange { element, vertex } => {
                write!(f, "vertex {vertex} out of range, element {element}")
            }
            Diagnostic::NegativeArea { element, area } => {
                write!(f, "negative area, element {element} (area {area:e})")
            }
            Diagnostic::NonConformingEdge { edge, reason } => {
                write!(f, "non-conforming edge ({}, {}): {reason}", edge[0], edge[1])
            }
            Diagnostic::IsolatedMediumElement { element } => {
                write!(f, "third-medium element {element} has no medium neighbour")
            }
            Diagnostic::RegionCount { elements, regions } => {
                write!(f, "{regions} region tags for {elements} elements")
            }
            Diagnostic::BadBoundarySet { name, reason } => write!(f, "boundary set `{name}`: {reason}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PolygonalMesh {
    vertices: Vec<Point>,
    elements: Vec<Vec<usize>>,
    regions: Vec<Region>,
    boundary_sets: BTreeMap<String, BoundarySet>,
    edges: Vec<Edge>,
    edge_lookup: HashMap<(usize, usize), usize>,
    element_edges: Vec<Vec<usize>>,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl PolygonalMesh {
    /// Builds the edge table. No validation happens here; see [`Self::validate`].
    ///
    /// Rings with out-of-range indices are kept as given but contribute no edges.
    pub fn new(
        vertices: Vec<Point>,
        elements: Vec<Vec<usize>>,
        regions: Vec<Region>,
        boundary_sets: BTreeMap<String, BoundarySet>,
    ) -> Self {
        let mut edges: Vec<Edge> = Vec::new();
        let mut edge_lookup = HashMap::new();
        let mut element_edges = Vec::with_capacity(elements.len());
        for (e, ring) in elements.iter().enumerate() {
            let n = ring.len();
            let mut ids = Vec::with_capacity(n);
            if ring.iter().all(|&v| v < vertices.len()) {
                for i in 0..n {
                    let (a, b) = (ring[i], ring[(i + 1) % n]);
                    if a == b {
                        continue;
                    }
                    let id = *edge_lookup.entry(edge_key(a, b)).or_insert_with(|| {
                        edges.push(Edge { vertices: [a.min(b), a.max(b)], elements: Vec::new() });
                        edges.len() - 1
                    });
                    edges[id].elements.push(e);
                    ids.push(id);
                }
            }
            element_edges.push(ids);
        }
        Self { vertices, elements, regions, boundary_sets, edges, edge_lookup, element_edges }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn element(&self, e: usize) -> &[usize] {
        &self.elements[e]
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, e: usize) -> Region {
        self.regions[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge ids of element `e`, in ring order (edge i joins ring vertex i and i+1).
    pub fn element_edges(&self, e: usize) -> &[usize] {
        &self.element_edges[e]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&edge_key(a, b)).copied()
    }

    pub fn boundary_sets(&self) -> &BTreeMap<String, BoundarySet> {
        &self.boundary_sets
    }

    pub fn boundary_set(&self, name: &str) -> Option<&BoundarySet> {
        self.boundary_sets.get(name)
    }

    pub fn insert_boundary_set(&mut self, name: impl Into<String>, set: BoundarySet) {
        self.boundary_sets.insert(name.into(), set);
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn ring_points(&self, e: usize) -> Vec<Point> {
        self.elements[e].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn element_geometry(&self, e: usize) -> Result<ElementGeometry, MeshError> {
        if e >= self.elements.len() {
            return Err(MeshError::ElementIndex(e));
        }
        Ok(polygon_geometry(&self.ring_points(e)))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_elements()).map(|e| signed_area(&self.ring_points(e))).sum()
    }

    /// Boundary edges (one incident element) whose endpoints both satisfy `pred`.
    pub fn boundary_edges_where(&self, mut pred: impl FnMut(usize, &Edge) -> bool) -> Vec<[usize; 2]> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(id, edge)| edge.is_boundary() && pred(*id, edge))
            .map(|(_, edge)| edge.vertices)
            .collect()
    }

    /// One diagnostic per violated invariant; empty when the mesh is valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        if self.regions.len() != self.elements.len() {
            out.push(Diagnostic::RegionCount { elements: self.elements.len(), regions: self.regions.len() });
        }
        for (e, ring) in self.elements.iter().enumerate() {
            if let Some(&v) = ring.iter().find(|&&v| v >= self.vertices.len()) {
                out.push(Diagnostic::VertexOutOfRange { element: e, vertex: v });
                continue;
            }
            let mut sorted = ring.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if ring.len() < 3 || sorted.len() != ring.len() {
                out.push(Diagnostic::DegenerateRing { element: e });
                continue;
            }
            let area = signed_area(&self.ring_points(e));
            if area <= 0.0 {
                out.push(Diagnostic::NegativeArea { element: e, area });
            }
        }

        let grid = VertexGrid::new(&self.vertices);
        for edge in &self.edges {
            let [a, b] = edge.vertices;
            if edge.elements.len() > 2 {
                out.push(Diagnostic::NonConformingEdge {
                    edge: edge.vertices,
                    reason: format!("{} incident elements", edge.elements.len()),
                });
            } else if edge.elements.len() == 2 && edge.elements[0] == edge.elements[1] {
                out.push(Diagnostic::NonConformingEdge {
                    edge: edge.vertices,
                    reason: "edge used twice by one element".into(),
                });
            } else if edge.is_boundary() {
                if let Some(&(_, v)) = grid.points_on_segment(&self.vertices, a, b).first() {
                    out.push(Diagnostic::NonConformingEdge {
                        edge: edge.vertices,
                        reason: format!("vertex {v} lies inside the edge but is not a ring vertex"),
                    });
                }
            }
        }

        let medium: Vec<usize> = (0..self.elements.len().min(self.regions.len()))
            .filter(|&e| self.regions[e].is_medium())
            .collect();
        if medium.len() > 1 {
            for &e in &medium {
                let has_neighbour = self.element_edges[e].iter().any(|&id| {
                    self.edges[id].elements.iter().any(|&o| o != e && self.regions[o].is_medium())
                });
                if !has_neighbour {
                    out.push(Diagnostic::IsolatedMediumElement { element: e });
                }
            }
        }

        for (name, set) in &self.boundary_sets {
            if let Some(&v) = set.vertices.iter().find(|&&v| v >= self.vertices.len()) {
                out.push(Diagnostic::BadBoundarySet { name: name.clone(), reason: format!("vertex {v} out of range") });
            }
            if let Some(edge) = set.edges.iter().find(|e| self.edge_between(e[0], e[1]).is_none()) {
                out.push(Diagnostic::BadBoundarySet {
                    name: name.clone(),
                    reason: format!("({}, {}) is not a mesh edge", edge[0], edge[1]),
                });
            }
        }
        out
    }
}

pub fn signed_area(ring: &[Point]) -> f64 {
    let n = ring.len();
    let mut twice = 0.0;
    for i in 0..n {
        let p = ring[i];
        let q = ring[(i + 1) % n];
        twice += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * twice
}

/// Area-weighted centroid, shoelace area and vertex diameter of a polygon.
pub fn polygon_geometry(ring: &[Point]) -> ElementGeometry {
    let n = ring.len();
    // shift to the first vertex to limit cancellation on small elements far from the origin
    let o = ring[0];
    let mut twice = 0.0;
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = [ring[i][0] - o[0], ring[i][1] - o[1]];
        let q = [ring[(i + 1) % n][0] - o[0], ring[(i + 1) % n][1] - o[1]];
        let cross = p[0] * q[1] - q[0] * p[1];
        twice += cross;
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    let area = 0.5 * twice;
    let centroid = [o[0] + cx / (3.0 * twice), o[1] + cy / (3.0 * twice)];
    let mut diameter: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            diameter = diameter.max(distance(ring[i], ring[j]));
        }
    }
    ElementGeometry { centroid, area, diameter, n_vertices: n }
}

pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Uniform bucket grid over vertex coordinates for segment queries.
pub(crate) struct VertexGrid {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl VertexGrid {
    pub(crate) fn new(points: &[Point]) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in points {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        if points.is_empty() {
            lo = [0.0; 2];
            hi = [1.0; 2];
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let target = (points.len() as f64).sqrt().max(1.0);
        let cell = span / target;
        let nx = (((hi[0] - lo[0]) / cell) as usize + 1).max(1);
        let ny = (((hi[1] - lo[1]) / cell) as usize + 1).max(1);
        let mut grid = Self { origin: lo, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] };
        for (i, p) in points.iter().enumerate() {
            let (ix, iy) = grid.cell_of(*p);
            grid.buckets[iy * nx + ix].push(i);
        }
        grid
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let ix = ((p[0] - self.origin[0]) / self.cell).floor().max(0.0) as usize;
        let iy = ((p[1] - self.origin[1]) / self.cell).floor().max(0.0) as usize;
        (ix.min(self.nx - 1), iy.min(self.ny - 1))
    }

    /// Vertices strictly inside segment a-b, as (parameter, index) sorted along the segment.
    pub(crate) fn points_on_segment(&self, points: &[Point], a: usize, b: usize) -> Vec<(f64, usize)> {
        let (pa, pb) = (points[a], points[b]);
        let len = distance(pa, pb);
        let tol = 1e-9 * len.max(1e-12);
        let lo = [pa[0].min(pb[0]) - tol, pa[1].min(pb[1]) - tol];
        let hi = [pa[0].max(pb[0]) + tol, pa[1].max(pb[1]) + tol];
        let (x0, y0) = self.cell_of(lo);
        let (x1, y1) = self.cell_of(hi);
        let dir = [(pb[0] - pa[0]) / len, (pb[1] - pa[1]) / len];
        let mut found = Vec::new();
        for iy in y0..=y1 {
            for ix in x0..=x1 {
                for &v in &self.buckets[iy * self.nx + ix] {
                    if v == a || v == b {
                        continue;
                    }
                    let d = [points[v][0] - pa[0], points[v][1] - pa[1]];
                    let t = d[0] * dir[0] + d[1] * dir[1];
                    let off = d[0] * dir[1] - d[1] * dir[0];
                    if off.abs() <= tol && t > tol && t < len - tol {
                        found.push((t / len, v));
                    }
                }
            }
        }
        found.sort_by(|x, y| x.0.total_cmp(&y.0));
        found
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> PolygonalMesh {
        PolygonalMesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![vec![0, 1, 2, 3]],
            vec![Region::Body(0)],
            BTreeMap::new(),
        )
    }

    #[test]
    fn unit_square_geometry() {
        let g = unit_square().element_geometry(0).unwrap();
        assert!((g.centroid[0] - 0.5).abs() < 1e-15 && (g.centroid[1] - 0.5).abs() < 1e-15);
        assert!((g.area - 1.0).abs() < 1e-15);
        assert!((g.diameter - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(g.n_vertices, 4);
    }

    #[test]
    fn triangle_geometry() {
        let g = polygon_geometry(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!((g.area - 0.5).abs() < 1e-15);
        assert!((g.centroid[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((g.centroid[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn regular_hexagon_area() {
        let ring: Vec<Point> = (0..6)
            .map(|i| {
                let t = i as f64 * std::f64::consts::PI / 3.0;
                [t.cos(), t.sin()]
            })
            .collect();
        let g = polygon_geometry(&ring);
        assert!((g.area - 3.0 * 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!(g.centroid[0].abs() < 1e-14 && g.centroid[1].abs() < 1e-14);
        assert!((g.diameter - 2.0).abs() < 1e-14);
    }

    #[test]
    fn element_index_out_of_range() {
        assert!(matches!(unit_square().element_geometry(3), Err(MeshError::ElementIndex(3))));
    }

    #[test]
    fn negative_orientation_is_reported() {
        let mesh = PolygonalMesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![vec![0, 3, 2, 1]],
            vec![Region::Body(0)],
            BTreeMap::new(),
        );
        let diags = mesh.validate();
        assert_eq!(diags.len(), 1);
        assert!(diags[0].to_string().starts_with("negative area, element 0"));
    }

    #[test]
    fn repeated_vertex_is_degenerate() {
        let mesh = PolygonalMesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]],
            vec![vec![0, 1, 1, 2]],
            vec![Region::Body(0)],
            BTreeMap::new(),
        );
        assert!(matches!(mesh.validate()[0], Diagnostic::DegenerateRing { element: 0 }));
    }

    #[test]
    fn t_junction_is_non_conforming() {
        // left: one quad [0,1]x[0,1]; right: two quads sharing the hanging vertex (1, 0.5)
        let vertices = vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [2.0, 0.0],
            [2.0, 1.0],
            [1.0, 0.5],
            [2.0, 0.5],
        ];
        let good = vec![vec![0, 1, 6, 2, 3], vec![1, 4, 7, 6], vec![6, 7, 5, 2]];
        let regions = vec![Region::Body(0); 3];
        let mesh = PolygonalMesh::new(vertices.clone(), good.clone(), regions.clone(), BTreeMap::new());
        assert!(mesh.validate().is_empty(), "{:?}", mesh.validate());

        // delete the hanging vertex from the left ring
        let mut bad = good;
        bad[0] = vec![0, 1, 2, 3];
        let mesh = PolygonalMesh::new(vertices, bad, regions, BTreeMap::new());
        let diags = mesh.validate();
        assert!(!diags.is_empty());
        assert!(diags.iter().all(|d| matches!(d, Diagnostic::NonConformingEdge { .. })));
        assert!(diags[0].to_string().starts_with("non-conforming edge"));
    }

    #[test]
    fn edge_table_counts() {
        let mesh = PolygonalMesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [2.0, 0.0], [2.0, 1.0]],
            vec![vec![0, 1, 2, 3], vec![1, 4, 5, 2]],
            vec![Region::Body(0), Region::ThirdMedium],
            BTreeMap::new(),
        );
        assert_eq!(mesh.n_edges(), 7);
        let shared = mesh.edge_between(2, 1).unwrap();
        assert_eq!(mesh.edges()[shared].elements, vec![0, 1]);
        assert_eq!(mesh.edges().iter().filter(|e| e.is_boundary()).count(), 6);
    }

    #[test]
    fn region_round_trip() {
        for r in [Region::Body(3), Region::ThirdMedium] {
            assert_eq!(r.to_string().parse::<Region>().unwrap(), r);
        }
        assert!("solid".parse::<Region>().is_err());
    }
}
