//! Benchmark mesh generators.
//!
//! Rectangular parts are built on an integer lattice so that shared points are
//! bit-identical; refined third-medium patches produce hanging nodes on the
//! neighbouring body elements, which are inserted into those rings as
//! ordinary vertices. Curved parts (punch, semicircles) use polar meshes whose
//! outer ring follows the facet angles of the arc; the third medium around them
//! is meshed along rays from the circle centre.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::FRAC_PI_2;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{signed_area, BoundarySet, MeshError, Point, PolygonalMesh, Region, VertexGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkId {
    BoxSelfContact,
    CBox,
    Punch,
    MultiObject,
}

impl BenchmarkId {
    pub const ALL: [BenchmarkId; 4] =
        [BenchmarkId::BoxSelfContact, BenchmarkId::CBox, BenchmarkId::Punch, BenchmarkId::MultiObject];

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkId::BoxSelfContact => "box-self-contact",
            BenchmarkId::CBox => "c-box",
            BenchmarkId::Punch => "punch",
            BenchmarkId::MultiObject => "multi-object",
        }
    }
}

impl FromStr for BenchmarkId {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BenchmarkId::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| MeshError::UnknownBenchmark(s.to_string()))
    }
}

impl std::fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Hollow box: outer `length` x `height`, walls of thickness `wall`, cavity filled with medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGeometry {
    pub length: f64,
    pub height: f64,
    pub wall: f64,
    /// Body elements across the wall thickness.
    pub cells_per_wall: usize,
    /// Width of the loaded patch centred on the top face.
    pub load_band: f64,
}

impl Default for BoxGeometry {
    fn default() -> Self {
        Self { length: 2.0, height: 0.5, wall: 0.1, cells_per_wall: 2, load_band: 0.1 }
    }
}

impl BoxGeometry {
    /// Vertical distance between the inner faces of the two flanges.
    pub fn initial_gap(&self) -> f64 {
        self.height - 2.0 * self.wall
    }
}

pub const C_BOX_LENGTH: f64 = 1.0;
pub const C_BOX_THICKNESS: f64 = 0.1;
pub const C_BOX_GAP: f64 = 0.3;
/// Width of the extra medium column to the right of the beam tips.
pub const C_BOX_COLUMN: f64 = 0.1;

pub const PUNCH_HALF_WIDTH: f64 = 2.0;
pub const PUNCH_HEIGHT: f64 = 1.0;
pub const PUNCH_RADIUS: f64 = 1.0;
/// Clearance between the punch apex and the block (not given in figures; chosen).
pub const PUNCH_GAP: f64 = 0.5;

pub const MULTI_LENGTH: f64 = 8.0;
pub const MULTI_HEIGHT: f64 = 0.2;
pub const MULTI_RADIUS: f64 = 0.2;
pub const MULTI_GAP: f64 = 0.1;
pub const MULTI_COUNT: usize = 7;
/// Half-width of the medium cell around each semicircle.
pub const MULTI_CELL: f64 = 0.5;

pub fn generate_benchmark_mesh(problem: BenchmarkId, refinement: u32) -> PolygonalMesh {
    match problem {
        BenchmarkId::BoxSelfContact => box_mesh(&BoxGeometry::default(), refinement),
        BenchmarkId::CBox => c_box_mesh(refinement),
        BenchmarkId::Punch => punch_mesh(refinement),
        BenchmarkId::MultiObject => multi_object_mesh(refinement),
    }
}

struct MeshBuilder {
    points: Vec<Point>,
    lookup: HashMap<(i64, i64), usize>,
    rings: Vec<Vec<usize>>,
    regions: Vec<Region>,
}

impl MeshBuilder {
    fn new() -> Self {
        Self { points: Vec::new(), lookup: HashMap::new(), rings: Vec::new(), regions: Vec::new() }
    }

    fn point(&mut self, p: Point) -> usize {
        let key = ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
        let points = &mut self.points;
        *self.lookup.entry(key).or_insert_with(|| {
            points.push(p);
            points.len() - 1
        })
    }

    fn polygon(&mut self, pts: &[Point], region: Region) {
        let mut ring: Vec<usize> = Vec::with_capacity(pts.len());
        for &p in pts {
            let id = self.point(p);
            if ring.last() != Some(&id) {
                ring.push(id);
            }
        }
        while ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        let coords: Vec<Point> = ring.iter().map(|&v| self.points[v]).collect();
        if signed_area(&coords) < 0.0 {
            ring.reverse();
        }
        self.rings.push(ring);
        self.regions.push(region);
    }

    /// Inserts vertices lying on element sides (hanging nodes) into the rings.
    fn finish(self) -> PolygonalMesh {
        let grid = VertexGrid::new(&self.points);
        let rings = self
            .rings
            .iter()
            .map(|ring| {
                let n = ring.len();
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    let (a, b) = (ring[i], ring[(i + 1) % n]);
                    out.push(a);
                    out.extend(grid.points_on_segment(&self.points, a, b).into_iter().map(|(_, v)| v));
                }
                out
            })
            .collect();
        PolygonalMesh::new(self.points, rings, self.regions, BTreeMap::new())
    }
}

const EPS: f64 = 1e-9;

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() < EPS
}

/// Vertices satisfying `pred`, sorted by x then y, with every mesh edge joining two of them.
fn make_set(mesh: &PolygonalMesh, pred: impl Fn(usize, Point) -> bool) -> BoundarySet {
    let mut vertices: Vec<usize> =
        (0..mesh.n_vertices()).filter(|&v| pred(v, mesh.vertices()[v])).collect();
    vertices.sort_by(|&a, &b| {
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        pa[0].total_cmp(&pb[0]).then(pa[1].total_cmp(&pb[1]))
    });
    let member: std::collections::HashSet<usize> = vertices.iter().copied().collect();
    let edges = mesh
        .edges()
        .iter()
        .filter(|e| member.contains(&e.vertices[0]) && member.contains(&e.vertices[1]))
        .map(|e| e.vertices)
        .collect();
    BoundarySet { vertices, edges }
}

fn vertex_regions(mesh: &PolygonalMesh) -> Vec<Vec<Region>> {
    let mut out = vec![Vec::new(); mesh.n_vertices()];
    for (e, ring) in mesh.elements().iter().enumerate() {
        for &v in ring {
            if !out[v].contains(&mesh.region(e)) {
                out[v].push(mesh.region(e));
            }
        }
    }
    out
}

pub fn box_mesh(geo: &BoxGeometry, refinement: u32) -> PolygonalMesh {
    let m = 1usize << refinement;
    let hb = geo.wall / geo.cells_per_wall as f64;
    let hm = hb / m as f64;
    let nx = (geo.length / hb).round() as usize;
    let ny = (geo.height / hb).round() as usize;
    let nw = geo.cells_per_wall;
    let lattice = |i: usize, j: usize| -> Point { [i as f64 * hm, j as f64 * hm] };

    let mut b = MeshBuilder::new();
    for cj in 0..ny {
        for ci in 0..nx {
            let cavity = ci >= nw && ci < nx - nw && cj >= nw && cj < ny - nw;
            if cavity {
                for fj in 0..m {
                    for fi in 0..m {
                        let (i, j) = (ci * m + fi, cj * m + fj);
                        b.polygon(
                            &[lattice(i, j), lattice(i + 1, j), lattice(i + 1, j + 1), lattice(i, j + 1)],
                            Region::ThirdMedium,
                        );
                    }
                }
            } else {
                let (i0, j0, i1, j1) = (ci * m, cj * m, (ci + 1) * m, (cj + 1) * m);
                b.polygon(&[lattice(i0, j0), lattice(i1, j0), lattice(i1, j1), lattice(i0, j1)], Region::Body(0));
            }
        }
    }
    let mut mesh = b.finish();
    let (l, h, t) = (geo.length, geo.height, geo.wall);
    let half_band = 0.5 * geo.load_band;
    let sets = [
        ("bottom-left-corner", make_set(&mesh, |_, p| near(p[0], 0.0) && near(p[1], 0.0))),
        ("bottom-right-corner", make_set(&mesh, |_, p| near(p[0], l) && near(p[1], 0.0))),
        (
            "top-load-band",
            make_set(&mesh, |_, p| near(p[1], h) && (p[0] - 0.5 * l).abs() <= half_band + EPS),
        ),
        (
            "upper-flange-inner",
            make_set(&mesh, |_, p| near(p[1], h - t) && p[0] > t - EPS && p[0] < l - t + EPS),
        ),
        (
            "lower-flange-inner",
            make_set(&mesh, |_, p| near(p[1], t) && p[0] > t - EPS && p[0] < l - t + EPS),
        ),
    ];
    for (name, set) in sets {
        mesh.insert_boundary_set(name, set);
    }
    mesh
}

fn c_box_mesh(refinement: u32) -> PolygonalMesh {
    let (l, t, g0, col) = (C_BOX_LENGTH, C_BOX_THICKNESS, C_BOX_GAP, C_BOX_COLUMN);
    let m = 1usize << refinement;
    let hb = t / 2.0;
    let hm = hb / m as f64;
    let nx = ((l + col) / hb).round() as usize;
    let ny = ((2.0 * t + g0) / hb).round() as usize;
    let n_wall = (t / hb).round() as usize;
    let n_len = (l / hb).round() as usize;
    let lattice = |i: usize, j: usize| -> Point { [i as f64 * hm, j as f64 * hm] };

    let mut b = MeshBuilder::new();
    for cj in 0..ny {
        for ci in 0..nx {
            let body = ci < n_wall || (ci < n_len && (cj < n_wall || cj >= ny - n_wall));
            if body {
                let (i0, j0, i1, j1) = (ci * m, cj * m, (ci + 1) * m, (cj + 1) * m);
                b.polygon(&[lattice(i0, j0), lattice(i1, j0), lattice(i1, j1), lattice(i0, j1)], Region::Body(0));
            } else {
                for fj in 0..m {
                    for fi in 0..m {
                        let (i, j) = (ci * m + fi, cj * m + fj);
                        b.polygon(
                            &[lattice(i, j), lattice(i + 1, j), lattice(i + 1, j + 1), lattice(i, j + 1)],
                            Region::ThirdMedium,
                        );
                    }
                }
            }
        }
    }
    let mut mesh = b.finish();
    let top = 2.0 * t + g0;
    let sets = [
        ("left-wall", make_set(&mesh, |_, p| near(p[0], 0.0))),
        ("load-point", make_set(&mesh, |_, p| near(p[0], l) && near(p[1], top))),
        (
            "upper-beam-inner",
            make_set(&mesh, |_, p| near(p[1], t + g0) && p[0] > t - EPS && p[0] < l + EPS),
        ),
        ("lower-beam-inner", make_set(&mesh, |_, p| near(p[1], t) && p[0] > t - EPS && p[0] < l + EPS)),
    ];
    for (name, set) in sets {
        mesh.insert_boundary_set(name, set);
    }
    mesh
}

/// Point at distance `r` from `c`, at angle `theta` measured from straight down
/// (positive towards +x).
fn ray_point(c: Point, r: f64, theta: f64) -> Point {
    [c[0] + r * theta.sin(), c[1] - r * theta.cos()]
}

fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect()
}

/// Polar mesh of the disk sector spanned by `angles` (ascending, measured from
/// straight down) with `rings` concentric layers. Inner layers coarsen their
/// angular division by powers of two; the coarse elements pick up the finer
/// outer points as extra ring vertices. Every stride divides each entry of
/// `pinned` (angle indices that must stay vertices on every ring).
fn polar_sector(b: &mut MeshBuilder, c: Point, radius: f64, angles: &[f64], rings: usize, pinned: &[usize], region: Region) {
    let n = angles.len() - 1;
    let dr = radius / rings as f64;
    let radii: Vec<f64> = (1..=rings).map(|j| if j == rings { radius } else { radius * j as f64 / rings as f64 }).collect();
    let dtheta = (angles[n] - angles[0]) / n as f64;
    let fits = |s: usize| n % s == 0 && pinned.iter().all(|&p| p % s == 0);
    let mut strides = vec![1usize; rings];
    let mut prev = 1usize;
    for j in (0..rings - 1).rev() {
        let mut s = prev;
        while fits(2 * s) && radii[j] * dtheta * (2 * s) as f64 <= 1.5 * dr && 2 * s <= n / 2 {
            s *= 2;
        }
        strides[j] = s;
        prev = s;
    }
    let q = |j: usize, i: usize| ray_point(c, radii[j], angles[i]);
    for j in 0..rings {
        let s = strides[j];
        let outer = if j + 1 < rings { strides[j + 1] } else { 1 };
        for a in (0..n).step_by(s) {
            let bnd = a + s;
            let mut pts = Vec::new();
            if j == 0 {
                pts.push(c);
            } else {
                pts.push(q(j - 1, a));
            }
            let mut i = a;
            while i <= bnd {
                pts.push(q(j, i));
                i += outer;
            }
            if j > 0 {
                pts.push(q(j - 1, bnd));
            }
            b.polygon(&pts, region);
        }
    }
}

/// Medium between the arc points `arc[i]` and the outer points `outer[i]`,
/// with `layers` subdivisions along each ray.
fn ray_strip(b: &mut MeshBuilder, arc: &[Point], outer: &[Point], layers: usize) {
    let lerp = |p: Point, q: Point, s: f64| [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
    let fr = uniform(0.0, 1.0, layers);
    for i in 0..arc.len() - 1 {
        for k in 0..layers {
            let pts = [
                if k == 0 { arc[i] } else { lerp(arc[i], outer[i], fr[k]) },
                if k == 0 { arc[i + 1] } else { lerp(arc[i + 1], outer[i + 1], fr[k]) },
                if k + 1 == layers { outer[i + 1] } else { lerp(arc[i + 1], outer[i + 1], fr[k + 1]) },
                if k + 1 == layers { outer[i] } else { lerp(arc[i], outer[i], fr[k + 1]) },
            ];
            b.polygon(&pts, Region::ThirdMedium);
        }
    }
}

fn grid_block(b: &mut MeshBuilder, xs: &[f64], ys: &[f64], region: Region) {
    for j in 0..ys.len() - 1 {
        for i in 0..xs.len() - 1 {
            b.polygon(&[[xs[i], ys[j]], [xs[i + 1], ys[j]], [xs[i + 1], ys[j + 1]], [xs[i], ys[j + 1]]], region);
        }
    }
}

fn punch_mesh(refinement: u32) -> PolygonalMesh {
    let m = 1usize << refinement;
    let (w, h, r, g0) = (PUNCH_HALF_WIDTH, PUNCH_HEIGHT, PUNCH_RADIUS, PUNCH_GAP);
    let cy = h + g0 + r;
    let centre = [0.0, cy];
    let theta_star = (w / (cy - h)).atan();
    let n1 = 4 * m;
    let mut angles = uniform(0.0, theta_star, n1);
    angles.extend(uniform(theta_star, FRAC_PI_2, n1).into_iter().skip(1));

    let mut b = MeshBuilder::new();
    let arc: Vec<Point> = angles.iter().map(|&t| ray_point(centre, r, t)).collect();
    // rays end on the block top up to the corner, then on the side line x = w
    let outer: Vec<Point> = angles
        .iter()
        .enumerate()
        .map(|(i, &t)| match i.cmp(&n1) {
            std::cmp::Ordering::Less => [(cy - h) * t.tan(), h],
            std::cmp::Ordering::Equal => [w, h],
            std::cmp::Ordering::Greater => [w, if i == angles.len() - 1 { cy } else { cy - w * t.cos() / t.sin() }],
        })
        .collect();
    ray_strip(&mut b, &arc, &outer, 2 * m);
    let floor = &outer[..=n1];

    let xs: Vec<f64> = floor.iter().map(|p| p[0]).collect();
    grid_block(&mut b, &xs, &uniform(0.0, h, 4 * m), Region::Body(0));
    polar_sector(&mut b, centre, r, &angles, 4 * m, &[n1], Region::Body(1));

    let mut mesh = b.finish();
    let regions = vertex_regions(&mesh);
    let sets = [
        ("rect-bottom", make_set(&mesh, |_, p| near(p[1], 0.0))),
        ("symmetry-axis", make_set(&mesh, |_, p| near(p[0], 0.0))),
        ("punch-top", make_set(&mesh, |v, p| near(p[1], cy) && regions[v].contains(&Region::Body(1)))),
        ("rect-top", make_set(&mesh, |v, p| near(p[1], h) && regions[v].contains(&Region::Body(0)))),
        (
            "punch-contact-arc",
            make_set(&mesh, |v, p| {
                regions[v].contains(&Region::Body(1))
                    && regions[v].contains(&Region::ThirdMedium)
                    && near((p[0] - centre[0]).hypot(p[1] - centre[1]), r)
            }),
        ),
    ];
    for (name, set) in sets {
        mesh.insert_boundary_set(name, set);
    }
    mesh
}

fn multi_object_mesh(refinement: u32) -> PolygonalMesh {
    let m = 1usize << refinement;
    let (len, hr, r, g0, w) = (MULTI_LENGTH, MULTI_HEIGHT, MULTI_RADIUS, MULTI_GAP, MULTI_CELL);
    let yc = hr + g0 + r;
    let theta_c = (w / (yc - hr)).atan();
    let n1 = 2 * m;
    // symmetric angle list over [-pi/2, pi/2]
    let mut half = uniform(0.0, theta_c, n1);
    half.extend(uniform(theta_c, FRAC_PI_2, n1).into_iter().skip(1));
    let mut angles: Vec<f64> = half.iter().rev().map(|t| -t).collect();
    angles.extend(half.iter().skip(1));
    let n = angles.len() - 1;
    let mid = n / 2;

    let mut b = MeshBuilder::new();
    let mut floor_x: Vec<f64> = Vec::new();
    for k in 0..MULTI_COUNT {
        let xc = (k + 1) as f64;
        let centre = [xc, yc];
        let arc: Vec<Point> = angles.iter().map(|&t| ray_point(centre, r, t)).collect();
        let outer: Vec<Point> = angles
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let off = i as isize - mid as isize;
                let side = t.signum();
                if off.unsigned_abs() == n1 {
                    [xc + side * w, hr]
                } else if off.unsigned_abs() == 2 * n1 {
                    [xc + side * w, yc]
                } else if off.unsigned_abs() < n1 {
                    [xc + (yc - hr) * t.tan(), hr]
                } else {
                    [xc + side * w, yc - w / t.abs().tan()]
                }
            })
            .collect();
        ray_strip(&mut b, &arc, &outer, 2 * m);
        floor_x.extend(outer.iter().filter(|p| p[1] == hr).map(|p| p[0]));
        polar_sector(&mut b, centre, r, &angles, 2 * m, &[n1, mid, mid + n1], Region::Body(1));
    }
    let first = 1.0 - w;
    let last = MULTI_COUNT as f64 + w;
    let mut xs = uniform(0.0, first, 5 * m);
    xs.pop();
    floor_x.sort_by(f64::total_cmp);
    floor_x.dedup_by(|a, b| (*a - *b).abs() < EPS);
    xs.extend(floor_x);
    xs.extend(uniform(last, len, 5 * m).into_iter().skip(1));
    grid_block(&mut b, &xs, &uniform(0.0, hr, 2 * m), Region::Body(0));

    let mut mesh = b.finish();
    let regions = vertex_regions(&mesh);
    let sets = [
        ("rect-left-end", make_set(&mesh, |_, p| near(p[0], 0.0))),
        ("rect-right-end", make_set(&mesh, |_, p| near(p[0], len))),
        ("semicircle-tops", make_set(&mesh, |v, p| near(p[1], yc) && regions[v].contains(&Region::Body(1)))),
        ("rect-top", make_set(&mesh, |v, p| near(p[1], hr) && regions[v].contains(&Region::Body(0)))),
        (
            "semicircle-contact-arcs",
            make_set(&mesh, |v, p| {
                regions[v].contains(&Region::Body(1)) && regions[v].contains(&Region::ThirdMedium) && p[1] < yc - EPS
            }),
        ),
    ];
    for (name, set) in sets {
        mesh.insert_boundary_set(name, set);
    }
    mesh
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_benchmark_mesh_validates() {
        for id in BenchmarkId::ALL {
            for r in 0..2 {
                let mesh = generate_benchmark_mesh(id, r);
                let diags = mesh.validate();
                assert!(diags.is_empty(), "{id} r={r}: {:?}", &diags[..diags.len().min(5)]);
                for e in 0..mesh.n_elements() {
                    assert!(mesh.element_geometry(e).unwrap().area > 0.0);
                }
            }
        }
    }

    #[test]
    fn unknown_benchmark_id() {
        assert!(matches!("pinch".parse::<BenchmarkId>(), Err(MeshError::UnknownBenchmark(_))));
        assert_eq!("c-box".parse::<BenchmarkId>().unwrap(), BenchmarkId::CBox);
    }

    #[test]
    fn box_refinement_zero_is_conforming_quads() {
        let mesh = generate_benchmark_mesh(BenchmarkId::BoxSelfContact, 0);
        assert!(mesh.elements().iter().all(|r| r.len() == 4));
        assert!((mesh.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn box_refinement_one_has_hanging_nodes() {
        let mesh = generate_benchmark_mesh(BenchmarkId::BoxSelfContact, 1);
        let geo = BoxGeometry::default();
        let hb = geo.wall / geo.cells_per_wall as f64;
        let mut transition_bodies = 0;
        for e in 0..mesh.n_elements() {
            let g = mesh.element_geometry(e).unwrap();
            match mesh.region(e) {
                Region::ThirdMedium => assert!((g.area - (hb / 2.0).powi(2)).abs() < 1e-14),
                Region::Body(_) => {
                    let touches_medium = mesh.element_edges(e).iter().any(|&id| {
                        mesh.edges()[id].elements.iter().any(|&o| mesh.region(o).is_medium())
                    });
                    if touches_medium {
                        transition_bodies += 1;
                        assert!(mesh.element(e).len() >= 5);
                    }
                }
            }
        }
        assert!(transition_bodies > 0);
        assert!((mesh.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn box_flanges_start_apart_by_the_cavity_height() {
        let mesh = generate_benchmark_mesh(BenchmarkId::BoxSelfContact, 2);
        let up = mesh.boundary_set("upper-flange-inner").unwrap();
        let lo = mesh.boundary_set("lower-flange-inner").unwrap();
        let geo = BoxGeometry::default();
        assert!(up.vertices.iter().all(|&v| (mesh.vertices()[v][1] - (geo.height - geo.wall)).abs() < 1e-12));
        assert!(lo.vertices.iter().all(|&v| (mesh.vertices()[v][1] - geo.wall).abs() < 1e-12));
        assert_eq!(up.edges.len() + 1, up.vertices.len());
        // a coarse body edge split into 4 medium-side segments at refinement 2
        let max_ring = mesh.elements().iter().map(|r| r.len()).max().unwrap();
        assert_eq!(max_ring, 4 + 3);
    }

    #[test]
    fn c_box_initial_gap() {
        let mesh = generate_benchmark_mesh(BenchmarkId::CBox, 0);
        let up = mesh.boundary_set("upper-beam-inner").unwrap();
        let lo = mesh.boundary_set("lower-beam-inner").unwrap();
        let y_up = mesh.vertices()[up.vertices[0]][1];
        let y_lo = mesh.vertices()[lo.vertices[0]][1];
        assert!((y_up - y_lo - 0.3).abs() < 1e-12);
        assert_eq!(mesh.boundary_set("load-point").unwrap().vertices.len(), 1);
    }

    fn inscribed_area(angles: &[f64], r: f64) -> f64 {
        angles.windows(2).map(|w| 0.5 * r * r * (w[1] - w[0]).sin()).sum()
    }

    #[test]
    fn punch_areas_match_closed_forms() {
        for refinement in 0..2 {
            let mesh = generate_benchmark_mesh(BenchmarkId::Punch, refinement);
            let m = 1usize << refinement;
            let cy = PUNCH_HEIGHT + PUNCH_GAP + PUNCH_RADIUS;
            let theta_star = (PUNCH_HALF_WIDTH / (cy - PUNCH_HEIGHT)).atan();
            let mut angles = uniform(0.0, theta_star, 4 * m);
            angles.extend(uniform(theta_star, FRAC_PI_2, 4 * m).into_iter().skip(1));
            let area_of = |region: Region| -> f64 {
                (0..mesh.n_elements())
                    .filter(|&e| mesh.region(e) == region)
                    .map(|e| mesh.element_geometry(e).unwrap().area)
                    .sum()
            };
            let punch = area_of(Region::Body(1));
            assert!((punch - inscribed_area(&angles, PUNCH_RADIUS)).abs() < 1e-10 * punch);
            assert!((area_of(Region::Body(0)) - PUNCH_HALF_WIDTH * PUNCH_HEIGHT).abs() < 1e-12);
            // medium: the box above the block and beside the axis, minus the punch
            let cavity = (cy - PUNCH_HEIGHT) * PUNCH_HALF_WIDTH;
            assert!((area_of(Region::ThirdMedium) - (cavity - punch)).abs() < 1e-10);
        }
    }

    #[test]
    fn multi_object_has_seven_heads() {
        let mesh = generate_benchmark_mesh(BenchmarkId::MultiObject, 0);
        let tops = mesh.boundary_set("semicircle-tops").unwrap();
        assert!(!tops.vertices.is_empty());
        let bodies = (0..mesh.n_elements()).filter(|&e| mesh.region(e) == Region::Body(1)).count();
        assert_eq!(bodies % MULTI_COUNT, 0);
        let rect: f64 = (0..mesh.n_elements())
            .filter(|&e| mesh.region(e) == Region::Body(0))
            .map(|e| mesh.element_geometry(e).unwrap().area)
            .sum();
        assert!((rect - MULTI_LENGTH * MULTI_HEIGHT).abs() < 1e-12);
    }
}
