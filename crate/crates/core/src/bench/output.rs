//! CSV reports and legacy VTK snapshots.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use crate::mesh::{PolygonalMesh, Region};
use crate::solver::StepRecord;

pub const REPORT_HEADER: &str = "step,factor,iters,gap,reaction_x,reaction_y";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn report_csv(steps: &[StepRecord]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for s in steps {
        let gap = s.gap.map_or_else(|| "nan".to_string(), num);
        let _ = writeln!(out, "{},{},{},{},{},{}", s.step, num(s.factor), s.iterations, gap, num(s.reaction[0]), num(s.reaction[1]));
    }
    out
}

pub fn write_report(path: &Path, steps: &[StepRecord]) -> io::Result<()> {
    std::fs::write(path, report_csv(steps))
}

/// Legacy ASCII unstructured grid of the deformed vertices with the
/// displacement as point vectors and the region as cell scalars.
pub fn write_vtk(out: &mut impl Write, mesh: &PolygonalMesh, u: &[f64], title: &str) -> io::Result<()> {
    let nv = mesh.n_vertices();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{}", title.replace('\n', " "))?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {nv} double")?;
    for (v, p) in mesh.vertices().iter().enumerate() {
        writeln!(out, "{} {} 0", num(p[0] + u[2 * v]), num(p[1] + u[2 * v + 1]))?;
    }
    let ne = mesh.n_elements();
    let size: usize = mesh.elements().iter().map(|r| r.len() + 1).sum();
    writeln!(out, "CELLS {ne} {size}")?;
    for ring in mesh.elements() {
        let ids: Vec<String> = ring.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{} {}", ring.len(), ids.join(" "))?;
    }
    writeln!(out, "CELL_TYPES {ne}")?;
    for _ in 0..ne {
        writeln!(out, "7")?;
    }
    writeln!(out, "CELL_DATA {ne}")?;
    writeln!(out, "SCALARS region int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for r in mesh.regions() {
        let id = match r {
            Region::Body(b) => *b as i64,
            Region::ThirdMedium => -1,
        };
        writeln!(out, "{id}")?;
    }
    writeln!(out, "POINT_DATA {nv}")?;
    writeln!(out, "VECTORS displacement double")?;
    for v in 0..nv {
        writeln!(out, "{} {} 0", num(u[2 * v]), num(u[2 * v + 1]))?;
    }
    Ok(())
}

pub fn save_vtk(path: &Path, mesh: &PolygonalMesh, u: &[f64], title: &str) -> io::Result<()> {
    let mut file = io::BufWriter::new(std::fs::File::create(path)?);
    write_vtk(&mut file, mesh, u, title)?;
    file.flush()
}
