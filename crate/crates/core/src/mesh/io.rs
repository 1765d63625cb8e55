//! JSON mesh files.
//!
//! ```text
//! {
//!   "vertices": [[x, y], ...],
//!   "elements": [[i, j, k, ...], ...],        // 0-based vertex rings
//!   "regions": ["body:0" | "medium", ...],    // one per element
//!   "boundary_sets": {"name": {"vertices": [...], "edges": [[i, j], ...]}}
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{signed_area, BoundarySet, MeshError, Point, PolygonalMesh, Region};

#[derive(Serialize, Deserialize)]
struct MeshFile {
    vertices: Vec<Point>,
    elements: Vec<Vec<usize>>,
    regions: Vec<String>,
    #[serde(default)]
    boundary_sets: BTreeMap<String, BoundarySet>,
}

/// Parses a mesh document, normalizes rings to counter-clockwise order and validates it.
pub fn mesh_from_json(text: &str) -> Result<PolygonalMesh, MeshError> {
    let file: MeshFile = serde_json::from_str(text)
        .map_err(|e| MeshError::Parse { line: e.line(), message: e.to_string() })?;
    if file.regions.len() != file.elements.len() {
        return Err(MeshError::Parse {
            line: 0,
            message: format!("{} regions for {} elements", file.regions.len(), file.elements.len()),
        });
    }
    let regions = file.regions.iter().map(|r| r.parse()).collect::<Result<Vec<Region>, _>>()?;
    let mut elements = file.elements;
    for ring in &mut elements {
        if ring.iter().all(|&v| v < file.vertices.len()) {
            let pts: Vec<Point> = ring.iter().map(|&v| file.vertices[v]).collect();
            if signed_area(&pts) < 0.0 {
                ring.reverse();
            }
        }
    }
    let mesh = PolygonalMesh::new(file.vertices, elements, regions, file.boundary_sets);
    let diagnostics = mesh.validate();
    if diagnostics.is_empty() {
        Ok(mesh)
    } else {
        Err(MeshError::Invalid(diagnostics))
    }
}

pub fn mesh_to_json(mesh: &PolygonalMesh) -> String {
    let file = MeshFile {
        vertices: mesh.vertices().to_vec(),
        elements: mesh.elements().to_vec(),
        regions: mesh.regions().iter().map(|r| r.to_string()).collect(),
        boundary_sets: mesh.boundary_sets().clone(),
    };
    serde_json::to_string_pretty(&file).expect("mesh serialization cannot fail")
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<PolygonalMesh, MeshError> {
    mesh_from_json(&std::fs::read_to_string(path)?)
}

pub fn save_mesh(mesh: &PolygonalMesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    std::fs::write(path, mesh_to_json(mesh))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQUARE: &str = r#"{
        "vertices": [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        "elements": [[0, 1, 2, 3]],
        "regions": ["body:0"],
        "boundary_sets": {"bottom": {"vertices": [0, 1], "edges": [[0, 1]]}}
    }"#;

    fn strip(s: &str) -> String {
        s.chars().filter(|c| !c.is_whitespace()).collect()
    }

    #[test]
    fn unit_square_file() {
        let mesh = mesh_from_json(SQUARE).unwrap();
        assert_eq!(mesh.n_vertices(), 4);
        assert_eq!(mesh.n_elements(), 1);
        assert!((mesh.element_geometry(0).unwrap().area - 1.0).abs() < 1e-15);
        assert_eq!(mesh.boundary_set("bottom").unwrap().vertices, vec![0, 1]);
    }

    #[test]
    fn round_trip_modulo_whitespace() {
        let mesh = mesh_from_json(SQUARE).unwrap();
        assert_eq!(strip(&mesh_to_json(&mesh)), strip(SQUARE));
    }

    #[test]
    fn repeated_vertex_is_rejected() {
        let text = SQUARE.replace("[0, 1, 2, 3]", "[0, 1, 1, 2]");
        let err = mesh_from_json(&text).unwrap_err();
        assert!(err.to_string().contains("degenerate ring"), "{err}");
    }

    #[test]
    fn clockwise_ring_is_normalized() {
        let text = SQUARE.replace("[0, 1, 2, 3]", "[3, 2, 1, 0]");
        let mesh = mesh_from_json(&text).unwrap();
        assert!(mesh.element_geometry(0).unwrap().area > 0.0);
    }

    #[test]
    fn parse_error_reports_line() {
        let text = "{\n  \"vertices\": [[0.0, 0.0],\n  oops\n}";
        match mesh_from_json(text) {
            Err(MeshError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_conforming_file_names_edge() {
        let text = r#"{
            "vertices": [[0,0],[1,0],[1,1],[0,1],[2,0],[2,1],[1,0.5],[2,0.5]],
            "elements": [[0,1,2,3],[1,4,7,6],[6,7,5,2]],
            "regions": ["body:0","body:0","body:0"]
        }"#;
        let err = mesh_from_json(text).unwrap_err();
        assert!(err.to_string().contains("non-conforming edge (1, 2)"), "{err}");
    }
}
