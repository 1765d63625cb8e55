//! Benchmark configurations, runs with on-disk artifacts, and parameter sweeps.

pub mod gap;
pub mod output;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{AssemblyError, Discretization};
use crate::material::{BodyParams, MaterialError, MaterialModel, MediumParams, RegularizationKind};
use crate::mesh::{box_mesh, generate_benchmark_mesh, BenchmarkId, BoxGeometry, Diagnostic, PolygonalMesh, Region};
use crate::projection::ProjectionSettings;
use crate::solver::{run_load_program, AutoAdjust, LoadProgram, NewtonSettings, SolveReport, SolverError, StepHooks, StepRecord, Termination};

pub use gap::{measure_gap, GapError, GapProbe, GapProbeConfig};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("mesh is invalid: {0:?}")]
    Mesh(Vec<Diagnostic>),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Gap(#[from] GapError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("sweep grid is empty")]
    EmptyGrid,
}

fn default_vtk_every() -> usize {
    1
}

/// Everything needed to reproduce one benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub problem: BenchmarkId,
    #[serde(default)]
    pub refinement: u32,
    /// Body elements across the wall thickness (box only).
    #[serde(default)]
    pub cells_per_wall: Option<usize>,
    /// Material of each body region, keyed by body id.
    pub bodies: BTreeMap<u32, BodyParams>,
    pub medium: MediumParams,
    pub load: LoadProgram,
    #[serde(default)]
    pub newton: NewtonSettings,
    #[serde(default)]
    pub projection: ProjectionSettings,
    #[serde(default)]
    pub gap: Option<GapProbeConfig>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Write a VTK snapshot every this many converged steps (0 disables them).
    #[serde(default = "default_vtk_every")]
    pub vtk_every: usize,
}

pub const PRESETS: [&str; 8] = [
    "box-self-contact",
    "box-self-contact-table3",
    "c-box",
    "c-box-large",
    "punch",
    "punch-rigid",
    "multi-object",
    "multi-object-sliding",
];

fn targets(entries: &[(&str, [Option<f64>; 2])]) -> BTreeMap<String, [Option<f64>; 2]> {
    entries.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn probe(upper: &str, lower: &str) -> Option<GapProbeConfig> {
    Some(GapProbeConfig { upper: upper.into(), lower: lower.into() })
}

impl BenchmarkConfig {
    /// A named preset; see [`PRESETS`].
    pub fn preset(name: &str) -> Result<Self, BenchError> {
        let soft = BodyParams { bulk: 5.0 / 3.0, shear: 5.0 / 14.0 };
        let medium = |gamma, alpha_r, beta, reg, shear| MediumParams { gamma, alpha_r, beta, reg, shear, bulk: 0.0 };
        let program = |entries: &[(&str, [Option<f64>; 2])], n_steps, reaction: &str| LoadProgram {
            targets: targets(entries),
            n_steps,
            auto_adjust: AutoAdjust::default(),
            reaction_set: Some(reaction.to_string()),
        };
        let base = |problem, refinement, bodies: &[(u32, BodyParams)], medium, load, gap| Self {
            problem,
            refinement,
            cells_per_wall: None,
            bodies: bodies.iter().copied().collect(),
            medium,
            load,
            newton: NewtonSettings::default(),
            projection: ProjectionSettings::default(),
            gap,
            output: None,
            vtk_every: 1,
        };
        let cfg = match name {
            "box-self-contact" | "box-self-contact-table3" => {
                let (alpha_r, beta) = if name == "box-self-contact" { (0.1, 5.0) } else { (10.0, 0.0) };
                let mut cfg = base(
                    BenchmarkId::BoxSelfContact,
                    2,
                    &[(0, BodyParams { bulk: 20.0, shear: 10.0 })],
                    medium(1e-6, alpha_r, beta, RegularizationKind::HuHuDeviatoric, 10.0),
                    program(
                        &[
                            ("bottom-left-corner", [Some(0.0), Some(0.0)]),
                            ("bottom-right-corner", [None, Some(0.0)]),
                            ("top-load-band", [None, Some(-1.0)]),
                        ],
                        100,
                        "top-load-band",
                    ),
                    probe("upper-flange-inner", "lower-flange-inner"),
                );
                if name == "box-self-contact-table3" {
                    cfg.cells_per_wall = Some(1);
                }
                cfg
            }
            "c-box" | "c-box-large" => {
                let (uy, alpha_r) = if name == "c-box" { (-0.5, 1.0) } else { (-1.0, 20.0) };
                base(
                    BenchmarkId::CBox,
                    1,
                    &[(0, soft)],
                    medium(1e-5, alpha_r, 0.0, RegularizationKind::RotationJacobian, soft.shear),
                    program(&[("left-wall", [Some(0.0), Some(0.0)]), ("load-point", [None, Some(uy)])], 100, "load-point"),
                    probe("upper-beam-inner", "lower-beam-inner"),
                )
            }
            "punch" | "punch-rigid" => {
                let punch = if name == "punch" { soft } else { BodyParams { bulk: 500.0 / 3.0, shear: 500.0 / 14.0 } };
                base(
                    BenchmarkId::Punch,
                    2,
                    &[(0, soft), (1, punch)],
                    medium(1e-4, 1.0, 0.0, RegularizationKind::RotationJacobian, soft.shear),
                    program(
                        &[
                            ("rect-bottom", [Some(0.0), Some(0.0)]),
                            ("symmetry-axis", [Some(0.0), None]),
                            ("punch-top", [None, Some(-1.3)]),
                        ],
                        130,
                        "punch-top",
                    ),
                    probe("punch-contact-arc", "rect-top"),
                )
            }
            "multi-object" | "multi-object-sliding" => {
                let (right, heads) = if name == "multi-object" {
                    ([Some(0.0), Some(0.0)], [Some(0.0), Some(-0.2)])
                } else {
                    ([None, Some(0.0)], [None, Some(-0.2)])
                };
                base(
                    BenchmarkId::MultiObject,
                    1,
                    &[(0, BodyParams { bulk: 50.0, shear: 10.0 }), (1, BodyParams { bulk: 5e4, shear: 1e4 })],
                    medium(1e-4, 10.0, 0.0, RegularizationKind::RotationJacobian, 10.0),
                    program(
                        &[("rect-left-end", [Some(0.0), Some(0.0)]), ("rect-right-end", right), ("semicircle-tops", heads)],
                        50,
                        "semicircle-tops",
                    ),
                    probe("semicircle-contact-arcs", "rect-top"),
                )
            }
            _ => return Err(BenchError::UnknownPreset(name.to_string())),
        };
        Ok(cfg)
    }

    pub fn build_mesh(&self) -> PolygonalMesh {
        match (self.problem, self.cells_per_wall) {
            (BenchmarkId::BoxSelfContact, Some(n)) => {
                box_mesh(&BoxGeometry { cells_per_wall: n, ..BoxGeometry::default() }, self.refinement)
            }
            _ => generate_benchmark_mesh(self.problem, self.refinement),
        }
    }

    pub fn material_of(&self, region: Region) -> Option<MaterialModel> {
        match region {
            Region::Body(id) => self.bodies.get(&id).copied().map(MaterialModel::Body),
            Region::ThirdMedium => Some(MaterialModel::ThirdMedium(self.medium)),
        }
    }

    /// Checks parameters and that every region of `mesh` has a material.
    pub fn validate(&self, mesh: &PolygonalMesh) -> Result<(), BenchError> {
        if self.cells_per_wall == Some(0) {
            return Err(BenchError::Config("cells_per_wall must be positive".into()));
        }
        for b in self.bodies.values() {
            MaterialModel::Body(*b).validate()?;
        }
        MaterialModel::ThirdMedium(self.medium).validate()?;
        self.load.validate()?;
        let regions: BTreeSet<Region> = mesh.regions().iter().copied().collect();
        for r in &regions {
            if self.material_of(*r).is_none() {
                return Err(BenchError::Config(format!("no material for region {r}")));
            }
        }
        for id in self.bodies.keys() {
            if !regions.contains(&Region::Body(*id)) {
                return Err(BenchError::Config(format!("body {id} does not exist in the mesh")));
            }
        }
        for name in self.load.targets.keys().chain(&self.load.reaction_set) {
            if mesh.boundary_set(name).is_none() {
                return Err(BenchError::Config(format!("unknown boundary set `{name}`")));
            }
        }
        if !(self.newton.tol_rel > 0.0) || self.newton.max_iter == 0 {
            return Err(BenchError::Config("Newton tolerance and iteration limit must be positive".into()));
        }
        Ok(())
    }
}

struct BenchHooks<'a> {
    mesh: &'a PolygonalMesh,
    probe: Option<GapProbe>,
    out: Option<&'a Path>,
    vtk_every: usize,
    io_error: Option<std::io::Error>,
}

impl StepHooks for BenchHooks<'_> {
    fn gap(&mut self, u: &[f64]) -> Option<f64> {
        self.probe.as_ref().and_then(|p| measure_gap(self.mesh, u, p).ok())
    }

    fn converged(&mut self, record: &StepRecord, u: &[f64]) {
        let Some(dir) = self.out else { return };
        if self.vtk_every == 0 || (record.step % self.vtk_every != 0 && record.factor < 1.0) {
            return;
        }
        let path = dir.join(format!("step_{:04}.vtk", record.step));
        let title = format!("step {} load factor {}", record.step, record.factor);
        if let Err(e) = output::save_vtk(&path, self.mesh, u, &title) {
            self.io_error.get_or_insert(e);
        }
    }
}

/// Result of [`run_benchmark`]; a step collapse is reported through
/// `report.termination`, not as an error.
#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub mesh: PolygonalMesh,
    pub report: SolveReport,
}

impl BenchmarkRun {
    pub fn final_gap(&self) -> Option<f64> {
        self.report.final_gap()
    }
}

/// Builds mesh, operators and materials, runs the load program and writes
/// `config.json`, `report.csv` and `step_####.vtk` when an output directory is set.
pub fn run_benchmark(config: &BenchmarkConfig) -> Result<BenchmarkRun, BenchError> {
    let mesh = config.build_mesh();
    let diagnostics = mesh.validate();
    if !diagnostics.is_empty() {
        return Err(BenchError::Mesh(diagnostics));
    }
    config.validate(&mesh)?;
    let probe = config.gap.as_ref().map(|g| GapProbe::from_sets(&mesh, g)).transpose()?;
    let disc = Discretization::new(&mesh, &config.projection, |r| config.material_of(r))?;
    let out = config.output.as_deref();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(config)?)?;
        if config.vtk_every > 0 {
            output::save_vtk(&dir.join("step_0000.vtk"), &mesh, &vec![0.0; disc.n_dofs()], "reference")?;
        }
    }
    log::info!(
        "{}: {} elements, {} DOFs, {} steps",
        config.problem,
        mesh.n_elements(),
        disc.n_dofs(),
        config.load.n_steps
    );
    let mut hooks = BenchHooks { mesh: &mesh, probe, out, vtk_every: config.vtk_every, io_error: None };
    let report = run_load_program(&mesh, &disc, &config.load, &config.newton, &mut hooks)?;
    if let Some(e) = hooks.io_error {
        return Err(e.into());
    }
    if let Some(dir) = out {
        output::write_report(&dir.join("report.csv"), &report.steps)?;
    }
    Ok(BenchmarkRun { mesh, report })
}

/// Parameter grid of a sweep; an empty `reg` keeps the template's kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub gamma: Vec<f64>,
    pub alpha_r: Vec<f64>,
    #[serde(default)]
    pub reg: Vec<RegularizationKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub alpha_r: f64,
    pub reg: RegularizationKind,
    pub status: String,
    pub final_factor: f64,
    pub final_gap: Option<f64>,
    pub steps: usize,
    pub halvings: usize,
}

impl SweepGrid {
    pub fn points(&self, template: &BenchmarkConfig) -> Vec<(f64, f64, RegularizationKind)> {
        let regs = if self.reg.is_empty() { vec![template.medium.reg] } else { self.reg.clone() };
        let mut out = Vec::new();
        for &reg in &regs {
            for &alpha_r in &self.alpha_r {
                for &gamma in &self.gamma {
                    out.push((gamma, alpha_r, reg));
                }
            }
        }
        out
    }
}

/// One run per grid point, at most `threads` at a time. Failed points become
/// rows with their status; the sweep itself only fails on an empty grid.
pub fn sweep(template: &BenchmarkConfig, grid: &SweepGrid, threads: usize) -> Result<Vec<SweepRow>, BenchError> {
    let points = grid.points(template);
    if points.is_empty() {
        return Err(BenchError::EmptyGrid);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| BenchError::Config(e.to_string()))?;
    let rows = pool.install(|| {
        points
            .par_iter()
            .map(|&(gamma, alpha_r, reg)| {
                let mut cfg = template.clone();
                cfg.medium.gamma = gamma;
                cfg.medium.alpha_r = alpha_r;
                cfg.medium.reg = reg;
                cfg.output = template
                    .output
                    .as_ref()
                    .map(|d| d.join(format!("{}_gamma{:e}_alpha{:e}", reg.name(), gamma, alpha_r)));
                let mut row = SweepRow {
                    gamma,
                    alpha_r,
                    reg,
                    status: String::new(),
                    final_factor: 0.0,
                    final_gap: None,
                    steps: 0,
                    halvings: 0,
                };
                match run_benchmark(&cfg) {
                    Ok(run) => {
                        row.status = match &run.report.termination {
                            Termination::Completed => "completed".into(),
                            Termination::StepCollapse { .. } => "step-collapse".into(),
                        };
                        row.final_factor = run.report.final_factor();
                        row.final_gap = run.final_gap();
                        row.steps = run.report.steps.len();
                        row.halvings = run.report.halvings;
                    }
                    Err(e) => row.status = format!("error: {e}"),
                }
                row
            })
            .collect::<Vec<_>>()
    });
    if let Some(dir) = &template.output {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("sweep.csv"), sweep_csv(&rows))?;
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("reg,alpha_r,gamma,status,final_factor,final_gap,steps,halvings\n");
    for r in rows {
        let gap = r.final_gap.map_or_else(|| "nan".to_string(), |g| format!("{g:.16e}"));
        out.push_str(&format!(
            "{},{:e},{:e},{},{:.16e},{},{},{}\n",
            r.reg.name(),
            r.alpha_r,
            r.gamma,
            r.status.replace(',', ";"),
            r.final_factor,
            gap,
            r.steps,
            r.halvings
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_build_and_validate() {
        for name in PRESETS {
            let mut cfg = BenchmarkConfig::preset(name).unwrap();
            cfg.refinement = 0;
            let mesh = cfg.build_mesh();
            cfg.validate(&mesh).unwrap_or_else(|e| panic!("{name}: {e}"));
            let probe = GapProbe::from_sets(&mesh, cfg.gap.as_ref().unwrap()).unwrap();
            let g = measure_gap(&mesh, &vec![0.0; 2 * (mesh.n_vertices() + mesh.n_edges())], &probe).unwrap();
            assert!(g > 0.0, "{name}");
        }
        assert!(matches!(BenchmarkConfig::preset("nope"), Err(BenchError::UnknownPreset(_))));
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = BenchmarkConfig::preset("punch-rigid").unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: BenchmarkConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert!(text.contains("\"problem\": \"punch\""));
    }

    #[test]
    fn missing_body_material_is_a_config_error() {
        let mut cfg = BenchmarkConfig::preset("punch").unwrap();
        cfg.refinement = 0;
        cfg.bodies.remove(&1);
        let mesh = cfg.build_mesh();
        assert!(matches!(cfg.validate(&mesh), Err(BenchError::Config(_))));
    }

    #[test]
    fn empty_grid_is_rejected() {
        let cfg = BenchmarkConfig::preset("box-self-contact").unwrap();
        let grid = SweepGrid { gamma: vec![], alpha_r: vec![1.0], reg: vec![] };
        assert!(matches!(sweep(&cfg, &grid, 1), Err(BenchError::EmptyGrid)));
    }
}
