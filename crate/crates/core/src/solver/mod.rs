//! Newton-Raphson load steps with automatic increment adjustment.

pub mod sparse;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assembly::{reaction_force, set_scalar_slots, AssemblyError, Assembler, Discretization, DofPartition, GlobalSystem};
use crate::material::MaterialError;
use crate::mesh::PolygonalMesh;

pub use sparse::{LinearSolveError, SparseSolver};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonSettings {
    pub tol_rel: f64,
    /// Absolute residual tolerance; `None` means `1e-11 * sqrt(free DOFs)`.
    pub tol_abs: Option<f64>,
    pub max_iter: usize,
    /// Backtracking on residual increase, halving the step up to four times.
    pub line_search: bool,
    /// Halvings of a correction whose trial state is degenerate before the
    /// solve is given up.
    pub admissible_cuts: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self { tol_rel: 1e-8, tol_abs: None, max_iter: 25, line_search: false, admissible_cuts: 8 }
    }
}

impl NewtonSettings {
    pub fn abs_tolerance(&self, n_free: usize) -> f64 {
        self.tol_abs.unwrap_or(1e-11 * (n_free as f64).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AutoAdjust {
    pub enabled: bool,
    /// Smallest increment as a fraction of the base increment `1 / n_steps`.
    pub min_factor: f64,
    pub grow_after: usize,
}

impl Default for AutoAdjust {
    fn default() -> Self {
        Self { enabled: true, min_factor: 1.0 / 64.0, grow_after: 3 }
    }
}

/// Prescribed displacements at full load, ramped linearly with the load factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadProgram {
    /// Boundary set name to `[u_x, u_y]`; `None` leaves the component free.
    pub targets: BTreeMap<String, [Option<f64>; 2]>,
    pub n_steps: usize,
    #[serde(default)]
    pub auto_adjust: AutoAdjust,
    /// Set whose reaction is recorded per step.
    #[serde(default)]
    pub reaction_set: Option<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("load program needs at least one step")]
    NoSteps,
    #[error("min_factor must lie in (0, 1], got {0}")]
    MinFactor(f64),
    #[error("unknown boundary set `{0}`")]
    UnknownSet(String),
    #[error("DOF {dof} receives conflicting targets")]
    ConflictingTarget { dof: usize },
    #[error("prescribed displacement is not finite")]
    NonFiniteTarget,
}

impl LoadProgram {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.n_steps == 0 {
            return Err(SolverError::NoSteps);
        }
        let m = self.auto_adjust.min_factor;
        if !(m > 0.0 && m <= 1.0) {
            return Err(SolverError::MinFactor(m));
        }
        if self.targets.values().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFiniteTarget);
        }
        Ok(())
    }

    /// Prescribed global DOFs (sorted) and their full-load values.
    pub fn prescribed(&self, mesh: &PolygonalMesh, disc: &Discretization) -> Result<(Vec<usize>, Vec<f64>), SolverError> {
        let mut values: BTreeMap<usize, f64> = BTreeMap::new();
        for (name, comps) in &self.targets {
            let set = mesh.boundary_set(name).ok_or_else(|| SolverError::UnknownSet(name.clone()))?;
            for s in set_scalar_slots(mesh, &disc.layout, set) {
                for (c, v) in comps.iter().enumerate() {
                    if let Some(v) = *v {
                        let dof = 2 * s + c;
                        if let Some(old) = values.insert(dof, v) {
                            if old != v {
                                return Err(SolverError::ConflictingTarget { dof });
                            }
                        }
                    }
                }
            }
        }
        Ok(values.into_iter().unzip())
    }
}

/// Why a Newton solve did not converge.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NewtonFailure {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Linear(#[from] LinearSolveError),
    #[error("no convergence within {0} iterations")]
    MaxIterations(usize),
    #[error("non-finite residual")]
    NonFinite,
    #[error("failure injected")]
    Injected,
}

#[derive(Debug, Clone)]
pub struct NewtonResult {
    pub u: Vec<f64>,
    /// Residual norms over free DOFs; the first entry is the predictor right-hand side.
    pub residual_norms: Vec<f64>,
    pub iterations: usize,
    pub system: GlobalSystem,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{failure}")]
pub struct NewtonError {
    pub failure: NewtonFailure,
    pub residual_norms: Vec<f64>,
}

fn is_inadmissible(e: &AssemblyError) -> bool {
    matches!(
        e,
        AssemblyError::Material {
            source: MaterialError::DegenerateJacobian(_) | MaterialError::SingularRotation(_) | MaterialError::NonFinite,
            ..
        }
    )
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves one load step starting from the equilibrium `u0`, moving the
/// prescribed DOFs of `asm.partition` to `values`.
///
/// The first iteration is a predictor that carries the prescribed increment
/// through the free-prescribed coupling of the tangent at `u0`.
pub fn newton_solve(
    disc: &Discretization,
    asm: &Assembler,
    linear: &mut SparseSolver,
    u0: &[f64],
    values: &[f64],
    settings: &NewtonSettings,
) -> Result<NewtonResult, NewtonError> {
    let part = &asm.partition;
    let tol_abs = settings.abs_tolerance(part.n_free());
    let mut norms = Vec::new();
    let fail = |failure: NewtonFailure, norms: &Vec<f64>| NewtonError { failure, residual_norms: norms.clone() };

    let mut u = u0.to_vec();
    let sys = asm.assemble(disc, &u).map_err(|e| fail(e.into(), &norms))?;
    let dp: Vec<f64> = part.prescribed.iter().zip(values).map(|(&d, &v)| v - u[d]).collect();
    let kfp = sys.coupling_times(&dp);
    let rhs: Vec<f64> = sys.residual.iter().zip(&kfp).map(|(r, k)| -(r + k)).collect();
    let r0 = norm(&rhs);
    norms.push(r0);
    if !r0.is_finite() {
        return Err(fail(NewtonFailure::NonFinite, &norms));
    }
    for (&d, &v) in part.prescribed.iter().zip(values) {
        u[d] = v;
    }
    let mut iterations = 0;
    let mut sys = if r0 <= tol_abs {
        asm.assemble(disc, &u).map_err(|e| fail(e.into(), &norms))?
    } else {
        let du = linear.solve(&sys.tangent, &rhs).map_err(|e| fail(e.into(), &norms))?;
        iterations = 1;
        for (&d, x) in part.free.iter().zip(&du) {
            u[d] += x;
        }
        match asm.assemble(disc, &u) {
            Ok(s) => s,
            Err(e) => return Err(fail(e.into(), &norms)),
        }
    };
    loop {
        let rn = sys.residual_norm();
        norms.push(rn);
        if !rn.is_finite() {
            return Err(fail(NewtonFailure::NonFinite, &norms));
        }
        log::trace!("newton iteration {iterations}: |R| = {rn:.3e}");
        if rn <= tol_abs || rn <= settings.tol_rel * r0 {
            return Ok(NewtonResult { u, residual_norms: norms, iterations, system: sys });
        }
        if iterations >= settings.max_iter {
            return Err(fail(NewtonFailure::MaxIterations(settings.max_iter), &norms));
        }
        let rhs: Vec<f64> = sys.residual.iter().map(|r| -r).collect();
        let du = linear.solve(&sys.tangent, &rhs).map_err(|e| fail(e.into(), &norms))?;
        iterations += 1;
        let mut alpha = 1.0;
        let mut decrease_cuts = 0;
        let mut admissible_cuts = 0;
        sys = loop {
            let mut trial = u.clone();
            for (&d, x) in part.free.iter().zip(&du) {
                trial[d] += alpha * x;
            }
            match asm.assemble(disc, &trial) {
                Ok(s) => {
                    if !settings.line_search || s.residual_norm() < rn || decrease_cuts == 4 {
                        u = trial;
                        break s;
                    }
                    decrease_cuts += 1;
                }
                Err(e) if is_inadmissible(&e) && admissible_cuts < settings.admissible_cuts => admissible_cuts += 1,
                Err(e) => return Err(fail(e.into(), &norms)),
            }
            alpha *= 0.5;
        };
    }
}

/// Data of one converged load step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub factor: f64,
    pub iterations: usize,
    pub residual_norms: Vec<f64>,
    pub gap: Option<f64>,
    pub reaction: [f64; 2],
}

/// A rejected attempt at advancing the load factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedAttempt {
    pub from: f64,
    pub to: f64,
    pub reason: String,
    pub residual_norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum Termination {
    Completed,
    /// The increment fell below the floor, or a step failed with adjustment disabled.
    StepCollapse { factor: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub steps: Vec<StepRecord>,
    pub failed_attempts: Vec<FailedAttempt>,
    pub halvings: usize,
    /// Displacement of the last converged state.
    pub displacement: Vec<f64>,
    pub termination: Termination,
}

impl SolveReport {
    pub fn completed(&self) -> bool {
        self.termination == Termination::Completed
    }

    pub fn final_factor(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.factor)
    }

    pub fn final_gap(&self) -> Option<f64> {
        self.steps.last().and_then(|s| s.gap)
    }
}

/// Callbacks around load steps.
pub trait StepHooks {
    /// Returns true to reject the attempt numbered `attempt` (counted from 0) before solving.
    fn inject_failure(&mut self, _attempt: usize, _factor: f64) -> bool {
        false
    }

    fn gap(&mut self, _u: &[f64]) -> Option<f64> {
        None
    }

    fn converged(&mut self, _record: &StepRecord, _u: &[f64]) {}
}

pub struct NoHooks;

impl StepHooks for NoHooks {}

/// Marches the load factor from 0 to 1.
pub fn run_load_program(
    mesh: &PolygonalMesh,
    disc: &Discretization,
    program: &LoadProgram,
    settings: &NewtonSettings,
    hooks: &mut dyn StepHooks,
) -> Result<SolveReport, SolverError> {
    program.validate()?;
    if let Some(name) = &program.reaction_set {
        if mesh.boundary_set(name).is_none() {
            return Err(SolverError::UnknownSet(name.clone()));
        }
    }
    let (dofs, full) = program.prescribed(mesh, disc)?;
    let asm = Assembler::new(disc, DofPartition::new(disc.n_dofs(), &dofs));
    let mut linear = SparseSolver::new();
    let base = 1.0 / program.n_steps as f64;
    let floor = program.auto_adjust.min_factor * base;
    let mut inc = base;
    let mut factor = 0.0;
    let mut u = vec![0.0; disc.n_dofs()];
    let mut report = SolveReport {
        steps: Vec::new(),
        failed_attempts: Vec::new(),
        halvings: 0,
        displacement: Vec::new(),
        termination: Termination::Completed,
    };
    let mut successes = 0;
    let mut attempt = 0;
    while factor < 1.0 {
        let mut next = factor + inc;
        if next > 1.0 - 1e-12 {
            next = 1.0;
        }
        let values: Vec<f64> = full.iter().map(|v| next * v).collect();
        let outcome = if hooks.inject_failure(attempt, next) {
            Err(NewtonError { failure: NewtonFailure::Injected, residual_norms: Vec::new() })
        } else {
            newton_solve(disc, &asm, &mut linear, &u, &values, settings)
        };
        attempt += 1;
        match outcome {
            Ok(res) => {
                let reaction = match &program.reaction_set {
                    Some(name) => reaction_force(mesh, disc, &asm.partition, &res.system.full_residual, name).unwrap_or([0.0; 2]),
                    None => [0.0; 2],
                };
                let record = StepRecord {
                    step: report.steps.len() + 1,
                    factor: next,
                    iterations: res.iterations,
                    residual_norms: res.residual_norms,
                    gap: hooks.gap(&res.u),
                    reaction,
                };
                log::debug!("step {} factor {:.6} in {} iterations", record.step, next, record.iterations);
                hooks.converged(&record, &res.u);
                report.steps.push(record);
                u = res.u;
                factor = next;
                successes += 1;
                if program.auto_adjust.enabled && inc < base && successes >= program.auto_adjust.grow_after {
                    inc = (2.0 * inc).min(base);
                    successes = 0;
                }
            }
            Err(err) => {
                log::debug!("attempt {factor:.6} -> {next:.6} failed: {err}");
                report.failed_attempts.push(FailedAttempt {
                    from: factor,
                    to: next,
                    reason: err.to_string(),
                    residual_norms: err.residual_norms.clone(),
                });
                successes = 0;
                if !program.auto_adjust.enabled || inc * 0.5 < floor * (1.0 - 1e-12) {
                    report.termination = Termination::StepCollapse { factor, reason: err.to_string() };
                    break;
                }
                inc *= 0.5;
                report.halvings += 1;
            }
        }
    }
    report.displacement = u;
    Ok(report)
}
