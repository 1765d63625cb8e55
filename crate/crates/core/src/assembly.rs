//! Element residuals and tangents, and global sparse assembly with
//! prescribed DOFs eliminated.
//!
//! At a quadrature point the 12 material arguments `[F^, gradF^]` depend on
//! vector DOF `2a + i` only through six shape values of scalar slot `a`, placed
//! in rows `i, 2+i, 4+i, 6+i, 8+i, 10+i`. Element matrices are formed from
//! 6x6 sub-blocks of the material Hessian instead of dense `B^T H B` products.

use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::material::{MaterialError, MaterialModel, MaterialPointState};
use crate::mesh::{BoundarySet, PolygonalMesh, Region};
use crate::projection::{
    apply_b1, apply_b2, vector_slots, DofLayout, ElementOperators, PointShapes, ProjectionError, ProjectionSettings,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssemblyError {
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error("no material model for region {0}")]
    MissingMaterial(Region),
    #[error("element {element}: {source}")]
    Material { element: usize, source: MaterialError },
    #[error("boundary set `{0}` has no prescribed DOFs")]
    EmptySet(String),
    #[error("displacement vector has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },
}

/// Element operators, DOF maps and material models of a mesh.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub layout: DofLayout,
    pub operators: Vec<ElementOperators>,
    /// Global interleaved vector DOFs of each element, in local order.
    pub element_dofs: Vec<Vec<usize>>,
    pub materials: Vec<MaterialModel>,
}

impl Discretization {
    pub fn new(
        mesh: &PolygonalMesh,
        settings: &ProjectionSettings,
        material_of: impl Fn(Region) -> Option<MaterialModel>,
    ) -> Result<Self, AssemblyError> {
        let layout = DofLayout::new(mesh);
        let materials = mesh
            .regions()
            .iter()
            .map(|&r| material_of(r).ok_or(AssemblyError::MissingMaterial(r)))
            .collect::<Result<Vec<_>, _>>()?;
        let operators = (0..mesh.n_elements())
            .into_par_iter()
            .map(|e| ElementOperators::new(mesh, e, settings))
            .collect::<Result<Vec<_>, _>>()?;
        let element_dofs = (0..mesh.n_elements()).map(|e| vector_slots(&layout.element_slots(mesh, e).1)).collect();
        Ok(Self { layout, operators, element_dofs, materials })
    }

    pub fn n_dofs(&self) -> usize {
        self.layout.n_dofs()
    }

    pub fn n_elements(&self) -> usize {
        self.operators.len()
    }

    pub fn gather(&self, e: usize, u: &[f64]) -> Vec<f64> {
        self.element_dofs[e].iter().map(|&d| u[d]).collect()
    }

    /// Total stored energy.
    pub fn energy(&self, u: &[f64]) -> Result<f64, AssemblyError> {
        let parts = (0..self.n_elements())
            .into_par_iter()
            .map(|e| {
                element_energy(&self.operators[e], &self.gather(e, u), &self.materials[e])
                    .map_err(|source| AssemblyError::Material { element: e, source })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        Ok(parts.iter().sum())
    }
}

/// Scalar slots (vertices and edge midpoints) covered by a boundary set.
pub fn set_scalar_slots(mesh: &PolygonalMesh, layout: &DofLayout, set: &BoundarySet) -> Vec<usize> {
    let mut slots: Vec<usize> = set.vertices.iter().map(|&v| layout.vertex_slot(v)).collect();
    for e in &set.edges {
        if let Some(id) = mesh.edge_between(e[0], e[1]) {
            slots.push(layout.edge_slot(id));
        }
    }
    slots.sort_unstable();
    slots.dedup();
    slots
}

fn shape_rows(s: &PointShapes, a: usize) -> [f64; 6] {
    [s.g[0][a], s.g[1][a], s.dg[0][0][a], s.dg[1][0][a], s.dg[0][1][a], s.dg[1][1][a]]
}

fn state_at(ops: &ElementOperators, q: usize, u: &[f64], model: &MaterialModel) -> Result<MaterialPointState, MaterialError> {
    let s = &ops.shapes[q];
    let mut f = apply_b1(s, u);
    f[0] += 1.0;
    f[3] += 1.0;
    let grad_f = match model {
        MaterialModel::Body(_) => [0.0; 8],
        MaterialModel::ThirdMedium(_) => apply_b2(s, u),
    };
    model.tensors(f, grad_f)
}

pub fn element_energy(ops: &ElementOperators, u: &[f64], model: &MaterialModel) -> Result<f64, MaterialError> {
    let mut total = 0.0;
    for (q, &w) in ops.quadrature.weights.iter().enumerate() {
        let s = &ops.shapes[q];
        let mut f = apply_b1(s, u);
        f[0] += 1.0;
        f[3] += 1.0;
        total += w * model.energy(f, apply_b2(s, u))?;
    }
    Ok(total)
}

/// Residual `int B1^T P^ + B2^T T^` and tangent of one element.
pub fn element_system(
    ops: &ElementOperators,
    u: &[f64],
    model: &MaterialModel,
) -> Result<(DVector<f64>, DMatrix<f64>, f64), MaterialError> {
    let ns = ops.n_scalar();
    let nv = 2 * ns;
    let np = match model {
        MaterialModel::Body(_) => 2,
        MaterialModel::ThirdMedium(_) => 6,
    };
    let mut r = DVector::zeros(nv);
    let mut k = DMatrix::zeros(nv, nv);
    let mut energy = 0.0;
    let mut rows = vec![[0.0; 6]; ns];
    let mut t = vec![[0.0; 6]; ns];
    for (q, &w) in ops.quadrature.weights.iter().enumerate() {
        let st = state_at(ops, q, u, model)?;
        energy += w * st.psi;
        let mut grad = [0.0; 12];
        grad[..4].copy_from_slice(&st.p_hat);
        grad[4..].copy_from_slice(&st.t_hat);
        let hess = |r: usize, c: usize| -> f64 {
            match (r < 4, c < 4) {
                (true, true) => st.d_hat[(r, c)],
                (false, true) => st.a_hat[(r - 4, c)],
                (true, false) => st.a_hat[(c - 4, r)],
                (false, false) => st.b_hat[(r - 4, c - 4)],
            }
        };
        for (a, row) in rows.iter_mut().enumerate() {
            *row = shape_rows(&ops.shapes[q], a);
        }
        for i in 0..2 {
            let ri: [usize; 6] = std::array::from_fn(|p| 2 * p + i);
            for a in 0..ns {
                let mut acc = 0.0;
                for p in 0..np {
                    acc += rows[a][p] * grad[ri[p]];
                }
                r[2 * a + i] += w * acc;
            }
            for m in 0..2 {
                let rm: [usize; 6] = std::array::from_fn(|p| 2 * p + m);
                let mut hs = [[0.0; 6]; 6];
                for p in 0..np {
                    for qq in 0..np {
                        hs[p][qq] = hess(ri[p], rm[qq]);
                    }
                }
                for a in 0..ns {
                    for qq in 0..np {
                        let mut acc = 0.0;
                        for p in 0..np {
                            acc += rows[a][p] * hs[p][qq];
                        }
                        t[a][qq] = acc;
                    }
                }
                for b in 0..ns {
                    for a in 0..ns {
                        let mut acc = 0.0;
                        for qq in 0..np {
                            acc += t[a][qq] * rows[b][qq];
                        }
                        k[(2 * a + i, 2 * b + m)] += w * acc;
                    }
                }
            }
        }
    }
    Ok((r, k, energy))
}

pub fn element_residual(ops: &ElementOperators, u: &[f64], model: &MaterialModel) -> Result<DVector<f64>, MaterialError> {
    element_system(ops, u, model).map(|(r, _, _)| r)
}

pub fn element_tangent(ops: &ElementOperators, u: &[f64], model: &MaterialModel) -> Result<DMatrix<f64>, MaterialError> {
    element_system(ops, u, model).map(|(_, k, _)| k)
}

/// Split of the global DOFs into free and prescribed ones.
#[derive(Debug, Clone, PartialEq)]
pub struct DofPartition {
    pub free: Vec<usize>,
    pub prescribed: Vec<usize>,
    /// Position of each global DOF within `free` or `prescribed`.
    pub local: Vec<usize>,
    pub is_prescribed: Vec<bool>,
}

impl DofPartition {
    pub fn new(n_dofs: usize, prescribed_dofs: &[usize]) -> Self {
        let mut is_prescribed = vec![false; n_dofs];
        for &d in prescribed_dofs {
            is_prescribed[d] = true;
        }
        let mut free = Vec::new();
        let mut prescribed = Vec::new();
        let mut local = vec![0; n_dofs];
        for d in 0..n_dofs {
            if is_prescribed[d] {
                local[d] = prescribed.len();
                prescribed.push(d);
            } else {
                local[d] = free.len();
                free.push(d);
            }
        }
        Self { free, prescribed, local, is_prescribed }
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }
}

const COUPLING: usize = 1 << (usize::BITS - 1);
const SKIP: usize = usize::MAX;

/// CSC patterns of the free-free tangent and free-prescribed coupling, with
/// per-element scatter maps.
#[derive(Debug, Clone)]
pub struct Assembler {
    pub partition: DofPartition,
    ff: SymbolicSparseColMat<usize>,
    fp: SymbolicSparseColMat<usize>,
    /// Entry `a * nv + b` of element `e`: value position, tagged with `COUPLING` for the fp block.
    slots: Vec<Vec<usize>>,
}

fn build_pattern(n_rows: usize, n_cols: usize, mut pairs: Vec<(usize, usize)>) -> SymbolicSparseColMat<usize> {
    pairs.sort_unstable();
    pairs.dedup();
    let mut col_ptr = vec![0usize; n_cols + 1];
    for &(c, _) in &pairs {
        col_ptr[c + 1] += 1;
    }
    for c in 0..n_cols {
        col_ptr[c + 1] += col_ptr[c];
    }
    let row_idx = pairs.into_iter().map(|(_, r)| r).collect();
    SymbolicSparseColMat::new_checked(n_rows, n_cols, col_ptr, None, row_idx)
}

fn find_slot(pattern: &SymbolicSparseColMat<usize>, row: usize, col: usize) -> usize {
    let ptr = pattern.col_ptr();
    let rows = &pattern.row_idx()[ptr[col]..ptr[col + 1]];
    ptr[col] + rows.binary_search(&row).expect("entry in pattern")
}

impl Assembler {
    pub fn new(disc: &Discretization, partition: DofPartition) -> Self {
        let nf = partition.n_free();
        let np = partition.prescribed.len();
        let mut ff_pairs = Vec::new();
        let mut fp_pairs = Vec::new();
        for dofs in &disc.element_dofs {
            for &r in dofs {
                if partition.is_prescribed[r] {
                    continue;
                }
                let lr = partition.local[r];
                for &c in dofs {
                    let lc = partition.local[c];
                    if partition.is_prescribed[c] {
                        fp_pairs.push((lc, lr));
                    } else {
                        ff_pairs.push((lc, lr));
                    }
                }
            }
        }
        let ff = build_pattern(nf, nf, ff_pairs);
        let fp = build_pattern(nf, np, fp_pairs);
        let slots = disc
            .element_dofs
            .iter()
            .map(|dofs| {
                let mut out = Vec::with_capacity(dofs.len() * dofs.len());
                for &r in dofs {
                    for &c in dofs {
                        let (lr, lc) = (partition.local[r], partition.local[c]);
                        out.push(match (partition.is_prescribed[r], partition.is_prescribed[c]) {
                            (true, _) => SKIP,
                            (false, false) => find_slot(&ff, lr, lc),
                            (false, true) => COUPLING | find_slot(&fp, lr, lc),
                        });
                    }
                }
                out
            })
            .collect();
        Self { partition, ff, fp, slots }
    }

    pub fn n_free(&self) -> usize {
        self.partition.n_free()
    }

    pub fn tangent_pattern(&self) -> &SymbolicSparseColMat<usize> {
        &self.ff
    }

    /// Residual, tangent and coupling at the global displacement `u`.
    pub fn assemble(&self, disc: &Discretization, u: &[f64]) -> Result<GlobalSystem, AssemblyError> {
        if u.len() != disc.n_dofs() {
            return Err(AssemblyError::Length { got: u.len(), expected: disc.n_dofs() });
        }
        let mut full = vec![0.0; disc.n_dofs()];
        let mut kff = vec![0.0; self.ff.row_idx().len()];
        let mut kfp = vec![0.0; self.fp.row_idx().len()];
        let mut energy = 0.0;
        const CHUNK: usize = 512;
        for start in (0..disc.n_elements()).step_by(CHUNK) {
            let end = (start + CHUNK).min(disc.n_elements());
            let local: Vec<_> = (start..end)
                .into_par_iter()
                .map(|e| {
                    element_system(&disc.operators[e], &disc.gather(e, u), &disc.materials[e])
                        .map_err(|source| AssemblyError::Material { element: e, source })
                })
                .collect();
            for (offset, item) in local.into_iter().enumerate() {
                let e = start + offset;
                let (re, ke, we) = item?;
                energy += we;
                let dofs = &disc.element_dofs[e];
                let nv = dofs.len();
                for (a, &d) in dofs.iter().enumerate() {
                    full[d] += re[a];
                }
                let slots = &self.slots[e];
                for a in 0..nv {
                    for b in 0..nv {
                        let s = slots[a * nv + b];
                        if s == SKIP {
                            continue;
                        }
                        if s & COUPLING != 0 {
                            kfp[s & !COUPLING] += ke[(a, b)];
                        } else {
                            kff[s] += ke[(a, b)];
                        }
                    }
                }
            }
        }
        let residual = self.partition.free.iter().map(|&d| full[d]).collect();
        Ok(GlobalSystem {
            residual,
            tangent: SparseColMat::new(self.ff.clone(), kff),
            coupling: SparseColMat::new(self.fp.clone(), kfp),
            full_residual: full,
            energy,
        })
    }
}

/// Assembled system over the free DOFs.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub residual: Vec<f64>,
    pub tangent: SparseColMat<usize, f64>,
    /// Free rows, prescribed columns.
    pub coupling: SparseColMat<usize, f64>,
    /// Residual over all DOFs, including prescribed rows (reactions).
    pub full_residual: Vec<f64>,
    pub energy: f64,
}

impl GlobalSystem {
    pub fn residual_norm(&self) -> f64 {
        self.residual.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `K_fp * values` for prescribed increments `values`.
    pub fn coupling_times(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.coupling.nrows()];
        let sym = self.coupling.symbolic();
        let vals = self.coupling.val();
        for c in 0..self.coupling.ncols() {
            for idx in sym.col_ptr()[c]..sym.col_ptr()[c + 1] {
                out[sym.row_idx()[idx]] += vals[idx] * values[c];
            }
        }
        out
    }

    /// Dense copy of the free-free tangent.
    pub fn tangent_dense(&self) -> DMatrix<f64> {
        let n = self.tangent.nrows();
        let mut m = DMatrix::zeros(n, n);
        let sym = self.tangent.symbolic();
        let vals = self.tangent.val();
        for c in 0..n {
            for idx in sym.col_ptr()[c]..sym.col_ptr()[c + 1] {
                m[(sym.row_idx()[idx], c)] += vals[idx];
            }
        }
        m
    }
}

/// Sum of the full residual over the prescribed DOFs of `set`, per component.
pub fn reaction_force(
    mesh: &PolygonalMesh,
    disc: &Discretization,
    partition: &DofPartition,
    full_residual: &[f64],
    set_name: &str,
) -> Result<[f64; 2], AssemblyError> {
    let set = mesh.boundary_set(set_name).ok_or_else(|| AssemblyError::EmptySet(set_name.to_string()))?;
    let mut out = [0.0; 2];
    let mut any = false;
    for s in set_scalar_slots(mesh, &disc.layout, set) {
        for c in 0..2 {
            let d = 2 * s + c;
            if partition.is_prescribed[d] {
                out[c] += full_residual[d];
                any = true;
            }
        }
    }
    if any {
        Ok(out)
    } else {
        Err(AssemblyError::EmptySet(set_name.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{BodyParams, MediumParams, RegularizationKind};
    use std::collections::BTreeMap;

    fn two_squares() -> PolygonalMesh {
        PolygonalMesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [2.0, 0.0], [2.0, 1.0]],
            vec![vec![0, 1, 2, 3], vec![1, 4, 5, 2]],
            vec![Region::Body(0), Region::ThirdMedium],
            BTreeMap::new(),
        )
    }

    fn materials(r: Region) -> Option<MaterialModel> {
        Some(match r {
            Region::Body(_) => MaterialModel::Body(BodyParams { bulk: 20.0, shear: 10.0 }),
            Region::ThirdMedium => MaterialModel::ThirdMedium(MediumParams {
                gamma: 1e-2,
                alpha_r: 1.0,
                beta: 0.0,
                reg: RegularizationKind::HuHuDeviatoric,
                shear: 10.0,
                bulk: 20.0,
            }),
        })
    }

    #[test]
    fn zero_and_translated_states_are_stress_free() {
        let mesh = two_squares();
        let disc = Discretization::new(&mesh, &ProjectionSettings::default(), materials).unwrap();
        for e in 0..2 {
            let n = disc.operators[e].n_vector();
            let r = element_residual(&disc.operators[e], &vec![0.0; n], &disc.materials[e]).unwrap();
            assert_eq!(r.amax(), 0.0);
            let shifted: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 0.37 } else { 0.0 }).collect();
            let r = element_residual(&disc.operators[e], &shifted, &disc.materials[e]).unwrap();
            assert!(r.amax() < 1e-12, "{}", r.amax());
        }
    }

    #[test]
    fn shared_rows_sum_both_elements() {
        let mesh = two_squares();
        let disc = Discretization::new(&mesh, &ProjectionSettings::default(), materials).unwrap();
        let n = disc.n_dofs();
        let u: Vec<f64> = (0..n).map(|i| 0.01 * ((i * 7919) % 13) as f64 / 13.0).collect();
        let asm = Assembler::new(&disc, DofPartition::new(n, &[]));
        let sys = asm.assemble(&disc, &u).unwrap();
        let mut expect = vec![0.0; n];
        let mut kexp = DMatrix::zeros(n, n);
        for e in 0..2 {
            let ue = disc.gather(e, &u);
            let (re, ke, _) = element_system(&disc.operators[e], &ue, &disc.materials[e]).unwrap();
            for (a, &da) in disc.element_dofs[e].iter().enumerate() {
                expect[da] += re[a];
                for (b, &db) in disc.element_dofs[e].iter().enumerate() {
                    kexp[(da, db)] += ke[(a, b)];
                }
            }
        }
        for d in 0..n {
            assert!((sys.residual[d] - expect[d]).abs() < 1e-14);
        }
        assert!((sys.tangent_dense() - kexp).amax() < 1e-12);
    }

    #[test]
    fn elimination_moves_coupling_to_the_right_side() {
        let mesh = two_squares();
        let disc = Discretization::new(&mesh, &ProjectionSettings::default(), materials).unwrap();
        let n = disc.n_dofs();
        let prescribed = [0, 1, 6, 7];
        let part = DofPartition::new(n, &prescribed);
        let asm = Assembler::new(&disc, part.clone());
        let sys = asm.assemble(&disc, &vec![0.0; n]).unwrap();
        let full = Assembler::new(&disc, DofPartition::new(n, &[])).assemble(&disc, &vec![0.0; n]).unwrap();
        let kd = full.tangent_dense();
        let vals = [0.1, -0.2, 0.3, 0.05];
        let got = sys.coupling_times(&vals);
        for (i, &f) in part.free.iter().enumerate() {
            let expect: f64 = prescribed.iter().zip(&vals).map(|(&p, v)| kd[(f, p)] * v).sum();
            assert!((got[i] - expect).abs() < 1e-12);
        }
    }
}
