//! Sparse direct solves with a symbolic analysis reused across factorizations.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::SparseColMat;
use faer::Mat;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinearSolveError {
    #[error("symbolic analysis failed: {0}")]
    Symbolic(String),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("solution has non-finite entries")]
    NonFinite,
    #[error("right-hand side has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },
}

/// LU solver for a fixed sparsity pattern.
#[derive(Debug, Default, Clone)]
pub struct SparseSolver {
    symbolic: Option<SymbolicLu<usize>>,
}

impl SparseSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Solves `a x = b`. The symbolic analysis from the first call is reused,
    /// so every matrix passed to one solver must share the same pattern.
    pub fn solve(&mut self, a: &SparseColMat<usize, f64>, b: &[f64]) -> Result<Vec<f64>, LinearSolveError> {
        let n = a.nrows();
        if b.len() != n {
            return Err(LinearSolveError::Length { got: b.len(), expected: n });
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        if a.val().iter().any(|v| !v.is_finite()) {
            return Err(LinearSolveError::NonFinite);
        }
        let symbolic = match &self.symbolic {
            Some(s) => s.clone(),
            None => {
                let s = SymbolicLu::try_new(a.symbolic()).map_err(|e| LinearSolveError::Symbolic(format!("{e:?}")))?;
                self.symbolic = Some(s.clone());
                s
            }
        };
        // faer panics on an exactly zero pivot instead of returning an error
        let factored = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            Lu::try_new_with_symbolic(symbolic, a.as_ref())
        }))
        .map_err(|_| LinearSolveError::Factorization("zero pivot".into()))?;
        let lu = factored.map_err(|e| LinearSolveError::Factorization(format!("{e:?}")))?;
        let mut rhs = Mat::from_fn(n, 1, |i, _| b[i]);
        lu.solve_in_place(rhs.as_mut());
        let x: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(LinearSolveError::NonFinite)
        }
    }
}
