//! Sparse direct solves backed by faer's supernodal LU.

use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{MatMut, Par};

use super::CsrMatrix;
use crate::error::{Error, Result};

static FORCE_SEQUENTIAL: Once = Once::new();

/// Inner kernels run sequentially so that results do not depend on the
/// thread count; parallelism is applied across subdomains instead.
fn init_parallelism() {
    FORCE_SEQUENTIAL.call_once(|| faer::set_global_parallelism(Par::Seq));
}

/// Fill-reducing symbolic analysis, reusable for every matrix sharing the
/// same pattern.
#[derive(Clone, Debug)]
pub struct LuSymbolic {
    n: usize,
    nnz: usize,
    inner: SymbolicLu<usize>,
}

/// Exact LU factorization of a square sparse matrix.
///
/// The CSR arrays of `A` are handed to faer as the CSC arrays of `Aᵀ`; solves
/// therefore go through the transposed triangular sweeps. The factored
/// matrix is `S A S` with `S = diag(|a_ii|^{-1/2})`: displacement and
/// temperature rows differ by orders of magnitude, and the equilibrated
/// matrix gives visibly more accurate solves.
#[derive(Clone, Debug)]
pub struct SparseLu {
    symbolic: LuSymbolic,
    numeric: Lu<usize, f64>,
    scale: Vec<f64>,
}

fn diagonal_scaling(a: &CsrMatrix) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| {
            let d = a.get(i, i).abs();
            if d > 0.0 && d.is_finite() {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        })
        .collect()
}

fn as_transposed_csc(a: &CsrMatrix) -> SymbolicSparseColMatRef<'_, usize> {
    SymbolicSparseColMatRef::new_checked(a.ncols(), a.nrows(), a.row_ptr(), None, a.col_idx())
}

impl LuSymbolic {
    pub fn analyze(a: &CsrMatrix, block: &str) -> Result<Self> {
        init_parallelism();
        if a.nrows() != a.ncols() {
            return Err(Error::Factorization {
                block: block.to_string(),
                reason: format!("matrix is {}x{}", a.nrows(), a.ncols()),
            });
        }
        let inner = SymbolicLu::try_new(as_transposed_csc(a)).map_err(|e| Error::Factorization {
            block: block.to_string(),
            reason: format!("{e:?}"),
        })?;
        Ok(Self {
            n: a.nrows(),
            nnz: a.nnz(),
            inner,
        })
    }

    pub fn matches(&self, a: &CsrMatrix) -> bool {
        self.n == a.nrows() && self.nnz == a.nnz()
    }
}

impl SparseLu {
    pub fn factor(a: &CsrMatrix, block: &str) -> Result<Self> {
        let symbolic = LuSymbolic::analyze(a, block)?;
        Self::factor_with(symbolic, a, block)
    }

    /// Numeric factorization reusing a previous symbolic analysis.
    pub fn factor_with(symbolic: LuSymbolic, a: &CsrMatrix, block: &str) -> Result<Self> {
        init_parallelism();
        if !symbolic.matches(a) {
            return Err(Error::Factorization {
                block: block.to_string(),
                reason: "sparsity pattern differs from symbolic analysis".into(),
            });
        }
        let scale = diagonal_scaling(a);
        let mut values = a.values().to_vec();
        for r in 0..a.nrows() {
            let range = a.row_ptr()[r]..a.row_ptr()[r + 1];
            for p in range {
                values[p] *= scale[r] * scale[a.col_idx()[p]];
            }
        }
        let view = SparseColMatRef::new(as_transposed_csc(a), &values);
        let numeric = Lu::try_new_with_symbolic(symbolic.inner.clone(), view).map_err(|e| {
            Error::Factorization {
                block: block.to_string(),
                reason: format!("{e:?}"),
            }
        })?;
        let lu = Self { symbolic, numeric, scale };
        // zero pivots surface as non-finite values rather than as errors
        let mut probe = vec![1.0; a.nrows()];
        lu.solve_in_place(&mut probe);
        if probe.iter().any(|v| !v.is_finite()) {
            return Err(Error::Factorization {
                block: block.to_string(),
                reason: "matrix is numerically singular".into(),
            });
        }
        Ok(lu)
    }

    pub fn symbolic(&self) -> &LuSymbolic {
        &self.symbolic
    }

    pub fn dim(&self) -> usize {
        self.symbolic.n
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        self.solve_columns_in_place(rhs, 1);
    }

    /// Solves for `ncols` right-hand sides stored column-major in `rhs`.
    pub fn solve_columns_in_place(&self, rhs: &mut [f64], ncols: usize) {
        let n = self.symbolic.n;
        assert_eq!(rhs.len(), n * ncols);
        if n == 0 || ncols == 0 {
            return;
        }
        let scale_rows = |rhs: &mut [f64]| {
            for col in rhs.chunks_exact_mut(n) {
                col.iter_mut().zip(&self.scale).for_each(|(v, s)| *v *= s);
            }
        };
        scale_rows(rhs);
        let view = MatMut::from_column_major_slice_mut(rhs, n, ncols);
        self.numeric.solve_transpose_in_place(view);
        scale_rows(rhs);
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
