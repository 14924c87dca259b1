//! Sparse LU factorization backed by faer.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::MatMut;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::CsrMatrix;

/// Factorization of a square sparse matrix with partial pivoting.
pub struct SparseLu<T: Scalar> {
    n: usize,
    lu: faer::sparse::linalg::solvers::Lu<usize, T>,
}

impl<T: Scalar> std::fmt::Debug for SparseLu<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLu").field("n", &self.n).finish()
    }
}

impl<T: Scalar> SparseLu<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidArgument("LU needs a square matrix".into()));
        }
        let n = a.nrows();
        let trip: Vec<Triplet<usize, usize, T>> = a.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        let mat = SparseColMat::<usize, T>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| Error::Linalg(format!("sparse assembly failed: {e:?}")))?;
        let lu = mat
            .sp_lu()
            .map_err(|e| Error::Linalg(format!("sparse LU failed: {e:?}")))?;
        Ok(Self { n, lu })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Overwrites `rhs` with `A^{-1} rhs`. Fails if the result is not finite,
    /// which is how a singular pivot shows up.
    pub fn solve_in_place(&self, rhs: &mut [T]) -> Result<()> {
        assert_eq!(rhs.len(), self.n);
        let view = MatMut::from_column_major_slice_mut(rhs, self.n, 1);
        self.lu.solve_in_place(view);
        if rhs.iter().any(|v| !v.abs2().is_finite()) {
            return Err(Error::Linalg("singular matrix in sparse LU".into()));
        }
        Ok(())
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }
}
