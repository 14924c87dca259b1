//! Column-major dense kernels delegated to faer.

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};
use crate::scalar::C64;

use super::SmallMatrix;

fn view(a: &[C64], n: usize) -> MatRef<'_, C64> {
    assert_eq!(a.len(), n * n);
    MatRef::from_column_major_slice(a, n, n)
}

fn to_col_major(m: &Mat<C64>) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for j in 0..m.ncols() {
        out.extend_from_slice(m.col_as_slice(j));
    }
    out
}

/// Ascending eigenvalues of a Hermitian matrix (lower triangle is read).
pub fn hermitian_eigenvalues(a: &[C64], n: usize) -> Result<Vec<f64>> {
    view(a, n)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Linalg(format!("Hermitian eigensolver failed: {e:?}")))
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and
/// column-major eigenvectors.
pub fn hermitian_eigen(a: &[C64], n: usize) -> Result<(Vec<f64>, Vec<C64>)> {
    let evd = view(a, n)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Linalg(format!("Hermitian eigensolver failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let vals = (0..n).map(|i| s[i].re).collect();
    Ok((vals, to_col_major(&evd.U().to_owned())))
}

/// Eigenvalues of a general square matrix.
pub fn eigenvalues(a: &SmallMatrix) -> Result<Vec<C64>> {
    let n = a.rows();
    let m = Mat::<C64>::from_fn(n, n, |i, j| a[(i, j)]);
    m.eigenvalues()
        .map_err(|e| Error::Linalg(format!("eigensolver failed: {e:?}")))
}

/// `a * b` for column-major `n x n` matrices.
pub fn matmul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let c = view(a, n) * view(b, n);
    to_col_major(&c)
}

/// Conjugate transpose of a column-major `n x n` matrix.
pub fn adjoint(a: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::default(); n * n];
    for j in 0..n {
        for i in 0..n {
            out[j + i * n] = a[i + j * n].conj();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_y_spectrum() {
        let y = [C64::new(0., 0.), C64::new(0., 1.), C64::new(0., -1.), C64::new(0., 0.)];
        let v = hermitian_eigenvalues(&y, 2).unwrap();
        assert!((v[0] + 1.0).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
        let (vals, vecs) = hermitian_eigen(&y, 2).unwrap();
        // Y u = lambda u for each column.
        for k in 0..2 {
            let u = &vecs[2 * k..2 * k + 2];
            let yu0 = y[0] * u[0] + y[2] * u[1];
            let yu1 = y[1] * u[0] + y[3] * u[1];
            assert!((yu0 - u[0] * vals[k]).norm() < 1e-14);
            assert!((yu1 - u[1] * vals[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn general_eigenvalues_of_triangular() {
        let c = |x: f64| C64::new(x, 0.0);
        let m = SmallMatrix::from_rows(&[vec![c(1.0), c(5.0)], vec![c(0.0), c(-2.0)]]);
        let mut ev: Vec<f64> = eigenvalues(&m).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 2.0).abs() < 1e-13 && (ev[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn matmul_col_major() {
        let c = |x: f64| C64::new(x, 0.0);
        // a = [[1, 2], [3, 4]] column-major
        let a = [c(1.), c(3.), c(2.), c(4.)];
        let p = matmul(&a, &a, 2);
        assert_eq!(p, vec![c(7.), c(15.), c(10.), c(22.)]);
    }
}
