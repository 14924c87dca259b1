use crate::scalar::Scalar;

use super::LinearOperator;

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds from `(row, col, value)` triplets, summing duplicates and
    /// dropping exact zeros.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        let mut m = Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        };
        m.prune(0.0);
        m
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    /// Removes entries with magnitude `<= tol`.
    pub fn prune(&mut self, tol: f64) {
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k].abs() > tol {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.indptr[r]..self.indptr[r + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let range = self.indptr[r]..self.indptr[r + 1];
        match self.indices[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yr = acc;
        }
    }

    /// `y = A^T x` (plain transpose, no conjugation)
    pub fn matvec_transpose(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        y.iter_mut().for_each(|v| *v = T::zero());
        for (r, xr) in x.iter().enumerate() {
            for k in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[k]] += self.values[k] * *xr;
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.ncols]; self.nrows];
        for (r, c, v) in self.triplets() {
            out[r][c] = v;
        }
        out
    }

    /// Product `self * other`.
    pub fn matmul(&self, other: &CsrMatrix<T>) -> CsrMatrix<T> {
        assert_eq!(self.ncols, other.nrows);
        let mut trip = Vec::new();
        let mut acc = vec![T::zero(); other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; other.ncols];
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !mark[c] {
                        mark[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &touched {
                trip.push((r, c, acc[c]));
                acc[c] = T::zero();
                mark[c] = false;
            }
            touched.clear();
        }
        CsrMatrix::from_triplets(self.nrows, other.ncols, trip)
    }

    /// Entrywise linear combination `a * self + b * other`.
    pub fn add_scaled(&self, a: T, other: &CsrMatrix<T>, b: T) -> CsrMatrix<T> {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let trip = self
            .triplets()
            .map(|(r, c, v)| (r, c, a * v))
            .chain(other.triplets().map(|(r, c, v)| (r, c, b * v)))
            .collect();
        CsrMatrix::from_triplets(self.nrows, self.ncols, trip)
    }

    pub fn map_values(&self, f: impl Fn(T) -> T) -> CsrMatrix<T> {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = f(*v));
        out.prune(0.0);
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs2()).sum::<f64>().sqrt()
    }

    /// Maximum absolute row sum (the induced infinity norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum (the induced one norm).
    pub fn norm_one(&self) -> f64 {
        let mut cols = vec![0.0; self.ncols];
        for (_, c, v) in self.triplets() {
            cols[c] += v.abs();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    /// Largest entrywise difference against another matrix of the same shape.
    pub fn max_abs_diff(&self, other: &CsrMatrix<T>) -> f64 {
        self.add_scaled(T::one(), other, -T::one())
            .values
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }
}

impl<T: Scalar> LinearOperator<T> for CsrMatrix<T> {
    fn dim(&self) -> usize {
        assert_eq!(self.nrows, self.ncols);
        self.nrows
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        self.matvec(x, y)
    }

    fn norm_estimate(&self) -> f64 {
        self.norm_one().min(self.norm_inf()).max(f64::MIN_POSITIVE)
    }
}
