use crate::error::{Error, Result};
use crate::linalg::dense::{hermitian_eigenvalues, matmul};
use crate::linalg::SmallMatrix;
use crate::scalar::C64;

use super::operators::DenseOperator;

/// Density matrix on `N` spins, stored column-major so the storage is the
/// column-stacked vectorization `vec(rho)[a + b d] = rho[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n_spins: usize,
    data: Vec<C64>,
}

impl DenseState {
    pub fn from_vec(n_spins: usize, data: Vec<C64>) -> Result<Self> {
        let d = 1usize << n_spins;
        if data.len() != d * d {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for {n_spins} spins, got {}",
                d * d,
                data.len()
            )));
        }
        Ok(Self { n_spins, data })
    }

    /// `|basis><basis|`
    pub fn basis_projector(n_spins: usize, basis: usize) -> Self {
        let d = 1usize << n_spins;
        assert!(basis < d);
        let mut data = vec![C64::default(); d * d];
        data[basis + basis * d] = C64::new(1.0, 0.0);
        Self { n_spins, data }
    }

    /// Every spin in `|1>`, the fixed point of pure pumping.
    pub fn all_pumped(n_spins: usize) -> Self {
        Self::basis_projector(n_spins, (1usize << n_spins) - 1)
    }

    pub fn maximally_mixed(n_spins: usize) -> Self {
        let d = 1usize << n_spins;
        let mut data = vec![C64::default(); d * d];
        for a in 0..d {
            data[a + a * d] = C64::new(1.0 / d as f64, 0.0);
        }
        Self { n_spins, data }
    }

    /// Projector onto a pure state given by its amplitudes.
    pub fn pure(n_spins: usize, psi: &[C64]) -> Self {
        let d = 1usize << n_spins;
        assert_eq!(psi.len(), d);
        let mut data = vec![C64::default(); d * d];
        for b in 0..d {
            for a in 0..d {
                data[a + b * d] = psi[a] * psi[b].conj();
            }
        }
        Self { n_spins, data }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn as_vec(&self) -> &[C64] {
        &self.data
    }

    pub fn as_vec_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row + col * self.dim()]
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|a| self.data[a + a * d]).sum()
    }

    /// Largest entry of `rho - rho^dagger`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut err: f64 = 0.0;
        for b in 0..d {
            for a in 0..=b {
                err = err.max((self.data[a + b * d] - self.data[b + a * d].conj()).norm());
            }
        }
        err
    }

    /// Replaces `rho` by `(rho + rho^dagger) / 2`.
    pub fn hermitize(&mut self) {
        let d = self.dim();
        for b in 0..d {
            for a in 0..=b {
                let m = (self.data[a + b * d] + self.data[b + a * d].conj()) * 0.5;
                self.data[a + b * d] = m;
                self.data[b + a * d] = m.conj();
            }
        }
    }

    pub fn scale(&mut self, s: C64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            n_spins: self.n_spins,
            data: self.data.iter().map(|v| v.conj()).collect(),
        }
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut h = self.clone();
        h.hermitize();
        hermitian_eigenvalues(&h.data, self.dim())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// `Tr(A rho)`
    pub fn expectation(&self, op: &DenseOperator) -> C64 {
        assert_eq!(op.n_spins(), self.n_spins);
        let d = self.dim();
        let mut acc = C64::default();
        for a in 0..d {
            for (k, v) in op.matrix().row(a) {
                acc += v * self.data[k + a * d];
            }
        }
        acc
    }

    /// `A rho`
    pub fn left_multiply(&self, op: &DenseOperator) -> Self {
        let d = self.dim();
        let mut out = vec![C64::default(); d * d];
        for b in 0..d {
            let col = &self.data[b * d..(b + 1) * d];
            let dst = &mut out[b * d..(b + 1) * d];
            for (a, o) in dst.iter_mut().enumerate() {
                *o = op.matrix().row(a).map(|(k, v)| v * col[k]).sum();
            }
        }
        Self {
            n_spins: self.n_spins,
            data: out,
        }
    }

    /// `rho A`
    pub fn right_multiply(&self, op: &DenseOperator) -> Self {
        let d = self.dim();
        let mut out = vec![C64::default(); d * d];
        // (rho A)[:, b] = sum_k rho[:, k] A[k, b]
        for (k, row) in (0..d).map(|k| (k, op.matrix().row(k))) {
            let src = &self.data[k * d..(k + 1) * d];
            for (b, v) in row {
                let dst = &mut out[b * d..(b + 1) * d];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += *s * v;
                }
            }
        }
        Self {
            n_spins: self.n_spins,
            data: out,
        }
    }

    /// `U rho U^dagger` for a dense column-major unitary.
    pub fn conjugate_by(&self, u: &[C64], u_dag: &[C64]) -> Self {
        let d = self.dim();
        let tmp = matmul(u, &self.data, d);
        Self {
            n_spins: self.n_spins,
            data: matmul(&tmp, u_dag, d),
        }
    }

    pub fn to_small(&self) -> SmallMatrix {
        let d = self.dim();
        let mut m = SmallMatrix::zeros(d, d);
        for b in 0..d {
            for a in 0..d {
                m[(a, b)] = self.data[a + b * d];
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `||self - other||_1 / 2`
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        let diff: Vec<C64> = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        let mut h = Self {
            n_spins: self.n_spins,
            data: diff,
        };
        h.hermitize();
        let ev = hermitian_eigenvalues(&h.data, self.dim())?;
        Ok(0.5 * ev.iter().map(|v| v.abs()).sum::<f64>())
    }
}
