//! Full Hilbert-space operators. Site `i` is bit `i` of the basis index, and
//! `sigma^z |0> = +|0>`.

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, SmallMatrix};
use crate::model::{CouplingMatrix, ModelSpec};
use crate::scalar::C64;

/// Largest spin count the dense engine accepts unless overridden.
pub const DEFAULT_DENSE_CAP: usize = 12;

/// Pauli axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    /// `(flips_bit, phase for bit 0, phase for bit 1)` of `sigma^axis |bit>`.
    fn action(self) -> (bool, C64, C64) {
        match self {
            Axis::X => (true, C64::new(1.0, 0.0), C64::new(1.0, 0.0)),
            // sigma^y |0> = i|1>, sigma^y |1> = -i|0>
            Axis::Y => (true, C64::new(0.0, 1.0), C64::new(0.0, -1.0)),
            Axis::Z => (false, C64::new(1.0, 0.0), C64::new(-1.0, 0.0)),
        }
    }

    pub fn matrix(self) -> SmallMatrix {
        let c = |re: f64, im: f64| C64::new(re, im);
        match self {
            Axis::X => SmallMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]),
            Axis::Y => SmallMatrix::from_rows(&[vec![c(0., 0.), c(0., -1.)], vec![c(0., 1.), c(0., 0.)]]),
            Axis::Z => SmallMatrix::from_rows(&[vec![c(1., 0.), c(0., 0.)], vec![c(0., 0.), c(-1., 0.)]]),
        }
    }
}

/// Field and coupling terms of a model Hamiltonian, kept alongside its matrix
/// so the engine can switch to Pauli coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingTerms {
    pub delta: f64,
    /// `(i, j, J_ij)` with `i < j`.
    pub pairs: Vec<(usize, usize, f64)>,
}

/// Sparse operator on `N` spins (dimension `2^N`).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n_spins: usize,
    matrix: CsrMatrix<C64>,
    ising: Option<IsingTerms>,
}

impl DenseOperator {
    pub fn from_csr(n_spins: usize, matrix: CsrMatrix<C64>) -> Self {
        assert_eq!(matrix.nrows(), 1 << n_spins);
        assert_eq!(matrix.ncols(), 1 << n_spins);
        Self {
            n_spins,
            matrix,
            ising: None,
        }
    }

    /// Present when the operator was built by [`build_hamiltonian`].
    pub fn ising_terms(&self) -> Option<&IsingTerms> {
        self.ising.as_ref()
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        1 << self.n_spins
    }

    pub fn matrix(&self) -> &CsrMatrix<C64> {
        &self.matrix
    }

    pub fn to_small(&self) -> SmallMatrix {
        let d = self.dim();
        let mut m = SmallMatrix::zeros(d, d);
        for (r, c, v) in self.matrix.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self::from_csr(self.n_spins, self.matrix.map_values(|v| v * s))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_csr(
            self.n_spins,
            self.matrix.add_scaled(C64::new(1.0, 0.0), &other.matrix, C64::new(1.0, 0.0)),
        )
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self::from_csr(self.n_spins, self.matrix.matmul(&other.matrix))
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim();
        let trip = self.matrix.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_csr(self.n_spins, CsrMatrix::from_triplets(d, d, trip))
    }

    /// Largest entry of `A - A^dagger`.
    pub fn hermiticity_error(&self) -> f64 {
        self.matrix.max_abs_diff(&self.adjoint().matrix)
    }
}

/// `sigma^axis` acting on `site`.
pub fn site_pauli(n_spins: usize, site: usize, axis: Axis) -> DenseOperator {
    assert!(site < n_spins);
    let d = 1usize << n_spins;
    let (flips, ph0, ph1) = axis.action();
    let trip = (0..d)
        .map(|col| {
            let bit = (col >> site) & 1;
            let row = if flips { col ^ (1 << site) } else { col };
            (row, col, if bit == 0 { ph0 } else { ph1 })
        })
        .collect();
    DenseOperator::from_csr(n_spins, CsrMatrix::from_triplets(d, d, trip))
}

/// Collective spin `S^axis = sum_i sigma_i^axis`.
pub fn collective(n_spins: usize, axis: Axis) -> DenseOperator {
    let d = 1usize << n_spins;
    let (flips, ph0, ph1) = axis.action();
    let mut trip = Vec::with_capacity(d * n_spins);
    for col in 0..d {
        for site in 0..n_spins {
            let bit = (col >> site) & 1;
            let row = if flips { col ^ (1 << site) } else { col };
            trip.push((row, col, if bit == 0 { ph0 } else { ph1 }));
        }
    }
    DenseOperator::from_csr(n_spins, CsrMatrix::from_triplets(d, d, trip))
}

/// `H = sum_{i<j} J_ij sigma_i^x sigma_j^x - delta sum_i sigma_i^z`.
pub fn build_hamiltonian(model: &ModelSpec, couplings: &CouplingMatrix, cap: usize) -> Result<DenseOperator> {
    model.validate()?;
    let n = model.n_spins;
    if n > cap {
        return Err(Error::Capacity { n_spins: n, cap });
    }
    if couplings.n() != n {
        return Err(Error::InvalidArgument(format!(
            "coupling matrix is {}x{} but the model has {n} spins",
            couplings.n(),
            couplings.n()
        )));
    }
    let d = 1usize << n;
    let terms = IsingTerms {
        delta: model.delta,
        pairs: couplings.pairs().collect(),
    };
    let pairs: Vec<(usize, f64)> = terms
        .pairs
        .iter()
        .map(|&(i, j, v)| ((1usize << i) | (1usize << j), v))
        .collect();
    let mut trip = Vec::with_capacity(d * (pairs.len() + 1));
    for a in 0..d {
        let ones = a.count_ones() as f64;
        // sum_i z_i = (#zeros) - (#ones)
        trip.push((a, a, C64::new(-model.delta * (n as f64 - 2.0 * ones), 0.0)));
        for &(mask, v) in &pairs {
            trip.push((a ^ mask, a, C64::new(v, 0.0)));
        }
    }
    let mut op = DenseOperator::from_csr(n, CsrMatrix::from_triplets(d, d, trip));
    op.ising = Some(terms);
    Ok(op)
}

/// Single-site Kraus operators of the reset channel:
/// `sqrt(p)|1><1|`, `sqrt(p)|1><0|`, `sqrt(1-p) I`.
pub fn reset_kraus(p: f64) -> [SmallMatrix; 3] {
    let c = |x: f64| C64::new(x, 0.0);
    let s = p.sqrt();
    let mut k0 = SmallMatrix::zeros(2, 2);
    k0[(1, 1)] = c(s);
    let mut k1 = SmallMatrix::zeros(2, 2);
    k1[(1, 0)] = c(s);
    let k2 = SmallMatrix::identity(2).scaled(c((1.0 - p).sqrt()));
    [k0, k1, k2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_coupling_matrix;

    #[test]
    fn pauli_algebra_on_one_site() {
        let x = site_pauli(1, 0, Axis::X).to_small();
        let y = site_pauli(1, 0, Axis::Y).to_small();
        let z = site_pauli(1, 0, Axis::Z).to_small();
        assert!(x.max_abs_diff(&Axis::X.matrix()) == 0.0);
        assert!(y.max_abs_diff(&Axis::Y.matrix()) == 0.0);
        assert!(z.max_abs_diff(&Axis::Z.matrix()) == 0.0);
        // XY = iZ
        assert!(x.matmul(&y).max_abs_diff(&z.scaled(C64::new(0.0, 1.0))) < 1e-15);
    }

    #[test]
    fn collective_is_sum_of_sites() {
        let n = 3;
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let mut sum = site_pauli(n, 0, axis);
            for i in 1..n {
                sum = sum.add(&site_pauli(n, i, axis));
            }
            assert!(collective(n, axis).matrix().max_abs_diff(sum.matrix()) < 1e-15);
        }
    }

    #[test]
    fn single_spin_hamiltonian() {
        let m = ModelSpec::new(1, 0.0, 0.7).unwrap();
        let h = build_hamiltonian(&m, &build_coupling_matrix(&m).unwrap(), 12).unwrap();
        assert_eq!(h.matrix().get(0, 0), C64::new(-0.7, 0.0));
        assert_eq!(h.matrix().get(1, 1), C64::new(0.7, 0.0));
    }

    #[test]
    fn capacity_enforced() {
        let m = ModelSpec::new(5, 0.0, 0.7).unwrap();
        let j = build_coupling_matrix(&m).unwrap();
        assert_eq!(
            build_hamiltonian(&m, &j, 4).unwrap_err(),
            Error::Capacity { n_spins: 5, cap: 4 }
        );
    }

    #[test]
    fn kraus_completeness() {
        for p in [0.0, 0.3, 1.0] {
            let ks = reset_kraus(p);
            let mut sum = SmallMatrix::zeros(2, 2);
            for k in &ks {
                sum = sum.add(&k.adjoint().matmul(k));
            }
            assert!(sum.max_abs_diff(&SmallMatrix::identity(2)) < 1e-12);
        }
    }
}
