//! Permutation-symmetric operators stored as string moments.
//!
//! The stored value for a class is `Tr(P rho)` for any string `P` in it, so a
//! density matrix has a unit identity entry and every entry bounded by one.
//! Orthonormal-basis coefficients are derived on demand.

use crate::dense::pauli::{matrix_from_moments, moments_from_matrix};
use crate::dense::{Axis, DenseState};
use crate::error::{Error, Result};
use crate::scalar::C64;

use super::basis::{class_of_masks, Counts, PermBasis};

/// Largest spin count accepted by the dense embedding helpers.
pub const EMBED_MAX_SPINS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct PermState {
    n_spins: usize,
    moments: Vec<C64>,
}

impl PermState {
    pub fn from_moments(basis: &PermBasis, moments: Vec<C64>) -> Result<Self> {
        if moments.len() != basis.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} moments, got {}",
                basis.dim(),
                moments.len()
            )));
        }
        Ok(Self {
            n_spins: basis.n_spins(),
            moments,
        })
    }

    /// Inverse of [`PermState::coeffs`].
    pub fn from_coeffs(basis: &PermBasis, coeffs: &[C64]) -> Result<Self> {
        let moments = coeffs
            .iter()
            .enumerate()
            .map(|(i, v)| v / basis.coefficient_scale(i))
            .collect();
        Self::from_moments(basis, moments)
    }

    /// `|1...1><1...1|`: every string of only `Z` and `I` has moment `(-1)^z`.
    pub fn all_pumped(basis: &PermBasis) -> Self {
        let moments = basis
            .classes()
            .iter()
            .map(|c| match (c.x, c.y) {
                (0, 0) => C64::new(if c.z % 2 == 0 { 1.0 } else { -1.0 }, 0.0),
                _ => C64::default(),
            })
            .collect();
        Self {
            n_spins: basis.n_spins(),
            moments,
        }
    }

    pub fn maximally_mixed(basis: &PermBasis) -> Self {
        let mut moments = vec![C64::default(); basis.dim()];
        moments[basis.identity_index()] = C64::new(1.0, 0.0);
        Self {
            n_spins: basis.n_spins(),
            moments,
        }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.moments.len()
    }

    pub fn moments(&self) -> &[C64] {
        &self.moments
    }

    pub fn into_moments(self) -> Vec<C64> {
        self.moments
    }

    /// Coefficients in the orthonormal basis of normalized class sums.
    pub fn coeffs(&self, basis: &PermBasis) -> Vec<C64> {
        self.moments
            .iter()
            .enumerate()
            .map(|(i, m)| m * basis.coefficient_scale(i))
            .collect()
    }

    pub fn trace(&self) -> C64 {
        self.moments[0]
    }

    /// Largest imaginary part among the moments.
    pub fn hermiticity_error(&self) -> f64 {
        self.moments.iter().map(|m| m.im.abs()).fold(0.0, f64::max)
    }

    fn moment(&self, basis: &PermBasis, c: Counts) -> C64 {
        basis.index(c).map_or(C64::default(), |i| self.moments[i])
    }

    /// `Tr(S^axis rho)`
    pub fn collective_expectation(&self, basis: &PermBasis, axis: Axis) -> C64 {
        let c = match axis {
            Axis::X => Counts::new(1, 0, 0),
            Axis::Y => Counts::new(0, 1, 0),
            Axis::Z => Counts::new(0, 0, 1),
        };
        self.moment(basis, c) * self.n_spins as f64
    }

    /// `<(S^x)^2> / N^2`, diagonal terms included.
    pub fn order_parameter(&self, basis: &PermBasis) -> f64 {
        let n = self.n_spins as f64;
        let xx = self.moment(basis, Counts::new(2, 0, 0));
        (n * self.trace().re + n * (n - 1.0) * xx.re) / (n * n)
    }

    /// Full density matrix; only for `N <= 8`.
    pub fn to_dense(&self) -> Result<DenseState> {
        let n = self.n_spins;
        if n > EMBED_MAX_SPINS {
            return Err(Error::Capacity {
                n_spins: n,
                cap: EMBED_MAX_SPINS,
            });
        }
        let basis = PermBasis::new(n)?;
        let d = 1usize << n;
        let mut full = vec![C64::default(); d * d];
        for s in 0..d {
            for p in 0..d {
                full[(s << n) | p] = self.moment(&basis, class_of_masks(p, s));
            }
        }
        DenseState::from_vec(n, matrix_from_moments(n, &full))
    }

    /// Projection of a dense operator onto the symmetric sector
    /// (class-averaged moments); only for `N <= 8`.
    pub fn from_dense(state: &DenseState) -> Result<Self> {
        let n = state.n_spins();
        if n > EMBED_MAX_SPINS {
            return Err(Error::Capacity {
                n_spins: n,
                cap: EMBED_MAX_SPINS,
            });
        }
        let basis = PermBasis::new(n)?;
        let d = 1usize << n;
        let full = moments_from_matrix(n, state.as_vec());
        let mut sums = vec![C64::default(); basis.dim()];
        let mut counts = vec![0usize; basis.dim()];
        for s in 0..d {
            for p in 0..d {
                let i = basis.index(class_of_masks(p, s)).expect("class in range");
                sums[i] += full[(s << n) | p];
                counts[i] += 1;
            }
        }
        let moments = sums.into_iter().zip(counts).map(|(v, k)| v / k as f64).collect();
        Self::from_moments(&basis, moments)
    }
}
