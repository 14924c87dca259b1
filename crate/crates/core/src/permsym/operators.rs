//! Sparse superoperators on the symmetric sector, in moment coordinates.
//!
//! Row `a` of every matrix gives `d/dt Tr(P_a rho)` (or the mapped moment)
//! as a combination of class moments, derived from Pauli products on a
//! single representative string and counting the equivalent sites.

use crate::dense::Axis;
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::model::{DissipationSpec, ModelSpec};
use crate::scalar::C64;

use super::basis::PermBasis;
use super::state::PermState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuperKind {
    Liouvillian,
    /// Per-period reset channel.
    ResetMap,
    /// Reset channel after one period of coherent evolution.
    FloquetPropagator,
    LeftMultiplier,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PermSuperMatrix {
    kind: SuperKind,
    n_spins: usize,
    matrix: CsrMatrix<C64>,
}

impl PermSuperMatrix {
    pub(crate) fn new(kind: SuperKind, n_spins: usize, matrix: CsrMatrix<C64>) -> Self {
        Self { kind, n_spins, matrix }
    }

    pub fn kind(&self) -> SuperKind {
        self.kind
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Moment-coordinate matrix.
    pub fn matrix(&self) -> &CsrMatrix<C64> {
        &self.matrix
    }

    pub fn apply(&self, state: &PermState) -> PermState {
        let mut out = vec![C64::default(); self.dim()];
        self.matrix.matvec(state.moments(), &mut out);
        let basis = PermBasis::new(self.n_spins).expect("n_spins >= 1");
        PermState::from_moments(&basis, out).expect("dimension matches")
    }

    /// The same map acting on orthonormal-basis coefficients.
    pub fn orthonormal(&self, basis: &PermBasis) -> CsrMatrix<C64> {
        let trip = self
            .matrix
            .triplets()
            .map(|(r, c, v)| (r, c, v * (basis.coefficient_scale(r) / basis.coefficient_scale(c))))
            .collect();
        CsrMatrix::from_triplets(self.dim(), self.dim(), trip)
    }

    /// Real part, failing if any entry has an imaginary component.
    pub(crate) fn real(&self) -> Result<CsrMatrix<f64>> {
        let mut trip = Vec::with_capacity(self.matrix.nnz());
        for (r, c, v) in self.matrix.triplets() {
            if v.im != 0.0 {
                return Err(Error::InvalidArgument("superoperator is not real in moment coordinates".into()));
            }
            trip.push((r, c, v.re));
        }
        Ok(CsrMatrix::from_triplets(self.dim(), self.dim(), trip))
    }
}

/// Submatrix on the listed rows and columns (a sector the map leaves invariant).
pub(crate) fn restrict(m: &CsrMatrix<f64>, keep: &[usize]) -> CsrMatrix<f64> {
    let mut pos = vec![usize::MAX; m.nrows()];
    for (k, &i) in keep.iter().enumerate() {
        pos[i] = k;
    }
    let mut trip = Vec::new();
    for (k, &r) in keep.iter().enumerate() {
        for (c, v) in m.row(r) {
            if pos[c] != usize::MAX {
                trip.push((k, pos[c], v));
            }
        }
    }
    CsrMatrix::from_triplets(keep.len(), keep.len(), trip)
}

fn to_complex(n: usize, trip: Vec<(usize, usize, f64)>) -> CsrMatrix<C64> {
    CsrMatrix::from_triplets(n, n, trip.into_iter().map(|(r, c, v)| (r, c, C64::new(v, 0.0))).collect())
}

fn hamiltonian_triplets(basis: &PermBasis, delta: f64, coupling: f64, out: &mut Vec<(usize, usize, f64)>) {
    let n = basis.n_spins();
    for (a, c) in basis.classes().iter().enumerate() {
        let ident = c.identities(n) as f64;
        let (x, y, z) = (c.x as f64, c.y as f64, c.z as f64);
        let mut push = |dx, dy, dz, v: f64| {
            if v != 0.0 {
                if let Some(b) = basis.offset(*c, dx, dy, dz) {
                    out.push((a, b, v));
                }
            }
        };
        // Field rotates X <-> Y.
        push(-1, 1, 0, 2.0 * delta * x);
        push(1, -1, 0, -2.0 * delta * y);
        // Ising pairs with exactly one Y or Z site.
        push(1, -1, 1, -2.0 * coupling * y * ident);
        push(-1, -1, 1, -2.0 * coupling * y * x);
        push(1, 1, -1, 2.0 * coupling * z * ident);
        push(-1, 1, -1, 2.0 * coupling * z * x);
    }
}

fn dissipator_triplets(basis: &PermBasis, gamma_e: f64, gamma_d: f64, out: &mut Vec<(usize, usize, f64)>) {
    for (a, c) in basis.classes().iter().enumerate() {
        let (xy, z) = ((c.x + c.y) as f64, c.z as f64);
        let diag = -0.5 * (gamma_e + gamma_d) * xy - gamma_e * z;
        if diag != 0.0 {
            out.push((a, a, diag));
        }
        if gamma_e != 0.0 {
            if let Some(b) = basis.offset(*c, 0, 0, -1) {
                out.push((a, b, -gamma_e * z));
            }
        }
    }
}

fn all_to_all_coupling(model: &ModelSpec) -> Result<f64> {
    model.validate()?;
    if !model.is_all_to_all() {
        return Err(Error::Unsupported(format!(
            "the permutation-symmetric engine needs all-to-all couplings (alpha = 0), got alpha = {}",
            model.alpha
        )));
    }
    Ok(if model.n_spins > 1 {
        model.j_sign / (model.n_spins - 1) as f64
    } else {
        0.0
    })
}

/// Continuous-time generator restricted to the symmetric sector.
pub fn build_liouvillian_perm(model: &ModelSpec, rates: &DissipationSpec, basis: &PermBasis) -> Result<PermSuperMatrix> {
    let coupling = all_to_all_coupling(model)?;
    if model.n_spins != basis.n_spins() {
        return Err(Error::InvalidArgument("model and basis sizes differ".into()));
    }
    rates.validate()?;
    let DissipationSpec::Continuous { gamma_e, gamma_d } = *rates else {
        return Err(Error::InvalidArgument(
            "periodic resets have no generator; use the reset map and the coherent generator".into(),
        ));
    };
    let mut trip = Vec::new();
    hamiltonian_triplets(basis, model.delta, coupling, &mut trip);
    dissipator_triplets(basis, gamma_e, gamma_d, &mut trip);
    Ok(PermSuperMatrix::new(SuperKind::Liouvillian, basis.n_spins(), to_complex(basis.dim(), trip)))
}

/// Dissipative part alone.
pub fn build_dissipator_perm(basis: &PermBasis, gamma_e: f64, gamma_d: f64) -> Result<PermSuperMatrix> {
    DissipationSpec::continuous(gamma_e, gamma_d)?;
    let mut trip = Vec::new();
    dissipator_triplets(basis, gamma_e, gamma_d, &mut trip);
    Ok(PermSuperMatrix::new(SuperKind::Liouvillian, basis.n_spins(), to_complex(basis.dim(), trip)))
}

/// Reset channel applied to every spin with probability `p`.
///
/// A moment with `z` Z-sites picks up contributions from classes where `k`
/// of those sites were identities, weighted by `C(z, k) (1-p)^(w-k) (-p)^k`.
/// Only equal `x`, `y` and lower-or-equal `z` are coupled.
pub fn floquet_map_perm(basis: &PermBasis, p: f64) -> Result<PermSuperMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
    }
    let mut trip = Vec::new();
    for (a, c) in basis.classes().iter().enumerate() {
        let w = c.weight();
        for k in 0..=c.z {
            let mag = basis.ln_binomial(c.z, k).exp() * (1.0 - p).powi((w - k) as i32) * p.powi(k as i32);
            if mag == 0.0 {
                continue;
            }
            let v = if k % 2 == 0 { mag } else { -mag };
            let b = basis.offset(*c, 0, 0, -(k as isize)).expect("lower z stays in range");
            trip.push((a, b, v));
        }
    }
    Ok(PermSuperMatrix::new(SuperKind::ResetMap, basis.n_spins(), to_complex(basis.dim(), trip)))
}

/// `rho -> S^axis rho`.
pub fn left_multiplier_perm(axis: Axis, basis: &PermBasis) -> PermSuperMatrix {
    let n = basis.n_spins();
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let mut trip = Vec::new();
    for (a, c) in basis.classes().iter().enumerate() {
        let ident = c.identities(n) as f64;
        let (x, y, z) = (c.x as f64, c.y as f64, c.z as f64);
        let mut push = |dx, dy, dz, v: C64| {
            if v != C64::default() {
                if let Some(b) = basis.offset(*c, dx, dy, dz) {
                    trip.push((a, b, v));
                }
            }
        };
        // P_a S = sum over sites of single-site products.
        match axis {
            Axis::X => {
                push(1, 0, 0, one * ident);
                push(-1, 0, 0, one * x);
                push(0, -1, 1, -i * y);
                push(0, 1, -1, i * z);
            }
            Axis::Y => {
                push(0, 1, 0, one * ident);
                push(0, -1, 0, one * y);
                push(-1, 0, 1, i * x);
                push(1, 0, -1, -i * z);
            }
            Axis::Z => {
                push(0, 0, 1, one * ident);
                push(0, 0, -1, one * z);
                push(-1, 1, 0, -i * x);
                push(1, -1, 0, i * y);
            }
        }
    }
    PermSuperMatrix::new(
        SuperKind::LeftMultiplier,
        n,
        CsrMatrix::from_triplets(basis.dim(), basis.dim(), trip),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permsym::Counts;

    #[test]
    fn trace_is_a_left_null_vector() {
        let basis = PermBasis::new(5).unwrap();
        let m = ModelSpec::new(5, 0.0, 0.8).unwrap();
        let l = build_liouvillian_perm(&m, &DissipationSpec::continuous(0.7, 0.4).unwrap(), &basis).unwrap();
        assert_eq!(l.matrix().row(0).count(), 0);
    }

    #[test]
    fn power_law_rejected() {
        let basis = PermBasis::new(3).unwrap();
        let m = ModelSpec::new(3, 1.0, 0.8).unwrap();
        let err = build_liouvillian_perm(&m, &DissipationSpec::symmetric(1.0).unwrap(), &basis).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn pure_ising_keeps_x_strings() {
        let basis = PermBasis::new(4).unwrap();
        let m = ModelSpec::new(4, 0.0, 0.0).unwrap();
        let l = build_liouvillian_perm(&m, &DissipationSpec::symmetric(0.0).unwrap(), &basis).unwrap();
        // Columns of X/I classes are empty: nothing flows out of them.
        let dense = l.matrix().to_dense();
        for (b, c) in basis.classes().iter().enumerate() {
            if c.y == 0 && c.z == 0 {
                assert!(dense.iter().all(|row| row[b] == C64::default()));
            }
        }
    }

    #[test]
    fn zero_reset_is_identity_and_single_spin_reset() {
        let basis = PermBasis::new(3).unwrap();
        let e = floquet_map_perm(&basis, 0.0).unwrap();
        assert!(e.matrix().max_abs_diff(&CsrMatrix::identity(basis.dim())) == 0.0);
        let b1 = PermBasis::new(1).unwrap();
        let out = floquet_map_perm(&b1, 0.3).unwrap().apply(&PermState::maximally_mixed(&b1));
        let z = b1.index(Counts::new(0, 0, 1)).unwrap();
        assert!((out.moments()[0].re - 1.0).abs() < 1e-15);
        assert!((out.moments()[z].re + 0.3).abs() < 1e-15);
    }

    #[test]
    fn collective_z_on_identity() {
        let basis = PermBasis::new(6).unwrap();
        let out = left_multiplier_perm(Axis::Z, &basis).apply(&PermState::maximally_mixed(&basis));
        let z = basis.index(Counts::new(0, 0, 1)).unwrap();
        for (i, m) in out.moments().iter().enumerate() {
            let expected = if i == z { 1.0 } else { 0.0 };
            assert!((m.re - expected).abs() < 1e-15 && m.im == 0.0);
        }
        // The orthonormal coefficient of the Z class is N times that of the input.
        let c_in = PermState::maximally_mixed(&basis).coeffs(&basis)[0];
        let c_out = out.coeffs(&basis)[z];
        assert!((c_out / c_in - C64::new(6f64.sqrt(), 0.0)).norm() < 1e-12);
    }
}
