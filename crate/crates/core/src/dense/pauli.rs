//! Pauli-string coordinates for the dense engine.
//!
//! A state is stored through its moments `m_P = Tr(P rho)` over all `4^N`
//! Pauli strings, so `rho = 2^-N sum_P m_P P`. A string is encoded by two bit
//! masks: `p` marks sites carrying X or Y (the sites where `P` flips a basis
//! state) and `s` marks sites carrying Y or Z. Per site: I = (0, 0),
//! X = (1, 0), Y = (1, 1), Z = (0, 1).
//!
//! For the model Hamiltonian the generator of the moments is a real matrix,
//! and it commutes with the global spin flip `prod_i sigma_i^z`, so it splits
//! into two sectors by the parity of `popcount(p)`. Inside a sector the low
//! bit of `p` is fixed by the others, which gives the compact index
//! `(s << (N - 1)) | (p >> 1)`.

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, LinearOperator};
use crate::scalar::{Scalar, C64};

use super::liouvillian::SuperOperator;
use super::operators::IsingTerms;

/// Sector of the global spin flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(p: usize) -> Self {
        if p.count_ones() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    fn bit(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// Index of string `(p, s)` in a full moment vector.
#[inline]
pub fn full_index(n: usize, p: usize, s: usize) -> usize {
    (s << n) | p
}

/// Index of string `(p, s)` inside its sector.
#[inline]
pub fn compact_index(n: usize, p: usize, s: usize) -> usize {
    (s << (n - 1)) | (p >> 1)
}

/// `p` masks of one sector in compact order.
fn sector_masks(n: usize, parity: Parity) -> Vec<usize> {
    (0..1usize << (n - 1))
        .map(|q| (q << 1) | ((q.count_ones() as usize & 1) ^ parity.bit()))
        .collect()
}

/// In-place unnormalized Walsh-Hadamard transform.
fn walsh_hadamard(v: &mut [C64]) {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for start in (0..len).step_by(2 * h) {
            for k in start..start + h {
                let (a, b) = (v[k], v[k + h]);
                v[k] = a + b;
                v[k + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// `i^k`
fn i_pow(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// Moments `Tr(P X)` of a column-major `2^N x 2^N` matrix, in full layout.
pub fn moments_from_matrix(n: usize, data: &[C64]) -> Vec<C64> {
    let d = 1usize << n;
    assert_eq!(data.len(), d * d);
    let mut out = vec![C64::default(); d * d];
    let mut f = vec![C64::default(); d];
    for p in 0..d {
        // Tr(P X) = i^{#Y} sum_c (-1)^{c.s} X[c, c ^ p]
        for (c, fc) in f.iter_mut().enumerate() {
            *fc = data[c + (c ^ p) * d];
        }
        walsh_hadamard(&mut f);
        for (s, fs) in f.iter().enumerate() {
            out[full_index(n, p, s)] = *fs * i_pow((p & s).count_ones());
        }
    }
    out
}

/// Inverse of [`moments_from_matrix`].
pub fn matrix_from_moments(n: usize, moments: &[C64]) -> Vec<C64> {
    let d = 1usize << n;
    assert_eq!(moments.len(), d * d);
    let mut out = vec![C64::default(); d * d];
    let mut f = vec![C64::default(); d];
    let norm = 1.0 / d as f64;
    for p in 0..d {
        for (s, fs) in f.iter_mut().enumerate() {
            *fs = moments[full_index(n, p, s)] * i_pow(4 - (p & s).count_ones() % 4);
        }
        walsh_hadamard(&mut f);
        for (c, fc) in f.iter().enumerate() {
            out[c + (c ^ p) * d] = *fc * norm;
        }
    }
    out
}

/// Compact sector part of a full moment vector.
pub fn sector_part(n: usize, parity: Parity, full: &[C64]) -> Vec<C64> {
    let masks = sector_masks(n, parity);
    let mut out = Vec::with_capacity(full.len() / 2);
    for s in 0..1usize << n {
        out.extend(masks.iter().map(|&p| full[full_index(n, p, s)]));
    }
    out
}

/// Writes a compact sector vector back into a full moment vector.
pub fn scatter_sector(n: usize, parity: Parity, part: &[C64], full: &mut [C64]) {
    let masks = sector_masks(n, parity);
    let b = masks.len();
    for s in 0..1usize << n {
        for (q, &p) in masks.iter().enumerate() {
            full[full_index(n, p, s)] = part[s * b + q];
        }
    }
}

/// Moment generator restricted to one sector.
#[derive(Debug, Clone)]
pub struct PauliGenerator {
    n: usize,
    parity: Parity,
    delta: f64,
    gamma_e: f64,
    gamma_d: f64,
    pairs: Vec<(usize, usize, f64)>,
    masks: Vec<usize>,
    /// `p_k(q)` as 0.0 / 1.0, one row per site.
    occupied: Vec<Vec<f64>>,
    /// `1 - 2 p_k(q)`, one row per site.
    signs: Vec<Vec<f64>>,
}

impl PauliGenerator {
    pub fn new(n: usize, parity: Parity, terms: &IsingTerms, gamma_e: f64, gamma_d: f64) -> Self {
        assert!(n >= 1);
        let masks = sector_masks(n, parity);
        let occupied: Vec<Vec<f64>> = (0..n)
            .map(|k| masks.iter().map(|&p| ((p >> k) & 1) as f64).collect())
            .collect();
        let signs = occupied
            .iter()
            .map(|row| row.iter().map(|o| 1.0 - 2.0 * o).collect())
            .collect();
        Self {
            n,
            parity,
            delta: terms.delta,
            gamma_e,
            gamma_d,
            pairs: terms.pairs.clone(),
            masks,
            occupied,
            signs,
        }
    }

    /// Generator for the model behind `l`, if `l` was built from a model Hamiltonian.
    pub fn from_liouvillian(l: &SuperOperator, parity: Parity) -> Option<Self> {
        let terms = l.hamiltonian().ising_terms()?;
        let (ge, gd) = l.rates();
        Some(Self::new(l.n_spins(), parity, terms, ge, gd))
    }

    pub fn n_spins(&self) -> usize {
        self.n
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    fn block(&self) -> usize {
        self.masks.len()
    }

    fn diag(&self, p: usize, s: usize) -> f64 {
        let flips = p.count_ones() as f64;
        let zs = (s & !p).count_ones() as f64;
        -0.5 * (self.gamma_e + self.gamma_d) * flips - self.gamma_e * zs
    }

    /// Entries of one row as `(column, value)`.
    fn row_entries(&self, s: usize, q: usize, out: &mut Vec<(usize, f64)>) {
        let n = self.n;
        let b = self.block();
        let p = self.masks[q];
        out.clear();
        out.push((s * b + q, self.diag(p, s)));
        for &(i, j, v) in &self.pairs {
            let (si, sj) = ((s >> i) & 1, (s >> j) & 1);
            if si == sj {
                continue;
            }
            let k = if si == 1 { i } else { j };
            let sign = if (p >> k) & 1 == 1 { -2.0 } else { 2.0 };
            let qm = ((1usize << i) | (1usize << j)) >> 1;
            out.push((s * b + (q ^ qm), sign * v));
        }
        for k in 0..n {
            let src = (s ^ (1 << k)) * b + q;
            let pk = (p >> k) & 1 == 1;
            match ((s >> k) & 1 == 1, pk) {
                (false, true) => out.push((src, 2.0 * self.delta)),
                (true, true) => out.push((src, -2.0 * self.delta)),
                (true, false) if self.gamma_e != 0.0 => out.push((src, -self.gamma_e)),
                _ => {}
            }
        }
    }

    /// Squared Frobenius norm of this block. Pauli strings scaled by
    /// `2^{-N/2}` are orthonormal, so both blocks together give `||L||_F^2`.
    pub fn frobenius_norm_sq(&self) -> f64 {
        let b = self.block();
        let mut row = Vec::new();
        let mut total = 0.0;
        for s in 0..1usize << self.n {
            for q in 0..b {
                self.row_entries(s, q, &mut row);
                total += row.iter().map(|e| e.1 * e.1).sum::<f64>();
            }
        }
        total
    }

    pub fn to_csr(&self) -> CsrMatrix<f64> {
        let b = self.block();
        let dim = b << self.n;
        let mut trip = Vec::new();
        let mut row = Vec::new();
        for s in 0..1usize << self.n {
            for q in 0..b {
                self.row_entries(s, q, &mut row);
                trip.extend(row.iter().filter(|e| e.1 != 0.0).map(|&(c, v)| (s * b + q, c, v)));
            }
        }
        CsrMatrix::from_triplets(dim, dim, trip)
    }

    fn apply_generic<T: Scalar>(&self, x: &[T], y: &mut [T]) {
        let n = self.n;
        let b = self.block();
        assert_eq!(x.len(), b << n);
        assert_eq!(y.len(), b << n);
        let hflip = 0.5 * (self.gamma_e + self.gamma_d);
        for s in 0..1usize << n {
            let xin = &x[s * b..(s + 1) * b];
            let out = &mut y[s * b..(s + 1) * b];
            let sz = s.count_ones() as f64;
            for (q, (o, xi)) in out.iter_mut().zip(xin).enumerate() {
                let p = self.masks[q];
                let d = -hflip * p.count_ones() as f64 - self.gamma_e * (sz - (s & p).count_ones() as f64);
                *o = xi.scale(d);
            }
            for &(i, j, v) in &self.pairs {
                let (si, sj) = ((s >> i) & 1, (s >> j) & 1);
                if si == sj {
                    continue;
                }
                let k = if si == 1 { i } else { j };
                let qm = ((1usize << i) | (1usize << j)) >> 1;
                let c = 2.0 * v;
                for (q, (o, sg)) in out.iter_mut().zip(&self.signs[k]).enumerate() {
                    *o += xin[q ^ qm].scale(c * sg);
                }
            }
            for k in 0..n {
                let src = &x[(s ^ (1 << k)) * b..(s ^ (1 << k)) * b + b];
                let occ = &self.occupied[k];
                if (s >> k) & 1 == 0 {
                    let c = 2.0 * self.delta;
                    for ((o, xs), f) in out.iter_mut().zip(src).zip(occ) {
                        *o += xs.scale(c * f);
                    }
                } else {
                    let (a0, a1) = (-self.gamma_e, self.gamma_e - 2.0 * self.delta);
                    for ((o, xs), f) in out.iter_mut().zip(src).zip(occ) {
                        *o += xs.scale(a0 + a1 * f);
                    }
                }
            }
        }
    }

    fn bound(&self) -> f64 {
        let n = self.n as f64;
        let pair_sum: f64 = self.pairs.iter().map(|p| p.2.abs()).sum();
        (1.5 * self.gamma_e + 0.5 * self.gamma_d) * n + self.gamma_e * n + 2.0 * self.delta.abs() * n + 2.0 * pair_sum
    }
}

impl LinearOperator<f64> for PauliGenerator {
    fn dim(&self) -> usize {
        self.block() << self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_generic(x, y)
    }
    fn norm_estimate(&self) -> f64 {
        self.bound()
    }
}

impl LinearOperator<C64> for PauliGenerator {
    fn dim(&self) -> usize {
        self.block() << self.n
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.apply_generic(x, y)
    }
    fn norm_estimate(&self) -> f64 {
        self.bound()
    }
}

/// Both sector generators of a model Liouvillian.
#[derive(Debug, Clone)]
pub struct PauliPair {
    pub even: PauliGenerator,
    pub odd: PauliGenerator,
}

impl PauliPair {
    pub fn from_liouvillian(l: &SuperOperator) -> Result<Self> {
        let even = PauliGenerator::from_liouvillian(l, Parity::Even).ok_or_else(|| {
            Error::Unsupported("Pauli coordinates need a Hamiltonian built from a model".into())
        })?;
        let odd = PauliGenerator::from_liouvillian(l, Parity::Odd).expect("same Hamiltonian");
        Ok(Self { even, odd })
    }

    pub fn frobenius_norm(&self) -> f64 {
        (self.even.frobenius_norm_sq() + self.odd.frobenius_norm_sq()).sqrt()
    }

    pub fn sector(&self, parity: Parity) -> &PauliGenerator {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::liouvillian::build_liouvillian;
    use crate::dense::operators::{build_hamiltonian, site_pauli, Axis};
    use crate::dense::state::DenseState;
    use crate::model::{build_coupling_matrix, DissipationSpec, ModelSpec};

    fn liouvillian(n: usize, alpha: f64) -> SuperOperator {
        let model = ModelSpec::new(n, alpha, 0.63).unwrap();
        let h = build_hamiltonian(&model, &build_coupling_matrix(&model).unwrap(), 12).unwrap();
        build_liouvillian(&h, &DissipationSpec::continuous(0.7, 0.25).unwrap()).unwrap()
    }

    fn test_matrix(n: usize) -> Vec<C64> {
        let d = 1 << n;
        (0..d * d)
            .map(|k| C64::new((k as f64 * 0.37).sin(), (k as f64 * 1.3).cos()))
            .collect()
    }

    #[test]
    fn transform_round_trip_and_single_site_moments() {
        let n = 3;
        let x = test_matrix(n);
        let back = matrix_from_moments(n, &moments_from_matrix(n, &x));
        let err = x.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-13);
        // Tr(sigma_1^y X) against the operator product.
        let state = DenseState::from_vec(n, x.clone()).unwrap();
        let m = moments_from_matrix(n, &x);
        for (axis, p, s) in [(Axis::X, 2, 0), (Axis::Y, 2, 2), (Axis::Z, 0, 2)] {
            let expect = state.expectation(&site_pauli(n, 1, axis));
            assert!((m[full_index(n, p, s)] - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn sector_generator_matches_vectorized_liouvillian() {
        for (n, alpha) in [(1, 0.0), (2, 0.0), (3, 1.0), (4, 0.5)] {
            let l = liouvillian(n, alpha);
            let pair = PauliPair::from_liouvillian(&l).unwrap();
            let x = test_matrix(n);
            let mut lx = vec![C64::default(); x.len()];
            l.apply(&x, &mut lx);
            let m_in = moments_from_matrix(n, &x);
            let m_out = moments_from_matrix(n, &lx);
            for parity in [Parity::Even, Parity::Odd] {
                let g = pair.sector(parity);
                let xin = sector_part(n, parity, &m_in);
                let expect = sector_part(n, parity, &m_out);
                let mut y = vec![C64::default(); xin.len()];
                g.apply(&xin, &mut y);
                let err = y.iter().zip(&expect).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(err < 1e-11, "n={n} {parity:?}: {err}");
                let re: Vec<f64> = xin.iter().map(|v| v.re).collect();
                let mut y2 = vec![0.0; xin.len()];
                g.to_csr().matvec(&re, &mut y2);
                let mut y3 = vec![0.0; xin.len()];
                g.apply(&re, &mut y3);
                let err = y3.iter().zip(&y2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err < 1e-12);
            }
        }
    }

    #[test]
    fn frobenius_norm_is_basis_independent() {
        let l = liouvillian(3, 1.0);
        let pair = PauliPair::from_liouvillian(&l).unwrap();
        assert!((pair.frobenius_norm() - l.frobenius_norm()).abs() < 1e-10 * l.frobenius_norm());
    }

    #[test]
    fn sectors_reassemble() {
        let n = 3;
        let m = moments_from_matrix(n, &test_matrix(n));
        let mut full = vec![C64::default(); m.len()];
        for parity in [Parity::Even, Parity::Odd] {
            scatter_sector(n, parity, &sector_part(n, parity, &m), &mut full);
        }
        assert_eq!(full, m);
    }

    #[test]
    fn generic_hamiltonian_is_rejected() {
        let h = site_pauli(2, 0, Axis::X);
        let l = build_liouvillian(&h, &DissipationSpec::symmetric(1.0).unwrap()).unwrap();
        assert!(PauliPair::from_liouvillian(&l).is_err());
    }
}
