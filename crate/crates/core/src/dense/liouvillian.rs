//! Lindblad generator on column-stacked density matrices.
//!
//! `L rho = -i[H, rho] + gamma_e sum_i D[sigma_i^-] rho + (gamma_d / 4) sum_i (sigma_i^z rho sigma_i^z - rho)`
//! with `sigma^- = |1><0|`. The operator is applied matrix-free; [`SuperOperator::to_csr`]
//! materializes it for small systems.

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, LinearOperator};
use crate::model::DissipationSpec;
use crate::scalar::C64;

use super::operators::DenseOperator;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone)]
pub struct SuperOperator {
    n_spins: usize,
    d: usize,
    h: DenseOperator,
    gamma_e: f64,
    gamma_d: f64,
    zero_bits: Vec<f64>,
}

/// Builds the generator for a Hermitian `H` and continuous rates.
pub fn build_liouvillian(h: &DenseOperator, rates: &DissipationSpec) -> Result<SuperOperator> {
    rates.validate()?;
    let (gamma_e, gamma_d) = match *rates {
        DissipationSpec::Continuous { gamma_e, gamma_d } => (gamma_e, gamma_d),
        DissipationSpec::Floquet { .. } => {
            return Err(Error::InvalidArgument(
                "the Liouvillian needs continuous rates; use the Floquet map instead".into(),
            ))
        }
    };
    let herm = h.hermiticity_error();
    if herm > 1e-12 {
        return Err(Error::InvalidArgument(format!("Hamiltonian is not Hermitian (error {herm:e})")));
    }
    let n = h.n_spins();
    let d = h.dim();
    let zero_bits = (0..d).map(|a| (n - (a as u32).count_ones() as usize) as f64).collect();
    Ok(SuperOperator {
        n_spins: n,
        d,
        h: h.clone(),
        gamma_e,
        gamma_d,
        zero_bits,
    })
}

impl SuperOperator {
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// Hilbert-space dimension `2^N` (the operator acts on `4^N` entries).
    pub fn hilbert_dim(&self) -> usize {
        self.d
    }

    pub fn hamiltonian(&self) -> &DenseOperator {
        &self.h
    }

    pub fn rates(&self) -> (f64, f64) {
        (self.gamma_e, self.gamma_d)
    }

    #[inline]
    fn dissipative_diag(&self, a: usize, b: usize) -> f64 {
        -0.5 * self.gamma_e * (self.zero_bits[a] + self.zero_bits[b]) - 0.5 * self.gamma_d * ((a ^ b).count_ones() as f64)
    }

    /// Entries of row `a + b d` as `(column, value)`, possibly with repeated columns.
    fn row_entries(&self, a: usize, b: usize, out: &mut Vec<(usize, C64)>) {
        let d = self.d;
        out.clear();
        out.push((a + b * d, C64::new(self.dissipative_diag(a, b), 0.0)));
        for (k, h) in self.h.matrix().row(a) {
            out.push((k + b * d, -I * h));
        }
        for (k, h) in self.h.matrix().row(b) {
            out.push((a + k * d, I * h.conj()));
        }
        if self.gamma_e != 0.0 {
            let both = a & b;
            for i in 0..self.n_spins {
                if both >> i & 1 == 1 {
                    let e = 1usize << i;
                    out.push(((a ^ e) + (b ^ e) * d, C64::new(self.gamma_e, 0.0)));
                }
            }
        }
    }

    pub fn to_csr(&self) -> CsrMatrix<C64> {
        let d = self.d;
        let mut trip = Vec::new();
        let mut row = Vec::new();
        for b in 0..d {
            for a in 0..d {
                self.row_entries(a, b, &mut row);
                trip.extend(row.iter().map(|&(c, v)| (a + b * d, c, v)));
            }
        }
        CsrMatrix::from_triplets(d * d, d * d, trip)
    }

    pub fn frobenius_norm(&self) -> f64 {
        let d = self.d;
        let mut row = Vec::new();
        let mut total = 0.0;
        for b in 0..d {
            for a in 0..d {
                self.row_entries(a, b, &mut row);
                row.sort_unstable_by_key(|e| e.0);
                let mut k = 0;
                while k < row.len() {
                    let mut v = row[k].1;
                    let mut j = k + 1;
                    while j < row.len() && row[j].0 == row[k].0 {
                        v += row[j].1;
                        j += 1;
                    }
                    total += v.norm_sqr();
                    k = j;
                }
            }
        }
        total.sqrt()
    }
}

impl LinearOperator<C64> for SuperOperator {
    fn dim(&self) -> usize {
        self.d * self.d
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let d = self.d;
        let hm = self.h.matrix();
        for b in 0..d {
            let xb = &x[b * d..(b + 1) * d];
            let yb = &mut y[b * d..(b + 1) * d];
            // Dissipative diagonal and -i H rho.
            for (a, ya) in yb.iter_mut().enumerate() {
                let mut acc = xb[a] * self.dissipative_diag(a, b);
                let mut hx = C64::default();
                for (k, h) in hm.row(a) {
                    hx += h * xb[k];
                }
                acc += -I * hx;
                *ya = acc;
            }
            // +i rho H: column b of rho H is sum_k rho[:, k] conj(H[b, k]).
            for (k, h) in hm.row(b) {
                let c = I * h.conj();
                let xk = &x[k * d..(k + 1) * d];
                for (ya, xa) in yb.iter_mut().zip(xk) {
                    *ya += c * *xa;
                }
            }
            // Pumping gain sigma^- rho sigma^+.
            if self.gamma_e != 0.0 {
                for i in 0..self.n_spins {
                    let e = 1usize << i;
                    if b & e == 0 {
                        continue;
                    }
                    let bs = b ^ e;
                    let src = &x[bs * d..(bs + 1) * d];
                    for (a, ya) in yb.iter_mut().enumerate() {
                        if a & e != 0 {
                            *ya += src[a ^ e] * self.gamma_e;
                        }
                    }
                }
            }
        }
    }

    fn norm_estimate(&self) -> f64 {
        let n = self.n_spins as f64;
        2.0 * self.h.matrix().norm_inf() + 2.0 * self.gamma_e * n + 0.5 * self.gamma_d * n
    }
}
