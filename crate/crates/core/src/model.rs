//! Physical model: spin count, couplings, field and dissipation parameters.
//!
//! Energies are measured in units of the spatially averaged interaction per
//! spin, so every coupling matrix is normalized to an average row sum of
//! `j_sign * 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transverse-field Ising chain with power-law couplings and open ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n_spins: usize,
    /// Power-law exponent of the coupling decay; 0 means all-to-all.
    pub alpha: f64,
    /// Transverse field.
    pub delta: f64,
    /// Sign of every coupling, `+1.0` (antiferromagnetic) or `-1.0`.
    pub j_sign: f64,
}

impl ModelSpec {
    pub fn new(n_spins: usize, alpha: f64, delta: f64) -> Result<Self> {
        let spec = Self {
            n_spins,
            alpha,
            delta,
            j_sign: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_j_sign(mut self, j_sign: f64) -> Result<Self> {
        self.j_sign = j_sign;
        self.validate()?;
        Ok(self)
    }

    /// The same model with `H -> -H` (both coupling sign and field flipped).
    pub fn negated(&self) -> Self {
        Self {
            delta: -self.delta,
            j_sign: -self.j_sign,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins == 0 {
            return Err(Error::InvalidParameter("n_spins must be at least 1".into()));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and non-negative, got {}",
                self.alpha
            )));
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameter("delta must be finite".into()));
        }
        if self.j_sign != 1.0 && self.j_sign != -1.0 {
            return Err(Error::InvalidParameter(format!(
                "j_sign must be +1 or -1, got {}",
                self.j_sign
            )));
        }
        Ok(())
    }

    pub fn is_all_to_all(&self) -> bool {
        self.alpha == 0.0
    }
}

/// Symmetric coupling matrix with zero diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    n: usize,
    entries: Vec<f64>,
    /// Target of the averaged row sum; equals the coupling sign.
    pub j_total: f64,
}

impl CouplingMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `(1/N) sum_{i != j} J_ij`
    pub fn average_row_sum(&self) -> f64 {
        self.entries.iter().sum::<f64>() / self.n as f64
    }

    /// Non-zero pairs `(i, j, J_ij)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).filter_map(move |j| {
                let v = self.get(i, j);
                (v != 0.0).then_some((i, j, v))
            })
        })
    }
}

pub fn build_coupling_matrix(spec: &ModelSpec) -> Result<CouplingMatrix> {
    spec.validate()?;
    let n = spec.n_spins;
    let mut entries = vec![0.0; n * n];
    if n == 1 {
        return Ok(CouplingMatrix {
            n,
            entries,
            j_total: spec.j_sign,
        });
    }
    let profile = |d: usize| -> f64 {
        if spec.alpha == 0.0 {
            1.0
        } else {
            (d as f64).powf(-spec.alpha)
        }
    };
    // Sum over ordered pairs of the unnormalized profile, then rescale.
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total += profile(i.abs_diff(j));
            }
        }
    }
    let j0 = spec.j_sign * n as f64 / total;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                entries[i * n + j] = j0 * profile(i.abs_diff(j));
            }
        }
    }
    Ok(CouplingMatrix {
        n,
        entries,
        j_total: spec.j_sign,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DissipationSpec {
    /// Continuous pumping into `|1>` at rate `gamma_e` and dephasing at `gamma_d`.
    Continuous { gamma_e: f64, gamma_d: f64 },
    /// Reset to `|1>` with probability `p` once per period `tau`.
    Floquet { tau: f64, p: f64 },
}

impl DissipationSpec {
    pub fn continuous(gamma_e: f64, gamma_d: f64) -> Result<Self> {
        let d = Self::Continuous { gamma_e, gamma_d };
        d.validate()?;
        Ok(d)
    }

    /// Equal pumping and dephasing rates, the default parametrization.
    pub fn symmetric(gamma: f64) -> Result<Self> {
        Self::continuous(gamma, gamma)
    }

    pub fn floquet(tau: f64, p: f64) -> Result<Self> {
        let d = Self::Floquet { tau, p };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Continuous { gamma_e, gamma_d } => {
                for (name, v) in [("gamma_e", gamma_e), ("gamma_d", gamma_d)] {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "{name} must be finite and non-negative, got {v}"
                        )));
                    }
                }
            }
            Self::Floquet { tau, p } => {
                if !(tau.is_finite() && tau > 0.0) {
                    return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
                }
            }
        }
        Ok(())
    }
}

/// Reset probability per period that matches a continuous rate: `p = gamma * tau`.
pub fn floquet_rate_map(gamma: f64, tau: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be non-negative, got {gamma}")));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    let p = gamma * tau;
    if p > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma * tau = {p} exceeds 1; shorten tau"
        )));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_spins_all_to_all() {
        let j = build_coupling_matrix(&ModelSpec::new(2, 0.0, 0.3).unwrap()).unwrap();
        assert_eq!(j.get(0, 1), 1.0);
        assert_eq!(j.get(1, 0), 1.0);
        assert_eq!(j.get(0, 0), 0.0);
    }

    #[test]
    fn three_spins_all_to_all_rows_sum_to_one() {
        let j = build_coupling_matrix(&ModelSpec::new(3, 0.0, 0.3).unwrap()).unwrap();
        for i in 0..3 {
            let row: f64 = (0..3).map(|k| j.get(i, k)).sum();
            assert!((row - 1.0).abs() < 1e-15);
            for k in 0..3 {
                if k != i {
                    assert_eq!(j.get(i, k), 0.5);
                }
            }
        }
    }

    #[test]
    fn four_spins_power_law_average() {
        // Pair distances on an open 4-chain: three at 1, two at 2, one at 3.
        let j = build_coupling_matrix(&ModelSpec::new(4, 1.0, 0.5).unwrap()).unwrap();
        let j0 = 4.0 / (2.0 * (3.0 + 2.0 / 2.0 + 1.0 / 3.0));
        assert!((j.get(0, 1) - j0).abs() < 1e-15);
        assert!((j.get(0, 3) - j0 / 3.0).abs() < 1e-15);
        assert!((j.average_row_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_spin_gives_zero_matrix() {
        let j = build_coupling_matrix(&ModelSpec::new(1, 2.0, 0.5).unwrap()).unwrap();
        assert_eq!(j.entries(), &[0.0]);
    }

    #[test]
    fn negative_sign_flips_every_entry() {
        let spec = ModelSpec::new(5, 1.5, 0.5).unwrap().with_j_sign(-1.0).unwrap();
        let j = build_coupling_matrix(&spec).unwrap();
        assert!(j.pairs().all(|(_, _, v)| v < 0.0));
        assert!((j.average_row_sum() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn rate_map() {
        assert_eq!(floquet_rate_map(1.0, 0.1).unwrap(), 0.1);
        assert_eq!(floquet_rate_map(0.0, 0.5).unwrap(), 0.0);
        assert!(floquet_rate_map(3.0, 0.5).is_err());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(ModelSpec::new(0, 0.0, 1.0).is_err());
        assert!(ModelSpec::new(3, -1.0, 1.0).is_err());
        assert!(ModelSpec::new(3, 0.0, 1.0).unwrap().with_j_sign(0.5).is_err());
        assert!(DissipationSpec::continuous(-0.1, 0.0).is_err());
        assert!(DissipationSpec::floquet(0.0, 0.5).is_err());
        assert!(DissipationSpec::floquet(0.1, 1.5).is_err());
    }
}
