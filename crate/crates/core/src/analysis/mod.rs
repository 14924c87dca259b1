//! Observables derived from engine output: the order parameter, the four
//! rescaled two-time series and the time-reversal diagnostics built on them.

pub mod audit;
pub mod pipeline;

use serde::{Deserialize, Serialize};

use crate::dense::{collective, Axis, DenseState};
use crate::error::{Error, Result};
use crate::scalar::C64;

pub use audit::{h_sign_audit, HSignReport};
pub use pipeline::{solve, CellRequest, EngineKind, RawSeries, Solution};

/// Points in the standard correlation grid.
pub const GRID_POINTS: usize = 100;
/// Last time of the standard correlation grid.
pub const GRID_END: f64 = 10.0;

/// `GRID_POINTS` equally spaced times on `[0, GRID_END]`, both ends included.
pub fn canonical_grid() -> Vec<f64> {
    (0..GRID_POINTS)
        .map(|k| GRID_END * k as f64 / (GRID_POINTS - 1) as f64)
        .collect()
}

/// `<(S^x)^2> / N^2` of a dense state.
pub fn order_parameter_dense(state: &DenseState) -> f64 {
    let n = state.n_spins();
    let sx = collective(n, Axis::X);
    state.expectation(&sx.matmul(&sx)).re / (n * n) as f64
}

/// `C_ab = (2/N) Re <S^a(t) S^b(0)>` and `chi_ab = (2/N) Im <...>` for
/// `(a, b) = (x, y)` and `(y, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSet {
    pub t_grid: Vec<f64>,
    pub c_xy: Vec<f64>,
    pub c_yx: Vec<f64>,
    pub chi_xy: Vec<f64>,
    pub chi_yx: Vec<f64>,
    /// Whether the last value of each `C` series has been subtracted.
    pub plateau_subtracted: bool,
}

impl CorrelationSet {
    /// Rescales raw `<S^x(t) S^y>` and `<S^y(t) S^x>` series of an `n`-spin system.
    pub fn from_raw(n_spins: usize, t_grid: &[f64], xy: &[C64], yx: &[C64]) -> Result<Self> {
        if xy.len() != t_grid.len() || yx.len() != t_grid.len() {
            return Err(Error::InvalidArgument("correlation series and grid lengths differ".into()));
        }
        if t_grid.is_empty() {
            return Err(Error::InvalidArgument("empty correlation grid".into()));
        }
        let s = 2.0 / n_spins as f64;
        Ok(Self {
            t_grid: t_grid.to_vec(),
            c_xy: xy.iter().map(|v| s * v.re).collect(),
            c_yx: yx.iter().map(|v| s * v.re).collect(),
            chi_xy: xy.iter().map(|v| s * v.im).collect(),
            chi_yx: yx.iter().map(|v| s * v.im).collect(),
            plateau_subtracted: false,
        })
    }

    /// Removes the long-time value of both `C` series. The response series
    /// decay on their own and are left alone. Applying it twice changes nothing.
    pub fn subtract_plateau(&mut self) {
        for c in [&mut self.c_xy, &mut self.c_yx] {
            let last = *c.last().expect("non-empty");
            c.iter_mut().for_each(|v| *v -= last);
        }
        self.plateau_subtracted = true;
    }

    pub fn with_plateau_subtracted(mut self) -> Self {
        self.subtract_plateau();
        self
    }
}

/// `||C_xy - C_yx|| / ||C_xy||` and `||chi_xy - chi_yx|| / ||chi_xy||`;
/// `None` when the denominator vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrsDiagnostics {
    pub norm_c: Option<f64>,
    pub norm_chi: Option<f64>,
}

/// Reporting labels for the two symmetry regimes; never used as test oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrsLabel {
    /// Correlation series antisymmetric: thermal-like.
    Thermal,
    /// Correlation series symmetric while response stays antisymmetric.
    Modified,
    Unlabeled,
}

impl TrsDiagnostics {
    pub fn label(&self) -> TrsLabel {
        match (self.norm_c, self.norm_chi) {
            (Some(c), _) if c < 0.5 => TrsLabel::Modified,
            (Some(c), Some(chi)) if (c - 2.0).abs() < 0.5 && (chi - 2.0).abs() < 0.5 => TrsLabel::Thermal,
            _ => TrsLabel::Unlabeled,
        }
    }
}

fn relative_difference(a: &[f64], b: &[f64]) -> Option<f64> {
    let den = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den == 0.0 || !den.is_finite() {
        return None;
    }
    let num = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    Some(num / den)
}

/// Diagnostics of a plateau-subtracted set; subtracts on a copy if needed.
pub fn trs_norms(set: &CorrelationSet) -> TrsDiagnostics {
    let owned;
    let set = if set.plateau_subtracted {
        set
    } else {
        owned = set.clone().with_plateau_subtracted();
        &owned
    };
    TrsDiagnostics {
        norm_c: relative_difference(&set.c_xy, &set.c_yx),
        norm_chi: relative_difference(&set.chi_xy, &set.chi_yx),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set_from(c_xy: Vec<f64>, c_yx: Vec<f64>, chi_xy: Vec<f64>, chi_yx: Vec<f64>) -> CorrelationSet {
        CorrelationSet {
            t_grid: (0..c_xy.len()).map(|k| k as f64).collect(),
            c_xy,
            c_yx,
            chi_xy,
            chi_yx,
            plateau_subtracted: false,
        }
    }

    #[test]
    fn grid_shape() {
        let g = canonical_grid();
        assert_eq!(g.len(), 100);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[99], 10.0);
    }

    #[test]
    fn symmetric_and_antisymmetric_limits() {
        let c = vec![1.0, 0.5, 0.2, 0.0];
        let chi = vec![-2.0, -1.0, 0.3, 0.1];
        let neg: Vec<f64> = chi.iter().map(|v| -v).collect();
        let d = trs_norms(&set_from(c.clone(), c.clone(), chi.clone(), neg));
        assert_eq!(d.norm_c, Some(0.0));
        assert!((d.norm_chi.unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(d.label(), TrsLabel::Modified);
        let cneg: Vec<f64> = c.iter().map(|v| -v).collect();
        let d = trs_norms(&set_from(c, cneg, chi.clone(), chi.iter().map(|v| -v).collect()));
        assert_eq!(d.label(), TrsLabel::Thermal);
    }

    #[test]
    fn zero_denominator_is_reported() {
        let z = vec![0.0; 3];
        let d = trs_norms(&set_from(z.clone(), vec![1.0, 2.0, 3.0], z.clone(), z));
        assert_eq!(d.norm_c, None);
        assert_eq!(d.norm_chi, None);
        assert_eq!(d.label(), TrsLabel::Unlabeled);
    }

    #[test]
    fn plateau_only_touches_c_and_is_idempotent() {
        let mut s = set_from(vec![3.0, 2.0, 1.0], vec![1.0, 1.0, 1.0], vec![0.5, 0.2, 0.1], vec![1.0, 0.0, 0.1]);
        s.subtract_plateau();
        let once = s.clone();
        s.subtract_plateau();
        assert_eq!(s, once);
        assert_eq!(s.c_xy, vec![2.0, 1.0, 0.0]);
        assert_eq!(s.c_yx, vec![0.0, 0.0, 0.0]);
        assert_eq!(s.chi_xy, vec![0.5, 0.2, 0.1]);
    }

    #[test]
    fn single_pumped_spin() {
        // <sigma^x sigma^y> = i <sigma^z> = -i in |1>.
        let s = CorrelationSet::from_raw(1, &[0.0], &[C64::new(0.0, -1.0)], &[C64::new(0.0, 1.0)]).unwrap();
        assert_eq!(s.chi_xy[0], -2.0);
        assert_eq!(s.c_xy[0], 0.0);
    }

    #[test]
    fn order_parameter_limits() {
        assert!((order_parameter_dense(&DenseState::maximally_mixed(4)) - 0.25).abs() < 1e-14);
        // |+...+> along x
        let n = 3;
        let d = 1usize << n;
        let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        let plus = DenseState::pure(n, &vec![amp; d]);
        assert!((order_parameter_dense(&plus) - 1.0).abs() < 1e-14);
    }
}
