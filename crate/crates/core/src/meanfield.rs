//! Closed-form steady state of the second-order cumulant expansion.
//!
//! Only the uniform all-to-all reduction is implemented: with every
//! coupling row summing to `j_total`, the connected three-point terms
//! dropped, and the ferromagnetic branch chosen, the two-site correlator
//! `<sigma^x_i sigma^x_j>` has a closed form in `delta` and the total decay
//! rate. It does not depend on the coupling exponent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldResult {
    /// `<sigma^z>` on the ferromagnetic branch.
    pub z: f64,
    /// `<sigma^x_i sigma^x_j>` for `i != j`; negative values mean the
    /// ferromagnetic branch does not exist.
    pub xx_correlator: f64,
    /// `max(xx_correlator, 0)`, the order-parameter prediction.
    pub mf_order: f64,
    /// `gamma_e + gamma_d` at the boundary for this field, if there is one.
    pub boundary_gamma_sum: Option<f64>,
}

impl MeanFieldResult {
    pub fn is_ferromagnetic(&self) -> bool {
        self.xx_correlator > 0.0
    }
}

/// Steady-state correlator and magnetization for field `delta`,
/// pumping rate `gamma_e`, dephasing rate `gamma_d` and total coupling `j_total`.
pub fn cumulant_correlator(delta: f64, gamma_e: f64, gamma_d: f64, j_total: f64) -> Result<MeanFieldResult> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::InvalidParameter(
            "the cumulant reduction divides by the field; delta must be non-zero".into(),
        ));
    }
    if !(j_total.is_finite() && j_total > 0.0) {
        return Err(Error::InvalidParameter(format!("j_total must be positive, got {j_total}")));
    }
    for (name, v) in [("gamma_e", gamma_e), ("gamma_d", gamma_d)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be non-negative, got {v}")));
        }
    }
    let g = gamma_e + gamma_d;
    // Both rates zero: the pumping fraction is taken along gamma_e = gamma_d.
    let pump_fraction = if g == 0.0 { 0.5 } else { gamma_e / g };
    let xx = pump_fraction * (16.0 * delta * (j_total - delta) - g * g) / (4.0 * j_total * j_total);
    let z = -(8.0 * delta + g * g / (2.0 * delta)) / (8.0 * j_total);
    Ok(MeanFieldResult {
        z,
        xx_correlator: xx,
        mf_order: xx.max(0.0),
        boundary_gamma_sum: phase_boundary(delta, j_total),
    })
}

/// Total decay rate `gamma_e + gamma_d` at which the ferromagnetic branch
/// disappears, `4 sqrt(delta (j_total - delta))`; `None` when no field in
/// this range supports a ferromagnet.
pub fn phase_boundary(delta: f64, j_total: f64) -> Option<f64> {
    if !(j_total > 0.0) || !(0.0..=j_total).contains(&delta) {
        return None;
    }
    Some(4.0 * (delta * (j_total - delta)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_values() {
        let r = cumulant_correlator(0.5, 0.5, 0.5, 1.0).unwrap();
        assert!((r.xx_correlator - 0.375).abs() < 1e-15);
        assert!((r.z + 0.625).abs() < 1e-15);
        let on = cumulant_correlator(0.5, 1.0, 1.0, 1.0).unwrap();
        assert!(on.xx_correlator.abs() < 1e-15);
        let weak = cumulant_correlator(0.5, 1e-9, 1e-9, 1.0).unwrap();
        assert!((weak.xx_correlator - 0.5).abs() < 1e-12);
        let none = cumulant_correlator(0.5, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(none.xx_correlator, 0.5);
    }

    #[test]
    fn boundary_values() {
        assert_eq!(phase_boundary(0.5, 1.0), Some(2.0));
        assert_eq!(phase_boundary(0.0, 1.0), Some(0.0));
        assert_eq!(phase_boundary(1.2, 1.0), None);
        assert_eq!(phase_boundary(-0.1, 1.0), None);
    }

    #[test]
    fn zero_field_rejected() {
        assert!(cumulant_correlator(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn paramagnet_is_clipped() {
        let r = cumulant_correlator(0.5, 1.5, 1.5, 1.0).unwrap();
        assert!(r.xx_correlator < 0.0);
        assert_eq!(r.mf_order, 0.0);
        assert!(!r.is_ferromagnetic());
    }

    proptest! {
        #[test]
        fn correlator_bounded_by_dissipation_free_value(
            delta in 0.01f64..0.99, ge in 0.0f64..3.0, gd in 0.0f64..3.0,
        ) {
            let r = cumulant_correlator(delta, ge, gd, 1.0).unwrap();
            let frac = if ge + gd == 0.0 { 0.5 } else { ge / (ge + gd) };
            prop_assert!(r.xx_correlator <= frac * 4.0 * delta * (1.0 - delta) + 1e-15);
            prop_assert!(r.mf_order >= 0.0);
        }

        #[test]
        fn sign_change_sits_on_the_boundary(delta in 0.01f64..0.99, split in 0.05f64..0.95) {
            let g = phase_boundary(delta, 1.0).unwrap();
            let r = cumulant_correlator(delta, split * g, (1.0 - split) * g, 1.0).unwrap();
            prop_assert!(r.xx_correlator.abs() < 1e-12);
            let inside = cumulant_correlator(delta, split * g * 0.99, (1.0 - split) * g * 0.99, 1.0).unwrap();
            let outside = cumulant_correlator(delta, split * g * 1.01, (1.0 - split) * g * 1.01, 1.0).unwrap();
            prop_assert!(inside.xx_correlator > 0.0 && outside.xx_correlator < 0.0);
        }
    }
}
