//! Check of the relations between the steady states of `H` and `-H`.
//!
//! With real jump operators, flipping the sign of the Hamiltonian is the same
//! as complex conjugation of the whole evolution. `M_F` and the response
//! series therefore stay put while `<S^y>` and the symmetric correlation
//! change sign.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::pipeline::{solve, CellRequest, EngineKind, RawSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HSignReport {
    pub engine: EngineKind,
    /// `M_F` for `H` and `-H`.
    pub m_f: [f64; 2],
    /// `<S^y>` for `H` and `-H`.
    pub s_y: [f64; 2],
    /// `|M_F(H) - M_F(-H)|`
    pub m_f_mismatch: f64,
    /// `|<S^y>(H) + <S^y>(-H)|`
    pub s_y_mismatch: f64,
    /// Largest `|C_xy(H) + C_xy(-H)|` over the grid.
    pub c_xy_mismatch: f64,
    /// Largest `|chi_xy(H) - chi_xy(-H)|` over the grid.
    pub chi_xy_mismatch: f64,
    pub tol: f64,
    pub violations: Vec<String>,
}

impl HSignReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn scaled(n: usize, s: &RawSeries) -> Vec<(f64, f64)> {
    let f = 2.0 / n as f64;
    s.xy.iter().map(|v| (f * v.re, f * v.im)).collect()
}

/// Solves the point for `H` and `-H` with the same engine and compares the
/// four relations at absolute tolerance `tol`.
pub fn h_sign_audit(engine: EngineKind, req: &CellRequest, grid: &[f64], tol: f64) -> Result<HSignReport> {
    if engine == EngineKind::Meanfield {
        return Err(Error::Unsupported("the mean-field engine has no correlation series".into()));
    }
    let flipped = CellRequest {
        model: req.model.negated(),
        ..*req
    };
    let a = solve(engine, req, grid)?;
    let b = solve(engine, &flipped, grid)?;
    let n = req.model.n_spins;
    let (sa, sb) = match (&a.series, &b.series) {
        (Some(x), Some(y)) => (scaled(n, x), scaled(n, y)),
        _ => (Vec::new(), Vec::new()),
    };
    let c_xy_mismatch = sa.iter().zip(&sb).map(|(x, y)| (x.0 + y.0).abs()).fold(0.0, f64::max);
    let chi_xy_mismatch = sa.iter().zip(&sb).map(|(x, y)| (x.1 - y.1).abs()).fold(0.0, f64::max);
    let m_f_mismatch = (a.m_f - b.m_f).abs();
    let s_y_mismatch = (a.s_y + b.s_y).abs();
    let mut violations = Vec::new();
    for (name, v) in [
        ("M_F equal", m_f_mismatch),
        ("<S^y> negated", s_y_mismatch),
        ("C_xy negated", c_xy_mismatch),
        ("chi_xy equal", chi_xy_mismatch),
    ] {
        if !(v <= tol) {
            violations.push(format!("{name}: mismatch {v:e} exceeds {tol:e}"));
        }
    }
    Ok(HSignReport {
        engine,
        m_f: [a.m_f, b.m_f],
        s_y: [a.s_y, b.s_y],
        m_f_mismatch,
        s_y_mismatch,
        c_xy_mismatch,
        chi_xy_mismatch,
        tol,
        violations,
    })
}
