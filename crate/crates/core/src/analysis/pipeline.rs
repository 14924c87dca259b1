//! One (delta, gamma) point solved by any engine, reduced to the same observables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dense::{
    build_hamiltonian, build_liouvillian, collective, floquet_correlations_dense, floquet_steady_state_dense,
    steady_state_dense, two_time_correlations_dense_with, Axis, DenseState, FloquetStep, PropagationOptions,
    DEFAULT_DENSE_CAP,
};
use crate::error::{Error, Result};
use crate::meanfield::cumulant_correlator;
use crate::model::{build_coupling_matrix, floquet_rate_map, DissipationSpec, ModelSpec};
use crate::permsym::{
    build_liouvillian_perm, floquet_propagator_for, steady_state_floquet_perm, steady_state_perm,
    two_time_correlations_perm, PermBasis, PermEvolution, PermFloquetOptions, PermState,
};
use crate::scalar::C64;

use super::order_parameter_dense;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    Dense,
    Permsym,
    FloquetDense,
    FloquetPermsym,
    Meanfield,
}

impl EngineKind {
    pub const ALL: [EngineKind; 5] = [
        EngineKind::Dense,
        EngineKind::Permsym,
        EngineKind::FloquetDense,
        EngineKind::FloquetPermsym,
        EngineKind::Meanfield,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EngineKind::Dense => "dense",
            EngineKind::Permsym => "permsym",
            EngineKind::FloquetDense => "floquet-dense",
            EngineKind::FloquetPermsym => "floquet-permsym",
            EngineKind::Meanfield => "meanfield",
        }
    }

    pub fn is_floquet(&self) -> bool {
        matches!(self, EngineKind::FloquetDense | EngineKind::FloquetPermsym)
    }

    /// Rejects models the engine cannot represent.
    pub fn check_model(&self, model: &ModelSpec, dense_cap: usize) -> Result<()> {
        model.validate()?;
        match self {
            EngineKind::Permsym | EngineKind::FloquetPermsym if !model.is_all_to_all() => Err(Error::Unsupported(
                format!("{} needs alpha = 0, got {}", self.as_str(), model.alpha),
            )),
            EngineKind::Dense | EngineKind::FloquetDense if model.n_spins > dense_cap => Err(Error::Capacity {
                n_spins: model.n_spins,
                cap: dense_cap,
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown engine '{s}'")))
    }
}

/// Model and dissipation for one point; `gamma` sets `gamma_e = gamma_d`,
/// and with a period `tau` the reset probability is `gamma * tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRequest {
    pub model: ModelSpec,
    pub gamma: f64,
    pub tau: Option<f64>,
    pub dense_cap: usize,
}

impl CellRequest {
    pub fn new(model: ModelSpec, gamma: f64) -> Self {
        Self {
            model,
            gamma,
            tau: None,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = Some(tau);
        self
    }

    fn floquet(&self, engine: EngineKind) -> Result<(f64, f64)> {
        let tau = self
            .tau
            .ok_or_else(|| Error::InvalidArgument(format!("{engine} needs a period tau")))?;
        Ok((tau, floquet_rate_map(self.gamma, tau)?))
    }
}

/// Raw `<S^x(t) S^y(0)>` and `<S^y(t) S^x(0)>`; the stroboscopic engines
/// report the nearest multiples of the period actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub t: Vec<f64>,
    pub xy: Vec<C64>,
    pub yx: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub m_f: f64,
    /// `<S^y>`, zero for every Z2-symmetric steady state.
    pub s_y: f64,
    /// Reset probability, for the stroboscopic engines.
    pub p: Option<f64>,
    pub series: Option<RawSeries>,
}

/// Snaps each time to the nearest multiple of `tau`.
pub fn stroboscopic_grid(grid: &[f64], tau: f64) -> Vec<f64> {
    grid.iter().map(|t| (t / tau).round() * tau).collect()
}

fn dense_hamiltonian(req: &CellRequest) -> Result<crate::dense::DenseOperator> {
    build_hamiltonian(&req.model, &build_coupling_matrix(&req.model)?, req.dense_cap)
}

fn dense_y(state: &DenseState) -> f64 {
    state.expectation(&collective(state.n_spins(), Axis::Y)).re
}

/// Steady state of one point and, for a non-empty `grid`, its correlation series.
pub fn solve(engine: EngineKind, req: &CellRequest, grid: &[f64]) -> Result<Solution> {
    engine.check_model(&req.model, req.dense_cap)?;
    let n = req.model.n_spins;
    let want = !grid.is_empty();
    match engine {
        EngineKind::Meanfield => {
            let mf = cumulant_correlator(req.model.delta, req.gamma, req.gamma, 1.0)?;
            Ok(Solution {
                m_f: mf.mf_order,
                s_y: 0.0,
                p: None,
                series: None,
            })
        }
        EngineKind::Dense => {
            let h = dense_hamiltonian(req)?;
            let l = build_liouvillian(&h, &DissipationSpec::symmetric(req.gamma)?)?;
            let rho = steady_state_dense(&l)?;
            let series = if want {
                let opts = PropagationOptions::krylov(1e-11);
                let (sx, sy) = (collective(n, Axis::X), collective(n, Axis::Y));
                let xy = two_time_correlations_dense_with(&[&sx], &sy, &rho, &l, grid, &opts)?.remove(0);
                let yx = two_time_correlations_dense_with(&[&sy], &sx, &rho, &l, grid, &opts)?.remove(0);
                Some(RawSeries {
                    t: grid.to_vec(),
                    xy,
                    yx,
                })
            } else {
                None
            };
            Ok(Solution {
                m_f: order_parameter_dense(&rho),
                s_y: dense_y(&rho),
                p: None,
                series,
            })
        }
        EngineKind::FloquetDense => {
            let (tau, p) = req.floquet(engine)?;
            let h = dense_hamiltonian(req)?;
            let rho = floquet_steady_state_dense(&h, tau, p, 1e-10)?;
            let series = if want {
                let t = stroboscopic_grid(grid, tau);
                let periods: Vec<usize> = t.iter().map(|t| (t / tau).round() as usize).collect();
                let step = FloquetStep::new(&h, tau, p)?;
                let (sx, sy) = (collective(n, Axis::X), collective(n, Axis::Y));
                let last = *periods.iter().max().expect("non-empty");
                let xy = floquet_correlations_dense(&[&sx], &sy, &rho, &step, last)?.remove(0);
                let yx = floquet_correlations_dense(&[&sy], &sx, &rho, &step, last)?.remove(0);
                Some(RawSeries {
                    xy: periods.iter().map(|&k| xy[k]).collect(),
                    yx: periods.iter().map(|&k| yx[k]).collect(),
                    t,
                })
            } else {
                None
            };
            Ok(Solution {
                m_f: order_parameter_dense(&rho),
                s_y: dense_y(&rho),
                p: Some(p),
                series,
            })
        }
        EngineKind::Permsym => {
            let basis = PermBasis::new(n)?;
            let l = build_liouvillian_perm(&req.model, &DissipationSpec::symmetric(req.gamma)?, &basis)?;
            let rho = steady_state_perm(&l)?;
            let series = if want {
                perm_series(&rho, PermEvolution::Continuous(&l), grid.to_vec())?
            } else {
                None
            };
            Ok(perm_solution(&basis, &rho, None, series))
        }
        EngineKind::FloquetPermsym => {
            let (tau, p) = req.floquet(engine)?;
            let basis = PermBasis::new(n)?;
            let coherent = build_liouvillian_perm(&req.model, &DissipationSpec::symmetric(0.0)?, &basis)?;
            let k = floquet_propagator_for(&coherent, &basis, tau, p)?;
            let rho = steady_state_floquet_perm(&k, &PermFloquetOptions::default())?.state;
            let series = if want {
                perm_series(&rho, PermEvolution::Stroboscopic(&k), stroboscopic_grid(grid, tau))?
            } else {
                None
            };
            Ok(perm_solution(&basis, &rho, Some(p), series))
        }
    }
}

fn perm_series(rho: &PermState, evolution: PermEvolution<'_>, t: Vec<f64>) -> Result<Option<RawSeries>> {
    let xy = two_time_correlations_perm(&[Axis::X], Axis::Y, rho, evolution, &t)?.remove(0);
    let yx = two_time_correlations_perm(&[Axis::Y], Axis::X, rho, evolution, &t)?.remove(0);
    Ok(Some(RawSeries { t, xy, yx }))
}

fn perm_solution(basis: &PermBasis, rho: &PermState, p: Option<f64>, series: Option<RawSeries>) -> Solution {
    Solution {
        m_f: rho.order_parameter(basis),
        s_y: rho.collective_expectation(basis, Axis::Y).re,
        p,
        series,
    }
}
