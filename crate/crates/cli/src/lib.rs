//! Batch driver for `dissim-core`: grid sweeps, finite-size scaling runs and
//! single-point correlation exports.

pub mod config;
pub mod emit;
pub mod error;
pub mod sweep;

use dissim_core::analysis::{canonical_grid, solve, CellRequest, CorrelationSet, EngineKind};

pub use config::SweepConfig;
pub use error::{CliError, Result};
pub use sweep::{run_scaling, run_sweep, RunOptions, SweepOutcome};

/// Rescaled correlation series of one point on the standard grid.
pub fn point_correlations(engine: EngineKind, req: &CellRequest, subtract_plateau: bool) -> Result<CorrelationSet> {
    if engine == EngineKind::Meanfield {
        return Err(CliError::Config("the mean-field engine has no correlation series".into()));
    }
    let sol = solve(engine, req, &canonical_grid())?;
    let s = sol.series.expect("non-empty grid yields a series");
    let set = CorrelationSet::from_raw(req.model.n_spins, &s.t, &s.xy, &s.yx)?;
    Ok(if subtract_plateau { set.with_plateau_subtracted() } else { set })
}
