//! Engine for all-to-all couplings, where the dynamics never leaves the
//! permutation-symmetric operators and the state lives in a space of
//! dimension `C(N+3, 3)` instead of `4^N`.

pub mod basis;
pub mod operators;
pub mod solve;
pub mod state;

pub use basis::{dimension, Counts, PermBasis};
pub use operators::{
    build_dissipator_perm, build_liouvillian_perm, floquet_map_perm, left_multiplier_perm, PermSuperMatrix,
    SuperKind,
};
pub use solve::{
    floquet_propagator_for, floquet_propagator_perm, steady_state_floquet_perm, steady_state_perm,
    steady_state_perm_with, stroboscopic_periods, two_time_correlation_perm, two_time_correlations_perm,
    FloquetPropagatorPerm, PermEvolution, PermFloquetOptions, PermFloquetSteadyState, PermSteadyOptions,
};
pub use state::{PermState, EMBED_MAX_SPINS};
