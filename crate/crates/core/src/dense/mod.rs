//! Exact engine on the full `2^N`-dimensional Hilbert space.

pub mod dynamics;
pub mod floquet;
pub mod liouvillian;
pub mod operators;
pub mod pauli;
pub mod protocol;
pub mod state;

pub use dynamics::{
    evolve, evolve_with, propagate_expectations, steady_state_dense, steady_state_dense_with, two_time_correlation_dense,
    two_time_correlations_dense_with, DenseSteadyState, Integrator, PropagationOptions, SteadyStateMethod,
    SteadyStateOptions,
};
pub use floquet::{
    apply_reset_channel, floquet_correlations_dense, floquet_step_dense, floquet_steady_state_dense,
    floquet_steady_state_dense_with, DenseFloquetSteadyState, FloquetSteadyOptions, FloquetStep,
};
pub use liouvillian::{build_liouvillian, SuperOperator};
pub use operators::{build_hamiltonian, collective, reset_kraus, site_pauli, Axis, DenseOperator, IsingTerms, DEFAULT_DENSE_CAP};
pub use protocol::{protocol_im, protocol_re, ProtocolOptions, ProtocolPoint};
pub use state::DenseState;
