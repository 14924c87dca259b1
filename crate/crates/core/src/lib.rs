pub mod analysis;
pub mod dense;
pub mod error;
pub mod linalg;
pub mod meanfield;
pub mod model;
pub mod permsym;
pub mod scalar;

pub use error::{Error, Result};
pub use model::{build_coupling_matrix, floquet_rate_map, CouplingMatrix, DissipationSpec, ModelSpec};
pub use scalar::{Scalar, C64};
