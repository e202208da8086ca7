//! Covariance matrices and the symplectic linear algebra on them.

mod bipartition;
mod cm;
pub(crate) mod jacobi;
mod mode_map;
pub mod random;
mod symplectic;

pub use bipartition::{schur_complement, split_blocks, BipartiteBlocks, Bipartition};
pub use cm::{validate_raw, CovarianceMatrix, ValidationFailure, ValidationVerdict};
pub use mode_map::ModeMap;
pub use symplectic::{symplectic_eigenvalues, symplectic_form};
