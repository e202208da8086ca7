//! Frequency-comb state synthesis.
//!
//! Builds covariance matrices of a multimode squeezed comb measured in a
//! spectral-pixel basis: independently squeezed Hermite-Gauss eigenmodes
//! are projected onto flat-top pixel bands, the unmeasured remainder stays
//! at vacuum, and uniform detection loss is applied last.

mod model;
mod profiles;
mod simulate;

pub use model::{pixel_labels, CombModel, EigenmodeSpec, GridSpec, SqueezingPhase};
pub use profiles::{eigenmode_profiles, pixel_overlap_matrix};
pub use simulate::{
    asymmetric_resolution_cm, simulate_cm, single_eigenmode_comparison, PartitionDelta,
    ResolutionComparison,
};
