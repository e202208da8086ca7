//! Gaussian steering analysis for multimode squeezed light.
//!
//! The crate is organized in four layers:
//!
//! * [`gaussian`] — validated covariance matrices in mode-major quadrature
//!   ordering (x1, p1, x2, p2, ...) with vacuum variance 1, plus the
//!   symplectic linear algebra built on them (symplectic spectra, bipartite
//!   block splitting, Schur complements, orthonormal mode maps).
//! * [`steering`] — the steering quantifier
//!   `G = max(0, -sum ln nu_i)` over sub-unity conditional symplectic
//!   eigenvalues, and the analyses layered on it: bipartition enumeration,
//!   full steering spectra, mode-loss scans, direction classification,
//!   monogamy audits, and Monte Carlo uncertainty estimates.
//! * [`comb`] — a simulator producing physical covariance matrices of a
//!   multimode squeezed frequency comb measured in a spectral-pixel basis
//!   at resolution 4, 8, or 16.
//! * [`io`] — self-describing JSON file formats for covariance matrices,
//!   simulator models, and analysis reports, with deterministic bytes.
//!
//! All numerical checks are driven by one [`Tolerances`] table so a single
//! override file can relax or tighten them everywhere at once.

pub mod comb;
pub mod config;
pub mod error;
pub mod gaussian;
pub mod io;
pub mod steering;

pub use comb::{CombModel, EigenmodeSpec, GridSpec, SqueezingPhase};
pub use config::Tolerances;
pub use error::{Error, Result};
pub use gaussian::{
    Bipartition, BipartiteBlocks, CovarianceMatrix, ModeMap, ValidationFailure, ValidationVerdict,
};
pub use steering::{
    EnumerationMode, MonogamyConfig, MonogamyRelation, MonogamyReport, SteeringDirection,
    SteeringResult, SteeringSpectrumReport, UncertaintyEstimate,
};
