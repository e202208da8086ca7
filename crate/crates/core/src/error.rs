use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Unified error type for the whole toolkit.
///
/// Callers that need to distinguish "bad input data" from "bad arguments"
/// from "I/O trouble" (the CLI exit codes do) can match on the variants;
/// everything carries enough context to be printed as-is.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}; need a square matrix of even dimension")]
    BadDimension { rows: usize, cols: usize },

    #[error("matrix asymmetry {max_dev:.3e} exceeds tolerance {tol:.1e} (relative to largest entry)")]
    Asymmetric { max_dev: f64, tol: f64 },

    #[error("matrix not positive definite: minimal eigenvalue {min_eig:.6e}")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("unphysical covariance matrix: minimal symplectic eigenvalue {min_nu}")]
    Unphysical { min_nu: f64 },

    #[error("symplectic spectrum pairing failed: residue {residue:.3e} exceeds {tol:.1e}")]
    DegenerateSpectrum { residue: f64, tol: f64 },

    #[error("steering-party block ill-conditioned: condition number {cond:.3e} exceeds {max_cond:.1e}")]
    IllConditioned { cond: f64, max_cond: f64 },

    #[error("expected {expected} mode labels, got {got}")]
    LabelCount { expected: usize, got: usize },

    #[error("duplicate mode label {0:?}")]
    DuplicateLabel(String),

    #[error("unknown mode label {0:?}")]
    UnknownLabel(String),

    #[error("operation requires mode labels, but the covariance matrix carries none")]
    MissingLabels,

    #[error("invalid bipartition: {0}")]
    BadPartition(String),

    #[error("{count} partitions exceed the enumeration cap of {cap}; raise the cap to proceed")]
    TooManyPartitions { count: u64, cap: u64 },

    #[error("mode-map rows not orthonormal: deviation {max_dev:.3e} exceeds {tol:.1e}")]
    BadModeMap { max_dev: f64, tol: f64 },

    #[error("invalid model: {0}")]
    BadModel(String),

    #[error("eigenmode order {order} at width {width} leaks mass {mass:.3e} outside the support (limit 1e-6)")]
    ProfileNotContained { order: u32, width: f64, mass: f64 },

    #[error("grid of {samples} samples cannot resolve {n_pixels} pixels; need at least {} samples", 16 * n_pixels)]
    GridTooCoarse { samples: usize, n_pixels: usize },

    #[error("invalid argument: {0}")]
    BadArgument(String),

    #[error("only {accepted} of {requested} Monte Carlo samples were physical; need at least 2")]
    TooFewSamples { accepted: usize, requested: usize },

    #[error("covariance matrix failed validation:\n{0}")]
    InvalidCm(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: parse error at line {line}, column {column}: {msg}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("{path}: {msg}")]
    BadFile { path: String, msg: String },
}

impl Error {
    /// I/O or parse failure, as opposed to a domain or argument problem.
    pub fn is_io_or_parse(&self) -> bool {
        matches!(
            self,
            Error::Io { .. } | Error::Parse { .. } | Error::BadFile { .. }
        )
    }

    /// Caller passed something unresolvable (labels, group specs, ranges).
    pub fn is_bad_argument(&self) -> bool {
        matches!(
            self,
            Error::UnknownLabel(_) | Error::BadPartition(_) | Error::BadArgument(_)
        )
    }
}
