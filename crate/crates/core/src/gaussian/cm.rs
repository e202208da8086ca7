use std::fmt;

use nalgebra::DMatrix;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::gaussian::mode_map::ModeMap;
use crate::gaussian::symplectic::{min_symmetric_eigenvalue, symplectic_eigenvalues};

/// Covariance matrix of an N-mode Gaussian state.
///
/// Quadratures are mode-major (x1, p1, x2, p2, ...) and vacuum variance is 1,
/// so physicality reads `nu_i >= 1` for every symplectic eigenvalue. The
/// stored matrix is symmetrized on construction; asymmetry beyond tolerance
/// is rejected rather than silently averaged away. Modes may carry optional
/// human-readable labels.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    entries: DMatrix<f64>,
    labels: Option<Vec<String>>,
}

impl CovarianceMatrix {
    /// Build from a raw matrix, checking shape, symmetry, and label counts.
    /// Physicality is NOT checked here; call [`CovarianceMatrix::validate`]
    /// (file loading does this automatically).
    pub fn from_matrix(
        entries: DMatrix<f64>,
        labels: Option<Vec<String>>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows % 2 != 0 || rows == 0 {
            return Err(Error::BadDimension { rows, cols });
        }
        let n = rows / 2;

        let scale = entries.amax().max(1.0);
        let max_dev = (&entries - entries.transpose()).amax();
        if max_dev > tol.symmetry * scale {
            return Err(Error::Asymmetric {
                max_dev: max_dev / scale,
                tol: tol.symmetry,
            });
        }

        if let Some(ref labels) = labels {
            if labels.len() != n {
                return Err(Error::LabelCount {
                    expected: n,
                    got: labels.len(),
                });
            }
            for (i, l) in labels.iter().enumerate() {
                if labels[..i].contains(l) {
                    return Err(Error::DuplicateLabel(l.clone()));
                }
            }
        }

        let sym = 0.5 * (&entries + entries.transpose());
        Ok(Self {
            entries: sym,
            labels,
        })
    }

    /// N-mode vacuum: the 2N x 2N identity.
    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            entries: DMatrix::identity(2 * n_modes, 2 * n_modes),
            labels: None,
        }
    }

    /// Two-mode squeezed vacuum with squeezing parameter `r`:
    /// diagonal blocks cosh(2r) I, off-diagonal sinh(2r) diag(1, -1).
    pub fn two_mode_squeezed(r: f64) -> Self {
        let c = (2.0 * r).cosh();
        let s = (2.0 * r).sinh();
        let entries = DMatrix::from_row_slice(
            4,
            4,
            &[
                c, 0.0, s, 0.0, //
                0.0, c, 0.0, -s, //
                s, 0.0, c, 0.0, //
                0.0, -s, 0.0, c,
            ],
        );
        Self {
            entries,
            labels: None,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.entries.nrows() / 2
    }

    /// Quadrature dimension, 2N.
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Replace the labels (None clears them).
    pub fn with_labels(mut self, labels: Option<Vec<String>>) -> Result<Self> {
        if let Some(ref l) = labels {
            if l.len() != self.n_modes() {
                return Err(Error::LabelCount {
                    expected: self.n_modes(),
                    got: l.len(),
                });
            }
        }
        self.labels = labels;
        Ok(self)
    }

    /// Resolve one mode token. With labels present the token must be a
    /// label; without labels it must parse as a 0-based mode index.
    pub fn resolve(&self, token: &str) -> Result<usize> {
        match &self.labels {
            Some(labels) => labels
                .iter()
                .position(|l| l == token)
                .ok_or_else(|| Error::UnknownLabel(token.to_string())),
            None => {
                let idx: usize = token
                    .parse()
                    .map_err(|_| Error::UnknownLabel(token.to_string()))?;
                if idx < self.n_modes() {
                    Ok(idx)
                } else {
                    Err(Error::UnknownLabel(token.to_string()))
                }
            }
        }
    }

    /// Resolve a list of tokens; see [`CovarianceMatrix::resolve`].
    pub fn resolve_all(&self, tokens: &[String]) -> Result<Vec<usize>> {
        tokens.iter().map(|t| self.resolve(t)).collect()
    }

    /// Physicality audit; see [`ValidationVerdict`]. Errors only on
    /// malformed shape (handled at construction, so a constructed value
    /// always audits cleanly through this call).
    pub fn validate(&self, tol: &Tolerances) -> ValidationVerdict {
        validate_raw(&self.entries, tol).expect("constructed CM has even square shape")
    }

    /// Partial trace: keep the listed modes, in the order given.
    /// Labels are carried over. The output of a physical input is physical
    /// (discarding modes is a partial trace).
    pub fn select_modes(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::BadPartition("empty mode selection".into()));
        }
        let n = self.n_modes();
        for (i, &m) in keep.iter().enumerate() {
            if m >= n {
                return Err(Error::BadPartition(format!(
                    "mode index {m} out of range for {n} modes"
                )));
            }
            if keep[..i].contains(&m) {
                return Err(Error::BadPartition(format!("duplicate mode index {m}")));
            }
        }
        let k = keep.len();
        let mut out = DMatrix::zeros(2 * k, 2 * k);
        for (a, &ma) in keep.iter().enumerate() {
            for (b, &mb) in keep.iter().enumerate() {
                for qa in 0..2 {
                    for qb in 0..2 {
                        out[(2 * a + qa, 2 * b + qb)] = self.entries[(2 * ma + qa, 2 * mb + qb)];
                    }
                }
            }
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| keep.iter().map(|&m| l[m].clone()).collect());
        Ok(Self {
            entries: out,
            labels,
        })
    }

    /// Resolution change sigma' = L sigma L^T with the quadrature lift of an
    /// orthonormal mode map. Labels for the new modes are supplied by the
    /// caller (None clears them).
    pub fn apply_mode_map(&self, map: &ModeMap, labels: Option<Vec<String>>) -> Result<Self> {
        if map.n_inputs() != self.n_modes() {
            return Err(Error::BadDimension {
                rows: 2 * map.n_inputs(),
                cols: self.dim(),
            });
        }
        if let Some(ref l) = labels {
            if l.len() != map.n_outputs() {
                return Err(Error::LabelCount {
                    expected: map.n_outputs(),
                    got: l.len(),
                });
            }
        }
        let lift = map.lift();
        let entries = &lift * &self.entries * lift.transpose();
        // Orthonormal rows keep symmetry exactly up to roundoff; symmetrize.
        let entries = 0.5 * (&entries + entries.transpose());
        Ok(Self { entries, labels })
    }
}

/// One failed covariance-matrix invariant, with the offending value.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationFailure {
    /// Max asymmetry relative to the largest entry magnitude.
    Asymmetric { max_dev: f64 },
    NotPositiveDefinite { min_eig: f64 },
    /// Some symplectic eigenvalue fell below 1 (beyond slack).
    Unphysical { min_nu: f64 },
    /// The symplectic spectrum could not be extracted at all.
    SpectrumFailed { reason: String },
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationFailure::Asymmetric { max_dev } => {
                write!(f, "asymmetric: relative deviation {max_dev:.3e}")
            }
            ValidationFailure::NotPositiveDefinite { min_eig } => {
                write!(f, "not positive definite: minimal eigenvalue {min_eig:.6e}")
            }
            ValidationFailure::Unphysical { min_nu } => {
                write!(f, "unphysical: min symplectic eigenvalue {min_nu}")
            }
            ValidationFailure::SpectrumFailed { reason } => {
                write!(f, "symplectic spectrum unavailable: {reason}")
            }
        }
    }
}

/// Outcome of the physicality audit.
///
/// `failures` is empty iff the matrix is a bona fide covariance matrix;
/// `pure` additionally means every symplectic eigenvalue equals 1 within
/// the PSD slack.
#[derive(Debug, Clone)]
pub struct ValidationVerdict {
    pub failures: Vec<ValidationFailure>,
    /// Smallest symplectic eigenvalue, when the spectrum was computable.
    pub min_symplectic: Option<f64>,
    pub pure: bool,
}

impl ValidationVerdict {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for ValidationVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "VALID ({})", if self.pure { "pure" } else { "mixed" })?;
            if let Some(nu) = self.min_symplectic {
                write!(f, ", min symplectic eigenvalue {nu:.9}")?;
            }
            Ok(())
        } else {
            writeln!(f, "INVALID")?;
            for failure in &self.failures {
                writeln!(f, "  - {failure}")?;
            }
            Ok(())
        }
    }
}

/// Audit a raw symmetric matrix against all covariance-matrix invariants.
///
/// Returns the full list of failed invariants (asymmetry, positive
/// definiteness, physicality) rather than stopping at the first; errors only
/// when the shape is not square with even dimension.
pub fn validate_raw(entries: &DMatrix<f64>, tol: &Tolerances) -> Result<ValidationVerdict> {
    let (rows, cols) = entries.shape();
    if rows != cols || rows % 2 != 0 || rows == 0 {
        return Err(Error::BadDimension { rows, cols });
    }

    let mut failures = Vec::new();

    let scale = entries.amax().max(1.0);
    let max_dev = (entries - entries.transpose()).amax() / scale;
    if max_dev > tol.symmetry {
        failures.push(ValidationFailure::Asymmetric { max_dev });
    }

    // The spectrum checks need a symmetric matrix; use the symmetrized copy
    // so a barely-asymmetric input still gets a physicality reading.
    let sym = 0.5 * (entries + entries.transpose());

    let min_eig = min_symmetric_eigenvalue(&sym);
    if min_eig <= 0.0 {
        failures.push(ValidationFailure::NotPositiveDefinite { min_eig });
    }

    let mut min_symplectic = None;
    let mut pure = false;
    if min_eig > 0.0 {
        match symplectic_eigenvalues(&sym, tol) {
            Ok(nus) => {
                let min_nu = nus[0];
                let max_nu = *nus.last().expect("nonempty spectrum");
                min_symplectic = Some(min_nu);
                if min_nu < 1.0 - tol.psd_slack {
                    failures.push(ValidationFailure::Unphysical { min_nu });
                } else {
                    pure = (max_nu - 1.0).abs() <= tol.psd_slack
                        && (min_nu - 1.0).abs() <= tol.psd_slack;
                }
            }
            Err(e) => failures.push(ValidationFailure::SpectrumFailed {
                reason: e.to_string(),
            }),
        }
    }

    Ok(ValidationVerdict {
        failures,
        min_symplectic,
        pure,
    })
}
