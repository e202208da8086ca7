use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::gaussian::{validate_raw, CovarianceMatrix};
use crate::io::{parse_error, read_text, to_json_text, write_text};

pub const CM_SCHEMA: &str = "combsteer/cm/v1";
pub const VACUUM_NORMALIZATION: &str = "vacuum=1";

/// Quadrature ordering of the serialized matrix: interleaved
/// (x1,p1,x2,p2,...) or grouped (x1..xN,p1..pN).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureOrdering {
    Xpxp,
    Xxpp,
}

/// On-disk covariance matrix. Self-describing: ordering and normalization
/// are explicit so states cannot silently change convention between tools.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmFile {
    pub schema: String,
    pub n_modes: usize,
    pub ordering: QuadratureOrdering,
    /// Vacuum quadrature variance; only "vacuum=1" is accepted.
    pub normalization: String,
    pub labels: Option<Vec<String>>,
    pub provenance: Option<String>,
    /// Row-major 2N x 2N values in the declared ordering.
    pub matrix: Vec<Vec<f64>>,
}

impl CmFile {
    /// Snapshot of an in-memory state; always written in xpxp ordering.
    pub fn from_cm(cm: &CovarianceMatrix, provenance: Option<&str>) -> Self {
        let dim = cm.dim();
        let matrix = (0..dim)
            .map(|r| (0..dim).map(|c| cm.entries()[(r, c)]).collect())
            .collect();
        CmFile {
            schema: CM_SCHEMA.to_string(),
            n_modes: cm.n_modes(),
            ordering: QuadratureOrdering::Xpxp,
            normalization: VACUUM_NORMALIZATION.to_string(),
            labels: cm.labels().map(|l| l.to_vec()),
            provenance: provenance.map(|s| s.to_string()),
            matrix,
        }
    }

    /// Checks the header, reshapes to xpxp, validates physicality, and
    /// builds the state. `path` only decorates error messages.
    pub fn into_cm(self, path: &Path, tol: &Tolerances) -> Result<CovarianceMatrix> {
        let bad = |msg: String| Error::BadFile {
            path: path.display().to_string(),
            msg,
        };
        if self.schema != CM_SCHEMA {
            return Err(bad(format!(
                "unsupported schema {:?}, expected {CM_SCHEMA:?}",
                self.schema
            )));
        }
        if self.normalization != VACUUM_NORMALIZATION {
            return Err(bad(format!(
                "unsupported normalization {:?}, expected {VACUUM_NORMALIZATION:?}",
                self.normalization
            )));
        }
        if self.n_modes == 0 {
            return Err(bad("n_modes must be at least 1".into()));
        }
        let dim = 2 * self.n_modes;
        if self.matrix.len() != dim {
            return Err(bad(format!(
                "matrix has {} rows, expected {dim} for {} modes",
                self.matrix.len(),
                self.n_modes
            )));
        }
        for (r, row) in self.matrix.iter().enumerate() {
            if row.len() != dim {
                return Err(bad(format!(
                    "matrix row {r} has {} entries, expected {dim}",
                    row.len()
                )));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.n_modes {
                return Err(bad(format!(
                    "{} labels for {} modes",
                    labels.len(),
                    self.n_modes
                )));
            }
            let mut seen = std::collections::BTreeSet::new();
            for label in labels {
                if !seen.insert(label) {
                    return Err(bad(format!("duplicate mode label {label:?}")));
                }
            }
        }

        // perm[interleaved index] = index in the file's ordering.
        let perm: Vec<usize> = match self.ordering {
            QuadratureOrdering::Xpxp => (0..dim).collect(),
            QuadratureOrdering::Xxpp => (0..dim)
                .map(|a| if a % 2 == 0 { a / 2 } else { self.n_modes + a / 2 })
                .collect(),
        };
        let entries =
            DMatrix::from_fn(dim, dim, |r, c| self.matrix[perm[r]][perm[c]]);

        let verdict = validate_raw(&entries, tol)?;
        if !verdict.is_valid() {
            return Err(Error::InvalidCm(verdict.to_string()));
        }
        CovarianceMatrix::from_matrix(entries, self.labels, tol)
    }
}

/// Write a state to `path` as a CmFile (xpxp, vacuum=1).
pub fn save_cm(cm: &CovarianceMatrix, provenance: Option<&str>, path: &Path) -> Result<()> {
    write_text(path, &to_json_text(&CmFile::from_cm(cm, provenance)))
}

/// Load a state, failing on parse errors, header mismatches, or an
/// unphysical matrix (the full validation verdict becomes the error).
pub fn load_cm(path: &Path, tol: &Tolerances) -> Result<CovarianceMatrix> {
    let text = read_text(path)?;
    let file: CmFile = serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
    file.into_cm(path, tol)
}
