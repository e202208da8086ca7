use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical tolerances used across the toolkit.
///
/// Every structural check (symmetry, orthonormality, positivity, pairing)
/// reads from this table, so one override file adjusts them everywhere.
/// A JSON override may set any subset of fields; the rest keep defaults.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed asymmetry, relative to the largest entry magnitude.
    pub symmetry: f64,
    /// Row-orthonormality slack for mode maps.
    pub orthonormality: f64,
    /// Positivity slack: eigenvalues >= -psd_slack pass PSD checks and
    /// symplectic eigenvalues >= 1 - psd_slack count as physical.
    pub psd_slack: f64,
    /// Relative residue allowed when pairing the +/- i*nu eigenvalues of
    /// Omega*sigma into a symplectic spectrum.
    pub pairing_residue: f64,
    /// Steering values above this threshold count as steerable; it also
    /// serves as the margin tolerance in monogamy audits.
    pub steer_epsilon: f64,
    /// Condition-number ceiling for the steering party's block in the
    /// Schur complement. Exceeding it is an error, never a regularization.
    pub max_condition: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symmetry: 1e-10,
            orthonormality: 1e-10,
            psd_slack: 1e-9,
            pairing_residue: 1e-8,
            steer_epsilon: 1e-9,
            max_condition: 1e12,
        }
    }
}

impl Tolerances {
    /// Load overrides from a JSON file; fields left out keep their defaults.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let tol: Tolerances = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: e.line(),
            column: e.column(),
            msg: e.to_string(),
        })?;
        tol.check()?;
        Ok(tol)
    }

    fn check(&self) -> Result<()> {
        let fields = [
            ("symmetry", self.symmetry),
            ("orthonormality", self.orthonormality),
            ("psd_slack", self.psd_slack),
            ("pairing_residue", self.pairing_residue),
            ("steer_epsilon", self.steer_epsilon),
            ("max_condition", self.max_condition),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::BadArgument(format!(
                    "tolerance {name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_positive() {
        let t = Tolerances::default();
        assert!(t.symmetry > 0.0 && t.steer_epsilon > 0.0 && t.max_condition > 1.0);
    }

    #[test]
    fn partial_override_keeps_other_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tol.json");
        std::fs::write(&path, r#"{ "steer_epsilon": 1e-6 }"#).unwrap();
        let t = Tolerances::from_json_file(&path).unwrap();
        assert_eq!(t.steer_epsilon, 1e-6);
        assert_eq!(t.symmetry, Tolerances::default().symmetry);
    }

    #[test]
    fn unknown_field_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tol.json");
        std::fs::write(&path, r#"{ "steer_epsilonn": 1e-6 }"#).unwrap();
        assert!(matches!(
            Tolerances::from_json_file(&path),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn nonpositive_tolerance_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tol.json");
        std::fs::write(&path, r#"{ "psd_slack": 0.0 }"#).unwrap();
        assert!(matches!(
            Tolerances::from_json_file(&path),
            Err(Error::BadArgument(_))
        ));
    }
}
