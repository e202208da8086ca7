//! Versioned on-disk formats.
//!
//! Three JSON file kinds, each carrying a schema tag: covariance matrices
//! (self-describing quadrature ordering and normalization), comb models,
//! and analysis reports (schema + toolkit version + input digests). Writes
//! are deterministic: pretty-printed with a trailing newline, floats in
//! shortest round-trip form.

mod cm_file;
mod model_file;
mod report;

pub use cm_file::{load_cm, save_cm, CmFile, QuadratureOrdering, CM_SCHEMA};
pub use model_file::{load_model, save_model, ModelFile, MODEL_SCHEMA};
pub use report::{digest_file, read_report, write_report, InputDigest, ReportFile};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn parse_error(path: &Path, err: serde_json::Error) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line: err.line(),
        column: err.column(),
        msg: err.to_string(),
    }
}

/// Serialize as pretty JSON with a trailing newline; byte-deterministic
/// for a given value.
pub(crate) fn to_json_text<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("in-memory serialization");
    text.push('\n');
    text
}
