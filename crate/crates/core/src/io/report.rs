use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::{parse_error, read_text, to_json_text, write_text};

pub const REPORT_SCHEMA: &str = "combsteer/report/v1";

/// Identity of one input file a report was computed from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Envelope for any analysis result: schema + version + input digests make
/// a report reproducible and attributable. No timestamps, so identical
/// inputs give identical bytes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile<T> {
    pub schema: String,
    pub toolkit_version: String,
    /// Report payload discriminator, e.g. "steering-spectrum".
    pub kind: String,
    pub inputs: Vec<InputDigest>,
    pub report: T,
}

/// SHA-256 digest of a file's bytes, for the report `inputs` block.
pub fn digest_file(path: &Path) -> Result<InputDigest> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: format!("{:x}", hasher.finalize()),
    })
}

/// Wrap a payload in the report envelope and write it to `path`.
pub fn write_report<T: Serialize>(
    path: &Path,
    kind: &str,
    inputs: Vec<InputDigest>,
    report: &T,
) -> Result<()> {
    let file = ReportFile {
        schema: REPORT_SCHEMA.to_string(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        kind: kind.to_string(),
        inputs,
        report,
    };
    write_text(path, &to_json_text(&file))
}

/// Read a report envelope, checking the schema tag.
pub fn read_report<T: DeserializeOwned>(path: &Path) -> Result<ReportFile<T>> {
    let text = read_text(path)?;
    let file: ReportFile<T> =
        serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
    if file.schema != REPORT_SCHEMA {
        return Err(Error::BadFile {
            path: path.display().to_string(),
            msg: format!(
                "unsupported schema {:?}, expected {REPORT_SCHEMA:?}",
                file.schema
            ),
        });
    }
    Ok(file)
}
