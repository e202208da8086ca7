use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::comb::CombModel;
use crate::error::{Error, Result};
use crate::io::{parse_error, read_text, to_json_text, write_text};

pub const MODEL_SCHEMA: &str = "combsteer/model/v1";

/// On-disk comb model with a free-form provenance note (what the fixture
/// represents, how its numbers were chosen).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema: String,
    pub provenance: Option<String>,
    pub model: CombModel,
}

/// Write a model to `path`.
pub fn save_model(model: &CombModel, provenance: Option<&str>, path: &Path) -> Result<()> {
    let file = ModelFile {
        schema: MODEL_SCHEMA.to_string(),
        provenance: provenance.map(|s| s.to_string()),
        model: model.clone(),
    };
    write_text(path, &to_json_text(&file))
}

/// Load and structurally validate a model. Containment of the profiles is
/// grid-dependent and is checked by the simulator, not here.
pub fn load_model(path: &Path) -> Result<CombModel> {
    let text = read_text(path)?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
    if file.schema != MODEL_SCHEMA {
        return Err(Error::BadFile {
            path: path.display().to_string(),
            msg: format!("unsupported schema {:?}, expected {MODEL_SCHEMA:?}", file.schema),
        });
    }
    file.model.validate()?;
    Ok(file.model)
}
