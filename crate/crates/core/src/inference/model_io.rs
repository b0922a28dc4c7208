//! Versioned JSON model files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Model;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;

const FORMAT: &str = "topicloc-model";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// One model over all classes.
    Joint,
    /// One single-class model per class, in class order.
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub kind: ModelKind,
    pub models: Vec<Model>,
}

impl ModelFile {
    pub fn joint(model: Model) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            kind: ModelKind::Joint,
            models: vec![model],
        }
    }

    pub fn independent(models: Vec<Model>) -> Self {
        Self {
            format: FORMAT.into(),
            version: VERSION,
            kind: ModelKind::Independent,
            models,
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.models.first().map_or(0, |m| m.hyper.vocab_size)
    }

    /// Number of object classes the file localises.
    pub fn num_classes(&self) -> usize {
        match self.kind {
            ModelKind::Joint => self.models[0].hyper.num_classes,
            ModelKind::Independent => self.models.len(),
        }
    }
}

pub fn model_to_string(file: &ModelFile) -> String {
    let mut s = serde_json::to_string(file).expect("model serialises");
    s.push('\n');
    s
}

pub fn parse_model(text: &str) -> Result<ModelFile> {
    let file: ModelFile = serde_json::from_str(text)?;
    if file.format != FORMAT {
        return Err(Error::ModelFormat(format!("format tag `{}`", file.format)));
    }
    if file.version != VERSION {
        return Err(Error::ModelFormat(format!("version {}", file.version)));
    }
    let ok = match file.kind {
        ModelKind::Joint => file.models.len() == 1,
        ModelKind::Independent => file.models.iter().all(|m| m.hyper.num_classes == 1),
    };
    if !ok {
        return Err(Error::ModelFormat("member models do not match the kind".into()));
    }
    Ok(file)
}

pub fn save_model(file: &ModelFile, path: &Path) -> Result<()> {
    write_atomic(path, model_to_string(file).as_bytes())?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    parse_model(&std::fs::read_to_string(path)?)
}
