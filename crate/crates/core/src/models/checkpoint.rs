use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Classifier, KanModel, MlpModel};
use crate::error::{Error, Result};

/// Self-describing model file. Parameters are flat, in the model's canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "architecture", rename_all = "lowercase")]
pub enum Checkpoint {
    Kan {
        widths: Vec<usize>,
        order: usize,
        grid_intervals: usize,
        domain: [f64; 2],
        parameters: Vec<f64>,
    },
    Mlp {
        widths: Vec<usize>,
        parameters: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoadedModel {
    Kan(KanModel),
    Mlp(MlpModel),
}

impl Checkpoint {
    pub fn into_model(self) -> Result<LoadedModel> {
        match self {
            Checkpoint::Kan {
                widths,
                order,
                grid_intervals,
                domain,
                parameters,
            } => KanModel::from_parts(
                &widths,
                order,
                grid_intervals,
                (domain[0], domain[1]),
                &parameters,
            )
            .map(LoadedModel::Kan),
            Checkpoint::Mlp { widths, parameters } => {
                MlpModel::from_parts(&widths, &parameters).map(LoadedModel::Mlp)
            }
        }
    }
}

pub fn save_checkpoint<M: Classifier>(model: &M, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(&model.to_checkpoint())?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<LoadedModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str::<Checkpoint>(&text)?.into_model()
}
