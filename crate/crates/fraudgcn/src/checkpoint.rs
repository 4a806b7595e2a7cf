//! JSON model checkpoints.

use std::path::Path;

use fraudgcn_core::gcn::{GcnModel, LayerParams, TrainConfig};
use fraudgcn_core::DenseMatrix;
use serde::{Deserialize, Serialize};

use crate::formats::{read_json, write_json, FormatError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    /// `[d_in, d_out]`
    pub dims: [usize; 2],
    /// Row-major `d_in × d_out`.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub tool: String,
    pub version: String,
    pub use_bias: bool,
    pub layers: Vec<LayerRecord>,
    pub config: TrainConfig,
}

impl Checkpoint {
    pub fn new(model: &GcnModel, config: &TrainConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            use_bias: model.use_bias,
            layers: model
                .layers
                .iter()
                .map(|l| LayerRecord {
                    dims: [l.d_in(), l.d_out()],
                    weight: l.weight.as_slice().to_vec(),
                    bias: l.bias.clone(),
                })
                .collect(),
            config: config.clone(),
        }
    }

    pub fn to_model(&self) -> Result<GcnModel, String> {
        if self.layers.len() != 3 {
            return Err(format!("expected 3 layers, found {}", self.layers.len()));
        }
        let mut layers = Vec::with_capacity(3);
        for (i, rec) in self.layers.iter().enumerate() {
            let weight = DenseMatrix::from_vec(rec.dims[0], rec.dims[1], rec.weight.clone())
                .map_err(|e| format!("layer {i}: {e}"))?;
            layers.push(LayerParams {
                weight,
                bias: rec.bias.clone(),
            });
        }
        let model = GcnModel {
            layers: layers.try_into().expect("three layers"),
            use_bias: self.use_bias,
        };
        model.validate().map_err(|e| e.to_string())?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), FormatError> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self, FormatError> {
        read_json(path)
    }

    /// Loads and validates in one step.
    pub fn load_model(path: &Path) -> Result<(GcnModel, TrainConfig), FormatError> {
        let ckpt = Self::load(path)?;
        let model = ckpt.to_model().map_err(|message| FormatError::Invalid {
            path: path.to_path_buf(),
            message,
        })?;
        Ok((model, ckpt.config))
    }
}
