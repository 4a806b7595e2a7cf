use crate::error::{Error, Result};
use crate::optim::Optimizer;

/// Hyperparameters for GCN and feature-classifier training.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct TrainConfig {
    pub hidden_dims: (usize, usize),
    pub num_classes: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
    /// Epochs without a loss improvement of at least `min_improvement`
    /// before training stops. 0 disables early stopping.
    pub early_stop_patience: usize,
    pub min_improvement: f64,
    /// Add a per-layer bias after the weight product.
    pub use_bias: bool,
    /// L2 penalty `λ/2·Σ‖W‖²` on weight matrices (not biases). The penalty
    /// is part of the objective recorded in the loss history.
    pub weight_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_dims: (16, 16),
            num_classes: 2,
            learning_rate: 0.03,
            max_epochs: 200,
            seed: 0,
            optimizer: Optimizer::adam(),
            early_stop_patience: 10,
            min_improvement: 1e-6,
            use_bias: true,
            weight_decay: 5e-4,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be positive"));
        }
        if self.max_epochs < 1 {
            return Err(Error::InvalidConfig("max_epochs must be at least 1"));
        }
        if self.hidden_dims.0 < 1 || self.hidden_dims.1 < 1 {
            return Err(Error::InvalidConfig("hidden dims must be at least 1"));
        }
        if self.num_classes < 2 {
            return Err(Error::InvalidConfig("num_classes must be at least 2"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::InvalidConfig("weight_decay must be non-negative"));
        }
        if let Optimizer::Adam {
            beta1,
            beta2,
            epsilon,
        } = self.optimizer
        {
            if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || epsilon <= 0.0 {
                return Err(Error::InvalidConfig(
                    "adam betas must lie in [0, 1) and epsilon > 0",
                ));
            }
        }
        Ok(())
    }
}
