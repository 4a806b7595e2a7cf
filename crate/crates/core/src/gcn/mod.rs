//! Three-layer spectral graph convolution network with a hand-derived
//! backward pass.

mod config;
mod model;
mod train;

pub use config::TrainConfig;
pub use model::{
    argmax, init_model, softmax_rows, ForwardTrace, GcnModel, Gradients, LayerParams, PROB_FLOOR,
};
pub(crate) use model::{cross_entropy_grad, glorot_uniform, masked_cross_entropy};
pub use train::{train, train_normalized, TrainOutcome};
