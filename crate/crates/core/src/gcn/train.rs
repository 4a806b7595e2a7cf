use alloc::vec::Vec;

use super::config::TrainConfig;
use super::model::{init_model, GcnModel, Gradients};
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::{Graph, NormalizedAdjacency};
use crate::labels::LabelAssignment;
use crate::optim::{EarlyStopping, OptimizerState};

/// Trained model plus the per-epoch objective.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: GcnModel,
    /// Objective before each optimizer step: masked cross-entropy plus the
    /// weight-decay penalty.
    pub loss_history: Vec<f64>,
    /// True when training ended on the patience rule rather than the epoch cap.
    pub stopped_early: bool,
}

impl TrainOutcome {
    pub fn epochs(&self) -> usize {
        self.loss_history.len()
    }
}

/// Full-batch training on `g`.
pub fn train(
    g: &Graph,
    x: &DenseMatrix,
    labels: &LabelAssignment,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    train_normalized(&g.normalize(), x, labels, config)
}

/// Same as [`train`] with the propagation matrix already built.
pub fn train_normalized(
    a: &NormalizedAdjacency,
    x: &DenseMatrix,
    labels: &LabelAssignment,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if labels.is_empty() {
        return Err(Error::NoLabels);
    }
    if x.rows() != a.num_nodes() {
        return Err(Error::DimensionMismatch {
            op: "train",
            expected: (a.num_nodes(), x.cols()),
            found: x.shape(),
        });
    }
    let mut model = init_model(x.cols(), config)?;
    let sizes: Vec<usize> = model
        .layers
        .iter()
        .flat_map(|l| [l.weight.as_slice().len(), l.bias.len()])
        .collect();
    let mut optimizer = OptimizerState::new(config.optimizer, config.learning_rate, &sizes);
    let mut stopper = EarlyStopping::new(config.early_stop_patience, config.min_improvement);
    let mut history = Vec::with_capacity(config.max_epochs);
    let mut stopped_early = false;

    for epoch in 0..config.max_epochs {
        let trace = model.forward(a, x)?;
        let data_loss = GcnModel::loss(&trace, labels)?;
        let objective = data_loss + 0.5 * config.weight_decay * model.weight_norm_sq();
        if !objective.is_finite() || !trace.probabilities().is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push(objective);
        let mut grads = model.backward(a, &trace, labels)?;
        apply_weight_decay(&model, &mut grads, config.weight_decay);
        step(&mut model, &grads, &mut optimizer);
        if stopper.observe(objective) {
            stopped_early = true;
            break;
        }
    }
    Ok(TrainOutcome {
        model,
        loss_history: history,
        stopped_early,
    })
}

fn apply_weight_decay(model: &GcnModel, grads: &mut Gradients, decay: f64) {
    if decay == 0.0 {
        return;
    }
    for (g, p) in grads.layers.iter_mut().zip(&model.layers) {
        for (d, w) in g.weight.as_mut_slice().iter_mut().zip(p.weight.as_slice()) {
            *d += decay * w;
        }
    }
}

fn step(model: &mut GcnModel, grads: &Gradients, optimizer: &mut OptimizerState) {
    let use_bias = model.use_bias;
    let mut params: Vec<&mut [f64]> = Vec::with_capacity(6);
    for layer in model.layers.iter_mut() {
        params.push(layer.weight.as_mut_slice());
        params.push(if use_bias {
            &mut layer.bias[..]
        } else {
            &mut []
        });
    }
    let grad_refs: Vec<&[f64]> = grads
        .layers
        .iter()
        .flat_map(|l| {
            [
                l.weight.as_slice(),
                if use_bias { &l.bias[..] } else { &[] },
            ]
        })
        .collect();
    optimizer.step(&mut params, &grad_refs);
}
