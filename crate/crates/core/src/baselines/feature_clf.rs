//! Feature-only multinomial logistic regression. It never sees the graph.

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::gcn::{
    argmax, cross_entropy_grad, glorot_uniform, masked_cross_entropy, softmax_rows, TrainConfig,
};
use crate::labels::LabelAssignment;
use crate::optim::{EarlyStopping, OptimizerState};
use crate::rng::SplitMix64;

/// `k × D` weights and `k` biases.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureClassifier {
    pub weights: DenseMatrix,
    pub bias: Vec<f64>,
}

impl FeatureClassifier {
    pub fn zeros(num_classes: usize, feature_dim: usize) -> Self {
        Self {
            weights: DenseMatrix::zeros(num_classes, feature_dim),
            bias: vec![0.0; num_classes],
        }
    }

    pub fn num_classes(&self) -> usize {
        self.weights.rows()
    }

    pub fn feature_dim(&self) -> usize {
        self.weights.cols()
    }

    /// `x·Wᵀ + b`
    pub fn scores(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.feature_dim() {
            return Err(Error::DimensionMismatch {
                op: "feature_classifier",
                expected: (x.rows(), self.feature_dim()),
                found: x.shape(),
            });
        }
        let mut s = x.matmul_t(&self.weights)?;
        s.add_row_vector(&self.bias)?;
        Ok(s)
    }

    pub fn probabilities(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        Ok(softmax_rows(&self.scores(x)?))
    }

    /// Argmax class per row, lowest id on ties.
    pub fn predict(&self, x: &DenseMatrix) -> Result<Vec<usize>> {
        let p = self.probabilities(x)?;
        Ok((0..p.rows()).map(|r| argmax(p.row(r))).collect())
    }
}

/// Trains on the labeled rows of `x` only. Returns the classifier and the
/// per-epoch objective (cross-entropy plus weight decay).
pub fn feature_classifier_train(
    x: &DenseMatrix,
    labels: &LabelAssignment,
    num_classes: usize,
    config: &TrainConfig,
) -> Result<(FeatureClassifier, Vec<f64>)> {
    config.validate()?;
    if labels.is_empty() {
        return Err(Error::NoLabels);
    }
    labels.check_nodes(x.rows())?;
    let nodes: Vec<usize> = labels.iter().map(|(n, _)| n).collect();
    let mut local = LabelAssignment::new(num_classes);
    for (i, (_, class)) in labels.iter().enumerate() {
        local.insert(i, class)?;
    }
    let mut xs = DenseMatrix::zeros(nodes.len(), x.cols());
    for (i, &n) in nodes.iter().enumerate() {
        xs.row_mut(i).copy_from_slice(x.row(n));
    }

    let d = x.cols();
    let mut rng = SplitMix64::new(config.seed);
    let mut clf = FeatureClassifier {
        weights: glorot_uniform(num_classes, d, d, num_classes, &mut rng),
        bias: vec![0.0; num_classes],
    };
    let mut optimizer = OptimizerState::new(
        config.optimizer,
        config.learning_rate,
        &[num_classes * d, num_classes],
    );
    let mut stopper = EarlyStopping::new(config.early_stop_patience, config.min_improvement);
    let mut history = Vec::with_capacity(config.max_epochs);

    for epoch in 0..config.max_epochs {
        let probs = clf.probabilities(&xs)?;
        let norm_sq: f64 = clf.weights.as_slice().iter().map(|w| w * w).sum();
        let objective = masked_cross_entropy(&probs, &local)? + 0.5 * config.weight_decay * norm_sq;
        if !objective.is_finite() || !probs.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push(objective);
        let dz = cross_entropy_grad(&probs, &local)?;
        let mut grad_w = dz.t_matmul(&xs)?;
        for (g, w) in grad_w.as_mut_slice().iter_mut().zip(clf.weights.as_slice()) {
            *g += config.weight_decay * w;
        }
        let grad_b = if config.use_bias {
            dz.column_sums()
        } else {
            vec![0.0; num_classes]
        };
        optimizer.step(
            &mut [clf.weights.as_mut_slice(), &mut clf.bias[..]],
            &[grad_w.as_slice(), &grad_b[..]],
        );
        if stopper.observe(objective) {
            break;
        }
    }
    Ok((clf, history))
}

/// Predicted class per row of `x`.
pub fn feature_classifier_predict(clf: &FeatureClassifier, x: &DenseMatrix) -> Result<Vec<usize>> {
    clf.predict(x)
}
