use alloc::vec;
use alloc::vec::Vec;

use super::config::TrainConfig;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::NormalizedAdjacency;
use crate::labels::LabelAssignment;
use crate::rng::SplitMix64;

/// Floor applied to probabilities before taking the log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Weight `W` (d_in × d_out) and bias (d_out) of one convolution layer.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LayerParams {
    pub weight: DenseMatrix,
    pub bias: Vec<f64>,
}

impl LayerParams {
    pub fn zeros(d_in: usize, d_out: usize) -> Self {
        Self {
            weight: DenseMatrix::zeros(d_in, d_out),
            bias: vec![0.0; d_out],
        }
    }

    pub fn d_in(&self) -> usize {
        self.weight.rows()
    }

    pub fn d_out(&self) -> usize {
        self.weight.cols()
    }
}

/// Three graph convolution layers `D → h1 → h2 → k`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GcnModel {
    pub layers: [LayerParams; 3],
    pub use_bias: bool,
}

/// Parameter gradients, laid out like [`GcnModel::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: [LayerParams; 3],
}

/// Intermediates of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    /// `Â·H^(l)` for each layer input.
    pub propagated: [DenseMatrix; 3],
    /// `Â·H^(l)·W^(l) + b^(l)`.
    pub pre_activations: [DenseMatrix; 3],
    /// `H^(0) = X` through `H^(3)`, the row-stochastic output.
    pub activations: [DenseMatrix; 4],
}

impl ForwardTrace {
    pub fn probabilities(&self) -> &DenseMatrix {
        &self.activations[3]
    }
}

/// Glorot-uniform weights from the seeded generator, zero biases.
pub fn init_model(feature_dim: usize, config: &TrainConfig) -> Result<GcnModel> {
    if feature_dim < 1 {
        return Err(Error::InvalidConfig("feature_dim must be at least 1"));
    }
    config.validate()?;
    let dims = [
        feature_dim,
        config.hidden_dims.0,
        config.hidden_dims.1,
        config.num_classes,
    ];
    let mut rng = SplitMix64::new(config.seed);
    let layers = [0, 1, 2].map(|l| glorot_layer(dims[l], dims[l + 1], &mut rng));
    Ok(GcnModel {
        layers,
        use_bias: config.use_bias,
    })
}

pub(crate) fn glorot_uniform(
    rows: usize,
    cols: usize,
    fan_in: usize,
    fan_out: usize,
    rng: &mut SplitMix64,
) -> DenseMatrix {
    let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
    let data = (0..rows * cols)
        .map(|_| rng.uniform(-limit, limit))
        .collect();
    DenseMatrix::from_vec(rows, cols, data).expect("finite glorot sample")
}

fn glorot_layer(d_in: usize, d_out: usize, rng: &mut SplitMix64) -> LayerParams {
    LayerParams {
        weight: glorot_uniform(d_in, d_out, d_in, d_out, rng),
        bias: vec![0.0; d_out],
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax_rows(z: &DenseMatrix) -> DenseMatrix {
    let mut out = z.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = libm::exp(*v - max);
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

fn check_labels(labels: &LabelAssignment, num_nodes: usize, num_classes: usize) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::NoLabels);
    }
    labels.check_nodes(num_nodes)?;
    for (node, class) in labels.iter() {
        if class >= num_classes {
            return Err(Error::ClassOutOfRange {
                node,
                class,
                num_classes,
            });
        }
    }
    Ok(())
}

/// Mean of `-ln max(p_true, 1e-12)` over the labeled rows of `probs`.
pub(crate) fn masked_cross_entropy(probs: &DenseMatrix, labels: &LabelAssignment) -> Result<f64> {
    check_labels(labels, probs.rows(), probs.cols())?;
    let total: f64 = labels
        .iter()
        .map(|(node, class)| -libm::log(probs[(node, class)].max(PROB_FLOOR)))
        .sum();
    Ok(total / labels.len() as f64)
}

/// `(P − onehot) / |labeled|` on labeled rows, zero elsewhere.
pub(crate) fn cross_entropy_grad(
    probs: &DenseMatrix,
    labels: &LabelAssignment,
) -> Result<DenseMatrix> {
    check_labels(labels, probs.rows(), probs.cols())?;
    let scale = 1.0 / labels.len() as f64;
    let mut grad = DenseMatrix::zeros(probs.rows(), probs.cols());
    for (node, class) in labels.iter() {
        let g = grad.row_mut(node);
        for (d, &p) in g.iter_mut().zip(probs.row(node)) {
            *d = p * scale;
        }
        g[class] -= scale;
    }
    Ok(grad)
}

impl GcnModel {
    pub fn feature_dim(&self) -> usize {
        self.layers[0].d_in()
    }

    pub fn num_classes(&self) -> usize {
        self.layers[2].d_out()
    }

    /// `[D, h1, h2, k]`
    pub fn dims(&self) -> [usize; 4] {
        [
            self.layers[0].d_in(),
            self.layers[1].d_in(),
            self.layers[2].d_in(),
            self.layers[2].d_out(),
        ]
    }

    /// Checks the layer chain and finiteness.
    pub fn validate(&self) -> Result<()> {
        for l in 0..3 {
            let layer = &self.layers[l];
            if layer.bias.len() != layer.d_out() {
                return Err(Error::DimensionMismatch {
                    op: "layer bias",
                    expected: (1, layer.d_out()),
                    found: (1, layer.bias.len()),
                });
            }
            if l < 2 && layer.d_out() != self.layers[l + 1].d_in() {
                return Err(Error::DimensionMismatch {
                    op: "layer chain",
                    expected: (layer.d_out(), self.layers[l + 1].d_out()),
                    found: self.layers[l + 1].weight.shape(),
                });
            }
            if !layer.weight.is_finite() || layer.bias.iter().any(|b| !b.is_finite()) {
                return Err(Error::InvalidConfig("model parameters must be finite"));
            }
        }
        if self.num_classes() < 2 {
            return Err(Error::InvalidConfig("num_classes must be at least 2"));
        }
        Ok(())
    }

    /// `H^(l+1) = ReLU(Â·H^(l)·W^(l) + b^(l))` for the two hidden layers and
    /// a row softmax on the output layer.
    pub fn forward(&self, a: &NormalizedAdjacency, x: &DenseMatrix) -> Result<ForwardTrace> {
        if x.rows() != a.num_nodes() || x.cols() != self.feature_dim() {
            return Err(Error::DimensionMismatch {
                op: "forward",
                expected: (a.num_nodes(), self.feature_dim()),
                found: x.shape(),
            });
        }
        let mut h = x.clone();
        let mut propagated = Vec::with_capacity(3);
        let mut pre = Vec::with_capacity(3);
        let mut acts = Vec::with_capacity(4);
        for (l, layer) in self.layers.iter().enumerate() {
            let ah = a.spmm(&h)?;
            let mut z = ah.matmul(&layer.weight)?;
            if self.use_bias {
                z.add_row_vector(&layer.bias)?;
            }
            let next = if l < 2 {
                z.map(|v| v.max(0.0))
            } else {
                softmax_rows(&z)
            };
            propagated.push(ah);
            pre.push(z);
            acts.push(core::mem::replace(&mut h, next));
        }
        acts.push(h);
        Ok(ForwardTrace {
            propagated: into_array(propagated),
            pre_activations: into_array(pre),
            activations: into_array(acts),
        })
    }

    /// Masked mean cross-entropy of a forward trace.
    pub fn loss(trace: &ForwardTrace, labels: &LabelAssignment) -> Result<f64> {
        masked_cross_entropy(trace.probabilities(), labels)
    }

    /// Exact gradients of [`GcnModel::loss`] for every weight and bias.
    pub fn backward(
        &self,
        a: &NormalizedAdjacency,
        trace: &ForwardTrace,
        labels: &LabelAssignment,
    ) -> Result<Gradients> {
        let n = a.num_nodes();
        let dims = self.dims();
        for (act, &d) in trace.activations.iter().zip(&dims) {
            if act.shape() != (n, d) {
                return Err(Error::DimensionMismatch {
                    op: "backward (stale trace)",
                    expected: (n, d),
                    found: act.shape(),
                });
            }
        }
        let mut grads: Vec<LayerParams> = Vec::with_capacity(3);
        let mut dz = cross_entropy_grad(trace.probabilities(), labels)?;
        for l in (0..3).rev() {
            let weight = trace.propagated[l].t_matmul(&dz)?;
            let bias = if self.use_bias {
                dz.column_sums()
            } else {
                vec![0.0; dz.cols()]
            };
            grads.push(LayerParams { weight, bias });
            if l > 0 {
                // Â is symmetric, so Âᵀ·(dZ·Wᵀ) = Â·(dZ·Wᵀ).
                let back = a.spmm(&dz.matmul_t(&self.layers[l].weight)?)?;
                let mask = &trace.pre_activations[l - 1];
                let mut next = back;
                for (d, &z) in next.as_mut_slice().iter_mut().zip(mask.as_slice()) {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                }
                dz = next;
            }
        }
        grads.reverse();
        Ok(Gradients {
            layers: into_array(grads),
        })
    }

    /// Class per node (argmax, lowest id on ties) and the probability matrix.
    pub fn predict(
        &self,
        a: &NormalizedAdjacency,
        x: &DenseMatrix,
    ) -> Result<(Vec<usize>, DenseMatrix)> {
        let trace = self.forward(a, x)?;
        let probs = trace
            .activations
            .into_iter()
            .nth(3)
            .expect("four activations");
        let classes = (0..probs.rows()).map(|r| argmax(probs.row(r))).collect();
        Ok((classes, probs))
    }

    /// `H^(layer)` for `layer` in 1..=3.
    pub fn embeddings(
        &self,
        a: &NormalizedAdjacency,
        x: &DenseMatrix,
        layer: usize,
    ) -> Result<DenseMatrix> {
        if !(1..=3).contains(&layer) {
            return Err(Error::LayerOutOfRange { layer });
        }
        let trace = self.forward(a, x)?;
        Ok(trace
            .activations
            .into_iter()
            .nth(layer)
            .expect("layer in range"))
    }

    /// `Σ‖W^(l)‖²` over the three weight matrices.
    pub fn weight_norm_sq(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weight.as_slice())
            .map(|w| w * w)
            .sum()
    }
}

fn into_array<T: core::fmt::Debug, const N: usize>(v: Vec<T>) -> [T; N] {
    v.try_into().expect("fixed layer count")
}
