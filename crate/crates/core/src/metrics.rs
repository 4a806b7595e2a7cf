//! Fraud-detection scoring: precision and recall over fraud classes, and
//! plurality matching of unsupervised communities to ground-truth classes.

use alloc::vec;
use alloc::vec::Vec;

use crate::baselines::CommunityAssignment;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Averaging {
    /// One ratio from TP/FP/FN pooled over every fraud node.
    #[default]
    Micro,
    /// Unweighted mean of per-fraud-class ratios that are defined.
    Macro,
}

/// `None` means the denominator was zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PrecisionRecall {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

/// Confusion counts restricted to fraud classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FraudCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl FraudCounts {
    pub fn ratios(&self) -> PrecisionRecall {
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        PrecisionRecall {
            precision: ratio(
                self.true_positives,
                self.true_positives + self.false_positives,
            ),
            recall: ratio(
                self.true_positives,
                self.true_positives + self.false_negatives,
            ),
        }
    }
}

/// TP: true fraud class predicted exactly. FP: predicted into a fraud class
/// other than the true one. FN: fraud node not predicted into its class.
pub fn fraud_counts(
    pred: &[usize],
    truth: &[usize],
    is_fraud: impl Fn(usize) -> bool,
) -> Result<FraudCounts> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            op: "precision_recall",
            expected: (truth.len(), 1),
            found: (pred.len(), 1),
        });
    }
    let mut c = FraudCounts::default();
    for (&p, &t) in pred.iter().zip(truth) {
        if is_fraud(t) && p == t {
            c.true_positives += 1;
        } else {
            if is_fraud(p) {
                c.false_positives += 1;
            }
            if is_fraud(t) {
                c.false_negatives += 1;
            }
        }
    }
    Ok(c)
}

/// Micro-averaged precision and recall over the nodes of `fraud_classes`.
pub fn precision_recall(
    pred: &[usize],
    truth: &[usize],
    fraud_classes: &[usize],
) -> Result<PrecisionRecall> {
    precision_recall_with(pred, truth, fraud_classes, Averaging::Micro)
}

pub fn precision_recall_with(
    pred: &[usize],
    truth: &[usize],
    fraud_classes: &[usize],
    averaging: Averaging,
) -> Result<PrecisionRecall> {
    match averaging {
        Averaging::Micro => Ok(fraud_counts(pred, truth, |c| fraud_classes.contains(&c))?.ratios()),
        Averaging::Macro => {
            let mut precisions = Vec::new();
            let mut recalls = Vec::new();
            for &class in fraud_classes {
                let r = fraud_counts(pred, truth, |c| c == class)?.ratios();
                precisions.extend(r.precision);
                recalls.extend(r.recall);
            }
            let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
            Ok(PrecisionRecall {
                precision: mean(&precisions),
                recall: mean(&recalls),
            })
        }
    }
}

/// Maps each predicted community to the true class holding the plurality of
/// its members, ties to the lower class id.
pub fn match_communities(
    pred: &CommunityAssignment,
    truth: &[usize],
    num_classes: usize,
) -> Result<Vec<usize>> {
    if pred.num_nodes() != truth.len() {
        return Err(Error::DimensionMismatch {
            op: "match_communities",
            expected: (truth.len(), 1),
            found: (pred.num_nodes(), 1),
        });
    }
    let mut counts = vec![vec![0usize; num_classes]; pred.num_communities()];
    for (&c, &t) in pred.labels().iter().zip(truth) {
        if t >= num_classes {
            return Err(Error::ClassOutOfRange {
                node: 0,
                class: t,
                num_classes,
            });
        }
        counts[c][t] += 1;
    }
    Ok(counts
        .iter()
        .map(|row| {
            let mut best = 0;
            for (class, &n) in row.iter().enumerate() {
                if n > row[best] {
                    best = class;
                }
            }
            best
        })
        .collect())
}

/// Per-node class implied by a community mapping.
pub fn apply_mapping(pred: &CommunityAssignment, mapping: &[usize]) -> Vec<usize> {
    pred.labels().iter().map(|&c| mapping[c]).collect()
}
