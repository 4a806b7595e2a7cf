//! Seeded regeneration of the two synthetic account graphs: a 34-node binary
//! takeover graph and a 2356-node graph with three fraud rings.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labels::LabelAssignment;
use crate::rng::{derive_seed, SplitMix64};

const STREAM_LAYOUT: u64 = 1;
const STREAM_EDGES: u64 = 2;
const STREAM_FEATURES: u64 = 3;
const STREAM_MASK: u64 = 4;

/// How node feature rows are drawn.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FeatureModel {
    /// Class `c` rows are `N(c·separation, noise_sigma²)` in every coordinate.
    Gaussian,
    /// Each community gets an anchor `separation·N(0, I)`, `seed_rows` rows
    /// scattered around it with `seed_spread`, SMOTE expansion up to the
    /// community size, then Gaussian noise with `noise_sigma`.
    SmoteAnchors {
        seed_rows: usize,
        seed_spread: f64,
        k_neighbors: usize,
    },
}

/// Generator parameters. Node ids are a seeded shuffle of the community
/// blocks, so class membership is not readable from the id.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GenSpec {
    pub community_sizes: Vec<usize>,
    pub feature_dim: usize,
    /// Exact number of undirected edges in the output graph.
    pub target_edges: usize,
    /// Edge probability inside each community, one per community.
    pub intra_edge_prob: Vec<f64>,
    pub inter_edge_prob: f64,
    pub class_mean_separation: f64,
    pub noise_sigma: f64,
    pub features: FeatureModel,
    /// Labeled nodes per class in the training mask.
    pub labels_per_class: usize,
    pub seed: u64,
}

impl GenSpec {
    /// 34 accounts, 78 links, 5 features, 11 taken over.
    pub fn binary(seed: u64) -> Self {
        Self {
            community_sizes: vec![23, 11],
            feature_dim: 5,
            target_edges: 78,
            intra_edge_prob: vec![0.35, 0.35],
            inter_edge_prob: 0.05,
            class_mean_separation: 2.0,
            noise_sigma: 1.0,
            features: FeatureModel::Gaussian,
            labels_per_class: 1,
            seed,
        }
    }

    /// 2356 accounts, 3560 links, 50 features, one legitimate community of
    /// 1800 and fraud rings of 219, 196 and 141.
    pub fn multi(seed: u64) -> Self {
        Self {
            community_sizes: vec![1800, 219, 196, 141],
            feature_dim: 50,
            target_edges: 3560,
            intra_edge_prob: vec![0.0014, 0.02, 0.02, 0.02],
            inter_edge_prob: 0.0002,
            class_mean_separation: 0.4,
            noise_sigma: 1.0,
            features: FeatureModel::SmoteAnchors {
                seed_rows: 20,
                seed_spread: 0.5,
                k_neighbors: 5,
            },
            labels_per_class: 50,
            seed,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.community_sizes.iter().sum()
    }

    pub fn num_classes(&self) -> usize {
        self.community_sizes.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.community_sizes.len();
        if k < 2 || self.community_sizes.contains(&0) {
            return Err(Error::InvalidConfig(
                "need at least two non-empty communities",
            ));
        }
        if self.feature_dim < 1 {
            return Err(Error::InvalidConfig("feature_dim must be at least 1"));
        }
        if self.intra_edge_prob.len() != k {
            return Err(Error::InvalidConfig("one intra_edge_prob per community"));
        }
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if !unit(self.inter_edge_prob) || !self.intra_edge_prob.iter().all(|&p| unit(p)) {
            return Err(Error::InvalidConfig(
                "edge probabilities must lie in [0, 1]",
            ));
        }
        if self
            .intra_edge_prob
            .iter()
            .any(|&p| p <= self.inter_edge_prob)
        {
            return Err(Error::InvalidConfig(
                "intra_edge_prob must exceed inter_edge_prob",
            ));
        }
        if self.noise_sigma.is_nan()
            || self.noise_sigma < 0.0
            || !self.class_mean_separation.is_finite()
        {
            return Err(Error::InvalidConfig("noise_sigma must be non-negative"));
        }
        let pairs = |s: usize| s * s.saturating_sub(1) / 2;
        let intra_pairs: usize = self.community_sizes.iter().map(|&s| pairs(s)).sum();
        let reachable = if self.inter_edge_prob > 0.0 {
            pairs(self.num_nodes())
        } else {
            intra_pairs
        };
        if self.target_edges > reachable {
            return Err(Error::InvalidConfig(
                "target_edges exceeds the number of admissible pairs",
            ));
        }
        if let FeatureModel::SmoteAnchors {
            seed_rows,
            seed_spread,
            k_neighbors,
        } = self.features
        {
            if seed_rows < 2
                || k_neighbors < 1
                || k_neighbors >= seed_rows
                || seed_spread.is_nan()
                || seed_spread < 0.0
            {
                return Err(Error::InvalidConfig(
                    "smote anchors need seed_rows ≥ 2 and 1 ≤ k < seed_rows",
                ));
            }
        }
        Ok(())
    }
}

/// Graph, features, ground truth and training mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub graph: Graph,
    pub features: DenseMatrix,
    pub true_labels: LabelAssignment,
    pub train_mask: LabelAssignment,
    pub spec: GenSpec,
}

impl Dataset {
    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn num_classes(&self) -> usize {
        self.true_labels.num_classes()
    }

    /// Class per node.
    pub fn classes(&self) -> Vec<usize> {
        self.true_labels
            .to_dense(self.num_nodes())
            .into_iter()
            .map(|c| c.unwrap_or(0))
            .collect()
    }
}

pub fn generate_binary(seed: u64) -> Dataset {
    generate(&GenSpec::binary(seed)).expect("built-in binary spec is valid")
}

pub fn generate_multi(seed: u64) -> Dataset {
    generate(&GenSpec::multi(seed)).expect("built-in multi spec is valid")
}

/// Builds a dataset from `spec`. A pure function of the spec and its seed.
pub fn generate(spec: &GenSpec) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.num_nodes();
    let k = spec.num_classes();

    // Slot s (community blocks in order) lives at node slot_to_node[s].
    let mut slot_to_node: Vec<usize> = (0..n).collect();
    SplitMix64::new(derive_seed(spec.seed, STREAM_LAYOUT)).shuffle(&mut slot_to_node);
    let mut classes = vec![0usize; n];
    let mut slot = 0;
    for (c, &size) in spec.community_sizes.iter().enumerate() {
        for _ in 0..size {
            classes[slot_to_node[slot]] = c;
            slot += 1;
        }
    }

    let edges = planted_partition_edges(spec, &classes);
    let graph = Graph::build(n, &edges)?;

    let block_features = community_features(spec)?;
    let mut features = DenseMatrix::zeros(n, spec.feature_dim);
    for (s, &node) in slot_to_node.iter().enumerate() {
        features
            .row_mut(node)
            .copy_from_slice(block_features.row(s));
    }

    let true_labels = LabelAssignment::from_classes(&classes, k)?;
    let train_mask = mask_labels(
        &true_labels,
        spec.labels_per_class,
        derive_seed(spec.seed, STREAM_MASK),
    )?;
    Ok(Dataset {
        graph,
        features,
        true_labels,
        train_mask,
        spec: spec.clone(),
    })
}

/// Planted-partition sample followed by an exact-count correction: surplus
/// edges are removed uniformly at random, missing edges are added by
/// rejection sampling with the same block probabilities.
fn planted_partition_edges(spec: &GenSpec, classes: &[usize]) -> Vec<(usize, usize)> {
    let n = classes.len();
    let mut rng = SplitMix64::new(derive_seed(spec.seed, STREAM_EDGES));
    let prob = |u: usize, v: usize| {
        if classes[u] == classes[v] {
            spec.intra_edge_prob[classes[u]]
        } else {
            spec.inter_edge_prob
        }
    };
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.next_f64() < prob(u, v) {
                edges.push((u, v));
            }
        }
    }
    if edges.len() > spec.target_edges {
        rng.shuffle(&mut edges);
        edges.truncate(spec.target_edges);
        edges.sort_unstable();
    } else if edges.len() < spec.target_edges {
        let p_max = spec
            .intra_edge_prob
            .iter()
            .copied()
            .fold(spec.inter_edge_prob, f64::max);
        let mut present: BTreeSet<(usize, usize)> = edges.iter().copied().collect();
        while present.len() < spec.target_edges {
            let (a, b) = (rng.below(n), rng.below(n));
            if a == b {
                continue;
            }
            let e = (a.min(b), a.max(b));
            if present.contains(&e) {
                continue;
            }
            if rng.next_f64() * p_max < prob(e.0, e.1) {
                present.insert(e);
            }
        }
        edges = present.into_iter().collect();
    }
    edges
}

/// Feature rows for every slot, community blocks in order.
fn community_features(spec: &GenSpec) -> Result<DenseMatrix> {
    let d = spec.feature_dim;
    let mut rng = SplitMix64::new(derive_seed(spec.seed, STREAM_FEATURES));
    let mut out = DenseMatrix::zeros(0, d);
    for (c, &size) in spec.community_sizes.iter().enumerate() {
        let block = match spec.features {
            FeatureModel::Gaussian => {
                let mean = c as f64 * spec.class_mean_separation;
                let data = (0..size * d)
                    .map(|_| mean + spec.noise_sigma * rng.normal())
                    .collect();
                DenseMatrix::from_vec(size, d, data)?
            }
            FeatureModel::SmoteAnchors {
                seed_rows,
                seed_spread,
                k_neighbors,
            } => {
                let anchor: Vec<f64> = (0..d)
                    .map(|_| spec.class_mean_separation * rng.normal())
                    .collect();
                let n_seed = seed_rows.min(size);
                let seeds_data = (0..n_seed * d)
                    .map(|i| anchor[i % d] + seed_spread * rng.normal())
                    .collect();
                let seeds = DenseMatrix::from_vec(n_seed, d, seeds_data)?;
                let block = if size > n_seed {
                    let k = k_neighbors.min(n_seed - 1);
                    seeds.vstack(&smote(&seeds, k, size - n_seed, rng.next_u64())?)?
                } else {
                    seeds
                };
                add_noise(&block, spec.noise_sigma, rng.next_u64())?
            }
        };
        out = out.vstack(&block)?;
    }
    Ok(out)
}

/// Provenance of one synthetic SMOTE row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoteDraw {
    pub base: usize,
    pub neighbor: usize,
    pub lambda: f64,
}

/// SMOTE oversampling: `n_new` rows interpolated between a random sample and
/// one of its `k_neighbors` nearest Euclidean neighbors.
pub fn smote(
    samples: &DenseMatrix,
    k_neighbors: usize,
    n_new: usize,
    seed: u64,
) -> Result<DenseMatrix> {
    smote_with_draws(samples, k_neighbors, n_new, seed).map(|(m, _)| m)
}

/// [`smote`] that also reports which pair generated each row.
pub fn smote_with_draws(
    samples: &DenseMatrix,
    k_neighbors: usize,
    n_new: usize,
    seed: u64,
) -> Result<(DenseMatrix, Vec<SmoteDraw>)> {
    let rows = samples.rows();
    if rows < 2 || k_neighbors < 1 || k_neighbors >= rows {
        return Err(Error::NotEnoughSamples { rows, k_neighbors });
    }
    let neighbors = nearest_neighbors(samples, k_neighbors);
    let mut rng = SplitMix64::new(seed);
    let mut out = DenseMatrix::zeros(n_new, samples.cols());
    let mut draws = Vec::with_capacity(n_new);
    for i in 0..n_new {
        let base = rng.below(rows);
        let neighbor = neighbors[base][rng.below(k_neighbors)];
        let lambda = rng.next_f64();
        let (s, t) = (samples.row(base), samples.row(neighbor));
        for (j, o) in out.row_mut(i).iter_mut().enumerate() {
            let v = s[j] + lambda * (t[j] - s[j]);
            // Rounding can step past the far endpoint by an ulp.
            *o = v.clamp(s[j].min(t[j]), s[j].max(t[j]));
        }
        draws.push(SmoteDraw {
            base,
            neighbor,
            lambda,
        });
    }
    Ok((out, draws))
}

/// The `k` nearest rows to each row by Euclidean distance, ties to lower index.
fn nearest_neighbors(samples: &DenseMatrix, k: usize) -> Vec<Vec<usize>> {
    let rows = samples.rows();
    (0..rows)
        .map(|i| {
            let mut dist: Vec<(f64, usize)> = (0..rows)
                .filter(|&j| j != i)
                .map(|j| {
                    let d2 = samples
                        .row(i)
                        .iter()
                        .zip(samples.row(j))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>();
                    (d2, j)
                })
                .collect();
            dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            dist.into_iter().take(k).map(|(_, j)| j).collect()
        })
        .collect()
}

/// `x + N(0, sigma²)` elementwise.
pub fn add_noise(x: &DenseMatrix, sigma: f64, seed: u64) -> Result<DenseMatrix> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig("sigma must be non-negative"));
    }
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    let mut rng = SplitMix64::new(seed);
    Ok(x.map(|v| v + sigma * rng.normal()))
}

/// Keeps exactly `per_class` nodes of every class, chosen uniformly without
/// replacement.
pub fn mask_labels(
    true_labels: &LabelAssignment,
    per_class: usize,
    seed: u64,
) -> Result<LabelAssignment> {
    let mut rng = SplitMix64::new(seed);
    let mut mask = LabelAssignment::new(true_labels.num_classes());
    for class in 0..true_labels.num_classes() {
        let mut members = true_labels.members(class);
        if members.len() < per_class {
            return Err(Error::ClassTooSmall {
                class,
                available: members.len(),
                requested: per_class,
            });
        }
        for i in 0..per_class {
            let j = i + rng.below(members.len() - i);
            members.swap(i, j);
            mask.insert(members[i], class)?;
        }
    }
    Ok(mask)
}
