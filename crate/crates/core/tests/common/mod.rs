#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use fraudgcn_core::gcn::{init_model, GcnModel, TrainConfig};
use fraudgcn_core::rng::SplitMix64;
use fraudgcn_core::{DenseMatrix, Graph, LabelAssignment};

/// Random simple graph as a sorted edge set with u < v.
pub fn random_edges(rng: &mut SplitMix64, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.next_f64() < p {
                edges.push((u, v));
            }
        }
    }
    edges
}

pub fn random_graph(rng: &mut SplitMix64, n: usize, p: f64) -> Graph {
    Graph::build(n, &random_edges(rng, n, p)).unwrap()
}

pub fn random_matrix(rng: &mut SplitMix64, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| rng.uniform(-1.5, 1.5)).collect();
    DenseMatrix::from_vec(rows, cols, data).unwrap()
}

/// Random labels on a random non-empty subset of nodes.
pub fn random_labels(rng: &mut SplitMix64, n: usize, k: usize) -> LabelAssignment {
    let mut labels = LabelAssignment::new(k);
    for u in 0..n {
        if rng.next_f64() < 0.6 {
            labels.insert(u, rng.below(k)).unwrap();
        }
    }
    if labels.is_empty() {
        labels.insert(rng.below(n), rng.below(k)).unwrap();
    }
    labels
}

/// Freshly initialized model with nonzero biases so every parameter matters.
pub fn random_model(rng: &mut SplitMix64, d: usize, k: usize, hidden: (usize, usize)) -> GcnModel {
    let config = TrainConfig {
        num_classes: k,
        hidden_dims: hidden,
        seed: rng.next_u64(),
        ..TrainConfig::default()
    };
    let mut model = init_model(d, &config).unwrap();
    for layer in &mut model.layers {
        for b in &mut layer.bias {
            *b = rng.uniform(-0.3, 0.3);
        }
    }
    model
}

pub fn random_permutation(rng: &mut SplitMix64, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut perm);
    perm
}

/// Nodes within `hops` of `source`, by plain breadth-first search over an
/// adjacency list built from the edge list.
pub fn ball(n: usize, edges: &[(usize, usize)], source: usize, hops: usize) -> BTreeSet<usize> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut dist = vec![usize::MAX; n];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    (0..n).filter(|&u| dist[u] <= hops).collect()
}
