//! Compressed-row undirected graphs, the symmetric normalization
//! `D̂^{-1/2}(A+I)D̂^{-1/2}`, and the sparse-dense product used by every
//! convolution layer.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::labels::LabelAssignment;

/// Simple undirected graph without self-loops.
///
/// Row `u` of the compressed structure lists the neighbors of `u` in strictly
/// increasing order, and every edge is stored in both orientations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

impl Graph {
    /// Builds a graph from node-id pairs. Duplicates in either orientation
    /// collapse to one edge; self-loops and out-of-range ids are rejected.
    pub fn build(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
        for &(u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::NodeOutOfRange {
                    edge: (u, v),
                    num_nodes,
                });
            }
            if u == v {
                return Err(Error::SelfLoop { node: u });
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut offsets = Vec::with_capacity(num_nodes + 1);
        let mut neighbors = Vec::with_capacity(edges.len() * 2);
        offsets.push(0);
        for mut row in adjacency {
            row.sort_unstable();
            row.dedup();
            neighbors.extend_from_slice(&row);
            offsets.push(neighbors.len());
        }
        Ok(Self { offsets, neighbors })
    }

    pub fn empty(num_nodes: usize) -> Self {
        Self {
            offsets: vec![0; num_nodes + 1],
            neighbors: Vec::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Undirected edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| v > u)
                .map(move |&v| (u, v))
        })
    }

    /// Relabels node `u` as `perm[u]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let edges: Vec<(usize, usize)> = self.edges().map(|(u, v)| (perm[u], perm[v])).collect();
        Self::build(self.num_nodes(), &edges)
    }

    /// Breadth-first hop distances from `source`; `None` when unreachable.
    pub fn hop_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_nodes()];
        let mut queue = alloc::collections::VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap_or(0);
            for &v in self.neighbors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// The constant propagation matrix `D̂^{-1/2}(A+I)D̂^{-1/2}` with
    /// `d̂_u = deg(u) + 1`.
    pub fn normalize(&self) -> NormalizedAdjacency {
        let n = self.num_nodes();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(self.neighbors.len() + n);
        let mut values = Vec::with_capacity(self.neighbors.len() + n);
        offsets.push(0);
        for u in 0..n {
            let du = (self.degree(u) + 1) as f64;
            let mut diagonal_done = false;
            for &v in self.neighbors(u) {
                if !diagonal_done && v > u {
                    indices.push(u);
                    values.push(1.0 / du);
                    diagonal_done = true;
                }
                let dv = (self.degree(v) + 1) as f64;
                indices.push(v);
                values.push(1.0 / libm::sqrt(du * dv));
            }
            if !diagonal_done {
                indices.push(u);
                values.push(1.0 / du);
            }
            offsets.push(indices.len());
        }
        NormalizedAdjacency {
            offsets,
            indices,
            values,
        }
    }

    /// Graphviz text with nodes in id order. Labeled nodes are filled with a
    /// color keyed by class id.
    pub fn to_dot(&self, labels: &LabelAssignment) -> String {
        const PALETTE: [&str; 8] = [
            "pink",
            "lightblue",
            "palegreen",
            "gold",
            "orchid",
            "lightsalmon",
            "khaki",
            "cyan",
        ];
        let mut out = String::from("graph g {\n");
        for u in 0..self.num_nodes() {
            match labels.get(u) {
                Some(class) => {
                    let _ = writeln!(
                        out,
                        "  {u} [class={class}, style=filled, fillcolor={}];",
                        PALETTE[class % PALETTE.len()]
                    );
                }
                None => {
                    let _ = writeln!(out, "  {u};");
                }
            }
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  {u} -- {v};");
        }
        out.push_str("}\n");
        out
    }
}

/// Sparse symmetric matrix `D̂^{-1/2}(A+I)D̂^{-1/2}` in compressed rows, one
/// diagonal entry per row, columns sorted within each row.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl NormalizedAdjacency {
    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` entries of row `u`.
    pub fn row(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.offsets[u]..self.offsets[u + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        let span = self.offsets[u]..self.offsets[u + 1];
        self.indices[span.clone()]
            .binary_search(&v)
            .ok()
            .map(|i| self.values[span.start + i])
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.num_nodes();
        let mut out = DenseMatrix::zeros(n, n);
        for u in 0..n {
            for (v, w) in self.row(u) {
                out[(u, v)] = w;
            }
        }
        out
    }

    /// `self · h`, summing each row's entries in ascending column order.
    pub fn spmm(&self, h: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.num_nodes();
        if h.rows() != n {
            return Err(Error::DimensionMismatch {
                op: "spmm",
                expected: (n, h.cols()),
                found: h.shape(),
            });
        }
        let mut out = DenseMatrix::zeros(n, h.cols());
        for u in 0..n {
            let acc = out.row_mut(u);
            for (v, w) in self.row(u) {
                for (a, &x) in acc.iter_mut().zip(h.row(v)) {
                    *a += w * x;
                }
            }
        }
        Ok(out)
    }
}

/// Set of the nodes within `hops` of any node in `sources`.
pub fn k_hop_ball(g: &Graph, sources: &[usize], hops: usize) -> BTreeSet<usize> {
    let mut ball: BTreeSet<usize> = sources.iter().copied().collect();
    let mut frontier: Vec<usize> = sources.to_vec();
    for _ in 0..hops {
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in g.neighbors(u) {
                if ball.insert(v) {
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    ball
}
