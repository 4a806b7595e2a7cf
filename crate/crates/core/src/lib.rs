//! Graph semi-supervised fraud-ring detection.
//!
//! A three-layer graph convolution network trained on a handful of labeled
//! accounts, plus the label-propagation and feature-only baselines it is
//! compared against, the synthetic account graphs used for that comparison,
//! and the scoring code. Everything here is `no_std` with `alloc`; file
//! formats, timing and the command-line driver live in the `fraudgcn` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
#[macro_use]
extern crate std;

pub mod baselines;
pub mod dense;
pub mod error;
pub mod gcn;
pub mod graph;
pub mod labels;
pub mod metrics;
pub mod optim;
pub mod rng;
pub mod synth;

pub use dense::DenseMatrix;
pub use error::{Error, Result};
pub use graph::{Graph, NormalizedAdjacency};
pub use labels::LabelAssignment;
