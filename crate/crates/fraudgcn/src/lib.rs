//! File formats, experiment harness and command-line plumbing around
//! [`fraudgcn_core`].

pub mod checkpoint;
pub mod cli;
pub mod formats;
pub mod harness;
