use core::fmt;

/// Errors raised by graph construction, model evaluation and data generation.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An edge endpoint is not a valid node id.
    NodeOutOfRange {
        edge: (usize, usize),
        num_nodes: usize,
    },
    /// An input edge connects a node to itself.
    SelfLoop { node: usize },
    /// Operand shapes do not line up.
    DimensionMismatch {
        op: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// A matrix entry is NaN or infinite.
    NonFinite { row: usize, col: usize },
    /// A loss or classifier was asked to work without any labeled node.
    NoLabels,
    /// A label refers to a class outside `0..num_classes`.
    ClassOutOfRange {
        node: usize,
        class: usize,
        num_classes: usize,
    },
    /// A label refers to a node outside the graph.
    LabelNodeOutOfRange { node: usize, num_nodes: usize },
    /// A class has fewer members than a mask asked for.
    ClassTooSmall {
        class: usize,
        available: usize,
        requested: usize,
    },
    /// Embedding layers are numbered 1 through 3.
    LayerOutOfRange { layer: usize },
    /// Not enough rows to oversample from.
    NotEnoughSamples { rows: usize, k_neighbors: usize },
    /// A configuration value violates its invariant.
    InvalidConfig(&'static str),
    /// The training objective became NaN or infinite.
    Diverged { epoch: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NodeOutOfRange { edge, num_nodes } => write!(
                f,
                "edge ({}, {}) references a node outside 0..{}",
                edge.0, edge.1, num_nodes
            ),
            Error::SelfLoop { node } => write!(f, "self-loop on node {node} is not allowed"),
            Error::DimensionMismatch {
                op,
                expected,
                found,
            } => write!(
                f,
                "{op}: expected shape {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::NonFinite { row, col } => write!(f, "non-finite entry at ({row}, {col})"),
            Error::NoLabels => write!(f, "no labeled nodes"),
            Error::ClassOutOfRange {
                node,
                class,
                num_classes,
            } => write!(
                f,
                "node {node} has class {class} but only {num_classes} classes exist"
            ),
            Error::LabelNodeOutOfRange { node, num_nodes } => {
                write!(f, "label for node {node} but graph has {num_nodes} nodes")
            }
            Error::ClassTooSmall {
                class,
                available,
                requested,
            } => write!(
                f,
                "class {class} has {available} members, {requested} requested"
            ),
            Error::LayerOutOfRange { layer } => {
                write!(f, "layer {layer} out of range, expected 1..=3")
            }
            Error::NotEnoughSamples { rows, k_neighbors } => write!(
                f,
                "need at least 2 rows and k_neighbors < rows, got {rows} rows and k_neighbors {k_neighbors}"
            ),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Diverged { epoch } => write!(f, "training diverged at epoch {epoch}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
