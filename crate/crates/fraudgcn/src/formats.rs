//! On-disk formats: graph TSV, feature/label/community CSVs and the dataset
//! directory layout with its JSON manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fraudgcn_core::baselines::CommunityAssignment;
use fraudgcn_core::synth::{Dataset, GenSpec};
use fraudgcn_core::{DenseMatrix, Graph, LabelAssignment};
use serde::{Deserialize, Serialize};

pub const GRAPH_FILE: &str = "graph.tsv";
pub const FEATURES_FILE: &str = "features.csv";
pub const LABELS_FILE: &str = "labels.csv";
pub const MASK_FILE: &str = "mask.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{}: {err}", path.display())]
    Io { path: PathBuf, err: std::io::Error },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
}

impl FormatError {
    fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        FormatError::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(path: &Path, message: impl ToString) -> Self {
        FormatError::Invalid {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|err| FormatError::Io {
        path: path.to_path_buf(),
        err,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    fs::write(path, text).map_err(|err| FormatError::Io {
        path: path.to_path_buf(),
        err,
    })
}

/// Reals at 17 significant digits, which round-trip every `f64`.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Non-empty lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn parse_usize(path: &Path, line: usize, field: &str, what: &str) -> Result<usize, FormatError> {
    field
        .trim()
        .parse()
        .map_err(|_| FormatError::parse(path, line, format!("invalid {what} {field:?}")))
}

pub fn format_graph(g: &Graph) -> String {
    let mut out = format!("nodes\t{}\n", g.num_nodes());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u}\t{v}");
    }
    out
}

/// Parses `nodes<TAB>N` followed by `u<TAB>v` lines with `u < v`.
pub fn parse_graph(text: &str, path: &Path) -> Result<Graph, FormatError> {
    let mut lines = data_lines(text);
    let (line, header) = lines
        .next()
        .ok_or_else(|| FormatError::parse(path, 1, "missing `nodes<TAB>N` header"))?;
    let num_nodes = match header.split('\t').collect::<Vec<_>>()[..] {
        ["nodes", n] => parse_usize(path, line, n, "node count")?,
        _ => {
            return Err(FormatError::parse(
                path,
                line,
                "expected `nodes<TAB>N` header",
            ))
        }
    };
    let mut edges = Vec::new();
    for (line, l) in lines {
        let fields: Vec<&str> = l.split('\t').collect();
        if fields.len() != 2 {
            return Err(FormatError::parse(path, line, "expected `u<TAB>v`"));
        }
        let u = parse_usize(path, line, fields[0], "node id")?;
        let v = parse_usize(path, line, fields[1], "node id")?;
        if u >= v {
            return Err(FormatError::parse(
                path,
                line,
                format!("edge ({u}, {v}) must have u < v"),
            ));
        }
        if v >= num_nodes {
            return Err(FormatError::parse(
                path,
                line,
                format!("edge ({u}, {v}) references a node outside 0..{num_nodes}"),
            ));
        }
        edges.push((u, v));
    }
    Graph::build(num_nodes, &edges).map_err(|e| FormatError::invalid(path, e))
}

pub fn format_features(x: &DenseMatrix) -> String {
    let mut out = String::from("node_id");
    for j in 0..x.cols() {
        let _ = write!(out, ",f{j}");
    }
    out.push('\n');
    for r in 0..x.rows() {
        out.push_str(&r.to_string());
        for &v in x.row(r) {
            out.push(',');
            out.push_str(&format_real(v));
        }
        out.push('\n');
    }
    out
}

/// Parses `node_id,f0,...` rows; node ids must be `0..N` in order.
pub fn parse_features(text: &str, path: &Path) -> Result<DenseMatrix, FormatError> {
    let mut lines = data_lines(text);
    let (line, header) = lines
        .next()
        .ok_or_else(|| FormatError::parse(path, 1, "missing header"))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.first() != Some(&"node_id") || columns.len() < 2 {
        return Err(FormatError::parse(
            path,
            line,
            "header must be `node_id,f0,...`",
        ));
    }
    let dim = columns.len() - 1;
    let mut data = Vec::new();
    let mut rows = 0;
    for (line, l) in lines {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(FormatError::parse(
                path,
                line,
                format!("expected {} fields, found {}", dim + 1, fields.len()),
            ));
        }
        let node = parse_usize(path, line, fields[0], "node id")?;
        if node != rows {
            return Err(FormatError::parse(
                path,
                line,
                format!("expected node {rows}, found {node}"),
            ));
        }
        for f in &fields[1..] {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| FormatError::parse(path, line, format!("invalid real {f:?}")))?;
            if !v.is_finite() {
                return Err(FormatError::parse(path, line, "non-finite feature"));
            }
            data.push(v);
        }
        rows += 1;
    }
    DenseMatrix::from_vec(rows, dim, data).map_err(|e| FormatError::invalid(path, e))
}

fn format_pairs(header: &str, pairs: impl Iterator<Item = (usize, usize)>) -> String {
    let mut out = format!("{header}\n");
    for (a, b) in pairs {
        let _ = writeln!(out, "{a},{b}");
    }
    out
}

fn parse_pairs(text: &str, path: &Path, header: &str) -> Result<Vec<(usize, usize)>, FormatError> {
    let mut lines = data_lines(text);
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        Some((line, _)) => {
            return Err(FormatError::parse(
                path,
                line,
                format!("header must be `{header}`"),
            ))
        }
        None => {
            return Err(FormatError::parse(
                path,
                1,
                format!("missing `{header}` header"),
            ))
        }
    }
    lines
        .map(|(line, l)| {
            let fields: Vec<&str> = l.split(',').collect();
            if fields.len() != 2 {
                return Err(FormatError::parse(path, line, "expected two fields"));
            }
            Ok((
                parse_usize(path, line, fields[0], "node id")?,
                parse_usize(path, line, fields[1], "id")?,
            ))
        })
        .collect()
}

pub fn format_labels(labels: &LabelAssignment) -> String {
    format_pairs("node_id,class_id", labels.iter())
}

pub fn parse_labels(
    text: &str,
    path: &Path,
    num_classes: usize,
) -> Result<LabelAssignment, FormatError> {
    let mut labels = LabelAssignment::new(num_classes);
    for (node, class) in parse_pairs(text, path, "node_id,class_id")? {
        labels
            .insert(node, class)
            .map_err(|e| FormatError::invalid(path, e))?;
    }
    Ok(labels)
}

pub fn format_communities(c: &CommunityAssignment) -> String {
    format_pairs(
        "node_id,community_id",
        c.labels().iter().copied().enumerate(),
    )
}

pub fn parse_communities(text: &str, path: &Path) -> Result<CommunityAssignment, FormatError> {
    let pairs = parse_pairs(text, path, "node_id,community_id")?;
    let mut raw = Vec::with_capacity(pairs.len());
    for (i, (node, community)) in pairs.into_iter().enumerate() {
        if node != i {
            return Err(FormatError::invalid(
                path,
                format!("expected node {i}, found {node}"),
            ));
        }
        raw.push(community);
    }
    Ok(CommunityAssignment::from_raw(&raw))
}

/// Everything needed to regenerate a dataset directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub tool: String,
    pub version: String,
    pub dataset: String,
    pub seed: u64,
    pub num_nodes: usize,
    pub num_edges: usize,
    pub num_classes: usize,
    pub feature_dim: usize,
    pub gen_spec: GenSpec,
}

impl DatasetManifest {
    pub fn new(name: &str, dataset: &Dataset) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            dataset: name.to_string(),
            seed: dataset.spec.seed,
            num_nodes: dataset.num_nodes(),
            num_edges: dataset.graph.num_edges(),
            num_classes: dataset.num_classes(),
            feature_dim: dataset.features.cols(),
            gen_spec: dataset.spec.clone(),
        }
    }
}

/// Dataset files as read back from disk.
#[derive(Debug, Clone)]
pub struct StoredDataset {
    pub graph: Graph,
    pub features: DenseMatrix,
    pub labels: LabelAssignment,
    pub mask: LabelAssignment,
    pub manifest: DatasetManifest,
}

pub fn write_dataset(dir: &Path, name: &str, dataset: &Dataset) -> Result<(), FormatError> {
    fs::create_dir_all(dir).map_err(|err| FormatError::Io {
        path: dir.to_path_buf(),
        err,
    })?;
    write_text(&dir.join(GRAPH_FILE), &format_graph(&dataset.graph))?;
    write_text(
        &dir.join(FEATURES_FILE),
        &format_features(&dataset.features),
    )?;
    write_text(&dir.join(LABELS_FILE), &format_labels(&dataset.true_labels))?;
    write_text(&dir.join(MASK_FILE), &format_labels(&dataset.train_mask))?;
    let manifest = DatasetManifest::new(name, dataset);
    write_json(&dir.join(MANIFEST_FILE), &manifest)
}

pub fn read_dataset(dir: &Path) -> Result<StoredDataset, FormatError> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest: DatasetManifest = read_json(&manifest_path)?;
    let graph_path = dir.join(GRAPH_FILE);
    let graph = parse_graph(&read_text(&graph_path)?, &graph_path)?;
    let features_path = dir.join(FEATURES_FILE);
    let features = parse_features(&read_text(&features_path)?, &features_path)?;
    if features.rows() != graph.num_nodes() {
        return Err(FormatError::invalid(
            &features_path,
            format!(
                "{} feature rows for {} nodes",
                features.rows(),
                graph.num_nodes()
            ),
        ));
    }
    let k = manifest.num_classes;
    let labels_path = dir.join(LABELS_FILE);
    let labels = parse_labels(&read_text(&labels_path)?, &labels_path, k)?;
    let mask_path = dir.join(MASK_FILE);
    let mask = parse_labels(&read_text(&mask_path)?, &mask_path, k)?;
    for (path, l) in [(&labels_path, &labels), (&mask_path, &mask)] {
        l.check_nodes(graph.num_nodes())
            .map_err(|e| FormatError::invalid(path, e))?;
    }
    Ok(StoredDataset {
        graph,
        features,
        labels,
        mask,
        manifest,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| FormatError::invalid(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, FormatError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| FormatError::parse(path, e.line(), e.to_string()))
}
