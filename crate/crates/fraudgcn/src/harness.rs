//! Runs the binary and multi-community experiments across methods and seeds
//! and aggregates the results.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use fraudgcn_core::baselines::{feature_classifier_train, label_propagation, LpConfig};
use fraudgcn_core::gcn::{train_normalized, TrainConfig};
use fraudgcn_core::metrics::{
    apply_mapping, match_communities, precision_recall_with, Averaging, PrecisionRecall,
};
use fraudgcn_core::rng::derive_seed;
use fraudgcn_core::synth::{generate, Dataset, GenSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Binary,
    Multi,
}

impl Experiment {
    pub fn gen_spec(self, seed: u64) -> GenSpec {
        match self {
            Experiment::Binary => GenSpec::binary(seed),
            Experiment::Multi => GenSpec::multi(seed),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Binary => "binary",
            Experiment::Multi => "multi",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "binary" => Ok(Experiment::Binary),
            "multi" => Ok(Experiment::Multi),
            other => Err(format!(
                "unknown dataset {other:?}, expected binary or multi"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gcn,
    Lp,
    Featclf,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Gcn, Method::Lp, Method::Featclf];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gcn => "gcn",
            Method::Lp => "lp",
            Method::Featclf => "featclf",
        }
    }

    fn table_name(self) -> &'static str {
        match self {
            Method::Gcn => "GCN",
            Method::Lp => "LP",
            Method::Featclf => "FeatClf",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gcn" => Ok(Method::Gcn),
            "lp" => Ok(Method::Lp),
            "featclf" => Ok(Method::Featclf),
            other => Err(format!(
                "unknown method {other:?}, expected gcn, lp or featclf"
            )),
        }
    }
}

/// Knobs shared by every seed of an experiment. `train.seed` and
/// `train.num_classes` are replaced per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub train: TrainConfig,
    pub lp_max_iters: usize,
    pub averaging: Averaging,
    /// Overrides the dataset's labels-per-class.
    pub labels_per_class: Option<usize>,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            lp_max_iters: LpConfig::default().max_iters,
            averaging: Averaging::Micro,
            labels_per_class: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub elapsed_seconds: f64,
    pub epochs_or_iters: usize,
    pub num_communities_found: usize,
    /// GCN only: whether the patience rule ended training.
    pub stopped_early: Option<bool>,
    /// GCN only: objective per epoch.
    pub loss_history: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub method: Method,
    pub metrics: Option<Metrics>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub runs_ok: usize,
    pub median_precision: Option<f64>,
    pub median_recall: Option<f64>,
    pub median_elapsed_seconds: Option<f64>,
    pub median_epochs_or_iters: Option<f64>,
    pub median_communities: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub num_nodes: usize,
    pub num_edges: usize,
    pub feature_dim: usize,
    pub class_sizes: Vec<usize>,
    pub labels_per_class: usize,
    /// Generator parameters for the first seed; later seeds differ only in `seed`.
    pub gen_spec: GenSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub tool: String,
    pub version: String,
    pub experiment: Experiment,
    pub averaging: Averaging,
    /// Metrics are computed over nodes outside the training mask.
    pub evaluated_on: String,
    pub seeds: Vec<u64>,
    pub options: ExperimentOptions,
    pub dataset: Option<DatasetSummary>,
    pub summary: Vec<MethodSummary>,
    pub runs: Vec<RunRecord>,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Generates the dataset for `seed`, applying any labels-per-class override.
pub fn dataset_for(
    experiment: Experiment,
    seed: u64,
    options: &ExperimentOptions,
) -> Result<Dataset, String> {
    let mut spec = experiment.gen_spec(seed);
    if let Some(per_class) = options.labels_per_class {
        spec.labels_per_class = per_class;
    }
    generate(&spec).map_err(|e| e.to_string())
}

/// Scores `pred` against `truth` on nodes outside the training mask.
fn score(
    dataset: &Dataset,
    pred: &[usize],
    averaging: Averaging,
) -> Result<PrecisionRecall, String> {
    let truth = dataset.classes();
    let held_out: Vec<usize> = (0..truth.len())
        .filter(|&u| !dataset.train_mask.contains(u))
        .collect();
    let p: Vec<usize> = held_out.iter().map(|&u| pred[u]).collect();
    let t: Vec<usize> = held_out.iter().map(|&u| truth[u]).collect();
    let fraud: Vec<usize> = (1..dataset.num_classes()).collect();
    precision_recall_with(&p, &t, &fraud, averaging).map_err(|e| e.to_string())
}

fn distinct(classes: &[usize]) -> usize {
    let mut v = classes.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Runs one method on one dataset. Timing covers the method's own compute.
pub fn run_method(
    method: Method,
    dataset: &Dataset,
    options: &ExperimentOptions,
) -> Result<Metrics, String> {
    let k = dataset.num_classes();
    let seed = dataset.spec.seed;
    let config = TrainConfig {
        num_classes: k,
        seed,
        ..options.train.clone()
    };
    match method {
        Method::Gcn => {
            let start = Instant::now();
            let a = dataset.graph.normalize();
            let outcome = train_normalized(&a, &dataset.features, &dataset.train_mask, &config)
                .map_err(|e| e.to_string())?;
            let (pred, _) = outcome
                .model
                .predict(&a, &dataset.features)
                .map_err(|e| e.to_string())?;
            let elapsed = start.elapsed().as_secs_f64();
            let pr = score(dataset, &pred, options.averaging)?;
            Ok(Metrics {
                precision: pr.precision,
                recall: pr.recall,
                elapsed_seconds: elapsed,
                epochs_or_iters: outcome.epochs(),
                num_communities_found: distinct(&pred),
                stopped_early: Some(outcome.stopped_early),
                loss_history: Some(outcome.loss_history),
            })
        }
        Method::Lp => {
            let lp = LpConfig {
                seed: derive_seed(seed, 0x4c50),
                max_iters: options.lp_max_iters,
            };
            let start = Instant::now();
            let (communities, iters) = label_propagation(&dataset.graph, &lp);
            let elapsed = start.elapsed().as_secs_f64();
            let mapping = match_communities(&communities, &dataset.classes(), k)
                .map_err(|e| e.to_string())?;
            let pred = apply_mapping(&communities, &mapping);
            let pr = score(dataset, &pred, options.averaging)?;
            Ok(Metrics {
                precision: pr.precision,
                recall: pr.recall,
                elapsed_seconds: elapsed,
                epochs_or_iters: iters,
                num_communities_found: communities.num_communities(),
                stopped_early: None,
                loss_history: None,
            })
        }
        Method::Featclf => {
            let start = Instant::now();
            let (clf, history) =
                feature_classifier_train(&dataset.features, &dataset.train_mask, k, &config)
                    .map_err(|e| e.to_string())?;
            let pred = clf.predict(&dataset.features).map_err(|e| e.to_string())?;
            let elapsed = start.elapsed().as_secs_f64();
            let pr = score(dataset, &pred, options.averaging)?;
            Ok(Metrics {
                precision: pr.precision,
                recall: pr.recall,
                elapsed_seconds: elapsed,
                epochs_or_iters: history.len(),
                num_communities_found: distinct(&pred),
                stopped_early: None,
                loss_history: None,
            })
        }
    }
}

/// For each seed: generate, mask, run every method on the same inputs.
/// A failing method is recorded in its run and does not abort the report.
pub fn run_experiment(
    experiment: Experiment,
    methods: &[Method],
    seeds: &[u64],
    options: &ExperimentOptions,
) -> ExperimentReport {
    let mut runs = Vec::new();
    let mut dataset_summary = None;
    for &seed in seeds {
        let dataset = match dataset_for(experiment, seed, options) {
            Ok(d) => d,
            Err(e) => {
                for &method in methods {
                    runs.push(RunRecord {
                        seed,
                        method,
                        metrics: None,
                        error: Some(format!("dataset generation failed: {e}")),
                    });
                }
                continue;
            }
        };
        dataset_summary.get_or_insert_with(|| DatasetSummary {
            num_nodes: dataset.num_nodes(),
            num_edges: dataset.graph.num_edges(),
            feature_dim: dataset.features.cols(),
            class_sizes: dataset.true_labels.class_sizes(),
            labels_per_class: dataset.spec.labels_per_class,
            gen_spec: dataset.spec.clone(),
        });
        for &method in methods {
            let (metrics, error) = match run_method(method, &dataset, options) {
                Ok(m) => (Some(m), None),
                Err(e) => (None, Some(e)),
            };
            runs.push(RunRecord {
                seed,
                method,
                metrics,
                error,
            });
        }
    }
    let summary = methods.iter().map(|&m| summarize(m, &runs)).collect();
    ExperimentReport {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        experiment,
        averaging: options.averaging,
        evaluated_on: "nodes outside the training mask".to_string(),
        seeds: seeds.to_vec(),
        options: options.clone(),
        dataset: dataset_summary,
        summary,
        runs,
    }
}

fn summarize(method: Method, runs: &[RunRecord]) -> MethodSummary {
    let ok: Vec<&Metrics> = runs
        .iter()
        .filter(|r| r.method == method)
        .filter_map(|r| r.metrics.as_ref())
        .collect();
    let collect = |f: &dyn Fn(&Metrics) -> Option<f64>| {
        median(&ok.iter().filter_map(|m| f(m)).collect::<Vec<_>>())
    };
    MethodSummary {
        method,
        runs_ok: ok.len(),
        median_precision: collect(&|m| m.precision),
        median_recall: collect(&|m| m.recall),
        median_elapsed_seconds: collect(&|m| Some(m.elapsed_seconds)),
        median_epochs_or_iters: collect(&|m| Some(m.epochs_or_iters as f64)),
        median_communities: collect(&|m| Some(m.num_communities_found as f64)),
    }
}

impl ExperimentReport {
    pub fn summary_for(&self, method: Method) -> Option<&MethodSummary> {
        self.summary.iter().find(|s| s.method == method)
    }

    pub fn runs_for(&self, method: Method) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(move |r| r.method == method)
    }

    /// Copy with every timing field zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> ExperimentReport {
        let mut out = self.clone();
        for run in &mut out.runs {
            if let Some(m) = run.metrics.as_mut() {
                m.elapsed_seconds = 0.0;
            }
        }
        for s in &mut out.summary {
            s.median_elapsed_seconds = s.median_elapsed_seconds.map(|_| 0.0);
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Markdown table: Model | Communities | Recall | Precision | Time.
    pub fn to_markdown(&self) -> String {
        let pct = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{:.2}%", 100.0 * x));
        let mut out = format!(
            "Experiment: {} ({} averaging, medians over {} seed(s), scored on {})\n\n",
            self.experiment,
            match self.averaging {
                Averaging::Micro => "micro",
                Averaging::Macro => "macro",
            },
            self.seeds.len(),
            self.evaluated_on,
        );
        out.push_str("| Model | Communities | Recall | Precision | Time |\n");
        out.push_str("|---|---|---|---|---|\n");
        for s in &self.summary {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                s.method.table_name(),
                s.median_communities
                    .map_or("-".to_string(), |c| format!("{c}")),
                pct(s.median_recall),
                pct(s.median_precision),
                s.median_elapsed_seconds
                    .map_or("-".to_string(), |t| format!("{t:.3}")),
            );
        }
        out
    }
}
