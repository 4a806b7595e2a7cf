//! Command-line driver: `generate`, `train`, `predict`, `compare`, `export-dot`.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fraudgcn_core::gcn::{train, TrainConfig};
use fraudgcn_core::metrics::Averaging;
use fraudgcn_core::optim::Optimizer;
use fraudgcn_core::synth::generate;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::checkpoint::Checkpoint;
use crate::formats::{self, read_dataset, write_dataset, write_json, write_text, MASK_FILE};
use crate::harness::{run_experiment, Experiment, ExperimentOptions, Method};

#[derive(Debug, Parser)]
#[command(
    name = "fraudgcn",
    version,
    about = "Graph convolutional fraud-community detection on synthetic graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset directory.
    Generate(GenerateArgs),
    /// Train a GCN on a dataset directory and write a checkpoint.
    Train(TrainArgs),
    /// Predict every node's class with a trained checkpoint.
    Predict(PredictArgs),
    /// Run GCN, label propagation and the feature-only classifier over several seeds.
    Compare(CompareArgs),
    /// Write the dataset graph in DOT format.
    ExportDot(ExportDotArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// binary or multi
    pub dataset: Experiment,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// JSON file with generator overrides, e.g. {"noise_sigma": 0.5}.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub model_out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Two hidden widths, e.g. 16,16.
    #[arg(long, value_parser = parse_hidden)]
    pub hidden: Option<(usize, usize)>,
    /// adam or gd
    #[arg(long)]
    pub optimizer: Option<String>,
    /// Early-stopping patience in epochs; 0 disables early stopping.
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub no_bias: bool,
    /// JSON file with training overrides. Flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Output CSV `node_id,class_id`.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional CSV with per-class probabilities.
    #[arg(long)]
    pub probabilities: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// binary or multi
    pub dataset: Experiment,
    /// Comma list (1,2,3) or inclusive range (1..5).
    #[arg(long)]
    pub seeds: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "gcn,lp,featclf")]
    pub methods: Vec<Method>,
    /// Macro-average precision and recall over fraud classes.
    #[arg(long = "macro")]
    pub macro_average: bool,
    /// JSON file with experiment overrides (train, lp_max_iters, labels_per_class).
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportDotArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// `node_id,class_id` CSV used for coloring; defaults to the training mask.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Sidecar written next to every output so the run can be repeated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub config: Value,
}

impl RunManifest {
    fn new(command: &str, args: &[String], seed: Option<u64>, config: Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            args: args.to_vec(),
            seed,
            config,
        }
    }
}

pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Parses `1,2,3` or `1..5` (inclusive).
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u64 = lo
            .trim()
            .parse()
            .with_context(|| format!("bad seed range start in {text:?}"))?;
        let hi: u64 = hi
            .trim()
            .parse()
            .with_context(|| format!("bad seed range end in {text:?}"))?;
        if lo > hi {
            bail!("empty seed range {text:?}");
        }
        return Ok((lo..=hi).collect());
    }
    let seeds = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .with_context(|| format!("bad seed {s:?}"))
        })
        .collect::<Result<Vec<_>>>()?;
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

fn parse_hidden(text: &str) -> std::result::Result<(usize, usize), String> {
    let bad = || format!("expected two widths like 16,16, got {text:?}");
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

/// Overwrites top-level fields of `base` with those in `overrides`.
/// Keys that `base` does not have are rejected.
pub fn merge_overrides<T: Serialize + DeserializeOwned>(
    base: &T,
    overrides: &Value,
    what: &str,
) -> Result<T> {
    let mut merged = serde_json::to_value(base)?;
    let target = merged
        .as_object_mut()
        .ok_or_else(|| anyhow!("{what} is not a JSON object"))?;
    let source = overrides
        .as_object()
        .ok_or_else(|| anyhow!("{what} overrides must be a JSON object"))?;
    for (key, value) in source {
        match target.get_mut(key) {
            Some(slot) => *slot = value.clone(),
            None => bail!("unknown {what} key {key:?}"),
        }
    }
    serde_json::from_value(merged).with_context(|| format!("invalid {what} overrides"))
}

fn read_overrides(path: &Path) -> Result<Value> {
    Ok(formats::read_json(path)?)
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => {
            bail!("output directory {} does not exist", p.display())
        }
        _ => Ok(()),
    }
}

/// Runs the parsed command. `args` is the raw argument list (without the
/// program name) and is recorded in run manifests.
pub fn run(cli: Cli, args: &[String]) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Train(a) => cmd_train(a, args),
        Command::Predict(a) => cmd_predict(a, args),
        Command::Compare(a) => cmd_compare(a, args),
        Command::ExportDot(a) => cmd_export_dot(a, args),
    }
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let mut spec = a.dataset.gen_spec(a.seed);
    if let Some(path) = &a.config {
        spec = merge_overrides(&spec, &read_overrides(path)?, "generator")?;
        spec.seed = a.seed;
    }
    let dataset = generate(&spec).context("dataset generation failed")?;
    write_dataset(&a.out, a.dataset.name(), &dataset)?;
    Ok(())
}

fn train_config(a: &TrainArgs, num_classes: usize) -> Result<TrainConfig> {
    let mut config = TrainConfig::default();
    if let Some(path) = &a.config {
        config = merge_overrides(&config, &read_overrides(path)?, "training")?;
    }
    config.num_classes = num_classes;
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(e) = a.max_epochs {
        config.max_epochs = e;
    }
    if let Some(lr) = a.lr {
        config.learning_rate = lr;
    }
    if let Some(h) = a.hidden {
        config.hidden_dims = h;
    }
    if let Some(o) = &a.optimizer {
        config.optimizer = match o.as_str() {
            "adam" => Optimizer::adam(),
            "gd" | "sgd" => Optimizer::GradientDescent,
            other => bail!("unknown optimizer {other:?}, expected adam or gd"),
        };
    }
    if let Some(p) = a.patience {
        config.early_stop_patience = p;
    }
    if let Some(wd) = a.weight_decay {
        config.weight_decay = wd;
    }
    if a.no_bias {
        config.use_bias = false;
    }
    config
        .validate()
        .context("invalid training configuration")?;
    Ok(config)
}

fn cmd_train(a: TrainArgs, args: &[String]) -> Result<()> {
    ensure_parent(&a.model_out)?;
    let data = read_dataset(&a.data)?;
    let config = train_config(&a, data.manifest.num_classes)?;
    let outcome =
        train(&data.graph, &data.features, &data.mask, &config).context("training failed")?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for (epoch, loss) in outcome.loss_history.iter().enumerate() {
        writeln!(out, "{}\t{loss:e}", epoch + 1)?;
    }
    out.flush()?;
    Checkpoint::new(&outcome.model, &config).save(&a.model_out)?;
    let manifest = RunManifest::new(
        "train",
        args,
        Some(config.seed),
        serde_json::json!({
            "train": config,
            "dataset": data.manifest,
            "epochs": outcome.epochs(),
            "stopped_early": outcome.stopped_early,
        }),
    );
    write_json(&sidecar_path(&a.model_out), &manifest)?;
    Ok(())
}

fn cmd_predict(a: PredictArgs, args: &[String]) -> Result<()> {
    ensure_parent(&a.out)?;
    if let Some(p) = &a.probabilities {
        ensure_parent(p)?;
    }
    let data = read_dataset(&a.data)?;
    let (model, config) = Checkpoint::load_model(&a.model)?;
    let adj = data.graph.normalize();
    let (classes, probs) = model.predict(&adj, &data.features).with_context(|| {
        format!(
            "checkpoint {} does not fit dataset {}",
            a.model.display(),
            a.data.display()
        )
    })?;
    let mut text = String::from("node_id,class_id\n");
    for (u, c) in classes.iter().enumerate() {
        text.push_str(&format!("{u},{c}\n"));
    }
    write_text(&a.out, &text)?;
    if let Some(path) = &a.probabilities {
        let mut text = String::from("node_id");
        for c in 0..probs.cols() {
            text.push_str(&format!(",p{c}"));
        }
        text.push('\n');
        for u in 0..probs.rows() {
            text.push_str(&u.to_string());
            for &p in probs.row(u) {
                text.push(',');
                text.push_str(&formats::format_real(p));
            }
            text.push('\n');
        }
        write_text(path, &text)?;
    }
    let manifest = RunManifest::new(
        "predict",
        args,
        Some(config.seed),
        serde_json::json!({ "train": config, "dataset": data.manifest }),
    );
    write_json(&sidecar_path(&a.out), &manifest)?;
    Ok(())
}

fn cmd_compare(a: CompareArgs, args: &[String]) -> Result<()> {
    let seeds = parse_seeds(&a.seeds)?;
    if a.methods.is_empty() {
        bail!("no methods given");
    }
    let mut options = ExperimentOptions::default();
    if let Some(path) = &a.config {
        options = merge_overrides(&options, &read_overrides(path)?, "experiment")?;
    }
    if a.macro_average {
        options.averaging = Averaging::Macro;
    }
    std::fs::create_dir_all(&a.out)
        .with_context(|| format!("cannot create {}", a.out.display()))?;
    let report = run_experiment(a.dataset, &a.methods, &seeds, &options);
    write_text(&a.out.join("report.json"), &report.to_json())?;
    write_text(&a.out.join("report.md"), &report.to_markdown())?;
    let manifest = RunManifest::new("compare", args, None, serde_json::to_value(&options)?);
    write_json(&a.out.join("run.manifest.json"), &manifest)?;
    print!("{}", report.to_markdown());
    let failures: Vec<String> = report
        .runs
        .iter()
        .filter_map(|r| {
            r.error
                .as_ref()
                .map(|e| format!("seed {} {}: {e}", r.seed, r.method))
        })
        .collect();
    if !failures.is_empty() {
        bail!(
            "{} run(s) failed:\n  {}",
            failures.len(),
            failures.join("\n  ")
        );
    }
    Ok(())
}

fn cmd_export_dot(a: ExportDotArgs, args: &[String]) -> Result<()> {
    ensure_parent(&a.out)?;
    let data = read_dataset(&a.data)?;
    let labels = match &a.labels {
        Some(path) => {
            let text = formats::read_text(path)?;
            let labels = formats::parse_labels(&text, path, data.manifest.num_classes)?;
            labels
                .check_nodes(data.graph.num_nodes())
                .map_err(|e| formats::FormatError::invalid(path, e))?;
            labels
        }
        None => data.mask.clone(),
    };
    write_text(&a.out, &data.graph.to_dot(&labels))?;
    let source = a
        .labels
        .as_ref()
        .map_or_else(|| a.data.join(MASK_FILE), Clone::clone);
    let manifest = RunManifest::new(
        "export-dot",
        args,
        Some(data.manifest.seed),
        serde_json::json!({ "dataset": data.manifest, "labels": source }),
    );
    write_json(&sidecar_path(&a.out), &manifest)?;
    Ok(())
}
