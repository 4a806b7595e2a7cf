//! One test per acceptance criterion. Each prints a `PASS`/`FAIL` line with
//! the measured values; run with `--nocapture` to see them.

#![allow(clippy::needless_range_loop)]

use std::collections::VecDeque;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use fraudgcn::harness::{
    median, run_experiment, Experiment, ExperimentOptions, ExperimentReport, Method,
};
use fraudgcn_core::gcn::{init_model, GcnModel, TrainConfig};
use fraudgcn_core::metrics::precision_recall;
use fraudgcn_core::rng::SplitMix64;
use fraudgcn_core::synth::smote_with_draws;
use fraudgcn_core::{DenseMatrix, Graph, LabelAssignment};

fn report(id: u32, name: &str, result: Result<String, String>) {
    match result {
        Ok(detail) => println!("PASS criterion {id} ({name}): {detail}"),
        Err(detail) => {
            println!("FAIL criterion {id} ({name}): {detail}");
            panic!("criterion {id} failed: {detail}");
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn edges(rng: &mut SplitMix64, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.next_f64() < p {
                out.push((u, v));
            }
        }
    }
    out
}

fn matrix(rng: &mut SplitMix64, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_vec(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.uniform(-1.0, 1.0)).collect(),
    )
    .unwrap()
}

fn model(rng: &mut SplitMix64, d: usize, k: usize) -> GcnModel {
    let config = TrainConfig {
        num_classes: k,
        hidden_dims: (2 + rng.below(6), 2 + rng.below(6)),
        seed: rng.next_u64(),
        ..TrainConfig::default()
    };
    let mut m = init_model(d, &config).unwrap();
    for layer in &mut m.layers {
        layer
            .bias
            .iter_mut()
            .for_each(|b| *b = rng.uniform(-0.3, 0.3));
    }
    m
}

#[test]
fn criterion_01_gradient_correctness() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(101);
    let mut worst: f64 = 0.0;
    let mut instances = 0;
    let h = 1e-5;
    while instances < 25 {
        let n = 2 + rng.below(11);
        let d = 1 + rng.below(6);
        let k = 2 + rng.below(3);
        let g = Graph::build(n, &edges(&mut rng, n, 0.3)).unwrap();
        let a = g.normalize();
        let x = matrix(&mut rng, n, d);
        let mut labels = LabelAssignment::new(k);
        for u in 0..n {
            if u == 0 || rng.next_f64() < 0.5 {
                labels.insert(u, rng.below(k)).unwrap();
            }
        }
        let m = model(&mut rng, d, k);
        let trace = m.forward(&a, &x).unwrap();
        // Skip instances straddling a ReLU kink.
        if trace.pre_activations[..2]
            .iter()
            .flat_map(|z| z.as_slice())
            .any(|z| z.abs() < 1e-3)
        {
            continue;
        }
        instances += 1;
        let grads = m.backward(&a, &trace, &labels).unwrap();
        let loss = |m: &GcnModel| GcnModel::loss(&m.forward(&a, &x).unwrap(), &labels).unwrap();
        for l in 0..3 {
            let params = m.layers[l].weight.as_slice().len() + m.layers[l].bias.len();
            let analytic: Vec<f64> = grads.layers[l]
                .weight
                .as_slice()
                .iter()
                .chain(&grads.layers[l].bias)
                .copied()
                .collect();
            let mut numeric = Vec::with_capacity(params);
            for i in 0..params {
                let nudge = |delta: f64| {
                    let mut p = m.clone();
                    let w = p.layers[l].weight.as_slice().len();
                    if i < w {
                        p.layers[l].weight.as_mut_slice()[i] += delta;
                    } else {
                        p.layers[l].bias[i - w] += delta;
                    }
                    loss(&p)
                };
                numeric.push((nudge(h) - nudge(-h)) / (2.0 * h));
            }
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
            worst = worst.max(norm(&diff) / norm(&analytic).max(norm(&numeric)).max(1e-8));
        }
    }
    let elapsed = start.elapsed();
    let result = check(worst <= 1e-4, || format!("max relative error {worst:e}"))
        .and_then(|_| {
            check(elapsed < Duration::from_secs(10), || {
                format!("took {elapsed:?}")
            })
        })
        .map(|_| {
            format!(
                "{instances} instances, max relative error {worst:.2e}, {:.2}s",
                elapsed.as_secs_f64()
            )
        });
    report(1, "gradient correctness", result);
}

#[test]
fn criterion_02_normalization_exactness() {
    let mut rng = SplitMix64::new(102);
    let mut worst_entry: f64 = 0.0;
    let mut worst_spmm: f64 = 0.0;
    let mut result = Ok(());
    for _ in 0..100 {
        let n = 1 + rng.below(50);
        let p = rng.uniform(0.0, 0.4);
        let list = edges(&mut rng, n, p);
        let a = Graph::build(n, &list).unwrap().normalize();
        let mut dense = vec![vec![0.0; n]; n];
        let mut deg = vec![1.0f64; n];
        for &(u, v) in &list {
            deg[u] += 1.0;
            deg[v] += 1.0;
        }
        for u in 0..n {
            dense[u][u] = 1.0 / deg[u];
        }
        for &(u, v) in &list {
            dense[u][v] = 1.0 / (deg[u] * deg[v]).sqrt();
            dense[v][u] = dense[u][v];
        }
        for u in 0..n {
            for v in 0..n {
                let got = a.get(u, v).unwrap_or(0.0);
                if (dense[u][v] == 0.0) != a.get(u, v).is_none() {
                    result = Err(format!("sparsity mismatch at ({u},{v})"));
                }
                worst_entry = worst_entry.max((got - dense[u][v]).abs());
            }
        }
        let cols = 1 + rng.below(6);
        let h = matrix(&mut rng, n, cols);
        let got = a.spmm(&h).unwrap();
        for i in 0..n {
            for j in 0..h.cols() {
                let want: f64 = (0..n).map(|t| dense[i][t] * h[(t, j)]).sum();
                worst_spmm = worst_spmm.max((got[(i, j)] - want).abs());
            }
        }
    }
    let result = result
        .and_then(|_| {
            check(worst_entry <= 1e-15, || {
                format!("entry error {worst_entry:e}")
            })
        })
        .and_then(|_| check(worst_spmm <= 1e-12, || format!("spmm error {worst_spmm:e}")))
        .map(|_| format!("100 graphs, entry error {worst_entry:.1e}, spmm error {worst_spmm:.1e}"));
    report(2, "normalization exactness", result);
}

struct Timed {
    report: ExperimentReport,
    elapsed: Duration,
}

fn binary() -> &'static Timed {
    static CELL: OnceLock<Timed> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let seeds: Vec<u64> = (1..=10).collect();
        let report = run_experiment(
            Experiment::Binary,
            &Method::ALL,
            &seeds,
            &ExperimentOptions::default(),
        );
        Timed {
            report,
            elapsed: start.elapsed(),
        }
    })
}

fn multi() -> &'static Timed {
    static CELL: OnceLock<Timed> = OnceLock::new();
    CELL.get_or_init(|| {
        let start = Instant::now();
        let seeds: Vec<u64> = (1..=5).collect();
        let report = run_experiment(
            Experiment::Multi,
            &Method::ALL,
            &seeds,
            &ExperimentOptions::default(),
        );
        Timed {
            report,
            elapsed: start.elapsed(),
        }
    })
}

fn summary(t: &Timed, m: Method) -> (Option<f64>, Option<f64>) {
    let s = t.report.summary_for(m).expect("method ran");
    (s.median_recall, s.median_precision)
}

fn all_ok(t: &Timed) -> Result<(), String> {
    match t.report.runs.iter().find(|r| r.error.is_some()) {
        Some(r) => Err(format!(
            "seed {} {} failed: {}",
            r.seed,
            r.method,
            r.error.as_ref().unwrap()
        )),
        None => Ok(()),
    }
}

#[test]
fn criterion_03_binary_experiment() {
    let t = binary();
    let (gcn, _) = summary(t, Method::Gcn);
    let (lp, _) = summary(t, Method::Lp);
    let (gcn, lp) = (gcn.unwrap_or(0.0), lp.unwrap_or(0.0));
    let result = all_ok(t)
        .and_then(|_| check(gcn >= 0.80, || format!("GCN median recall {gcn:.4} < 0.80")))
        .and_then(|_| {
            check(gcn >= lp, || {
                format!("GCN recall {gcn:.4} < LP recall {lp:.4}")
            })
        })
        .and_then(|_| {
            check(t.elapsed < Duration::from_secs(30), || {
                format!("took {:?}", t.elapsed)
            })
        })
        .map(|_| {
            format!(
                "GCN recall {gcn:.4}, LP recall {lp:.4}, 10 seeds in {:.2}s",
                t.elapsed.as_secs_f64()
            )
        });
    report(3, "binary experiment", result);
}

#[test]
fn criterion_04_multi_experiment() {
    let t = multi();
    let (recall, precision) = summary(t, Method::Gcn);
    let (recall, precision) = (recall.unwrap_or(0.0), precision.unwrap_or(0.0));
    let result = all_ok(t)
        .and_then(|_| {
            check(recall >= 0.85, || {
                format!("GCN median recall {recall:.4} < 0.85")
            })
        })
        .and_then(|_| {
            check(precision >= 0.75, || {
                format!("GCN median precision {precision:.4} < 0.75")
            })
        })
        .and_then(|_| {
            check(t.elapsed < Duration::from_secs(300), || {
                format!("took {:?}", t.elapsed)
            })
        })
        .map(|_| {
            format!(
                "GCN recall {recall:.4}, precision {precision:.4}, 5 seeds in {:.2}s",
                t.elapsed.as_secs_f64()
            )
        });
    report(4, "multi experiment", result);
}

#[test]
fn criterion_05_baseline_orderings() {
    let t = multi();
    let (gcn, _) = summary(t, Method::Gcn);
    let (feat, _) = summary(t, Method::Featclf);
    let (gcn, feat) = (gcn.unwrap_or(0.0), feat.unwrap_or(1.0));
    let communities: Vec<usize> = t
        .report
        .runs_for(Method::Lp)
        .filter_map(|r| r.metrics.as_ref())
        .map(|m| m.num_communities_found)
        .collect();
    let result = all_ok(t)
        .and_then(|_| {
            check(feat < gcn, || {
                format!("feature-only recall {feat:.4} >= GCN recall {gcn:.4}")
            })
        })
        .and_then(|_| {
            check(
                communities.len() == 5 && communities.iter().all(|&c| c > 4),
                || format!("LP communities {communities:?}"),
            )
        })
        .map(|_| {
            format!("feature-only recall {feat:.4} < GCN {gcn:.4}; LP communities {communities:?}")
        });
    report(5, "baseline orderings", result);
}

fn epoch_budget(t: &Timed) -> Result<String, String> {
    let mut gaps = Vec::new();
    let mut early = 0;
    let mut epochs = Vec::new();
    for run in t.report.runs_for(Method::Gcn) {
        let m = run
            .metrics
            .as_ref()
            .ok_or_else(|| format!("seed {} failed", run.seed))?;
        let history = m.loss_history.as_ref().ok_or("missing loss history")?;
        let last = *history.last().ok_or("empty loss history")?;
        let at_50 = history[history.len().min(50) - 1];
        gaps.push((at_50 - last).abs() / last.abs());
        epochs.push(history.len());
        if m.stopped_early == Some(true) && history.len() <= 200 {
            early += 1;
        }
    }
    let n = gaps.len();
    let gap = median(&gaps).unwrap_or(f64::INFINITY);
    check(2 * early > n, || {
        format!("only {early}/{n} seeds stopped early (epochs {epochs:?})")
    })?;
    check(gap <= 0.05, || format!("median relative gap {gap:.4}"))?;
    Ok(format!(
        "{early}/{n} early stops, epochs {epochs:?}, median gap {gap:.4}"
    ))
}

#[test]
fn criterion_06_epoch_budget() {
    let result = epoch_budget(binary())
        .and_then(|b| epoch_budget(multi()).map(|m| format!("binary: {b}; multi: {m}")));
    report(6, "epoch budget", result);
}

fn ball(n: usize, list: &[(usize, usize)], source: usize, hops: usize) -> Vec<bool> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in list {
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
    dist.iter().map(|&d| d <= hops).collect()
}

#[test]
fn criterion_07_equivariance_and_locality() {
    let mut rng = SplitMix64::new(107);
    let mut worst_perm: f64 = 0.0;
    for _ in 0..50 {
        let n = 2 + rng.below(30);
        let d = 1 + rng.below(5);
        let list = edges(&mut rng, n, 0.2);
        let g = Graph::build(n, &list).unwrap();
        let x = matrix(&mut rng, n, d);
        let m = model(&mut rng, d, 3);
        let mut perm: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut perm);
        let relabeled: Vec<(usize, usize)> =
            list.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        let gp = Graph::build(n, &relabeled).unwrap();
        let mut xp = DenseMatrix::zeros(n, d);
        for u in 0..n {
            xp.row_mut(perm[u]).copy_from_slice(x.row(u));
        }
        let (_, p) = m.predict(&g.normalize(), &x).unwrap();
        let (_, pp) = m.predict(&gp.normalize(), &xp).unwrap();
        for u in 0..n {
            for c in 0..3 {
                worst_perm = worst_perm.max((p[(u, c)] - pp[(perm[u], c)]).abs());
            }
        }
    }

    let mut worst_local: f64 = 0.0;
    let mut instances = 0;
    while instances < 50 {
        let n = 8 + rng.below(30);
        let d = 1 + rng.below(5);
        let list = edges(&mut rng, n, 0.08);
        let u = rng.below(n);
        let near = ball(n, &list, u, 3);
        if near.iter().all(|&b| b) {
            continue;
        }
        instances += 1;
        let g = Graph::build(n, &list).unwrap();
        let a = g.normalize();
        let x = matrix(&mut rng, n, d);
        let m = model(&mut rng, d, 3);
        let (_, before) = m.predict(&a, &x).unwrap();
        let mut x2 = x.clone();
        for v in (0..n).filter(|&v| !near[v]) {
            x2.row_mut(v)
                .iter_mut()
                .for_each(|f| *f += rng.uniform(-50.0, 50.0));
        }
        let (_, after) = m.predict(&a, &x2).unwrap();
        for c in 0..3 {
            worst_local = worst_local.max((before[(u, c)] - after[(u, c)]).abs());
        }
    }
    let result = check(worst_perm <= 1e-12, || {
        format!("equivariance error {worst_perm:e}")
    })
    .and_then(|_| {
        check(worst_local <= 1e-12, || {
            format!("locality error {worst_local:e}")
        })
    })
    .map(|_| format!("50+50 instances, errors {worst_perm:.1e} / {worst_local:.1e}"));
    report(7, "permutation equivariance and 3-hop locality", result);
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fraudgcn"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

fn determinism() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let p = |name: &str| root.join(name).to_str().unwrap().to_string();

    for dataset in ["binary", "multi"] {
        for rep in ["a", "b"] {
            run_cli(&[
                "generate",
                dataset,
                "--seed",
                "5",
                "--out",
                &p(&format!("{dataset}-{rep}")),
            ])?;
        }
        check(
            files(&root.join(format!("{dataset}-a"))) == files(&root.join(format!("{dataset}-b"))),
            || format!("{dataset} dataset files differ"),
        )?;
    }

    for dataset in ["binary", "multi"] {
        let data = p(&format!("{dataset}-a"));
        let loss_a = run_cli(&[
            "train",
            "--data",
            &data,
            "--model-out",
            &p(&format!("{dataset}-a.json")),
        ])?;
        let loss_b = run_cli(&[
            "train",
            "--data",
            &data,
            "--model-out",
            &p(&format!("{dataset}-b.json")),
        ])?;
        check(loss_a == loss_b, || format!("{dataset} loss logs differ"))?;
        let ckpt = |rep: &str| fs::read(root.join(format!("{dataset}-{rep}.json"))).unwrap();
        check(ckpt("a") == ckpt("b"), || {
            format!("{dataset} checkpoints differ")
        })?;
    }

    let mut reports = Vec::new();
    for rep in ["a", "b"] {
        let out = p(&format!("cmp-{rep}"));
        run_cli(&["compare", "binary", "--seeds", "1..3", "--out", &out])?;
        let text = fs::read(root.join(format!("cmp-{rep}")).join("report.json")).unwrap();
        let report: ExperimentReport = serde_json::from_slice(&text).map_err(|e| e.to_string())?;
        reports.push(report.without_timing());
    }
    check(reports[0] == reports[1], || {
        "binary compare metrics differ".into()
    })?;

    let options = ExperimentOptions::default();
    let a = run_experiment(Experiment::Multi, &Method::ALL, &[9], &options).without_timing();
    let b = run_experiment(Experiment::Multi, &Method::ALL, &[9], &options).without_timing();
    check(a == b, || "multi experiment metrics differ".into())?;
    Ok("datasets, loss logs, checkpoints and reports identical across reruns".into())
}

#[test]
fn criterion_08_determinism() {
    report(8, "determinism", determinism());
}

#[test]
fn criterion_09_smote_convexity() {
    let mut rng = SplitMix64::new(109);
    let mut checked = 0;
    let mut result = Ok(());
    while checked < 1000 {
        let rows = 2 + rng.below(12);
        let cols = 1 + rng.below(5);
        let k = 1 + rng.below(rows - 1);
        let samples = matrix(&mut rng, rows, cols);
        let (out, draws) =
            smote_with_draws(&samples, k, 1 + rng.below(40), rng.next_u64()).unwrap();
        for (r, draw) in draws.iter().enumerate() {
            let (a, b, p) = (
                samples.row(draw.base),
                samples.row(draw.neighbor),
                out.row(r),
            );
            let between = (0..cols).all(|j| p[j] >= a[j].min(b[j]) && p[j] <= a[j].max(b[j]));
            let collinear =
                (0..cols).all(|j| (p[j] - (a[j] + draw.lambda * (b[j] - a[j]))).abs() <= 1e-12);
            let lambda_ok = (0.0..=1.0).contains(&draw.lambda);
            if !(between && collinear && lambda_ok) {
                result = Err(format!(
                    "row {r} off its segment: {p:?} between {a:?} and {b:?}"
                ));
            }
            checked += 1;
        }
    }
    report(
        9,
        "SMOTE convexity",
        result.map(|_: ()| format!("{checked} synthetic rows on their segments")),
    );
}

#[test]
fn criterion_10_metrics_oracle() {
    let mut rng = SplitMix64::new(110);
    let mut result = Ok(());
    for trial in 0..100 {
        let n = 1 + rng.below(100);
        let k = 2 + rng.below(4);
        let truth: Vec<usize> = (0..n).map(|_| rng.below(k)).collect();
        let pred: Vec<usize> = (0..n).map(|_| rng.below(k)).collect();
        let fraud: Vec<usize> = (1..k).filter(|_| rng.next_f64() < 0.7).collect();
        let fraud = if fraud.is_empty() { vec![1] } else { fraud };
        let mut confusion = vec![vec![0usize; k]; k];
        for (&t, &p) in truth.iter().zip(&pred) {
            confusion[t][p] += 1;
        }
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for t in 0..k {
            for p in 0..k {
                let c = confusion[t][p];
                match (fraud.contains(&t), fraud.contains(&p), t == p) {
                    (true, _, true) => tp += c,
                    (true, true, false) => {
                        fp += c;
                        fn_ += c;
                    }
                    (true, false, false) => fn_ += c,
                    (false, true, _) => fp += c,
                    (false, false, _) => {}
                }
            }
        }
        let want = (
            (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64),
            (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64),
        );
        let got = precision_recall(&pred, &truth, &fraud).unwrap();
        if (got.precision, got.recall) != want {
            result = Err(format!("trial {trial}: got {got:?}, want {want:?}"));
        }
    }
    report(
        10,
        "metrics oracle",
        result.map(|_: ()| "100 random vectors match the confusion recount".into()),
    );
}
