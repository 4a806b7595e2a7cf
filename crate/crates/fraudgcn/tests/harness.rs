use fraudgcn::harness::{
    dataset_for, run_experiment, run_method, Experiment, ExperimentOptions, Method,
};
use fraudgcn_core::metrics::Averaging;
use fraudgcn_core::rng::SplitMix64;
use fraudgcn_core::Graph;

#[test]
fn feature_classifier_ignores_rewiring() {
    let options = ExperimentOptions::default();
    let dataset = dataset_for(Experiment::Binary, 4, &options).unwrap();
    let mut rewired = dataset.clone();
    let mut rng = SplitMix64::new(77);
    let n = dataset.num_nodes();
    let mut edges = Vec::new();
    while edges.len() < 60 {
        let (u, v) = (rng.below(n), rng.below(n));
        if u != v {
            edges.push((u.min(v), u.max(v)));
        }
    }
    rewired.graph = Graph::build(n, &edges).unwrap();
    assert_ne!(rewired.graph, dataset.graph);

    let mut a = run_method(Method::Featclf, &dataset, &options).unwrap();
    let mut b = run_method(Method::Featclf, &rewired, &options).unwrap();
    a.elapsed_seconds = 0.0;
    b.elapsed_seconds = 0.0;
    assert_eq!(a, b);
}

#[test]
fn one_gcn_entry_for_one_seed() {
    let report = run_experiment(
        Experiment::Binary,
        &[Method::Gcn],
        &[7],
        &ExperimentOptions::default(),
    );
    assert_eq!(report.runs.len(), 1);
    assert_eq!(report.summary.len(), 1);
    assert!(report.runs[0].metrics.as_ref().unwrap().elapsed_seconds > 0.0);
}

#[test]
fn timing_is_positive_and_json_round_trips() {
    let report = run_experiment(
        Experiment::Binary,
        &Method::ALL,
        &[1, 2],
        &ExperimentOptions::default(),
    );
    for run in &report.runs {
        assert!(
            run.metrics.as_ref().unwrap().elapsed_seconds > 0.0,
            "{} {}",
            run.seed,
            run.method
        );
    }
    let back: fraudgcn::harness::ExperimentReport =
        serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(back, report);
}

#[test]
fn macro_averaging_is_recorded() {
    let options = ExperimentOptions {
        averaging: Averaging::Macro,
        ..ExperimentOptions::default()
    };
    let report = run_experiment(Experiment::Binary, &[Method::Gcn], &[3], &options);
    assert_eq!(report.averaging, Averaging::Macro);
    assert!(report.to_json().contains("\"averaging\": \"macro\""));
}
