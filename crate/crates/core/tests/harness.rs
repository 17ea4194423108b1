use std::path::PathBuf;

use jroc::classifiers::ClassifierSpec;
use jroc::data::{load_csv, LoadOptions};
use jroc::error::Error;
use jroc::exec::Execution;
use jroc::harness::{emit_report, run_experiment, run_experiment_with, run_repetition, ContextMode, ExperimentConfig};
use jroc::search::Method;
use jroc::stats::ResultMatrix;

fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(
        vec![repo_path("data/iris.csv")],
        vec![
            ClassifierSpec::DecisionTree {
                max_depth: 5,
                min_leaf: 2,
            },
            ClassifierSpec::Knn { k: 3 },
        ],
    );
    cfg.repetitions = 2;
    cfg.alpha_grid = vec![0.1, 0.5, 0.9];
    cfg.seed = 11;
    cfg
}

#[test]
fn cell_count_and_budgets() {
    let cfg = small_config();
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.records.len(), 5 * 3 * 2);
    for c in &r.records {
        let expected = match c.method {
            Method::Full => 16,
            _ => 11,
        };
        assert_eq!(c.budget, expected, "{:?}", c.method);
    }
    assert_eq!(r.by_dataset.len(), 5);
    assert_eq!(r.by_alpha.len(), 3 * 5);
    assert!(r.by_dataset.iter().all(|s| s.count == 6));
    let m = r.matrix.as_ref().unwrap();
    assert_eq!((m.n(), m.k()), (3, 5));
    assert!(r.stats.is_some());
}

#[test]
fn uniform_runs_are_bit_identical_and_execution_independent() {
    let cfg = small_config();
    let a = run_experiment_with(&cfg, Execution::Sequential).unwrap();
    let b = run_experiment_with(&cfg, Execution::Sequential).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = run_experiment_with(&cfg, Execution::default()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&c).unwrap());
}

#[test]
fn selections_come_from_the_method_points() {
    let mut cfg = small_config();
    cfg.context_mode = ContextMode::Variable { beta: 10.0 };
    let d = load_csv(&cfg.datasets[0], &LoadOptions::default()).unwrap();
    let rep = run_repetition(&cfg, 0, "iris", &d, 0, Execution::default()).unwrap();
    assert!(rep.context.is_normalized());
    for cell in &rep.records {
        let pts = rep.points_for(cell.method, cell.alpha).unwrap();
        assert!(
            pts.iter().any(|p| p.model_id == cell.model_id && p.cfg == cell.cfg),
            "{:?} at {} selected an unvisited point",
            cell.method,
            cell.alpha
        );
        // Per-model budget times models.
        assert_eq!(pts.len(), cell.budget * cfg.models.len());
    }
}

#[test]
fn full_above_ceiling_is_rejected_before_running() {
    let mut cfg = small_config();
    cfg.lattice_ceiling = 3;
    assert!(matches!(
        run_experiment(&cfg),
        Err(Error::LatticeTooLarge { m: 4, ceiling: 3 })
    ));
    cfg.methods = vec![Method::Bmc, Method::Rnd];
    assert!(run_experiment(&cfg).is_ok());
}

#[test]
fn invalid_configs_fail_validation() {
    let mut cfg = small_config();
    cfg.methods.clear();
    assert!(matches!(run_experiment(&cfg), Err(Error::InvalidConfig(_))));
    let mut cfg = small_config();
    cfg.datasets = vec![repo_path("data/does-not-exist.csv")];
    assert!(matches!(run_experiment(&cfg), Err(Error::Io { .. })));
}

#[test]
fn emitted_report_files() {
    let mut cfg = small_config();
    cfg.datasets.push(repo_path("data/diabetes.csv"));
    cfg.repetitions = 1;
    let r = run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = emit_report(&r, dir.path()).unwrap();
    for f in [
        "records.csv",
        "summary_by_dataset.csv",
        "summary_by_alpha.csv",
        "matrix.csv",
        "stats.json",
        "report.json",
        "plots/iris.svg",
        "plots/diabetes.svg",
    ] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    assert_eq!(written.len(), 8);
    let m = ResultMatrix::load(dir.path().join("matrix.csv")).unwrap();
    assert_eq!(&m, r.matrix.as_ref().unwrap());
    let records = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 1 + r.records.len());
    let svg = std::fs::read_to_string(dir.path().join("plots/iris.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="isometric""#).count(), 3);
}

#[test]
fn config_file_paths_resolve_relative_to_the_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(repo_path("data/iris.csv"), dir.path().join("iris.csv")).unwrap();
    let p = dir.path().join("exp.json");
    std::fs::write(
        &p,
        r#"{"datasets": ["iris.csv"], "models": [{"kind": "naive_bayes"}], "repetitions": 1,
            "methods": ["BMC", "RND"], "context_mode": {"mode": "variable", "beta": 5}}"#,
    )
    .unwrap();
    let cfg = ExperimentConfig::load(&p).unwrap();
    assert_eq!(cfg.datasets[0], dir.path().join("iris.csv"));
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.records.len(), 2 * 5);
}
