//! End-to-end experiment protocol.
//!
//! Per dataset and repetition: split 2/3 work and 1/3 test, split the work
//! part in halves, train every model on the first half, generate each
//! method's points on the second half, select per alpha over the points
//! pooled across models, and score the selection on the test third.

use std::collections::HashSet;
use std::fs::{self, File};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::{train, ClassifierSpec, TrainedModel};
use crate::cost::{CostContext, PerExampleContext, DEFAULT_BETA};
use crate::data::{load_csv, split_dataset, Dataset, LoadOptions, DEFAULT_MISSING_TOKEN};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::features::FeatureConfiguration;
use crate::jroc::{lower_hull, select_best, Hull};
use crate::lattice::{enumerate_full_lattice_with, evaluate_configuration, EvalPoint, DEFAULT_LATTICE_CEILING};
use crate::plot::render_plot;
use crate::search::{backward_search, random_search, Criterion, Method};
use crate::stats::{analyze, ResultMatrix, Significance, StatsReport};

pub const DEFAULT_ALPHA_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
pub const DEFAULT_REPETITIONS: usize = 4;

/// Where each repetition's operating context comes from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ContextMode {
    /// Unit test costs over `m`, off-diagonal `c/(c-1)`.
    #[default]
    Uniform,
    /// One random context per repetition, shared by every method.
    Variable {
        #[serde(default = "default_beta")]
        beta: f64,
    },
    /// A fixed context read from a JSON file.
    File { path: PathBuf },
}

fn default_beta() -> f64 {
    DEFAULT_BETA
}

fn default_label_column() -> String {
    "last".into()
}

fn default_missing_token() -> String {
    DEFAULT_MISSING_TOKEN.into()
}

fn default_alpha_grid() -> Vec<f64> {
    DEFAULT_ALPHA_GRID.to_vec()
}

fn default_repetitions() -> usize {
    DEFAULT_REPETITIONS
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_ceiling() -> usize {
    DEFAULT_LATTICE_CEILING
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub datasets: Vec<PathBuf>,
    #[serde(default = "default_label_column")]
    pub label_column: String,
    #[serde(default = "default_missing_token")]
    pub missing_token: String,
    pub models: Vec<ClassifierSpec>,
    #[serde(default)]
    pub context_mode: ContextMode,
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: Vec<f64>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ceiling")]
    pub lattice_ceiling: usize,
    /// Normalize file contexts to `sum T = 1`, `sum M = c^2`. Generated
    /// contexts are normalized by construction.
    #[serde(default = "default_true")]
    pub normalize: bool,
}

impl ExperimentConfig {
    /// A config with every optional field at its default.
    pub fn new(datasets: Vec<PathBuf>, models: Vec<ClassifierSpec>) -> Self {
        Self {
            datasets,
            label_column: default_label_column(),
            missing_token: default_missing_token(),
            models,
            context_mode: ContextMode::Uniform,
            alpha_grid: default_alpha_grid(),
            repetitions: default_repetitions(),
            methods: default_methods(),
            seed: 0,
            lattice_ceiling: default_ceiling(),
            normalize: true,
        }
    }

    /// Reads a JSON config; relative paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Self = serde_json::from_reader(f)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for d in &mut cfg.datasets {
            if d.is_relative() {
                *d = base.join(&*d);
            }
        }
        if let ContextMode::File { path: p } = &mut cfg.context_mode {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.datasets.is_empty() {
            return bad("no datasets".into());
        }
        if self.models.is_empty() {
            return bad("no models".into());
        }
        for m in &self.models {
            m.validate()?;
        }
        if self.methods.is_empty() {
            return bad("no methods".into());
        }
        let mut seen = HashSet::new();
        if let Some(m) = self.methods.iter().find(|m| !seen.insert(**m)) {
            return bad(format!("method {m} listed twice"));
        }
        if self.alpha_grid.is_empty() {
            return bad("empty alpha grid".into());
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidAlpha(*a));
        }
        if self.repetitions == 0 {
            return bad("repetitions must be >= 1".into());
        }
        if let ContextMode::Variable { beta } = self.context_mode {
            if !(beta >= 0.0 && beta.is_finite()) {
                return bad(format!("beta must be finite and non-negative, got {beta}"));
            }
        }
        Ok(())
    }

    fn load_options(&self) -> LoadOptions {
        LoadOptions {
            missing_token: self.missing_token.clone(),
            label_column: self.label_column.parse().unwrap_or_default(),
        }
    }
}

/// SplitMix64 finalizer over a running state; mixes the experiment seed
/// with dataset and repetition indices.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut z = base;
    for &p in parts {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(p);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

const SALT_SPLIT: u64 = 1;
const SALT_HALVES: u64 = 2;
const SALT_CONTEXT: u64 = 3;
const SALT_RND: u64 = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub path: PathBuf,
    pub n: usize,
    pub m: usize,
    pub c: usize,
}

/// One (dataset, method, alpha, repetition) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub dataset: String,
    pub repetition: usize,
    pub method: Method,
    pub alpha: f64,
    /// Configurations evaluated per model.
    pub budget: usize,
    pub model_id: String,
    pub cfg: FeatureConfiguration,
    pub validation_tc: f64,
    pub validation_mc: f64,
    pub validation_jc: f64,
    pub test_tc: f64,
    pub test_mc: f64,
    pub test_jc: f64,
}

/// Points one method produced for one repetition, pooled across models.
/// `alpha` is set for methods whose search depends on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodPoints {
    pub method: Method,
    pub alpha: Option<f64>,
    pub points: Vec<EvalPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub dataset: String,
    pub repetition: usize,
    pub context: CostContext,
    pub method_points: Vec<MethodPoints>,
    pub records: Vec<CellRecord>,
}

impl RepetitionResult {
    /// Pooled points `method` had available at `alpha`.
    pub fn points_for(&self, method: Method, alpha: f64) -> Option<&[EvalPoint]> {
        self.method_points
            .iter()
            .find(|mp| mp.method == method && mp.alpha.is_none_or(|a| a == alpha))
            .map(|mp| mp.points.as_slice())
    }
}

fn context_for(cfg: &ExperimentConfig, d: &Dataset, seed: u64) -> Result<CostContext> {
    match &cfg.context_mode {
        ContextMode::Uniform => CostContext::uniform(d.m(), d.c()),
        ContextMode::Variable { beta } => CostContext::random(d.m(), d.c(), *beta, seed),
        ContextMode::File { path } => {
            let ctx = CostContext::load(path)?;
            if ctx.m() != d.m() || ctx.c() != d.c() {
                return Err(Error::InvalidContext(format!(
                    "context file has m={}, c={}; dataset has m={}, c={}",
                    ctx.m(),
                    ctx.c(),
                    d.m(),
                    d.c()
                )));
            }
            if cfg.normalize {
                ctx.normalized()
            } else {
                Ok(ctx)
            }
        }
    }
}

/// Distinct model ids: the compact spec form, suffixed `#i` on repeats.
pub fn model_ids(models: &[ClassifierSpec]) -> Vec<String> {
    let labels: Vec<String> = models.iter().map(ClassifierSpec::label).collect();
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            if labels.iter().filter(|x| *x == l).count() > 1 {
                format!("{l}#{i}")
            } else {
                l.clone()
            }
        })
        .collect()
}

/// Trained models and the validation half of one repetition.
struct PointSource<'a> {
    models: &'a [(String, TrainedModel)],
    val: &'a Dataset,
    pec: &'a PerExampleContext,
    ceiling: usize,
    rnd_seed: u64,
    exec: Execution,
}

impl PointSource<'_> {
    /// Points `method` generates, pooled across models.
    fn pooled(&self, method: Method, alpha: Option<f64>) -> Result<Vec<EvalPoint>> {
        let (val, pec, exec) = (self.val, self.pec, self.exec);
        let mut pooled = Vec::new();
        for (id, model) in self.models {
            let pts = match method {
                Method::Full => enumerate_full_lattice_with(model, id, val, pec, self.ceiling, exec)?,
                Method::Bmc => backward_search(model, id, val, pec, Criterion::Mc, exec)?.visited,
                Method::Btc => backward_search(model, id, val, pec, Criterion::Tc, exec)?.visited,
                Method::Bjc => {
                    let a = alpha.expect("BJC runs per alpha");
                    backward_search(model, id, val, pec, Criterion::Jc(a), exec)?.visited
                }
                Method::Rnd => {
                    let budget = Method::Rnd.budget(val.m()) as usize;
                    random_search(model, id, val, pec, budget, self.rnd_seed, exec)?.visited
                }
            };
            pooled.extend(pts);
        }
        Ok(pooled)
    }
}

/// Runs one repetition of the protocol on one loaded dataset.
pub fn run_repetition(
    cfg: &ExperimentConfig,
    dataset_index: usize,
    name: &str,
    data: &Dataset,
    repetition: usize,
    exec: Execution,
) -> Result<RepetitionResult> {
    let rep_seed = derive_seed(cfg.seed, &[dataset_index as u64, repetition as u64]);
    let parts = split_dataset(data, &[2.0 / 3.0, 1.0 / 3.0], derive_seed(rep_seed, &[SALT_SPLIT]))?;
    let (work, test) = (&parts[0], &parts[1]);
    let halves = split_dataset(work, &[0.5, 0.5], derive_seed(rep_seed, &[SALT_HALVES]))?;
    let (fit, val) = (&halves[0], &halves[1]);

    let context = context_for(cfg, data, derive_seed(rep_seed, &[SALT_CONTEXT]))?;
    let pec = PerExampleContext::from(context.clone());
    let rnd_seed = derive_seed(rep_seed, &[SALT_RND]);

    let models: Vec<(String, TrainedModel)> = model_ids(&cfg.models)
        .into_iter()
        .zip(&cfg.models)
        .map(|(id, spec)| Ok((id, train(spec, fit)?)))
        .collect::<Result<_>>()?;

    let source = PointSource {
        models: &models,
        val,
        pec: &pec,
        ceiling: cfg.lattice_ceiling,
        rnd_seed,
        exec,
    };
    let mut method_points = Vec::new();
    let mut records = Vec::new();
    for &method in &cfg.methods {
        let per_alpha = method == Method::Bjc;
        let shared = if per_alpha {
            None
        } else {
            Some(source.pooled(method, None)?)
        };
        let budget = method.budget(data.m()) as usize;
        for &alpha in &cfg.alpha_grid {
            let own;
            let points = match &shared {
                Some(p) => p,
                None => {
                    own = source.pooled(method, Some(alpha))?;
                    &own
                }
            };
            let best = select_best(points, alpha)?;
            let model = &models
                .iter()
                .find(|(id, _)| *id == best.model_id)
                .expect("selected point comes from a trained model")
                .1;
            let on_test = evaluate_configuration(model, &best.model_id, test, &pec, best.cfg)?;
            records.push(CellRecord {
                dataset: name.to_string(),
                repetition,
                method,
                alpha,
                budget,
                model_id: best.model_id.clone(),
                cfg: best.cfg,
                validation_tc: best.mean_tc,
                validation_mc: best.mean_mc,
                validation_jc: best.jc(alpha),
                test_tc: on_test.mean_tc,
                test_mc: on_test.mean_mc,
                test_jc: on_test.jc(alpha),
            });
            if per_alpha {
                method_points.push(MethodPoints {
                    method,
                    alpha: Some(alpha),
                    points: points.clone(),
                });
            }
        }
        if let Some(points) = shared {
            method_points.push(MethodPoints {
                method,
                alpha: None,
                points,
            });
        }
    }
    Ok(RepetitionResult {
        dataset: name.to_string(),
        repetition,
        context,
        method_points,
        records,
    })
}

/// Mean and sample standard deviation of one group of cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub group: String,
    pub method: Method,
    pub count: usize,
    pub validation_mean: f64,
    pub test_mean: f64,
    pub test_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn summarize<'a>(group: String, method: Method, cells: impl Iterator<Item = &'a CellRecord>) -> SummaryRow {
    let cells: Vec<&CellRecord> = cells.collect();
    let val: Vec<f64> = cells.iter().map(|c| c.validation_jc).collect();
    let test: Vec<f64> = cells.iter().map(|c| c.test_jc).collect();
    let (test_mean, test_std) = mean_std(&test);
    SummaryRow {
        group,
        method,
        count: cells.len(),
        validation_mean: mean_std(&val).0,
        test_mean,
        test_std,
    }
}

/// Points drawn for one dataset's plot: repetition 0, one cloud per model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub dataset: String,
    pub method: Method,
    pub clouds: Vec<Vec<EvalPoint>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub datasets: Vec<DatasetInfo>,
    pub records: Vec<CellRecord>,
    pub by_dataset: Vec<SummaryRow>,
    pub by_alpha: Vec<SummaryRow>,
    /// Rows `dataset@alpha`, columns methods, mean test JC over repetitions.
    pub matrix: Option<ResultMatrix>,
    pub stats: Option<StatsReport>,
    pub plots: Vec<PlotData>,
}

impl ExperimentReport {
    /// Cells for one (dataset, method, alpha), in repetition order.
    pub fn cells(&self, dataset: &str, method: Method, alpha: f64) -> Vec<&CellRecord> {
        self.records
            .iter()
            .filter(|r| r.dataset == dataset && r.method == method && r.alpha == alpha)
            .collect()
    }
}

fn dataset_names(paths: &[PathBuf]) -> Vec<String> {
    let stems: Vec<String> = paths
        .iter()
        .map(|p| {
            p.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into())
        })
        .collect();
    stems
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if stems.iter().filter(|x| *x == s).count() > 1 {
                format!("{s}-{}", i + 1)
            } else {
                s.clone()
            }
        })
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(cfg, Execution::default())
}

pub fn run_experiment_with(cfg: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport> {
    cfg.validate()?;
    let opts = cfg.load_options();
    let names = dataset_names(&cfg.datasets);
    let data: Vec<Dataset> = cfg.datasets.iter().map(|p| load_csv(p, &opts)).collect::<Result<_>>()?;
    if cfg.methods.contains(&Method::Full) {
        let ceiling = cfg.lattice_ceiling.min(crate::features::MAX_WIDTH);
        if let Some(d) = data.iter().find(|d| d.m() > ceiling) {
            return Err(Error::LatticeTooLarge { m: d.m(), ceiling });
        }
    }
    let units: Vec<(usize, usize)> = (0..data.len())
        .flat_map(|d| (0..cfg.repetitions).map(move |r| (d, r)))
        .collect();
    let reps = exec.try_map(&units, |&(d, r)| run_repetition(cfg, d, &names[d], &data[d], r, exec))?;

    let records: Vec<CellRecord> = reps.iter().flat_map(|r| r.records.iter().cloned()).collect();
    let mut by_dataset = Vec::new();
    for name in &names {
        for &m in &cfg.methods {
            by_dataset.push(summarize(
                name.clone(),
                m,
                records.iter().filter(|r| &r.dataset == name && r.method == m),
            ));
        }
    }
    let mut by_alpha = Vec::new();
    for &a in &cfg.alpha_grid {
        for &m in &cfg.methods {
            by_alpha.push(summarize(
                a.to_string(),
                m,
                records.iter().filter(|r| r.alpha == a && r.method == m),
            ));
        }
    }

    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for name in &names {
        for &a in &cfg.alpha_grid {
            labels.push(format!("{name}@{a}"));
            rows.push(
                cfg.methods
                    .iter()
                    .map(|&m| {
                        let v: Vec<f64> = records
                            .iter()
                            .filter(|r| &r.dataset == name && r.alpha == a && r.method == m)
                            .map(|r| r.test_jc)
                            .collect();
                        mean_std(&v).0
                    })
                    .collect(),
            );
        }
    }
    let method_names = cfg.methods.iter().map(|m| m.name().to_string()).collect();
    let matrix = ResultMatrix::new(labels, method_names, rows).ok();
    let stats = matrix.as_ref().and_then(|m| analyze(m, Significance::P05).ok());

    let plot_method = if cfg.methods.contains(&Method::Full) {
        Method::Full
    } else {
        cfg.methods[0]
    };
    let plots = reps
        .iter()
        .filter(|r| r.repetition == 0)
        .map(|r| {
            let points = r
                .method_points
                .iter()
                .find(|mp| mp.method == plot_method)
                .map(|mp| mp.points.as_slice())
                .unwrap_or_default();
            PlotData {
                dataset: r.dataset.clone(),
                method: plot_method,
                clouds: crate::jroc::group_by_model(points),
            }
        })
        .collect();

    let datasets = names
        .iter()
        .zip(&cfg.datasets)
        .zip(&data)
        .map(|((name, path), d)| DatasetInfo {
            name: name.clone(),
            path: path.clone(),
            n: d.n(),
            m: d.m(),
            c: d.c(),
        })
        .collect();
    Ok(ExperimentReport {
        config: cfg.clone(),
        datasets,
        records,
        by_dataset,
        by_alpha,
        matrix,
        stats,
        plots,
    })
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(f);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct RecordRow<'a> {
    dataset: &'a str,
    repetition: usize,
    method: Method,
    alpha: f64,
    budget: usize,
    model_id: &'a str,
    cfg: String,
    validation_tc: f64,
    validation_mc: f64,
    validation_jc: f64,
    test_tc: f64,
    test_mc: f64,
    test_jc: f64,
}

/// Writes `records.csv`, `summary_by_dataset.csv`, `summary_by_alpha.csv`,
/// `matrix.csv`, `stats.json`, `report.json` and one SVG per dataset under
/// `plots/`. Returns the paths written.
pub fn emit_report(r: &ExperimentReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let plots_dir = dir.join("plots");
    fs::create_dir_all(&plots_dir).map_err(|e| Error::io(&plots_dir, e))?;
    let mut written = Vec::new();

    let rows: Vec<RecordRow> = r
        .records
        .iter()
        .map(|c| RecordRow {
            dataset: &c.dataset,
            repetition: c.repetition,
            method: c.method,
            alpha: c.alpha,
            budget: c.budget,
            model_id: &c.model_id,
            cfg: c.cfg.to_bit_string(),
            validation_tc: c.validation_tc,
            validation_mc: c.validation_mc,
            validation_jc: c.validation_jc,
            test_tc: c.test_tc,
            test_mc: c.test_mc,
            test_jc: c.test_jc,
        })
        .collect();
    let p = dir.join("records.csv");
    write_csv(&p, &rows)?;
    written.push(p);

    for (file, rows) in [
        ("summary_by_dataset.csv", &r.by_dataset),
        ("summary_by_alpha.csv", &r.by_alpha),
    ] {
        let p = dir.join(file);
        write_csv(&p, rows)?;
        written.push(p);
    }
    if let Some(m) = &r.matrix {
        let p = dir.join("matrix.csv");
        m.save(&p)?;
        written.push(p);
    }
    if let Some(s) = &r.stats {
        let p = dir.join("stats.json");
        s.save(&p)?;
        written.push(p);
    }
    let p = dir.join("report.json");
    let f = File::create(&p).map_err(|e| Error::io(&p, e))?;
    serde_json::to_writer_pretty(f, r)?;
    written.push(p);

    for plot in &r.plots {
        let clouds: Vec<Vec<EvalPoint>> = plot.clouds.iter().filter(|c| !c.is_empty()).cloned().collect();
        if clouds.is_empty() {
            continue;
        }
        let hulls: Vec<Hull> = clouds.iter().map(|c| lower_hull(c)).collect::<Result<_>>()?;
        let p = plots_dir.join(format!("{}.svg", plot.dataset));
        render_plot(&clouds, &hulls, &r.config.alpha_grid, &p)?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_validation() {
        let json = r#"{"datasets": ["a.csv"], "models": [{"kind": "majority"}]}"#;
        let cfg: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.alpha_grid, DEFAULT_ALPHA_GRID);
        assert_eq!(cfg.repetitions, 4);
        assert_eq!(cfg.methods.len(), 5);
        assert_eq!(cfg.context_mode, ContextMode::Uniform);
        assert!(cfg.normalize);
        cfg.validate().unwrap();

        let mut bad = cfg.clone();
        bad.methods.clear();
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        let mut bad = cfg.clone();
        bad.alpha_grid = vec![0.5, 1.5];
        assert!(matches!(bad.validate(), Err(Error::InvalidAlpha(_))));
        let mut bad = cfg.clone();
        bad.repetitions = 0;
        assert!(bad.validate().is_err());
        let mut bad = cfg.clone();
        bad.methods = vec![Method::Bmc, Method::Bmc];
        assert!(bad.validate().is_err());
        let mut bad = cfg;
        bad.models.clear();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn context_mode_json_forms() {
        let v: ContextMode = serde_json::from_str(r#"{"mode": "variable"}"#).unwrap();
        assert_eq!(v, ContextMode::Variable { beta: DEFAULT_BETA });
        let v: ContextMode = serde_json::from_str(r#"{"mode": "variable", "beta": 0}"#).unwrap();
        assert_eq!(v, ContextMode::Variable { beta: 0.0 });
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"datasets": [], "models": [], "bogus": 1}"#).is_err());
    }

    #[test]
    fn seeds_differ_by_part() {
        let a = derive_seed(7, &[0, 0]);
        assert_ne!(a, derive_seed(7, &[0, 1]));
        assert_ne!(a, derive_seed(7, &[1, 0]));
        assert_ne!(a, derive_seed(8, &[0, 0]));
        assert_eq!(a, derive_seed(7, &[0, 0]));
    }

    #[test]
    fn repeated_specs_get_distinct_ids() {
        let ids = model_ids(&[
            ClassifierSpec::Majority,
            ClassifierSpec::Knn { k: 3 },
            ClassifierSpec::Majority,
        ]);
        assert_eq!(ids, vec!["majority#0", "knn:3", "majority#2"]);
    }

    #[test]
    fn mean_and_sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - 1.290_994_448_735_805_6).abs() < 1e-12);
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
    }
}
