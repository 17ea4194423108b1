use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use jroc::classifiers::{train, ClassifierSpec, TrainedModel};
use jroc::cost::{CostContext, PerExampleContext};
use jroc::data::{load_csv, split_dataset, Dataset, LoadOptions};
use jroc::exec::Execution;
use jroc::harness::{emit_report, model_ids, run_experiment_with, ExperimentConfig};
use jroc::jroc::{group_by_model, lower_hull, select_best, HullReport};
use jroc::lattice::{enumerate_full_lattice_with, load_points, write_points_csv, EvalPoint};
use jroc::plot::render_plot;
use jroc::search::{backward_search, random_search, Criterion, Method, SearchTrace};
use jroc::stats::{analyze, ResultMatrix, Significance};

#[derive(Parser)]
#[command(
    name = "jroc",
    version,
    about = "Select models and feature subsets under test and misclassification costs"
)]
struct Cli {
    /// Run sequentially even when built with parallel support.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every feature configuration and write the point cloud as CSV.
    Lattice {
        #[command(flatten)]
        setup: Setup,
        /// Refuse lattices over more attributes than this.
        #[arg(long, default_value_t = jroc::lattice::DEFAULT_LATTICE_CEILING)]
        ceiling: usize,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run a backward (bmc, btc, bjc) or random (rnd) search.
    Search {
        #[arg(long, value_parser = parse_search_method)]
        method: Method,
        /// Weight of misclassification cost for bjc.
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[command(flatten)]
        setup: Setup,
        /// Points CSV of every visited configuration.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// JSON trace per model (visited points and greedy path).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Lower-left convex hulls, breakpoints and dominance regions as JSON.
    Hull {
        /// Points CSV as written by `lattice` or `search`.
        #[arg(long)]
        points: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Best (model, configuration) for one alpha.
    Select {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        alpha: f64,
    },
    /// Render a point cloud with hulls and isometrics to SVG.
    Plot {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Draw an isometric through the best point for each alpha.
        #[arg(long = "alpha")]
        alphas: Vec<f64>,
    },
    /// Run the full protocol from a JSON config and write the report.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Report directory, created if missing.
        #[arg(long, short)]
        out: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Average ranks, Friedman test and Nemenyi CD for a result matrix.
    Stats {
        /// CSV with a `row` column followed by one column per method.
        #[arg(long)]
        matrix: PathBuf,
        /// 0.05 or 0.10.
        #[arg(long, default_value = "0.05")]
        significance: Significance,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

/// Data, models and context shared by `lattice` and `search`.
#[derive(Args)]
struct Setup {
    /// CSV dataset with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Classifier in compact form (`tree`, `knn:3`, `nb`, `majority`,
    /// `bagging:10:1:tree`); repeatable.
    #[arg(long = "model", required = true)]
    models: Vec<ClassifierSpec>,
    /// Fraction of the data used for training; the rest is evaluated.
    #[arg(long, default_value_t = 0.5)]
    train_fraction: f64,
    /// Seeds the split, random contexts and random search.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cost context JSON (alpha, test_costs, mc_matrix).
    #[arg(long, conflicts_with = "random_context")]
    context: Option<PathBuf>,
    /// Draw a random context with this beta instead of the uniform one.
    #[arg(long, value_name = "BETA", num_args = 0..=1, default_missing_value = "10")]
    random_context: Option<f64>,
    /// Use a --context file as is instead of scaling it to sum T = 1 and
    /// sum M = c^2.
    #[arg(long)]
    no_normalize: bool,
    /// Class column: `last`, a 0-based index, or a header name.
    #[arg(long, default_value = "last")]
    label_column: String,
    /// Cell value read as a missing attribute.
    #[arg(long, default_value = "?")]
    missing_token: String,
}

fn parse_search_method(s: &str) -> Result<Method, String> {
    match s.parse::<Method>() {
        Ok(Method::Full) => Err("use the lattice subcommand for the full lattice".into()),
        Ok(m) => Ok(m),
        Err(e) => Err(e.to_string()),
    }
}

struct Prepared {
    eval: Dataset,
    pec: PerExampleContext,
    models: Vec<(String, TrainedModel)>,
}

impl Setup {
    fn prepare(&self) -> Result<Prepared> {
        let opts = LoadOptions {
            missing_token: self.missing_token.clone(),
            label_column: self.label_column.parse().unwrap_or_default(),
        };
        let d = load_csv(&self.data, &opts)?;
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(jroc::Error::InvalidFractions(vec![self.train_fraction]).into());
        }
        let parts = split_dataset(&d, &[self.train_fraction, 1.0 - self.train_fraction], self.seed)?;
        let ctx = match (&self.context, self.random_context) {
            (Some(p), _) => {
                let ctx = CostContext::load(p)?;
                if self.no_normalize {
                    ctx
                } else {
                    ctx.normalized()?
                }
            }
            (None, Some(beta)) => CostContext::random(d.m(), d.c(), beta, self.seed)?,
            (None, None) => CostContext::uniform(d.m(), d.c())?,
        };
        let models = model_ids(&self.models)
            .into_iter()
            .zip(&self.models)
            .map(|(id, spec)| Ok((id, train(spec, &parts[0])?)))
            .collect::<jroc::Result<_>>()?;
        Ok(Prepared {
            eval: parts[1].clone(),
            pec: ctx.into(),
            models,
        })
    }
}

#[derive(serde::Serialize)]
struct Selection<'a> {
    alpha: f64,
    model_id: &'a str,
    cfg: String,
    mean_tc: f64,
    mean_mc: f64,
    jc: f64,
}

fn write_points(points: &[EvalPoint], out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            write_points_csv(f, points)?;
        }
        None => write_points_csv(io::stdout().lock(), points)?,
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            serde_json::to_writer_pretty(f, value)?;
        }
        None => {
            let mut stdout = io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, value)?;
            writeln!(stdout)?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match cli.command {
        Command::Lattice { setup, ceiling, out } => {
            let p = setup.prepare()?;
            let mut points = Vec::new();
            for (id, model) in &p.models {
                points.extend(enumerate_full_lattice_with(model, id, &p.eval, &p.pec, ceiling, exec)?);
            }
            write_points(&points, out.as_deref())
        }
        Command::Search {
            method,
            alpha,
            setup,
            out,
            trace,
        } => {
            let p = setup.prepare()?;
            let mut traces: Vec<SearchTrace> = Vec::new();
            for (id, model) in &p.models {
                let t = match method {
                    Method::Bmc => backward_search(model, id, &p.eval, &p.pec, Criterion::Mc, exec)?,
                    Method::Btc => backward_search(model, id, &p.eval, &p.pec, Criterion::Tc, exec)?,
                    Method::Bjc => backward_search(model, id, &p.eval, &p.pec, Criterion::Jc(alpha), exec)?,
                    Method::Rnd => {
                        let budget = Method::Rnd.budget(p.eval.m()) as usize;
                        random_search(model, id, &p.eval, &p.pec, budget, setup.seed, exec)?
                    }
                    Method::Full => unreachable!("rejected by the argument parser"),
                };
                traces.push(t);
            }
            if let Some(path) = trace {
                let f = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
                serde_json::to_writer_pretty(f, &traces)?;
            }
            let points: Vec<EvalPoint> = traces.into_iter().flat_map(|t| t.visited).collect();
            write_points(&points, out.as_deref())
        }
        Command::Hull { points, out } => {
            let pts = load_points(&points)?;
            let report = HullReport::build(&group_by_model(&pts))?;
            write_json(&report, out.as_deref())
        }
        Command::Select { points, alpha } => {
            let pts = load_points(&points)?;
            let best = select_best(&pts, alpha)?;
            let json = Selection {
                alpha,
                model_id: &best.model_id,
                cfg: best.cfg.to_bit_string(),
                mean_tc: best.mean_tc,
                mean_mc: best.mean_mc,
                jc: best.jc(alpha),
            };
            write_json(&json, None)
        }
        Command::Plot { points, out, alphas } => {
            let pts = load_points(&points)?;
            if pts.is_empty() {
                return Err(jroc::Error::EmptyPoints.into());
            }
            let clouds = group_by_model(&pts);
            let hulls = clouds.iter().map(|c| lower_hull(c)).collect::<jroc::Result<Vec<_>>>()?;
            render_plot(&clouds, &hulls, &alphas, &out)?;
            Ok(())
        }
        Command::Experiment { config, out, seed } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let report = run_experiment_with(&cfg, exec)?;
            let written = emit_report(&report, &out)?;
            for p in written {
                println!("{}", p.display());
            }
            Ok(())
        }
        Command::Stats {
            matrix,
            significance,
            out,
        } => {
            let m = ResultMatrix::load(&matrix)?;
            let report = analyze(&m, significance)?;
            write_json(&report, out.as_deref())
        }
    }
}

/// 1 for bad input (arguments, config, data), 2 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<jroc::Error>() {
        Some(e) if e.is_validation() => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
