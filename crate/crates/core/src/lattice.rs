//! Evaluating a trained model under feature configurations, one at a time
//! or over the whole `2^m` lattice.

use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifiers::TrainedModel;
use crate::cost::{joint_cost, PerExampleContext};
use crate::data::{mask_values_into, Dataset};
use crate::error::{Error, Result};
use crate::exec::Execution;
pub use crate::features::FeatureConfiguration;

pub const DEFAULT_LATTICE_CEILING: usize = 20;

/// One (model, configuration) placed in TC/MC space. Costs are per-example
/// means over the evaluation set. JC is derived on demand for any alpha.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub model_id: String,
    pub cfg: FeatureConfiguration,
    pub mean_tc: f64,
    pub mean_mc: f64,
}

impl EvalPoint {
    pub fn new(model_id: impl Into<String>, cfg: FeatureConfiguration, mean_tc: f64, mean_mc: f64) -> Self {
        Self {
            model_id: model_id.into(),
            cfg,
            mean_tc,
            mean_mc,
        }
    }

    #[inline]
    pub fn jc(&self, alpha: f64) -> f64 {
        joint_cost(alpha, self.mean_mc, self.mean_tc)
    }
}

/// A model bound to an evaluation set and its cost contexts, checked once.
#[derive(Clone, Copy)]
pub struct Evaluator<'a> {
    model: &'a TrainedModel,
    model_id: &'a str,
    data: &'a Dataset,
    contexts: &'a PerExampleContext,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        model: &'a TrainedModel,
        model_id: &'a str,
        data: &'a Dataset,
        contexts: &'a PerExampleContext,
    ) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if !data.is_labeled() {
            return Err(Error::Unlabeled);
        }
        if data.m() != model.width() {
            return Err(Error::WidthMismatch {
                expected: model.width(),
                found: data.m(),
            });
        }
        if let Some((m, c)) = contexts.shape() {
            if m != data.m() || c != data.c() {
                return Err(Error::InvalidContext(format!(
                    "context shape (m={m}, c={c}) does not match data (m={}, c={})",
                    data.m(),
                    data.c()
                )));
            }
        }
        if let Some(len) = contexts.instance_count() {
            if len != data.n() {
                return Err(Error::InvalidContext(format!(
                    "{len} per-example contexts for {} instances",
                    data.n()
                )));
            }
        }
        Ok(Self {
            model,
            model_id,
            data,
            contexts,
        })
    }

    pub fn width(&self) -> usize {
        self.data.m()
    }

    pub fn model_id(&self) -> &str {
        self.model_id
    }

    pub fn evaluate(&self, cfg: FeatureConfiguration) -> Result<EvalPoint> {
        if cfg.width() != self.data.m() {
            return Err(Error::WidthMismatch {
                expected: self.data.m(),
                found: cfg.width(),
            });
        }
        let mut buf = Vec::with_capacity(self.data.m());
        let mut mc_sum = 0.0;
        let mut tc_sum = 0.0;
        for (i, x) in self.data.instances().iter().enumerate() {
            let ctx = self.contexts.get(i);
            mask_values_into(x.values(), cfg, &mut buf)?;
            let predicted = self.model.predict_values(&buf);
            let actual = x.label().expect("checked labeled");
            mc_sum += ctx.mc_matrix()[predicted][actual];
            tc_sum += ctx.test_cost_unchecked(x, cfg);
        }
        let n = self.data.n() as f64;
        Ok(EvalPoint::new(self.model_id, cfg, tc_sum / n, mc_sum / n))
    }

    /// Evaluates many configurations, output in input order.
    pub fn evaluate_all(&self, cfgs: &[FeatureConfiguration], exec: Execution) -> Result<Vec<EvalPoint>> {
        exec.try_map(cfgs, |&cfg| self.evaluate(cfg))
    }
}

pub fn evaluate_configuration(
    model: &TrainedModel,
    model_id: &str,
    d: &Dataset,
    pec: &PerExampleContext,
    cfg: FeatureConfiguration,
) -> Result<EvalPoint> {
    Evaluator::new(model, model_id, d, pec)?.evaluate(cfg)
}

/// All `2^m` configurations in ascending mask order.
pub fn enumerate_full_lattice(
    model: &TrainedModel,
    model_id: &str,
    d: &Dataset,
    pec: &PerExampleContext,
    ceiling: usize,
) -> Result<Vec<EvalPoint>> {
    enumerate_full_lattice_with(model, model_id, d, pec, ceiling, Execution::default())
}

pub fn enumerate_full_lattice_with(
    model: &TrainedModel,
    model_id: &str,
    d: &Dataset,
    pec: &PerExampleContext,
    ceiling: usize,
    exec: Execution,
) -> Result<Vec<EvalPoint>> {
    let ceiling = ceiling.min(crate::features::MAX_WIDTH);
    if d.m() > ceiling {
        return Err(Error::LatticeTooLarge { m: d.m(), ceiling });
    }
    let eval = Evaluator::new(model, model_id, d, pec)?;
    let cfgs: Vec<FeatureConfiguration> = FeatureConfiguration::lattice(d.m()).collect();
    eval.evaluate_all(&cfgs, exec)
}

#[derive(Serialize, Deserialize)]
struct PointRecord {
    model_id: String,
    cfg: String,
    popcount: usize,
    mean_tc: f64,
    mean_mc: f64,
}

/// Point-cloud CSV: `model_id,cfg,popcount,mean_tc,mean_mc`, configuration
/// as a bit string with attribute 1 leftmost.
pub fn write_points_csv<W: std::io::Write>(w: W, points: &[EvalPoint]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for p in points {
        wtr.serialize(PointRecord {
            model_id: p.model_id.clone(),
            cfg: p.cfg.to_bit_string(),
            popcount: p.cfg.popcount(),
            mean_tc: p.mean_tc,
            mean_mc: p.mean_mc,
        })?;
    }
    wtr.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn read_points_csv<R: std::io::Read>(r: R) -> Result<Vec<EvalPoint>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut points = Vec::new();
    for rec in rdr.deserialize::<PointRecord>() {
        let rec = rec?;
        let cfg: FeatureConfiguration = rec.cfg.parse()?;
        if cfg.popcount() != rec.popcount {
            return Err(Error::Schema(format!(
                "popcount {} disagrees with configuration {}",
                rec.popcount, rec.cfg
            )));
        }
        points.push(EvalPoint::new(rec.model_id, cfg, rec.mean_tc, rec.mean_mc));
    }
    Ok(points)
}

pub fn save_points(path: impl AsRef<Path>, points: &[EvalPoint]) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_points_csv(f, points)
}

pub fn load_points(path: impl AsRef<Path>) -> Result<Vec<EvalPoint>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_points_csv(f)
}
