//! Geometry of the TC/MC plane: lower-left convex hulls, best-point
//! selection along isometrics, and the alpha intervals each point wins.
//!
//! Two points share a joint cost at `alpha` exactly when the line through
//! them has slope `-(1 - alpha) / alpha`. Sliding that line up from the
//! origin, the first point it touches is the best one for `alpha`; the
//! points that can be touched first for some `alpha` are the vertices of
//! the lower-left convex chain.

use std::cmp::Ordering;
use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::EvalPoint;

/// Slope of an isometric in the (TC, MC) plane, `None` when vertical
/// (`alpha = 0`).
pub fn isometric_slope(alpha: f64) -> Option<f64> {
    (alpha > 0.0).then(|| -(1.0 - alpha) / alpha)
}

/// Vertices of the lower-left convex chain: TC strictly increasing, MC
/// strictly decreasing, slopes strictly increasing and negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hull {
    pub vertices: Vec<EvalPoint>,
}

impl Hull {
    /// Alpha values where the optimal vertex changes, ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.vertices
            .windows(2)
            .map(|w| {
                let dtc = w[1].mean_tc - w[0].mean_tc;
                let dmc = w[0].mean_mc - w[1].mean_mc;
                dtc / (dtc + dmc)
            })
            .collect()
    }
}

fn cmp_location(a: &EvalPoint, b: &EvalPoint) -> Ordering {
    a.mean_tc
        .total_cmp(&b.mean_tc)
        .then(a.mean_mc.total_cmp(&b.mean_mc))
        .then_with(|| a.model_id.cmp(&b.model_id))
        .then(a.cfg.bits().cmp(&b.cfg.bits()))
}

/// Cross product of `o->a` and `o->b` in (TC, MC) coordinates.
fn cross(o: &EvalPoint, a: &EvalPoint, b: &EvalPoint) -> f64 {
    (a.mean_tc - o.mean_tc) * (b.mean_mc - o.mean_mc) - (a.mean_mc - o.mean_mc) * (b.mean_tc - o.mean_tc)
}

/// Monotone-chain construction restricted to the lower-left boundary.
///
/// Points are sorted by TC; among equal TC only the lowest MC survives
/// (identical points go to the smaller model id). The Pareto front is then
/// reduced to a strictly convex chain, dropping collinear middle points.
pub fn lower_hull(points: &[EvalPoint]) -> Result<Hull> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    let mut sorted: Vec<&EvalPoint> = points.iter().collect();
    sorted.sort_by(|a, b| cmp_location(a, b));

    let mut front: Vec<&EvalPoint> = Vec::new();
    for p in sorted {
        match front.last() {
            Some(last) if p.mean_mc >= last.mean_mc => {}
            _ => front.push(p),
        }
    }

    let mut chain: Vec<&EvalPoint> = Vec::with_capacity(front.len());
    for p in front {
        while chain.len() >= 2 && cross(chain[chain.len() - 2], chain[chain.len() - 1], p) <= 0.0 {
            chain.pop();
        }
        chain.push(p);
    }
    Ok(Hull {
        vertices: chain.into_iter().cloned().collect(),
    })
}

/// Ordering used for selection at `alpha`: lower JC, then lower TC, then
/// lower mask, then smaller model id. At `alpha = 0` the order is TC, then
/// MC.
fn cmp_at(alpha: f64, a: &EvalPoint, b: &EvalPoint) -> Ordering {
    let primary = if alpha == 0.0 {
        a.mean_tc.total_cmp(&b.mean_tc).then(a.mean_mc.total_cmp(&b.mean_mc))
    } else {
        a.jc(alpha)
            .total_cmp(&b.jc(alpha))
            .then(a.mean_tc.total_cmp(&b.mean_tc))
    };
    primary
        .then(a.cfg.bits().cmp(&b.cfg.bits()))
        .then_with(|| a.model_id.cmp(&b.model_id))
}

/// The point minimizing `alpha * MC + (1 - alpha) * TC`.
pub fn select_best(points: &[EvalPoint], alpha: f64) -> Result<&EvalPoint> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    points
        .iter()
        .min_by(|a, b| cmp_at(alpha, a, b))
        .ok_or(Error::EmptyPoints)
}

/// An alpha interval and the (model, configuration) that wins it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingRegion {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub best: EvalPoint,
}

/// Partition of `[0, 1]` by the optimal point over all clouds pooled.
/// Consecutive regions share their boundary alpha.
pub fn dominance_regions(clouds: &[Vec<EvalPoint>]) -> Result<Vec<OperatingRegion>> {
    if clouds.is_empty() || clouds.iter().any(Vec::is_empty) {
        return Err(Error::EmptyPoints);
    }
    let pooled: Vec<EvalPoint> = clouds.iter().flatten().cloned().collect();
    let hull = lower_hull(&pooled)?;
    let breaks = hull.breakpoints();
    let mut regions = Vec::with_capacity(hull.vertices.len());
    let mut lo = 0.0;
    for (i, v) in hull.vertices.into_iter().enumerate() {
        let hi = breaks.get(i).copied().unwrap_or(1.0);
        regions.push(OperatingRegion {
            alpha_lo: lo,
            alpha_hi: hi,
            best: v,
        });
        lo = hi;
    }
    Ok(regions)
}

/// Hull/region export: per-model hulls, the pooled hull, its breakpoints
/// and the winner of each region.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HullReport {
    pub model_hulls: Vec<ModelHull>,
    pub pooled: Hull,
    pub breakpoints: Vec<f64>,
    pub regions: Vec<OperatingRegion>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelHull {
    pub model_id: String,
    pub hull: Hull,
}

/// Splits a mixed point list into per-model clouds, first-appearance order.
pub fn group_by_model(points: &[EvalPoint]) -> Vec<Vec<EvalPoint>> {
    let mut clouds: Vec<Vec<EvalPoint>> = Vec::new();
    for p in points {
        match clouds.iter_mut().find(|c| c[0].model_id == p.model_id) {
            Some(c) => c.push(p.clone()),
            None => clouds.push(vec![p.clone()]),
        }
    }
    clouds
}

impl HullReport {
    pub fn build(clouds: &[Vec<EvalPoint>]) -> Result<Self> {
        let model_hulls = clouds
            .iter()
            .map(|c| {
                Ok(ModelHull {
                    model_id: c.first().ok_or(Error::EmptyPoints)?.model_id.clone(),
                    hull: lower_hull(c)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let pooled: Vec<EvalPoint> = clouds.iter().flatten().cloned().collect();
        let pooled = lower_hull(&pooled)?;
        Ok(Self {
            model_hulls,
            breakpoints: pooled.breakpoints(),
            pooled,
            regions: dominance_regions(clouds)?,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }
}
