//! Operating contexts: test costs, misclassification costs and the
//! trade-off weight `alpha` that joins them.

use std::fs::File;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Instance;
use crate::error::{Error, Result};
use crate::features::FeatureConfiguration;

/// Default irregularity of generated variable contexts.
pub const DEFAULT_BETA: f64 = 10.0;

const NORMALIZED_TOLERANCE: f64 = 1e-9;

/// `alpha * mc + (1 - alpha) * tc`.
#[inline]
pub fn joint_cost(alpha: f64, mc: f64, tc: f64) -> f64 {
    alpha * mc + (1.0 - alpha) * tc
}

/// Test-cost vector `T` (one entry per attribute), misclassification matrix
/// `M` indexed `[predicted][actual]` with a zero diagonal, and `alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ContextFile", into = "ContextFile")]
pub struct CostContext {
    test_costs: Vec<f64>,
    mc_matrix: Vec<Vec<f64>>,
    alpha: f64,
}

impl CostContext {
    pub fn new(test_costs: Vec<f64>, mc_matrix: Vec<Vec<f64>>, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidAlpha(alpha));
        }
        if test_costs.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidContext(
                "test costs must be finite and non-negative".into(),
            ));
        }
        let c = mc_matrix.len();
        if c < 2 {
            return Err(Error::InvalidContext(format!(
                "misclassification matrix needs at least 2 classes, got {c}"
            )));
        }
        for (i, row) in mc_matrix.iter().enumerate() {
            if row.len() != c {
                return Err(Error::InvalidContext(format!(
                    "misclassification matrix row {i} has {} entries, expected {c}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidContext(
                    "misclassification costs must be finite and non-negative".into(),
                ));
            }
            if row[i] != 0.0 {
                return Err(Error::InvalidContext(format!(
                    "diagonal entry M[{i}][{i}] = {} must be zero",
                    row[i]
                )));
            }
        }
        Ok(Self {
            test_costs,
            mc_matrix,
            alpha,
        })
    }

    /// The uniform context: `T = 1/m` everywhere, `c/(c-1)` off the
    /// diagonal of `M`, `alpha = 0.5`. Already normalized.
    pub fn uniform(m: usize, c: usize) -> Result<Self> {
        if m < 1 || c < 2 {
            return Err(Error::InvalidContext(format!(
                "uniform context needs m >= 1 and c >= 2, got m={m}, c={c}"
            )));
        }
        let off = c as f64 / (c as f64 - 1.0);
        let mc_matrix = (0..c)
            .map(|i| (0..c).map(|j| if i == j { 0.0 } else { off }).collect())
            .collect();
        Self::new(vec![1.0 / m as f64; m], mc_matrix, 0.5)
    }

    /// Uniform context with every test cost and off-diagonal cost multiplied
    /// by an independent `exp(beta * (k0 - 0.5))`, `k0 ~ U(0,1)`, then
    /// normalized. Draw order: `T` first, then `M` row-major skipping the
    /// diagonal. `alpha` stays at 0.5; selection always takes alpha
    /// explicitly.
    pub fn random(m: usize, c: usize, beta: f64, seed: u64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidContext(format!(
                "beta must be finite and non-negative, got {beta}"
            )));
        }
        let base = Self::uniform(m, c)?;
        if beta == 0.0 {
            // exp(0) = 1 for every entry.
            return Ok(base);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut factor = || (beta * (rng.gen::<f64>() - 0.5)).exp();
        let test_costs = base.test_costs.iter().map(|t| t * factor()).collect();
        let mc_matrix = base
            .mc_matrix
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| if i == j { 0.0 } else { v * factor() })
                    .collect()
            })
            .collect();
        Self::new(test_costs, mc_matrix, base.alpha)?.normalized()
    }

    /// Scales `T` to sum to 1 and `M` to sum to `c^2`; `alpha` unchanged.
    pub fn normalized(&self) -> Result<Self> {
        let t_sum: f64 = self.test_costs.iter().sum();
        let m_sum: f64 = self.mc_matrix.iter().flatten().sum();
        if t_sum <= 0.0 {
            return Err(Error::ZeroSum("test-cost vector"));
        }
        if m_sum <= 0.0 {
            return Err(Error::ZeroSum("misclassification matrix"));
        }
        let c = self.c() as f64;
        let m_scale = c * c / m_sum;
        Ok(Self {
            test_costs: self.test_costs.iter().map(|t| t / t_sum).collect(),
            mc_matrix: self
                .mc_matrix
                .iter()
                .map(|row| row.iter().map(|v| v * m_scale).collect())
                .collect(),
            alpha: self.alpha,
        })
    }

    pub fn is_normalized(&self) -> bool {
        let c = self.c() as f64;
        (self.test_costs.iter().sum::<f64>() - 1.0).abs() <= NORMALIZED_TOLERANCE
            && (self.mc_matrix.iter().flatten().sum::<f64>() - c * c).abs() <= NORMALIZED_TOLERANCE
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(Self { alpha, ..self.clone() })
    }

    /// Both cost tables multiplied by `k > 0`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(
            self.test_costs.iter().map(|t| t * k).collect(),
            self.mc_matrix
                .iter()
                .map(|row| row.iter().map(|v| v * k).collect())
                .collect(),
            self.alpha,
        )
    }

    pub fn m(&self) -> usize {
        self.test_costs.len()
    }

    pub fn c(&self) -> usize {
        self.mc_matrix.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn test_costs(&self) -> &[f64] {
        &self.test_costs
    }

    pub fn mc_matrix(&self) -> &[Vec<f64>] {
        &self.mc_matrix
    }

    pub fn misclassification_cost(&self, predicted: usize, actual: usize) -> Result<f64> {
        let c = self.c();
        for index in [predicted, actual] {
            if index >= c {
                return Err(Error::ClassOutOfRange { index, classes: c });
            }
        }
        Ok(self.mc_matrix[predicted][actual])
    }

    /// Sum of `T[j]` over attributes that `cfg` includes and `x` observes.
    pub fn test_cost(&self, x: &Instance, cfg: FeatureConfiguration) -> Result<f64> {
        if x.width() != self.m() || cfg.width() != self.m() {
            return Err(Error::WidthMismatch {
                expected: self.m(),
                found: if x.width() != self.m() { x.width() } else { cfg.width() },
            });
        }
        Ok(self.test_cost_unchecked(x, cfg))
    }

    #[inline]
    pub(crate) fn test_cost_unchecked(&self, x: &Instance, cfg: FeatureConfiguration) -> f64 {
        let mut total = 0.0;
        for (j, v) in x.values().iter().enumerate() {
            if cfg.contains(j) && !v.is_null() {
                total += self.test_costs[j];
            }
        }
        total
    }

    pub fn joint_cost(&self, mc: f64, tc: f64) -> f64 {
        joint_cost(self.alpha, mc, tc)
    }

    /// Exact expected misclassification cost of a predictor that picks a
    /// class uniformly at random, given the actual class distribution.
    pub fn expected_random_mc(&self, class_distribution: &[f64]) -> Result<f64> {
        if class_distribution.len() != self.c() {
            return Err(Error::WidthMismatch {
                expected: self.c(),
                found: class_distribution.len(),
            });
        }
        let pick = 1.0 / self.c() as f64;
        Ok(self
            .mc_matrix
            .iter()
            .map(|row| {
                row.iter()
                    .zip(class_distribution)
                    .map(|(cost, p)| pick * p * cost)
                    .sum::<f64>()
            })
            .sum())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let raw: ContextFile = serde_json::from_reader(file)?;
        raw.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(file, &ContextFile::from(self))?;
        Ok(())
    }
}

/// On-disk form. `normalized: true` asserts that the stored tables already
/// satisfy `sum T = 1` and `sum M = c^2`; the loader checks the claim.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContextFile {
    pub alpha: f64,
    pub test_costs: Vec<f64>,
    pub mc_matrix: Vec<Vec<f64>>,
    #[serde(default)]
    pub normalized: bool,
}

impl TryFrom<ContextFile> for CostContext {
    type Error = Error;

    fn try_from(f: ContextFile) -> Result<Self> {
        let ctx = CostContext::new(f.test_costs, f.mc_matrix, f.alpha)?;
        if f.normalized && !ctx.is_normalized() {
            return Err(Error::InvalidContext(
                "file claims normalized = true but sums are off".into(),
            ));
        }
        Ok(ctx)
    }
}

impl From<CostContext> for ContextFile {
    fn from(ctx: CostContext) -> Self {
        Self::from(&ctx)
    }
}

impl From<&CostContext> for ContextFile {
    fn from(ctx: &CostContext) -> Self {
        Self {
            alpha: ctx.alpha,
            test_costs: ctx.test_costs.clone(),
            mc_matrix: ctx.mc_matrix.clone(),
            normalized: ctx.is_normalized(),
        }
    }
}

/// Supplies the context for each instance of an evaluation set.
#[derive(Clone, Debug)]
pub enum PerExampleContext {
    Global(CostContext),
    PerExample(Vec<CostContext>),
}

impl PerExampleContext {
    pub fn global(ctx: CostContext) -> Self {
        PerExampleContext::Global(ctx)
    }

    /// Every context must match `(m, c)`.
    pub fn per_example(contexts: Vec<CostContext>, m: usize, c: usize) -> Result<Self> {
        for (i, ctx) in contexts.iter().enumerate() {
            if ctx.m() != m || ctx.c() != c {
                return Err(Error::InvalidContext(format!(
                    "context {i} has shape (m={}, c={}), expected (m={m}, c={c})",
                    ctx.m(),
                    ctx.c()
                )));
            }
        }
        Ok(PerExampleContext::PerExample(contexts))
    }

    #[inline]
    pub fn get(&self, i: usize) -> &CostContext {
        match self {
            PerExampleContext::Global(ctx) => ctx,
            PerExampleContext::PerExample(v) => &v[i],
        }
    }

    pub fn shape(&self) -> Option<(usize, usize)> {
        match self {
            PerExampleContext::Global(ctx) => Some((ctx.m(), ctx.c())),
            PerExampleContext::PerExample(v) => v.first().map(|c| (c.m(), c.c())),
        }
    }

    /// Number of instances this supplier covers, `None` for global contexts.
    pub fn instance_count(&self) -> Option<usize> {
        match self {
            PerExampleContext::Global(_) => None,
            PerExampleContext::PerExample(v) => Some(v.len()),
        }
    }
}

impl From<CostContext> for PerExampleContext {
    fn from(ctx: CostContext) -> Self {
        PerExampleContext::Global(ctx)
    }
}
