//! Quadratic-budget approximations of the configuration lattice.
//!
//! The backward methods start from the full configuration and, level by
//! level, evaluate every single-attribute removal from the current
//! configuration, then descend into the best one according to MC (BMC),
//! TC (BTC) or JC (BJC). A descent over `m` attributes evaluates exactly
//! `1 + m + (m-1) + ... + 1 = m(m+1)/2 + 1` configurations. RND draws the
//! same number of distinct configurations uniformly from the lattice, always
//! including the empty one.

use std::cmp::Ordering;
use std::fmt;
use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classifiers::TrainedModel;
use crate::cost::PerExampleContext;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::features::{FeatureConfiguration, MAX_WIDTH};
use crate::lattice::{EvalPoint, Evaluator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "Full")]
    Full,
    #[serde(rename = "BMC")]
    Bmc,
    #[serde(rename = "BTC")]
    Btc,
    #[serde(rename = "BJC")]
    Bjc,
    #[serde(rename = "RND")]
    Rnd,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Full, Method::Bmc, Method::Btc, Method::Bjc, Method::Rnd];

    pub fn name(self) -> &'static str {
        match self {
            Method::Full => "Full",
            Method::Bmc => "BMC",
            Method::Btc => "BTC",
            Method::Bjc => "BJC",
            Method::Rnd => "RND",
        }
    }

    pub fn is_backward(self) -> bool {
        matches!(self, Method::Bmc | Method::Btc | Method::Bjc)
    }

    /// Configurations evaluated per model over `m` attributes.
    pub fn budget(self, m: usize) -> u64 {
        match self {
            Method::Full => 1u64 << m,
            _ => backward_budget(m) as u64,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidSearch(format!("unknown method {s:?}")))
    }
}

/// `m(m+1)/2 + 1`.
pub fn backward_budget(m: usize) -> usize {
    m * (m + 1) / 2 + 1
}

/// What a backward descent minimizes at each level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Criterion {
    Mc,
    Tc,
    /// Joint cost at the given alpha.
    Jc(f64),
}

impl Criterion {
    pub fn method(self) -> Method {
        match self {
            Criterion::Mc => Method::Bmc,
            Criterion::Tc => Method::Btc,
            Criterion::Jc(_) => Method::Bjc,
        }
    }

    fn score(self, p: &EvalPoint) -> f64 {
        match self {
            Criterion::Mc => p.mean_mc,
            Criterion::Tc => p.mean_tc,
            Criterion::Jc(alpha) => p.jc(alpha),
        }
    }

    /// Criterion first, then MC, then TC, then the lower mask.
    fn compare(self, a: &EvalPoint, b: &EvalPoint) -> Ordering {
        self.score(a)
            .total_cmp(&self.score(b))
            .then(a.mean_mc.total_cmp(&b.mean_mc))
            .then(a.mean_tc.total_cmp(&b.mean_tc))
            .then(a.cfg.bits().cmp(&b.cfg.bits()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub method: Method,
    pub budget: usize,
    /// Every evaluated configuration, in evaluation order.
    pub visited: Vec<EvalPoint>,
    /// Configurations descended into, full to empty (backward methods).
    pub greedy_path: Vec<FeatureConfiguration>,
}

impl SearchTrace {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }
}

pub fn backward_search(
    model: &TrainedModel,
    model_id: &str,
    d: &Dataset,
    pec: &PerExampleContext,
    criterion: Criterion,
    exec: Execution,
) -> Result<SearchTrace> {
    let eval = Evaluator::new(model, model_id, d, pec)?;
    backward_descent(d.m(), criterion, |cfg| eval.evaluate(cfg), exec)
}

/// Backward descent over any configuration evaluator; candidates within a
/// level are evaluated under `exec`, levels run in order.
pub fn backward_descent<F>(m: usize, criterion: Criterion, evaluate: F, exec: Execution) -> Result<SearchTrace>
where
    F: Fn(FeatureConfiguration) -> Result<EvalPoint> + Sync + Send,
{
    if m == 0 || m > MAX_WIDTH {
        return Err(Error::InvalidSearch(format!(
            "backward search needs 1..={MAX_WIDTH} attributes, got {m}"
        )));
    }
    if let Criterion::Jc(alpha) = criterion {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidAlpha(alpha));
        }
    }
    let mut current = FeatureConfiguration::full(m);
    let mut visited = Vec::with_capacity(backward_budget(m));
    let mut greedy_path = Vec::with_capacity(m + 1);
    visited.push(evaluate(current)?);
    greedy_path.push(current);
    while !current.is_empty() {
        let candidates: Vec<FeatureConfiguration> = current.indices().map(|j| current.without(j)).collect();
        let level = exec.try_map(&candidates, |&cfg| evaluate(cfg))?;
        let best = level
            .iter()
            .min_by(|a, b| criterion.compare(a, b))
            .expect("non-empty level")
            .cfg;
        visited.extend(level);
        greedy_path.push(best);
        current = best;
    }
    Ok(SearchTrace {
        method: criterion.method(),
        budget: visited.len(),
        visited,
        greedy_path,
    })
}

/// `budget` distinct configurations over `m` attributes drawn uniformly
/// without replacement, the empty configuration always among them; ascending
/// mask order.
pub fn random_configurations(m: usize, budget: usize, seed: u64) -> Result<Vec<FeatureConfiguration>> {
    if m > MAX_WIDTH {
        return Err(Error::InvalidSearch(format!(
            "random search supports at most {MAX_WIDTH} attributes"
        )));
    }
    let lattice_size = 1u64 << m;
    if budget == 0 || budget as u64 > lattice_size {
        return Err(Error::InvalidSearch(format!(
            "budget {budget} outside 1..={lattice_size} for {m} attributes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rest = usize::try_from(lattice_size - 1)
        .map_err(|_| Error::InvalidSearch("lattice too large for this platform".into()))?;
    let mut bits: Vec<u64> = rand::seq::index::sample(&mut rng, rest, budget - 1)
        .into_iter()
        .map(|k| k as u64 + 1)
        .collect();
    bits.sort_unstable();
    Ok(std::iter::once(0)
        .chain(bits)
        .map(|b| FeatureConfiguration::new(b, m).expect("sampled within width"))
        .collect())
}

pub fn random_search(
    model: &TrainedModel,
    model_id: &str,
    d: &Dataset,
    pec: &PerExampleContext,
    budget: usize,
    seed: u64,
    exec: Execution,
) -> Result<SearchTrace> {
    let eval = Evaluator::new(model, model_id, d, pec)?;
    let cfgs = random_configurations(d.m(), budget, seed)?;
    let visited = eval.evaluate_all(&cfgs, exec)?;
    Ok(SearchTrace {
        method: Method::Rnd,
        budget: visited.len(),
        visited,
        greedy_path: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    /// Synthetic evaluator: TC is the sum of per-attribute costs, MC a
    /// pseudo-random function of the configuration.
    fn synthetic(costs: Vec<f64>, salt: u64) -> impl Fn(FeatureConfiguration) -> Result<EvalPoint> + Sync + Send {
        move |cfg| {
            let tc: f64 = cfg.indices().map(|j| costs[j]).sum();
            let h = (cfg.bits() ^ salt).wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
            let mc = (h % 10_000) as f64 / 10_000.0 + 0.2 * (cfg.width() - cfg.popcount()) as f64;
            Ok(EvalPoint::new("syn", cfg, tc, mc))
        }
    }

    #[test]
    fn budget_law_for_m_up_to_12() {
        for m in 1..=12 {
            for criterion in [Criterion::Mc, Criterion::Tc, Criterion::Jc(0.3)] {
                let t = backward_descent(m, criterion, synthetic(vec![1.0; m], 7), Execution::Sequential).unwrap();
                assert_eq!(t.visited.len(), 1 + (1..=m).sum::<usize>());
                assert_eq!(t.budget, backward_budget(m));
                assert_eq!(t.greedy_path.len(), m + 1);
                for (k, cfg) in t.greedy_path.iter().enumerate() {
                    assert_eq!(cfg.popcount(), m - k);
                }
                let distinct: HashSet<u64> = t.visited.iter().map(|p| p.cfg.bits()).collect();
                assert_eq!(distinct.len(), t.visited.len());
            }
        }
        assert_eq!(backward_budget(4), 11);
        assert_eq!(backward_budget(8), 37);
    }

    #[test]
    fn btc_drops_the_most_expensive_attribute_first() {
        let costs = vec![0.1, 0.5, 0.3, 0.05];
        let t = backward_descent(4, Criterion::Tc, synthetic(costs, 1), Execution::Sequential).unwrap();
        let order: Vec<String> = t.greedy_path.iter().map(|c| c.to_bit_string()).collect();
        assert_eq!(order, ["1111", "1011", "1001", "0001", "0000"]);
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(backward_descent(0, Criterion::Mc, synthetic(vec![], 0), Execution::Sequential).is_err());
        assert!(backward_descent(3, Criterion::Jc(1.5), synthetic(vec![1.0; 3], 0), Execution::Sequential).is_err());
        assert!(random_configurations(3, 9, 0).is_err());
        assert!(random_configurations(3, 0, 0).is_err());
    }

    #[test]
    fn random_configurations_contract() {
        let full: Vec<u64> = random_configurations(4, 16, 5)
            .unwrap()
            .iter()
            .map(|c| c.bits())
            .collect();
        assert_eq!(full, (0..16).collect::<Vec<_>>());
        let a = random_configurations(8, 37, 11).unwrap();
        assert_eq!(a.len(), 37);
        assert!(a[0].is_empty());
        assert_eq!(a, random_configurations(8, 37, 11).unwrap());
        assert_ne!(a, random_configurations(8, 37, 12).unwrap());
        let distinct: HashSet<u64> = a.iter().map(|c| c.bits()).collect();
        assert_eq!(distinct.len(), 37);
        assert_eq!(random_configurations(40, 5, 1).unwrap().len(), 5);
    }

    #[test]
    fn random_sampling_is_roughly_uniform() {
        // Each non-empty configuration of 4 attributes has chance 5/15 of
        // being drawn with budget 6; check frequencies over many seeds.
        let mut hits = [0u32; 16];
        let trials = 3000;
        for seed in 0..trials {
            for c in random_configurations(4, 6, seed).unwrap() {
                hits[c.bits() as usize] += 1;
            }
        }
        assert_eq!(hits[0], trials as u32);
        for &h in &hits[1..] {
            let freq = h as f64 / trials as f64;
            assert!((freq - 1.0 / 3.0).abs() < 0.04, "{freq}");
        }
    }

    #[test]
    fn method_names_parse() {
        for m in Method::ALL {
            assert_eq!(m.name().to_lowercase().parse::<Method>().unwrap(), m);
        }
        assert_eq!(Method::Full.budget(8), 256);
        assert_eq!(Method::Rnd.budget(8), 37);
        assert_eq!(serde_json::to_string(&Method::Bjc).unwrap(), "\"BJC\"");
    }

    #[test]
    fn parallel_and_sequential_descents_agree() {
        let f = synthetic(vec![0.2, 0.1, 0.4, 0.3, 0.25, 0.05], 99);
        let a = backward_descent(6, Criterion::Jc(0.6), &f, Execution::Sequential).unwrap();
        let b = backward_descent(6, Criterion::Jc(0.6), &f, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn uniform_test_costs_make_bmc_and_bjc_coincide(m in 1usize..9, salt in any::<u64>(), alpha in 0.01f64..1.0) {
            // Uniform T: every candidate at a level has identical TC.
            let f = synthetic(vec![1.0 / m as f64; m], salt);
            let bmc = backward_descent(m, Criterion::Mc, &f, Execution::Sequential).unwrap();
            let bjc = backward_descent(m, Criterion::Jc(alpha), &f, Execution::Sequential).unwrap();
            let btc = backward_descent(m, Criterion::Tc, &f, Execution::Sequential).unwrap();
            prop_assert_eq!(&bmc.greedy_path, &bjc.greedy_path);
            prop_assert_eq!(&bmc.greedy_path, &btc.greedy_path);
        }

        #[test]
        fn full_lattice_never_loses_to_a_trace(m in 1usize..8, salt in any::<u64>(), alpha in 0.0f64..=1.0,
                                               costs in prop::collection::vec(0.0f64..1.0, 8)) {
            let f = synthetic(costs[..m].to_vec(), salt);
            let full_best = FeatureConfiguration::lattice(m)
                .map(|c| f(c).unwrap().jc(alpha))
                .fold(f64::INFINITY, f64::min);
            for criterion in [Criterion::Mc, Criterion::Tc, Criterion::Jc(alpha)] {
                let t = backward_descent(m, criterion, &f, Execution::Sequential).unwrap();
                let trace_best = t.visited.iter().map(|p| p.jc(alpha)).fold(f64::INFINITY, f64::min);
                prop_assert!(full_best <= trace_best);
            }
        }
    }
}
