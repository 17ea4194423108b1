//! Built-in learners behind a single train/predict contract.
//!
//! Every trained model accepts instances with any pattern of nulls. An
//! instance whose values are all null is always assigned the modal training
//! class, whatever the learner; partially observed instances are handled
//! per learner:
//!
//! * kNN measures distance over the dimensions both instances observe,
//!   rescaled by `m / shared`; neighbours sharing nothing are ignored.
//! * Decision trees send a null down the child that saw more training rows.
//! * Naive Bayes drops the likelihood factor of every null attribute.
//!
//! Ties (modal class, votes) always go to the lowest class index.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{mask_values_into, AttributeKind, Dataset, Value};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::features::FeatureConfiguration;

fn default_max_depth() -> usize {
    10
}

fn default_min_leaf() -> usize {
    2
}

/// How bagging draws each member's training sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// `n` draws with replacement.
    #[default]
    Bootstrap,
    /// The whole training set, unchanged (degenerate, for testing).
    Identity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Majority,
    Knn {
        k: usize,
    },
    DecisionTree {
        #[serde(default = "default_max_depth")]
        max_depth: usize,
        #[serde(default = "default_min_leaf")]
        min_leaf: usize,
    },
    NaiveBayes,
    Bagging {
        base: Box<ClassifierSpec>,
        rounds: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        sampler: Sampler,
    },
}

impl ClassifierSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ClassifierSpec::Majority | ClassifierSpec::NaiveBayes => Ok(()),
            ClassifierSpec::Knn { k } if *k == 0 => Err(Error::InvalidSpec("knn needs k >= 1".into())),
            ClassifierSpec::Knn { .. } => Ok(()),
            ClassifierSpec::DecisionTree { max_depth, min_leaf } => {
                if *max_depth == 0 || *min_leaf == 0 {
                    Err(Error::InvalidSpec(
                        "decision tree needs max_depth >= 1 and min_leaf >= 1".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            ClassifierSpec::Bagging { base, rounds, .. } => {
                if *rounds == 0 {
                    return Err(Error::InvalidSpec("bagging needs rounds >= 1".into()));
                }
                base.validate()
            }
        }
    }

    /// The compact form (`knn:3`, `tree:10:2`, ...), used as a model id.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifierSpec::Majority => f.write_str("majority"),
            ClassifierSpec::Knn { k } => write!(f, "knn:{k}"),
            ClassifierSpec::DecisionTree { max_depth, min_leaf } => {
                write!(f, "tree:{max_depth}:{min_leaf}")
            }
            ClassifierSpec::NaiveBayes => f.write_str("nb"),
            ClassifierSpec::Bagging { base, rounds, seed, .. } => write!(f, "bagging:{rounds}:{seed}:{base}"),
        }
    }
}

/// Parses the compact command-line form: `majority`, `knn:K`,
/// `tree[:DEPTH[:MIN_LEAF]]`, `nb`, `bagging:ROUNDS:SEED:<base>`.
impl FromStr for ClassifierSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("cannot parse classifier {s:?}"));
        let num = |t: Option<&str>| -> Result<usize> { t.ok_or_else(bad)?.parse().map_err(|_| bad()) };
        let mut parts = s.trim().splitn(4, ':');
        let head = parts.next().unwrap_or("");
        let spec = match head {
            "majority" => ClassifierSpec::Majority,
            "nb" | "naive_bayes" => ClassifierSpec::NaiveBayes,
            "knn" => ClassifierSpec::Knn { k: num(parts.next())? },
            "tree" => {
                let mut get = |d: usize| parts.next().map_or(Ok(d), |t| t.parse().map_err(|_| bad()));
                ClassifierSpec::DecisionTree {
                    max_depth: get(default_max_depth())?,
                    min_leaf: get(default_min_leaf())?,
                }
            }
            "bagging" => {
                let rounds = num(parts.next())?;
                let seed = num(parts.next())? as u64;
                let base = parts.next().ok_or_else(bad)?.parse()?;
                ClassifierSpec::Bagging {
                    base: Box::new(base),
                    rounds,
                    seed,
                    sampler: Sampler::Bootstrap,
                }
            }
            _ => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// A fitted classifier; immutable and freely shareable across threads.
#[derive(Clone, Debug)]
pub struct TrainedModel {
    spec: ClassifierSpec,
    m: usize,
    class_distribution: Vec<f64>,
    modal: usize,
    fitted: Fitted,
}

#[derive(Clone, Debug)]
enum Fitted {
    Majority,
    Knn(KnnModel),
    Tree(Node),
    NaiveBayes(NbModel),
    Bagging(Vec<TrainedModel>),
}

impl TrainedModel {
    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn width(&self) -> usize {
        self.m
    }

    pub fn classes(&self) -> usize {
        self.class_distribution.len()
    }

    /// Training class frequencies, summing to 1.
    pub fn class_distribution(&self) -> &[f64] {
        &self.class_distribution
    }

    /// Most frequent training class (lowest index on ties).
    pub fn modal_class(&self) -> usize {
        self.modal
    }

    pub fn predict(&self, x: &crate::data::Instance) -> Result<usize> {
        if x.width() != self.m {
            return Err(Error::WidthMismatch {
                expected: self.m,
                found: x.width(),
            });
        }
        Ok(self.predict_values(x.values()))
    }

    /// Prediction for a raw value slice of the training width.
    pub fn predict_values(&self, values: &[Value]) -> usize {
        debug_assert_eq!(values.len(), self.m);
        if values.iter().all(|v| v.is_null()) {
            return self.modal;
        }
        match &self.fitted {
            Fitted::Majority => self.modal,
            Fitted::Knn(knn) => knn.predict(values).unwrap_or(self.modal),
            Fitted::Tree(root) => root.predict(values),
            Fitted::NaiveBayes(nb) => nb.predict(values),
            Fitted::Bagging(members) => {
                let mut votes = vec![0usize; self.classes()];
                for member in members {
                    votes[member.predict_values(values)] += 1;
                }
                argmax_lowest(&votes)
            }
        }
    }
}

pub fn train(spec: &ClassifierSpec, d: &Dataset) -> Result<TrainedModel> {
    spec.validate()?;
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !d.is_labeled() {
        return Err(Error::Unlabeled);
    }
    let rows: Vec<usize> = (0..d.n()).collect();
    Ok(fit(spec, d, &rows))
}

/// `predict(model, mask(x, cfg))` for every instance of `d`, in order.
pub fn predict_dataset(model: &TrainedModel, d: &Dataset, cfg: FeatureConfiguration) -> Result<Vec<usize>> {
    predict_dataset_with(model, d, cfg, Execution::default())
}

pub fn predict_dataset_with(
    model: &TrainedModel,
    d: &Dataset,
    cfg: FeatureConfiguration,
    exec: Execution,
) -> Result<Vec<usize>> {
    for found in [d.m(), cfg.width()] {
        if found != model.m {
            return Err(Error::WidthMismatch {
                expected: model.m,
                found,
            });
        }
    }
    Ok(exec.map(d.instances(), |x| {
        let mut buf = Vec::with_capacity(model.m);
        mask_values_into(x.values(), cfg, &mut buf).expect("width checked above");
        model.predict_values(&buf)
    }))
}

fn fit(spec: &ClassifierSpec, d: &Dataset, rows: &[usize]) -> TrainedModel {
    let counts = label_counts(d, rows);
    let total = rows.len() as f64;
    let class_distribution = counts.iter().map(|&k| k as f64 / total).collect();
    let modal = argmax_lowest(&counts);
    let fitted = match spec {
        ClassifierSpec::Majority => Fitted::Majority,
        ClassifierSpec::Knn { k } => Fitted::Knn(KnnModel::fit(*k, d, rows)),
        ClassifierSpec::DecisionTree { max_depth, min_leaf } => {
            let builder = TreeBuilder {
                d,
                max_depth: *max_depth,
                min_leaf: *min_leaf,
            };
            Fitted::Tree(builder.build(rows.to_vec(), 0))
        }
        ClassifierSpec::NaiveBayes => Fitted::NaiveBayes(NbModel::fit(d, rows)),
        ClassifierSpec::Bagging {
            base,
            rounds,
            seed,
            sampler,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let members = (0..*rounds)
                .map(|_| {
                    let sample: Vec<usize> = match sampler {
                        Sampler::Identity => rows.to_vec(),
                        Sampler::Bootstrap => (0..rows.len()).map(|_| rows[rng.gen_range(0..rows.len())]).collect(),
                    };
                    fit(base, d, &sample)
                })
                .collect();
            Fitted::Bagging(members)
        }
    };
    TrainedModel {
        spec: spec.clone(),
        m: d.m(),
        class_distribution,
        modal,
        fitted,
    }
}

fn label_counts(d: &Dataset, rows: &[usize]) -> Vec<usize> {
    let mut counts = vec![0usize; d.c()];
    for &i in rows {
        counts[d.instances()[i].label().expect("labeled dataset")] += 1;
    }
    counts
}

fn argmax_lowest<T: PartialOrd + Copy>(xs: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// k nearest neighbours

#[derive(Clone, Debug)]
struct KnnModel {
    k: usize,
    /// `(mean, std)` for numeric attributes, `None` for nominal ones.
    scaling: Vec<Option<(f64, f64)>>,
    points: Vec<(Vec<Value>, usize)>,
    classes: usize,
}

impl KnnModel {
    fn fit(k: usize, d: &Dataset, rows: &[usize]) -> Self {
        let scaling: Vec<Option<(f64, f64)>> = d
            .schema()
            .iter()
            .enumerate()
            .map(|(j, attr)| match attr.kind {
                AttributeKind::Nominal(_) => None,
                AttributeKind::Numeric => {
                    let xs: Vec<f64> = rows
                        .iter()
                        .filter_map(|&i| match d.instances()[i].values()[j] {
                            Value::Numeric(x) => Some(x),
                            _ => None,
                        })
                        .collect();
                    Some(mean_std(&xs))
                }
            })
            .collect();
        let points = rows
            .iter()
            .map(|&i| {
                let x = &d.instances()[i];
                (standardize(x.values(), &scaling), x.label().expect("labeled dataset"))
            })
            .collect();
        Self {
            k,
            scaling,
            points,
            classes: d.c(),
        }
    }

    /// `None` when no training point shares an observed dimension.
    fn predict(&self, values: &[Value]) -> Option<usize> {
        let q = standardize(values, &self.scaling);
        let m = q.len() as f64;
        let mut neighbours: Vec<(f64, usize)> = Vec::with_capacity(self.points.len());
        for (idx, (p, _)) in self.points.iter().enumerate() {
            let mut sum = 0.0;
            let mut shared = 0usize;
            for (a, b) in q.iter().zip(p) {
                let diff = match (a, b) {
                    (Value::Numeric(x), Value::Numeric(y)) => x - y,
                    (Value::Nominal(x), Value::Nominal(y)) => f64::from(u8::from(x != y)),
                    _ => continue,
                };
                sum += diff * diff;
                shared += 1;
            }
            if shared > 0 {
                neighbours.push((sum * m / shared as f64, idx));
            }
        }
        if neighbours.is_empty() {
            return None;
        }
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        let k = self.k.min(neighbours.len());
        if k < neighbours.len() {
            neighbours.select_nth_unstable_by(k - 1, by_distance);
        }
        let mut votes = vec![0usize; self.classes];
        for &(_, idx) in &neighbours[..k] {
            votes[self.points[idx].1] += 1;
        }
        Some(argmax_lowest(&votes))
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 1.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    (mean, if std > 0.0 { std } else { 1.0 })
}

fn standardize(values: &[Value], scaling: &[Option<(f64, f64)>]) -> Vec<Value> {
    values
        .iter()
        .zip(scaling)
        .map(|(v, s)| match (v, s) {
            (Value::Numeric(x), Some((mean, std))) => Value::Numeric((x - mean) / std),
            _ => *v,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Decision tree

#[derive(Clone, Copy, Debug)]
enum SplitTest {
    /// Left when `x <= threshold`.
    Threshold(f64),
    /// Left when the nominal value equals this index.
    Equals(u32),
}

#[derive(Clone, Debug)]
enum Node {
    Leaf(usize),
    Split {
        attr: usize,
        test: SplitTest,
        left: Box<Node>,
        right: Box<Node>,
        left_weight: usize,
        right_weight: usize,
    },
}

impl Node {
    fn predict(&self, values: &[Value]) -> usize {
        let mut node = self;
        loop {
            match node {
                Node::Leaf(y) => return *y,
                Node::Split {
                    attr,
                    test,
                    left,
                    right,
                    left_weight,
                    right_weight,
                } => {
                    let go_left = match (values[*attr], test) {
                        (Value::Numeric(x), SplitTest::Threshold(t)) => x <= *t,
                        (Value::Nominal(v), SplitTest::Equals(e)) => v == *e,
                        _ => left_weight >= right_weight,
                    };
                    node = if go_left { left } else { right };
                }
            }
        }
    }
}

struct TreeBuilder<'a> {
    d: &'a Dataset,
    max_depth: usize,
    min_leaf: usize,
}

struct Candidate {
    gain: f64,
    attr: usize,
    test: SplitTest,
}

impl TreeBuilder<'_> {
    fn label(&self, i: usize) -> usize {
        self.d.instances()[i].label().expect("labeled dataset")
    }

    fn build(&self, rows: Vec<usize>, depth: usize) -> Node {
        let counts = label_counts(self.d, &rows);
        let majority = argmax_lowest(&counts);
        let pure = counts.iter().filter(|&&k| k > 0).count() <= 1;
        if pure || depth >= self.max_depth || rows.len() < 2 * self.min_leaf {
            return Node::Leaf(majority);
        }
        let Some(best) = self.best_split(&rows) else {
            return Node::Leaf(majority);
        };

        let mut left = Vec::new();
        let mut right = Vec::new();
        let mut unknown = Vec::new();
        for &i in &rows {
            match (self.d.instances()[i].values()[best.attr], best.test) {
                (Value::Numeric(x), SplitTest::Threshold(t)) => {
                    if x <= t {
                        left.push(i)
                    } else {
                        right.push(i)
                    }
                }
                (Value::Nominal(v), SplitTest::Equals(e)) => {
                    if v == e {
                        left.push(i)
                    } else {
                        right.push(i)
                    }
                }
                _ => unknown.push(i),
            }
        }
        if left.len() >= right.len() {
            left.extend(unknown);
        } else {
            right.extend(unknown);
        }
        let (left_weight, right_weight) = (left.len(), right.len());
        Node::Split {
            attr: best.attr,
            test: best.test,
            left: Box::new(self.build(left, depth + 1)),
            right: Box::new(self.build(right, depth + 1)),
            left_weight,
            right_weight,
        }
    }

    /// Highest information gain, scaled by the fraction of rows that
    /// observe the attribute. Earlier attributes and thresholds win ties.
    fn best_split(&self, rows: &[usize]) -> Option<Candidate> {
        let c = self.d.c();
        let total = rows.len() as f64;
        let mut best: Option<Candidate> = None;
        for (attr, schema) in self.d.schema().iter().enumerate() {
            let mut known: Vec<(Value, usize)> = rows
                .iter()
                .map(|&i| (self.d.instances()[i].values()[attr], self.label(i)))
                .filter(|(v, _)| !v.is_null())
                .collect();
            if known.len() < 2 * self.min_leaf {
                continue;
            }
            let mut known_counts = vec![0usize; c];
            for &(_, y) in &known {
                known_counts[y] += 1;
            }
            let n_known = known.len() as f64;
            let parent_h = entropy(&known_counts, n_known);
            let weight = n_known / total;
            let mut consider = |gain: f64, test: SplitTest| {
                let gain = weight * gain;
                if gain > 1e-12 && best.as_ref().is_none_or(|b| gain > b.gain + 1e-12) {
                    best = Some(Candidate { gain, attr, test });
                }
            };
            match &schema.kind {
                AttributeKind::Numeric => {
                    let num = |v: Value| match v {
                        Value::Numeric(x) => x,
                        _ => unreachable!("numeric attribute holds numeric values"),
                    };
                    known.sort_by(|a, b| num(a.0).total_cmp(&num(b.0)));
                    let mut left = vec![0usize; c];
                    for s in 0..known.len() - 1 {
                        left[known[s].1] += 1;
                        let (xa, xb) = (num(known[s].0), num(known[s + 1].0));
                        let n_left = s + 1;
                        if xa == xb || n_left < self.min_leaf || known.len() - n_left < self.min_leaf {
                            continue;
                        }
                        let right: Vec<usize> = known_counts.iter().zip(&left).map(|(t, l)| t - l).collect();
                        let nl = n_left as f64;
                        let nr = n_known - nl;
                        let h = (nl * entropy(&left, nl) + nr * entropy(&right, nr)) / n_known;
                        consider(parent_h - h, SplitTest::Threshold(xa + (xb - xa) / 2.0));
                    }
                }
                AttributeKind::Nominal(vals) => {
                    for v in 0..vals.len() as u32 {
                        let mut left = vec![0usize; c];
                        for &(x, y) in &known {
                            if x == Value::Nominal(v) {
                                left[y] += 1;
                            }
                        }
                        let n_left: usize = left.iter().sum();
                        if n_left < self.min_leaf || known.len() - n_left < self.min_leaf {
                            continue;
                        }
                        let right: Vec<usize> = known_counts.iter().zip(&left).map(|(t, l)| t - l).collect();
                        let nl = n_left as f64;
                        let nr = n_known - nl;
                        let h = (nl * entropy(&left, nl) + nr * entropy(&right, nr)) / n_known;
                        consider(parent_h - h, SplitTest::Equals(v));
                    }
                }
            }
        }
        best
    }
}

fn entropy(counts: &[usize], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k| {
            let p = k as f64 / total;
            -p * p.log2()
        })
        .sum()
}

// ---------------------------------------------------------------------------
// Naive Bayes

#[derive(Clone, Debug)]
enum NbAttribute {
    Gaussian { mean: Vec<f64>, var: Vec<f64> },
    Categorical { log_prob: Vec<Vec<f64>> },
}

#[derive(Clone, Debug)]
struct NbModel {
    log_prior: Vec<f64>,
    attrs: Vec<NbAttribute>,
}

impl NbModel {
    fn fit(d: &Dataset, rows: &[usize]) -> Self {
        let c = d.c();
        let counts = label_counts(d, rows);
        let total = rows.len() as f64;
        let log_prior = counts
            .iter()
            .map(|&k| {
                if k == 0 {
                    f64::NEG_INFINITY
                } else {
                    (k as f64 / total).ln()
                }
            })
            .collect();
        let attrs = d
            .schema()
            .iter()
            .enumerate()
            .map(|(j, schema)| {
                let observed = rows.iter().filter_map(|&i| {
                    let x = &d.instances()[i];
                    let v = x.values()[j];
                    (!v.is_null()).then(|| (v, x.label().expect("labeled dataset")))
                });
                match &schema.kind {
                    AttributeKind::Numeric => {
                        let mut per_class: Vec<Vec<f64>> = vec![Vec::new(); c];
                        let mut pooled = Vec::new();
                        for (v, y) in observed {
                            if let Value::Numeric(x) = v {
                                per_class[y].push(x);
                                pooled.push(x);
                            }
                        }
                        let (pooled_mean, pooled_var) = mean_var(&pooled);
                        let eps = 1e-9 * pooled_var.max(1.0);
                        let (mean, var) = per_class
                            .iter()
                            .map(|xs| {
                                let (m, v) = if xs.is_empty() {
                                    (pooled_mean, pooled_var)
                                } else {
                                    mean_var(xs)
                                };
                                (m, v + eps)
                            })
                            .unzip();
                        NbAttribute::Gaussian { mean, var }
                    }
                    AttributeKind::Nominal(vals) => {
                        let mut table = vec![vec![0usize; vals.len()]; c];
                        for (v, y) in observed {
                            if let Value::Nominal(k) = v {
                                table[y][k as usize] += 1;
                            }
                        }
                        let log_prob = table
                            .iter()
                            .map(|row| {
                                let denom = (row.iter().sum::<usize>() + vals.len()) as f64;
                                row.iter().map(|&k| ((k + 1) as f64 / denom).ln()).collect()
                            })
                            .collect();
                        NbAttribute::Categorical { log_prob }
                    }
                }
            })
            .collect();
        Self { log_prior, attrs }
    }

    fn predict(&self, values: &[Value]) -> usize {
        let scores: Vec<f64> = (0..self.log_prior.len())
            .map(|y| {
                let mut s = self.log_prior[y];
                if s == f64::NEG_INFINITY {
                    return s;
                }
                for (v, attr) in values.iter().zip(&self.attrs) {
                    match (v, attr) {
                        (Value::Numeric(x), NbAttribute::Gaussian { mean, var }) => {
                            let d = x - mean[y];
                            s += -0.5 * (2.0 * std::f64::consts::PI * var[y]).ln() - d * d / (2.0 * var[y]);
                        }
                        (Value::Nominal(k), NbAttribute::Categorical { log_prob }) => {
                            s += log_prob[y][*k as usize];
                        }
                        _ => {}
                    }
                }
                s
            })
            .collect();
        let mut best = 0;
        for y in 1..scores.len() {
            if scores[y].partial_cmp(&scores[best]) == Some(Ordering::Greater) {
                best = y;
            }
        }
        best
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 1.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (mean, xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{AttributeSchema, Instance};
    use proptest::prelude::*;

    fn dataset(rows: &[(&[f64], usize)], c: usize) -> Dataset {
        let m = rows[0].0.len();
        let schema = (0..m).map(|j| AttributeSchema::numeric(format!("a{j}"))).collect();
        let classes = (0..c).map(|i| format!("c{i}")).collect();
        let instances = rows
            .iter()
            .map(|(xs, y)| Instance::new(xs.iter().map(|&x| Value::Numeric(x)).collect(), Some(*y)))
            .collect();
        Dataset::new(schema, classes, instances).unwrap()
    }

    /// Three well separated blobs in 3-D with class 1 most frequent.
    fn blobs() -> Dataset {
        let mut rows: Vec<(Vec<f64>, usize)> = Vec::new();
        for i in 0..12 {
            let t = i as f64 * 0.1;
            rows.push((vec![t, 0.5 * t, 1.0 - t], 0));
            rows.push((vec![5.0 + t, 5.0 - t, 2.0 * t], 1));
            rows.push((vec![5.1 + t, 4.9 + 0.3 * t, t], 1));
            if i < 8 {
                rows.push((vec![-5.0 - t, 3.0 + t, -2.0], 2));
            }
        }
        let refs: Vec<(&[f64], usize)> = rows.iter().map(|(x, y)| (x.as_slice(), *y)).collect();
        dataset(&refs, 3)
    }

    fn all_kinds() -> Vec<ClassifierSpec> {
        vec![
            ClassifierSpec::Majority,
            ClassifierSpec::Knn { k: 1 },
            ClassifierSpec::Knn { k: 5 },
            ClassifierSpec::DecisionTree {
                max_depth: 6,
                min_leaf: 1,
            },
            ClassifierSpec::NaiveBayes,
            ClassifierSpec::Bagging {
                base: Box::new(ClassifierSpec::DecisionTree {
                    max_depth: 4,
                    min_leaf: 2,
                }),
                rounds: 7,
                seed: 3,
                sampler: Sampler::Bootstrap,
            },
        ]
    }

    #[test]
    fn majority_predicts_modal_class() {
        let d = blobs();
        let model = train(&ClassifierSpec::Majority, &d).unwrap();
        assert_eq!(model.modal_class(), 1);
        for x in d.instances() {
            assert_eq!(model.predict(x).unwrap(), 1);
        }
        assert!((model.class_distribution().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn modal_ties_go_to_lowest_index() {
        let d = dataset(&[(&[1.0], 1), (&[2.0], 0)], 2);
        assert_eq!(train(&ClassifierSpec::Majority, &d).unwrap().modal_class(), 0);
    }

    #[test]
    fn knn1_recovers_training_labels() {
        let d = blobs();
        let model = train(&ClassifierSpec::Knn { k: 1 }, &d).unwrap();
        for x in d.instances() {
            assert_eq!(model.predict(x).unwrap(), x.label().unwrap());
        }
    }

    #[test]
    fn knn_uses_shared_dimensions_only() {
        let d = blobs();
        let model = train(&ClassifierSpec::Knn { k: 3 }, &d).unwrap();
        let x = Instance::new(vec![Value::Numeric(-5.5), Value::Null, Value::Null], None);
        assert_eq!(model.predict(&x).unwrap(), 2);
    }

    #[test]
    fn tree_fits_separable_data_and_routes_nulls_to_heavier_child() {
        let d = blobs();
        let model = train(
            &ClassifierSpec::DecisionTree {
                max_depth: 6,
                min_leaf: 1,
            },
            &d,
        )
        .unwrap();
        for x in d.instances() {
            assert_eq!(model.predict(x).unwrap(), x.label().unwrap());
        }
        // The root separates the blobs; a null on its attribute follows the
        // majority of training rows, which belong to class 1.
        let x = Instance::new(vec![Value::Null, Value::Null, Value::Numeric(0.0)], None);
        let y = model.predict(&x).unwrap();
        assert!(y < 3);
    }

    #[test]
    fn naive_bayes_fits_separable_data() {
        let d = blobs();
        let model = train(&ClassifierSpec::NaiveBayes, &d).unwrap();
        for x in d.instances() {
            assert_eq!(model.predict(x).unwrap(), x.label().unwrap());
        }
    }

    #[test]
    fn nominal_attributes_are_supported() {
        let schema = vec![AttributeSchema::nominal("colour", &["red", "green", "blue"])];
        let classes = vec!["a".to_string(), "b".to_string()];
        let mut instances = Vec::new();
        for i in 0..12u32 {
            let v = i % 3;
            instances.push(Instance::new(vec![Value::Nominal(v)], Some(usize::from(v == 2))));
        }
        let d = Dataset::new(schema, classes, instances).unwrap();
        for spec in all_kinds().into_iter().skip(1) {
            let model = train(&spec, &d).unwrap();
            let blue = Instance::new(vec![Value::Nominal(2)], None);
            let red = Instance::new(vec![Value::Nominal(0)], None);
            assert_eq!(model.predict(&blue).unwrap(), 1, "{spec}");
            assert_eq!(model.predict(&red).unwrap(), 0, "{spec}");
        }
    }

    #[test]
    fn all_null_instance_gets_modal_class_for_every_kind() {
        let d = blobs();
        let null = Instance::new(vec![Value::Null; 3], None);
        for spec in all_kinds() {
            let model = train(&spec, &d).unwrap();
            assert_eq!(model.predict(&null).unwrap(), model.modal_class(), "{spec}");
        }
        let preds = predict_dataset(
            &train(&ClassifierSpec::Knn { k: 3 }, &d).unwrap(),
            &d,
            FeatureConfiguration::empty(3),
        )
        .unwrap();
        assert_eq!(preds, vec![1; d.n()]);
    }

    #[test]
    fn training_errors() {
        let d = blobs();
        let empty = d.select(&[]);
        assert!(matches!(
            train(&ClassifierSpec::Knn { k: 3 }, &empty),
            Err(Error::EmptyDataset)
        ));
        assert!(train(&ClassifierSpec::Knn { k: 0 }, &d).is_err());
        assert!(train(
            &ClassifierSpec::DecisionTree {
                max_depth: 0,
                min_leaf: 1
            },
            &d
        )
        .is_err());
    }

    #[test]
    fn all_null_training_column_is_fine() {
        let mut instances = blobs().instances().to_vec();
        for x in instances.iter_mut() {
            let mut v = x.values().to_vec();
            v[1] = Value::Null;
            *x = Instance::new(v, x.label());
        }
        let d = blobs().with_instances(instances).unwrap();
        for spec in all_kinds() {
            let model = train(&spec, &d).unwrap();
            for x in d.instances() {
                assert!(model.predict(x).unwrap() < 3);
            }
        }
        let all_null: Vec<Instance> = d
            .instances()
            .iter()
            .map(|x| Instance::new(vec![Value::Null; 3], x.label()))
            .collect();
        let d = d.with_instances(all_null).unwrap();
        assert_eq!(train(&ClassifierSpec::Majority, &d).unwrap().modal_class(), 1);
    }

    #[test]
    fn bagging_is_deterministic() {
        let d = blobs();
        let spec = &all_kinds()[5];
        let a = train(spec, &d).unwrap();
        let b = train(spec, &d).unwrap();
        let cfg = FeatureConfiguration::from_indices(&[0, 2], 3).unwrap();
        assert_eq!(
            predict_dataset(&a, &d, cfg).unwrap(),
            predict_dataset(&b, &d, cfg).unwrap()
        );
    }

    #[test]
    fn single_identity_round_matches_base_learner() {
        let d = blobs();
        let base = ClassifierSpec::DecisionTree {
            max_depth: 2,
            min_leaf: 3,
        };
        let bag = ClassifierSpec::Bagging {
            base: Box::new(base.clone()),
            rounds: 1,
            seed: 0,
            sampler: Sampler::Identity,
        };
        let a = train(&base, &d).unwrap();
        let b = train(&bag, &d).unwrap();
        for cfg in FeatureConfiguration::lattice(3) {
            assert_eq!(
                predict_dataset(&a, &d, cfg).unwrap(),
                predict_dataset(&b, &d, cfg).unwrap()
            );
        }
    }

    #[test]
    fn width_mismatch_is_the_only_prediction_error() {
        let d = blobs();
        let model = train(&ClassifierSpec::NaiveBayes, &d).unwrap();
        let short = Instance::new(vec![Value::Numeric(1.0)], None);
        assert!(matches!(model.predict(&short), Err(Error::WidthMismatch { .. })));
        assert!(predict_dataset(&model, &d, FeatureConfiguration::full(4)).is_err());
    }

    #[test]
    fn spec_short_form_round_trips() {
        for spec in all_kinds() {
            let text = spec.to_string();
            assert_eq!(text.parse::<ClassifierSpec>().unwrap(), spec, "{text}");
        }
        assert_eq!(
            "tree".parse::<ClassifierSpec>().unwrap(),
            ClassifierSpec::DecisionTree {
                max_depth: 10,
                min_leaf: 2
            }
        );
        for bad in ["knn", "knn:0", "knn:x", "forest", "tree:1:2:3", "majority:1"] {
            assert!(bad.parse::<ClassifierSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn spec_json_form() {
        let json = r#"{"kind":"bagging","base":{"kind":"decision_tree","max_depth":5},"rounds":10,"seed":1}"#;
        let spec: ClassifierSpec = serde_json::from_str(json).unwrap();
        assert_eq!(
            spec,
            ClassifierSpec::Bagging {
                base: Box::new(ClassifierSpec::DecisionTree {
                    max_depth: 5,
                    min_leaf: 2
                }),
                rounds: 10,
                seed: 1,
                sampler: Sampler::Bootstrap
            }
        );
    }

    fn value() -> impl Strategy<Value = Value> {
        prop_oneof![Just(Value::Null), (-8.0f64..8.0).prop_map(Value::Numeric)]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn prediction_is_total_and_pure(vals in prop::collection::vec(value(), 3)) {
            let d = blobs();
            let x = Instance::new(vals, None);
            for spec in all_kinds() {
                let model = train(&spec, &d).unwrap();
                let y = model.predict(&x).unwrap();
                prop_assert!(y < d.c());
                prop_assert_eq!(model.predict(&x).unwrap(), y);
            }
        }
    }
}
