//! Rank-based comparison of methods over result rows: mid-rank averages,
//! the Friedman test (with the Iman-Davenport correction) and the Nemenyi
//! critical difference.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};

/// Rows are result cells (e.g. dataset x alpha), columns are methods.
/// Lower values are better.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultMatrix {
    row_labels: Vec<String>,
    methods: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl ResultMatrix {
    pub fn new(row_labels: Vec<String>, methods: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidMatrix(msg));
        if methods.len() < 2 {
            return bad(format!("need at least 2 methods, got {}", methods.len()));
        }
        if values.len() < 2 {
            return bad(format!("need at least 2 rows, got {}", values.len()));
        }
        if row_labels.len() != values.len() {
            return bad(format!("{} row labels for {} rows", row_labels.len(), values.len()));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != methods.len() {
                return bad(format!(
                    "row {} has {} values, expected {}",
                    i + 1,
                    row.len(),
                    methods.len()
                ));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return bad(format!("row {} has a non-finite value", i + 1));
            }
        }
        Ok(Self {
            row_labels,
            methods,
            values,
        })
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn methods(&self) -> &[String] {
        &self.methods
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Number of rows (N).
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Number of methods (k).
    pub fn k(&self) -> usize {
        self.methods.len()
    }

    pub fn column_means(&self) -> Vec<f64> {
        let n = self.n() as f64;
        (0..self.k())
            .map(|j| self.values.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect()
    }

    /// CSV layout: a header `row,<method>...` then one line per row with
    /// its label first.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let header = rdr.headers()?.clone();
        if header.len() < 3 {
            return Err(Error::InvalidMatrix(
                "header needs a label column and 2+ methods".into(),
            ));
        }
        let methods: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut labels = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            labels.push(rec.get(0).unwrap_or_default().to_string());
            let row = rec
                .iter()
                .skip(1)
                .map(|cell| {
                    cell.parse::<f64>()
                        .map_err(|_| Error::InvalidMatrix(format!("not a number: {cell:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            values.push(row);
        }
        Self::new(labels, methods, values)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["row".to_string()];
        header.extend(self.methods.iter().cloned());
        wtr.write_record(&header)?;
        for (label, row) in self.row_labels.iter().zip(&self.values) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::read_csv(File::open(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.write_csv(File::create(path).map_err(|e| Error::io(path, e))?)
    }
}

/// Ascending ranks of one row; tied values share the mean of the ranks
/// they span.
pub fn rank_row(row: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
    let mut ranks = vec![0.0; row.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && row[order[j + 1]] == row[order[i]] {
            j += 1;
        }
        // Positions i..=j hold ranks i+1..=j+1.
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = mid;
        }
        i = j + 1;
    }
    ranks
}

/// Column means of the per-row mid-ranks.
pub fn average_ranks(m: &ResultMatrix) -> Vec<f64> {
    let mut sums = vec![0.0; m.k()];
    for row in &m.values {
        for (s, r) in sums.iter_mut().zip(rank_row(row)) {
            *s += r;
        }
    }
    sums.into_iter().map(|s| s / m.n() as f64).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Significance {
    #[serde(rename = "0.05")]
    P05,
    #[serde(rename = "0.10")]
    P10,
}

impl Significance {
    pub fn level(self) -> f64 {
        match self {
            Significance::P05 => 0.05,
            Significance::P10 => 0.10,
        }
    }
}

impl std::str::FromStr for Significance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0.05" | ".05" => Ok(Significance::P05),
            "0.1" | "0.10" | ".1" | ".10" => Ok(Significance::P10),
            other => Err(Error::InvalidMatrix(format!(
                "unsupported significance level {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub chi_square: f64,
    pub df: usize,
    pub chi_square_critical: f64,
    pub reject: bool,
    /// Iman-Davenport statistic, F-distributed with `(k-1, (k-1)(N-1))`
    /// degrees of freedom. Infinite when every row ranks identically.
    pub iman_davenport: f64,
    pub f_df: (usize, usize),
    pub f_critical: f64,
    pub f_reject: bool,
}

/// Friedman test from average ranks over `n` rows.
pub fn friedman(ranks: &[f64], n: usize, sig: Significance) -> Result<FriedmanResult> {
    let k = ranks.len();
    if k < 2 || n < 2 {
        return Err(Error::InvalidMatrix(format!(
            "Friedman test needs k >= 2 and N >= 2, got k={k}, N={n}"
        )));
    }
    let (kf, nf) = (k as f64, n as f64);
    let sum_sq: f64 = ranks.iter().map(|r| r * r).sum();
    let chi = (12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0)).max(0.0);
    let df = k - 1;
    let chi_crit = ChiSquared::new(df as f64)
        .map_err(|e| Error::InvalidMatrix(e.to_string()))?
        .inverse_cdf(1.0 - sig.level());

    let denom = nf * (kf - 1.0) - chi;
    let ff = if denom > 0.0 {
        (nf - 1.0) * chi / denom
    } else {
        f64::INFINITY
    };
    let f_df = (k - 1, (k - 1) * (n - 1));
    let f_crit = FisherSnedecor::new(f_df.0 as f64, f_df.1 as f64)
        .map_err(|e| Error::InvalidMatrix(e.to_string()))?
        .inverse_cdf(1.0 - sig.level());
    Ok(FriedmanResult {
        chi_square: chi,
        df,
        chi_square_critical: chi_crit,
        reject: chi > chi_crit,
        iman_davenport: ff,
        f_df,
        f_critical: f_crit,
        f_reject: ff > f_crit,
    })
}

// Two-tailed Nemenyi q values (studentized range / sqrt 2) for k = 2..=10.
const Q_05: [f64; 9] = [1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164];
const Q_10: [f64; 9] = [1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920];

pub fn nemenyi_q(k: usize, sig: Significance) -> Result<f64> {
    if !(2..=10).contains(&k) {
        return Err(Error::NemenyiRange(k));
    }
    Ok(match sig {
        Significance::P05 => Q_05[k - 2],
        Significance::P10 => Q_10[k - 2],
    })
}

/// `q * sqrt(k(k+1) / 6N)`.
pub fn nemenyi_critical_difference(k: usize, n: usize, sig: Significance) -> Result<f64> {
    let q = nemenyi_q(k, sig)?;
    if n == 0 {
        return Err(Error::InvalidMatrix("N must be positive".into()));
    }
    let (kf, nf) = (k as f64, n as f64);
    Ok(q * (kf * (kf + 1.0) / (6.0 * nf)).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub a: String,
    pub b: String,
    /// `rank(b) - rank(a)`; positive means `a` ranks better.
    pub rank_difference: f64,
    pub significant: bool,
}

/// Ranks, Friedman block, Nemenyi CD and pairwise flags for one matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub methods: Vec<String>,
    pub n: usize,
    pub k: usize,
    pub column_means: Vec<f64>,
    pub average_ranks: Vec<f64>,
    pub significance: Significance,
    pub friedman: FriedmanResult,
    pub nemenyi_cd: f64,
    pub pairwise: Vec<PairwiseComparison>,
}

impl StatsReport {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }
}

pub fn analyze(m: &ResultMatrix, sig: Significance) -> Result<StatsReport> {
    let ranks = average_ranks(m);
    let friedman = friedman(&ranks, m.n(), sig)?;
    let cd = nemenyi_critical_difference(m.k(), m.n(), sig)?;
    let mut pairwise = Vec::new();
    for i in 0..m.k() {
        for j in i + 1..m.k() {
            let diff = ranks[j] - ranks[i];
            pairwise.push(PairwiseComparison {
                a: m.methods[i].clone(),
                b: m.methods[j].clone(),
                rank_difference: diff,
                significant: diff.abs() > cd,
            });
        }
    }
    Ok(StatsReport {
        methods: m.methods.clone(),
        n: m.n(),
        k: m.k(),
        column_means: m.column_means(),
        average_ranks: ranks,
        significance: sig,
        friedman,
        nemenyi_cd: cd,
        pairwise,
    })
}

/// Reference per-row JC means (30 rows, methods Full/BMC/BTC/BJC/RND)
/// for the uniform and the variable context.
pub mod fixtures {
    use super::ResultMatrix;

    const UNIFORM: &str = include_str!("../fixtures/uniform_context_means.csv");
    const VARIABLE: &str = include_str!("../fixtures/variable_context_means.csv");

    pub fn uniform_context() -> ResultMatrix {
        ResultMatrix::read_csv(UNIFORM.as_bytes()).expect("embedded fixture is valid")
    }

    pub fn variable_context() -> ResultMatrix {
        ResultMatrix::read_csv(VARIABLE.as_bytes()).expect("embedded fixture is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(rows: Vec<Vec<f64>>) -> ResultMatrix {
        let k = rows[0].len();
        ResultMatrix::new(
            (1..=rows.len()).map(|i| i.to_string()).collect(),
            (0..k).map(|j| format!("m{j}")).collect(),
            rows,
        )
        .unwrap()
    }

    #[test]
    fn mid_ranks() {
        assert_eq!(rank_row(&[0.3, 0.1, 0.2]), vec![3.0, 1.0, 2.0]);
        assert_eq!(rank_row(&[0.1, 0.2, 0.2, 0.2, 0.5]), vec![1.0, 3.0, 3.0, 3.0, 5.0]);
        assert_eq!(rank_row(&[0.4; 5]), vec![3.0; 5]);
    }

    #[test]
    fn full_ties_give_middle_rank_and_zero_statistic() {
        let m = matrix(vec![vec![0.2; 5], vec![0.7; 5]]);
        let r = average_ranks(&m);
        assert_eq!(r, vec![3.0; 5]);
        let f = friedman(&r, 2, Significance::P05).unwrap();
        assert_eq!(f.chi_square, 0.0);
        assert!(!f.reject);
    }

    #[test]
    fn hand_computed_two_method_statistic() {
        // Method 0 wins every row: ranks (1, 2), chi2 = 12*3/6 * (5 - 4.5) = 3.
        let m = matrix(vec![vec![0.1, 0.2], vec![0.3, 0.9], vec![0.0, 0.5]]);
        let r = average_ranks(&m);
        assert_eq!(r, vec![1.0, 2.0]);
        let f = friedman(&r, 3, Significance::P05).unwrap();
        assert!((f.chi_square - 3.0).abs() < 1e-12);
        assert_eq!(f.df, 1);
        assert!((f.chi_square_critical - 3.841_458_820_694_124).abs() < 1e-9);
        assert!(!f.reject);
        assert!(f.iman_davenport.is_infinite());
    }

    #[test]
    fn uniform_fixture_ranks_and_test() {
        let m = fixtures::uniform_context();
        assert_eq!((m.n(), m.k()), (30, 5));
        let r = average_ranks(&m);
        let expected = [1.5, 3.05, 3.0667, 3.05, 4.3333];
        for (a, b) in r.iter().zip(expected) {
            assert!((a - b).abs() < 1e-4, "{r:?}");
        }
        let f = friedman(&r, 30, Significance::P05).unwrap();
        assert!(f.reject);
        assert!((f.chi_square_critical - 9.487_729_036_781_154).abs() < 1e-9);
        assert!(f.f_reject);
    }

    #[test]
    fn nemenyi_values() {
        let cd = nemenyi_critical_difference(5, 30, Significance::P05).unwrap();
        assert!((cd - 2.728 * (30.0f64 / 180.0).sqrt()).abs() < 1e-12);
        assert!((cd - 1.1137).abs() < 1e-4);
        let cd2 = nemenyi_critical_difference(2, 2, Significance::P05).unwrap();
        assert!((cd2 - 1.960 / 2f64.sqrt()).abs() < 1e-12);
        let quarter = nemenyi_critical_difference(5, 120, Significance::P05).unwrap();
        assert!((quarter - cd / 2.0).abs() < 1e-12);
        assert!(nemenyi_critical_difference(5, 30, Significance::P10).unwrap() < cd);
        assert!(matches!(nemenyi_q(11, Significance::P05), Err(Error::NemenyiRange(11))));
        assert!(nemenyi_q(1, Significance::P10).is_err());
    }

    #[test]
    fn matrix_validation_and_csv_round_trip() {
        assert!(ResultMatrix::new(vec!["a".into()], vec!["x".into(), "y".into()], vec![vec![1.0, 2.0]]).is_err());
        assert!(ResultMatrix::new(
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y".into()],
            vec![vec![1.0, 2.0], vec![1.0]]
        )
        .is_err());
        let m = fixtures::variable_context();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(ResultMatrix::read_csv(buf.as_slice()).unwrap(), m);
        assert!(ResultMatrix::read_csv("row,a,b\n1,0.1,x\n2,0.2,0.3\n".as_bytes()).is_err());
    }

    #[test]
    fn report_flags_pairs_beyond_cd() {
        let rep = analyze(&fixtures::uniform_context(), Significance::P05).unwrap();
        assert_eq!(rep.pairwise.len(), 10);
        let full_rnd = rep.pairwise.iter().find(|p| p.a == "Full" && p.b == "RND").unwrap();
        assert!(full_rnd.significant);
        let bmc_bjc = rep.pairwise.iter().find(|p| p.a == "BMC" && p.b == "BJC").unwrap();
        assert!(!bmc_bjc.significant);
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("\"significance\":\"0.05\""));
    }

    fn rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
        (2usize..7).prop_flat_map(|k| {
            prop::collection::vec(prop::collection::vec((0u8..6).prop_map(|v| v as f64 / 5.0), k), 2..12)
        })
    }

    proptest! {
        #[test]
        fn rank_rows_sum_to_triangular(row in prop::collection::vec((0u8..4).prop_map(f64::from), 1..12)) {
            let k = row.len() as f64;
            let s: f64 = rank_row(&row).iter().sum();
            prop_assert_eq!(s, k * (k + 1.0) / 2.0);
        }

        #[test]
        fn ranks_survive_monotone_transforms(rows in rows()) {
            let m = matrix(rows.clone());
            let t = matrix(rows.iter().map(|r| r.iter().map(|v| (3.0 * v).exp() + 1.0).collect()).collect());
            prop_assert_eq!(average_ranks(&m), average_ranks(&t));
        }

        #[test]
        fn statistic_ignores_column_order(rows in rows()) {
            let m = matrix(rows.clone());
            let rev = matrix(rows.iter().map(|r| r.iter().rev().copied().collect()).collect());
            let a = friedman(&average_ranks(&m), m.n(), Significance::P05).unwrap();
            let b = friedman(&average_ranks(&rev), rev.n(), Significance::P05).unwrap();
            prop_assert!((a.chi_square - b.chi_square).abs() < 1e-9);
            let mut ra = average_ranks(&m);
            ra.reverse();
            prop_assert_eq!(ra, average_ranks(&rev));
        }
    }
}
