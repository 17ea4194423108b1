//! Datasets with explicit missing values: CSV loading with kind inference,
//! stratified splitting and attribute masking.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureConfiguration;

pub const DEFAULT_MISSING_TOKEN: &str = "?";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    Numeric,
    Nominal(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub name: String,
    pub kind: AttributeKind,
}

impl AttributeSchema {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Numeric,
        }
    }

    pub fn nominal(name: impl Into<String>, values: &[&str]) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Nominal(values.iter().map(|v| v.to_string()).collect()),
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, AttributeKind::Numeric)
    }
}

/// One attribute value; `Null` marks a missing or masked test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Null,
    Numeric(f64),
    Nominal(u32),
}

impl Value {
    #[inline]
    pub fn is_null(self) -> bool {
        matches!(self, Value::Null)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    values: Vec<Value>,
    label: Option<usize>,
}

impl Instance {
    pub fn new(values: Vec<Value>, label: Option<usize>) -> Self {
        Self { values, label }
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn width(&self) -> usize {
        self.values.len()
    }

    pub fn is_all_null(&self) -> bool {
        self.values.iter().all(|v| v.is_null())
    }
}

/// An immutable labelled (or unlabelled) multiset of instances.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    schema: Vec<AttributeSchema>,
    classes: Vec<String>,
    instances: Vec<Instance>,
}

impl Dataset {
    /// Validates every structural invariant: unique attribute names,
    /// non-empty duplicate-free nominal lists, at least two classes, and
    /// per-instance widths, nominal indices and labels in range.
    pub fn new(schema: Vec<AttributeSchema>, classes: Vec<String>, instances: Vec<Instance>) -> Result<Self> {
        validate_schema(&schema, &classes)?;
        for (i, x) in instances.iter().enumerate() {
            if x.width() != schema.len() {
                return Err(Error::WidthMismatch {
                    expected: schema.len(),
                    found: x.width(),
                });
            }
            for (v, attr) in x.values.iter().zip(&schema) {
                match (v, &attr.kind) {
                    (Value::Null, _) | (Value::Numeric(_), AttributeKind::Numeric) => {}
                    (Value::Nominal(k), AttributeKind::Nominal(vals)) if (*k as usize) < vals.len() => {}
                    _ => {
                        return Err(Error::Schema(format!(
                            "instance {i}: value {v:?} does not fit attribute {:?}",
                            attr.name
                        )))
                    }
                }
            }
            if let Some(y) = x.label {
                if y >= classes.len() {
                    return Err(Error::ClassOutOfRange {
                        index: y,
                        classes: classes.len(),
                    });
                }
            }
        }
        Ok(Self {
            schema,
            classes,
            instances,
        })
    }

    pub fn schema(&self) -> &[AttributeSchema] {
        &self.schema
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    /// Number of attributes.
    pub fn m(&self) -> usize {
        self.schema.len()
    }

    /// Number of instances.
    pub fn n(&self) -> usize {
        self.instances.len()
    }

    /// Number of classes.
    pub fn c(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn is_labeled(&self) -> bool {
        self.instances.iter().all(|x| x.label.is_some())
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.c()];
        for y in self.instances.iter().filter_map(|x| x.label) {
            counts[y] += 1;
        }
        counts
    }

    /// Same schema and classes, instances picked by index (repeats allowed).
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            classes: self.classes.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }

    /// Same schema and classes with replacement instances, revalidated.
    pub fn with_instances(&self, instances: Vec<Instance>) -> Result<Dataset> {
        Dataset::new(self.schema.clone(), self.classes.clone(), instances)
    }
}

fn validate_schema(schema: &[AttributeSchema], classes: &[String]) -> Result<()> {
    if classes.len() < 2 {
        return Err(Error::Schema(format!(
            "need at least two classes, got {}",
            classes.len()
        )));
    }
    if has_duplicates(classes.iter()) {
        return Err(Error::Schema("duplicate class names".into()));
    }
    if has_duplicates(schema.iter().map(|a| &a.name)) {
        return Err(Error::Schema("duplicate attribute names".into()));
    }
    for attr in schema {
        if let AttributeKind::Nominal(vals) = &attr.kind {
            if vals.is_empty() {
                return Err(Error::Schema(format!(
                    "nominal attribute {:?} has no values",
                    attr.name
                )));
            }
            if has_duplicates(vals.iter()) {
                return Err(Error::Schema(format!(
                    "nominal attribute {:?} lists a value twice",
                    attr.name
                )));
            }
        }
    }
    Ok(())
}

fn has_duplicates<'a>(items: impl Iterator<Item = &'a String>) -> bool {
    let mut seen = std::collections::HashSet::new();
    items.into_iter().any(|s| !seen.insert(s))
}

/// Which CSV column holds the class.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
    Name(String),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "last" => LabelColumn::Last,
            _ => match s.parse::<usize>() {
                Ok(i) => LabelColumn::Index(i),
                Err(_) => LabelColumn::Name(s.to_string()),
            },
        })
    }
}

#[derive(Clone, Debug)]
pub struct LoadOptions {
    pub missing_token: String,
    pub label_column: LabelColumn,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            missing_token: DEFAULT_MISSING_TOKEN.to_string(),
            label_column: LabelColumn::Last,
        }
    }
}

/// Sidecar overriding kind inference: attribute names and kinds in column
/// order (label column excluded) plus the class list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemaFile {
    pub attributes: Vec<AttributeSchema>,
    pub classes: Vec<String>,
}

impl SchemaFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(file)?)
    }
}

pub fn load_csv(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Dataset> {
    load_csv_with_schema(path, opts, None)
}

pub fn load_csv_with_schema(
    path: impl AsRef<Path>,
    opts: &LoadOptions,
    schema: Option<&SchemaFile>,
) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, opts, schema)
}

/// Parses CSV text with a header row. Cells equal to the missing token
/// become [`Value::Null`]; without a schema, a column whose non-missing
/// cells all parse as numbers is numeric and any other column is nominal.
pub fn read_csv<R: Read>(reader: R, opts: &LoadOptions, schema: Option<&SchemaFile>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let width = header.len();
    let label_idx = match &opts.label_column {
        LabelColumn::Last if width > 0 => width - 1,
        LabelColumn::Last => return Err(Error::MissingLabelColumn("last".into())),
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(i) => return Err(Error::MissingLabelColumn(i.to_string())),
        LabelColumn::Name(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingLabelColumn(name.clone()))?,
    };

    let mut rows: Vec<(u64, Vec<String>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != width {
            return Err(Error::RaggedRow {
                line,
                expected: width,
                found: rec.len(),
            });
        }
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let attr_cols: Vec<usize> = (0..width).filter(|&j| j != label_idx).collect();
    let missing = opts.missing_token.as_str();

    let (attributes, classes) = match schema {
        Some(sf) => {
            if sf.attributes.len() != attr_cols.len() {
                return Err(Error::Schema(format!(
                    "schema lists {} attributes, file has {}",
                    sf.attributes.len(),
                    attr_cols.len()
                )));
            }
            (sf.attributes.clone(), sf.classes.clone())
        }
        None => {
            let attributes = attr_cols
                .iter()
                .map(|&j| infer_attribute(&header[j], rows.iter().map(|(_, r)| r[j].as_str()), missing))
                .collect();
            let mut classes: Vec<String> = Vec::new();
            for (line, r) in &rows {
                let cell = &r[label_idx];
                if cell == missing {
                    return Err(Error::MissingLabel { line: *line });
                }
                if !classes.iter().any(|c| c == cell) {
                    classes.push(cell.clone());
                }
            }
            (attributes, classes)
        }
    };
    validate_schema(&attributes, &classes)?;

    let class_index: HashMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let nominal_index: Vec<Option<HashMap<&str, u32>>> = attributes
        .iter()
        .map(|a| match &a.kind {
            AttributeKind::Numeric => None,
            AttributeKind::Nominal(vals) => {
                Some(vals.iter().enumerate().map(|(i, v)| (v.as_str(), i as u32)).collect())
            }
        })
        .collect();

    let mut instances = Vec::with_capacity(rows.len());
    for (line, r) in &rows {
        let mut values = Vec::with_capacity(attr_cols.len());
        for (a, &j) in attr_cols.iter().enumerate() {
            let cell = r[j].as_str();
            let v = if cell == missing {
                Value::Null
            } else {
                match &nominal_index[a] {
                    None => Value::Numeric(cell.parse::<f64>().map_err(|_| {
                        Error::Schema(format!(
                            "line {line}: {cell:?} is not numeric for attribute {:?}",
                            attributes[a].name
                        ))
                    })?),
                    Some(map) => Value::Nominal(*map.get(cell).ok_or_else(|| {
                        Error::Schema(format!(
                            "line {line}: {cell:?} is not a declared value of {:?}",
                            attributes[a].name
                        ))
                    })?),
                }
            };
            values.push(v);
        }
        let cell = r[label_idx].as_str();
        if cell == missing {
            return Err(Error::MissingLabel { line: *line });
        }
        let y = *class_index
            .get(cell)
            .ok_or_else(|| Error::Schema(format!("line {line}: unknown class {cell:?}")))?;
        instances.push(Instance::new(values, Some(y)));
    }
    Dataset::new(attributes, classes, instances)
}

fn infer_attribute<'a>(name: &str, cells: impl Iterator<Item = &'a str> + Clone, missing: &str) -> AttributeSchema {
    let present = cells.filter(|c| *c != missing);
    if present.clone().all(|c| c.parse::<f64>().is_ok()) {
        return AttributeSchema::numeric(name);
    }
    let mut values: Vec<String> = Vec::new();
    for c in present {
        if !values.iter().any(|v| v == c) {
            values.push(c.to_string());
        }
    }
    AttributeSchema {
        name: name.to_string(),
        kind: AttributeKind::Nominal(values),
    }
}

/// Stratified, seeded partition of `d` into `fractions.len()` disjoint parts.
///
/// Part sizes are the largest-remainder rounding of `n * fraction`; each
/// class is then spread over the parts in proportion, again by largest
/// remainder, subject to those part totals. Instances keep their original
/// relative order inside each part.
pub fn split_dataset(d: &Dataset, fractions: &[f64], seed: u64) -> Result<Vec<Dataset>> {
    if fractions.is_empty()
        || fractions.iter().any(|f| *f <= 0.0 || !f.is_finite())
        || (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(Error::InvalidFractions(fractions.to_vec()));
    }
    if !d.is_labeled() {
        return Err(Error::Unlabeled);
    }
    let parts = fractions.len();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); d.c()];
    for (i, x) in d.instances.iter().enumerate() {
        by_class[x.label.unwrap()].push(i);
    }
    for (y, members) in by_class.iter().enumerate() {
        if !members.is_empty() && members.len() < parts {
            return Err(Error::ClassTooSmall {
                class: d.classes[y].clone(),
                count: members.len(),
                parts,
            });
        }
    }

    let targets = largest_remainder(d.n(), fractions);
    let class_sizes: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let alloc = allocate_strata(&class_sizes, fractions, &targets);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); parts];
    for (y, members) in by_class.iter_mut().enumerate() {
        members.shuffle(&mut rng);
        let mut start = 0;
        for (p, part) in assigned.iter_mut().enumerate() {
            let take = alloc[y][p];
            part.extend_from_slice(&members[start..start + take]);
            start += take;
        }
    }
    Ok(assigned
        .into_iter()
        .map(|mut idx| {
            idx.sort_unstable();
            d.select(&idx)
        })
        .collect())
}

fn largest_remainder(total: usize, fractions: &[f64]) -> Vec<usize> {
    let quotas: Vec<f64> = fractions.iter().map(|f| f * total as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut left = total.saturating_sub(counts.iter().sum());
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &p in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[p] += 1;
        left -= 1;
    }
    counts
}

/// Per-class, per-part counts whose rows sum to the class sizes and whose
/// columns sum to `targets`.
fn allocate_strata(class_sizes: &[usize], fractions: &[f64], targets: &[usize]) -> Vec<Vec<usize>> {
    let parts = fractions.len();
    let quota = |y: usize, p: usize| fractions[p] * class_sizes[y] as f64;
    let mut alloc: Vec<Vec<usize>> = class_sizes
        .iter()
        .enumerate()
        .map(|(y, _)| (0..parts).map(|p| quota(y, p).floor() as usize).collect())
        .collect();
    let mut row_left: Vec<usize> = class_sizes
        .iter()
        .zip(&alloc)
        .map(|(n, row)| n - row.iter().sum::<usize>())
        .collect();
    let mut col_left: Vec<isize> = (0..parts)
        .map(|p| targets[p] as isize - alloc.iter().map(|row| row[p]).sum::<usize>() as isize)
        .collect();

    let mut cells: Vec<(usize, usize)> = (0..class_sizes.len())
        .flat_map(|y| (0..parts).map(move |p| (y, p)))
        .collect();
    cells.sort_by(|&(ya, pa), &(yb, pb)| {
        let ra = quota(ya, pa).fract();
        let rb = quota(yb, pb).fract();
        rb.total_cmp(&ra).then((ya, pa).cmp(&(yb, pb)))
    });
    // One extra unit per cell by remainder, then any feasible cell.
    for &(y, p) in &cells {
        if row_left[y] > 0 && col_left[p] > 0 {
            alloc[y][p] += 1;
            row_left[y] -= 1;
            col_left[p] -= 1;
        }
    }
    for &(y, p) in &cells {
        while row_left[y] > 0 && col_left[p] > 0 {
            alloc[y][p] += 1;
            row_left[y] -= 1;
            col_left[p] -= 1;
        }
    }
    alloc
}

/// Copy of `x` with every attribute outside `cfg` set to null.
pub fn mask_instance(x: &Instance, cfg: FeatureConfiguration) -> Result<Instance> {
    let mut values = Vec::with_capacity(x.width());
    mask_values_into(x.values(), cfg, &mut values)?;
    Ok(Instance::new(values, x.label))
}

pub(crate) fn mask_values_into(values: &[Value], cfg: FeatureConfiguration, out: &mut Vec<Value>) -> Result<()> {
    if cfg.width() != values.len() {
        return Err(Error::WidthMismatch {
            expected: values.len(),
            found: cfg.width(),
        });
    }
    out.clear();
    out.extend(
        values
            .iter()
            .enumerate()
            .map(|(j, &v)| if cfg.contains(j) { v } else { Value::Null }),
    );
    Ok(())
}
