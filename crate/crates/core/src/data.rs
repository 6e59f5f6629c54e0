//! Datasets, schemas, imputation and splitting.
//!
//! A schema file declares the CSV columns in order:
//!
//! ```text
//! feature <name> numeric
//! feature <name> categorical v1,v2,...
//! class <name> c1,c2,...
//! ```
//!
//! Data files are headerless CSV with one example per line. `?` or an
//! empty cell marks a missing feature value, imputed with the column mean
//! (numeric) or most frequent value (categorical) of the data it was first
//! loaded from. Those statistics are stored in the [`Schema`] so later
//! files loaded against it are imputed identically.

use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FeatureKind {
    Numeric,
    Categorical(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    /// Value substituted for missing cells; a category index for
    /// categorical features.
    pub impute: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub features: Vec<FeatureSpec>,
    pub class_name: String,
    pub class_names: Vec<String>,
    /// Position of the class column among all CSV columns.
    pub class_position: usize,
}

impl Schema {
    pub fn arity(&self) -> usize {
        self.features.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn is_numeric(&self) -> bool {
        self.features.iter().all(|f| f.kind == FeatureKind::Numeric)
    }

    pub fn has_imputation(&self) -> bool {
        self.features.iter().all(|f| f.impute.is_some())
    }

    pub fn numeric(names: &[&str], class_names: &[&str]) -> Schema {
        Schema {
            features: names
                .iter()
                .map(|n| FeatureSpec {
                    name: n.to_string(),
                    kind: FeatureKind::Numeric,
                    impute: None,
                })
                .collect(),
            class_name: "class".into(),
            class_names: class_names.iter().map(|s| s.to_string()).collect(),
            class_position: names.len(),
        }
    }
}

pub fn parse_schema(text: &str, source_name: &str) -> Result<Schema> {
    let err = |line: usize, message: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    };
    let mut features = Vec::new();
    let mut class: Option<(String, Vec<String>, usize)> = None;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let list = |s: &str| -> Vec<String> {
            s.split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect()
        };
        match parts.as_slice() {
            ["feature", name, "numeric"] => features.push(FeatureSpec {
                name: name.to_string(),
                kind: FeatureKind::Numeric,
                impute: None,
            }),
            ["feature", name, "categorical", values] => {
                let vocab = list(values);
                if vocab.is_empty() {
                    return Err(err(ln, format!("feature {name} has no categories")));
                }
                features.push(FeatureSpec {
                    name: name.to_string(),
                    kind: FeatureKind::Categorical(vocab),
                    impute: None,
                });
            }
            ["class", name, values] => {
                if class.is_some() {
                    return Err(err(ln, "more than one class column".into()));
                }
                let names = list(values);
                if names.len() < 2 {
                    return Err(err(ln, "need at least two classes".into()));
                }
                class = Some((name.to_string(), names, features.len()));
            }
            _ => return Err(err(ln, format!("unrecognized schema line {line:?}"))),
        }
    }
    let (class_name, class_names, class_position) =
        class.ok_or_else(|| err(0, "schema declares no class column".into()))?;
    Ok(Schema {
        features,
        class_name,
        class_names,
        class_position,
    })
}

pub fn read_schema(path: &Path) -> Result<Schema> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_schema(&text, &path.display().to_string())
}

/// Feature rows plus class labels. Categorical values are stored as
/// vocabulary indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema: Schema,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn new(schema: Schema, rows: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let arity = schema.arity();
        let k = schema.n_classes();
        for (i, (r, &l)) in rows.iter().zip(&labels).enumerate() {
            if r.len() != arity {
                return Err(Error::invalid(format!(
                    "row {i} has {} features, schema has {arity}",
                    r.len()
                )));
            }
            if l >= k {
                return Err(Error::invalid(format!("row {i} has label {l} >= {k}")));
            }
            for (j, f) in schema.features.iter().enumerate() {
                if let FeatureKind::Categorical(v) = &f.kind {
                    let x = r[j];
                    if x.fract() != 0.0 || x < 0.0 || x as usize >= v.len() {
                        return Err(Error::invalid(format!(
                            "row {i} feature {} has category index {x}",
                            f.name
                        )));
                    }
                }
            }
        }
        Ok(Dataset { schema, rows, labels })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.schema.n_classes()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_classes()];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    /// Indices of each class, in row order.
    pub fn class_indices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_classes()];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

enum Cell {
    Missing,
    Value(f64),
}

/// Parse CSV text against `schema`. When the schema carries no imputation
/// statistics they are computed from this data and returned in the
/// dataset's schema.
pub fn parse_data(text: &str, schema: &Schema, source_name: &str) -> Result<Dataset> {
    let err = |line: usize, message: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    };
    let ncols = schema.arity() + 1;
    let mut cells: Vec<Vec<Cell>> = Vec::new();
    let mut labels = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != ncols {
            return Err(err(ln, format!("expected {ncols} columns, found {}", fields.len())));
        }
        let mut row = Vec::with_capacity(schema.arity());
        let mut feat = schema.features.iter();
        for (col, field) in fields.iter().enumerate() {
            if col == schema.class_position {
                let l = schema
                    .class_names
                    .iter()
                    .position(|c| c == field)
                    .ok_or_else(|| err(ln, format!("column {}: unknown class {field:?}", col + 1)))?;
                labels.push(l);
                continue;
            }
            let f = feat.next().expect("column count checked");
            if *field == "?" || field.is_empty() {
                row.push(Cell::Missing);
                continue;
            }
            let v = match &f.kind {
                FeatureKind::Numeric => field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(ln, format!("column {} ({}): not a number: {field:?}", col + 1, f.name)))?,
                FeatureKind::Categorical(vocab) => vocab.iter().position(|c| c == field).ok_or_else(|| {
                    err(
                        ln,
                        format!("column {} ({}): unknown category {field:?}", col + 1, f.name),
                    )
                })? as f64,
            };
            row.push(Cell::Value(v));
        }
        cells.push(row);
    }

    let mut schema = schema.clone();
    if !schema.has_imputation() {
        for (j, f) in schema.features.iter_mut().enumerate() {
            let observed = cells.iter().filter_map(|r| match r[j] {
                Cell::Value(v) => Some(v),
                Cell::Missing => None,
            });
            f.impute = Some(match &f.kind {
                FeatureKind::Numeric => {
                    let (sum, n) = observed.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
                    if n == 0 {
                        0.0
                    } else {
                        sum / n as f64
                    }
                }
                FeatureKind::Categorical(vocab) => {
                    let mut counts = vec![0usize; vocab.len()];
                    for v in observed {
                        counts[v as usize] += 1;
                    }
                    let mut best = 0;
                    for (c, &n) in counts.iter().enumerate() {
                        if n > counts[best] {
                            best = c;
                        }
                    }
                    best as f64
                }
            });
        }
    }
    let rows = cells
        .into_iter()
        .map(|r| {
            r.into_iter()
                .zip(&schema.features)
                .map(|(c, f)| match c {
                    Cell::Value(v) => v,
                    Cell::Missing => f.impute.expect("imputation computed"),
                })
                .collect()
        })
        .collect();
    Dataset::new(schema, rows, labels)
}

/// Load a data file against a schema file, computing imputation statistics
/// from this data.
pub fn load_dataset(data_path: &Path, schema_path: &Path) -> Result<Dataset> {
    let schema = read_schema(schema_path)?;
    load_with_schema(data_path, &schema)
}

/// Load a data file against an existing schema, reusing its imputation
/// statistics when present.
pub fn load_with_schema(data_path: &Path, schema: &Schema) -> Result<Dataset> {
    let text = std::fs::read_to_string(data_path).map_err(|e| Error::io(data_path, e))?;
    parse_data(&text, schema, &data_path.display().to_string())
}

/// Seeded split into two parts; the first gets about `fraction` of the
/// rows (of each class, when stratified).
pub fn split(data: &Dataset, fraction: f64, seed: u64, stratified: bool) -> Result<(Dataset, Dataset)> {
    let (a, b) = split_indices(data, fraction, seed, stratified)?;
    Ok((data.subset(&a), data.subset(&b)))
}

pub fn split_indices(data: &Dataset, fraction: f64, seed: u64, stratified: bool) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!("split fraction {fraction} outside (0, 1)")));
    }
    let mut rng = seed::rng_from_seed(seed);
    let mut first = Vec::new();
    let mut second = Vec::new();
    let groups = if stratified {
        data.class_indices()
    } else {
        vec![(0..data.len()).collect()]
    };
    for mut g in groups {
        g.shuffle(&mut rng);
        let cut = (fraction * g.len() as f64).round() as usize;
        first.extend_from_slice(&g[..cut]);
        second.extend_from_slice(&g[cut..]);
    }
    if first.is_empty() || second.is_empty() {
        return Err(Error::invalid(format!(
            "split of {} rows at {fraction} leaves an empty side",
            data.len()
        )));
    }
    first.sort_unstable();
    second.sort_unstable();
    Ok((first, second))
}

/// How one input feature maps onto encoded numeric columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ColumnEncoding {
    Standardize { mean: f64, scale: f64 },
    OneHot { categories: usize },
}

/// Categorical one-hot expansion plus numeric standardization, with
/// statistics fitted on training data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub columns: Vec<ColumnEncoding>,
    pub output_schema: Schema,
}

impl Encoder {
    pub fn fit(data: &Dataset) -> Encoder {
        let n = data.len().max(1) as f64;
        let mut columns = Vec::new();
        let mut features = Vec::new();
        for (j, f) in data.schema.features.iter().enumerate() {
            match &f.kind {
                FeatureKind::Numeric => {
                    let mean = data.rows.iter().map(|r| r[j]).sum::<f64>() / n;
                    let var = data.rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
                    let sd = var.sqrt();
                    let scale = if sd > 0.0 { sd } else { 1.0 };
                    columns.push(ColumnEncoding::Standardize { mean, scale });
                    features.push(FeatureSpec {
                        name: f.name.clone(),
                        kind: FeatureKind::Numeric,
                        impute: Some(0.0),
                    });
                }
                FeatureKind::Categorical(vocab) => {
                    columns.push(ColumnEncoding::OneHot {
                        categories: vocab.len(),
                    });
                    for v in vocab {
                        features.push(FeatureSpec {
                            name: format!("{}={v}", f.name),
                            kind: FeatureKind::Numeric,
                            impute: Some(0.0),
                        });
                    }
                }
            }
        }
        let class_position = features.len();
        Encoder {
            columns,
            output_schema: Schema {
                features,
                class_name: data.schema.class_name.clone(),
                class_names: data.schema.class_names.clone(),
                class_position,
            },
        }
    }

    pub fn encode_row(&self, row: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.output_schema.arity());
        for (enc, &x) in self.columns.iter().zip(row) {
            match *enc {
                ColumnEncoding::Standardize { mean, scale } => out.push((x - mean) / scale),
                ColumnEncoding::OneHot { categories } => {
                    out.extend((0..categories).map(|c| if c == x as usize { 1.0 } else { 0.0 }))
                }
            }
        }
        out
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        if data.schema.arity() != self.columns.len() {
            return Err(Error::invalid(format!(
                "encoder fitted on {} features applied to {}",
                self.columns.len(),
                data.schema.arity()
            )));
        }
        let rows = data.rows.iter().map(|r| self.encode_row(r)).collect();
        Dataset::new(self.output_schema.clone(), rows, data.labels.clone())
    }
}

/// One-hot encode categorical features and standardize numeric ones using
/// statistics of `data` itself.
pub fn encode_numeric(data: &Dataset) -> Result<(Dataset, Encoder)> {
    let enc = Encoder::fit(data);
    let out = enc.apply(data)?;
    Ok((out, enc))
}
