//! Training and decoding.
//!
//! Three schemes share one prediction interface:
//!
//! * `Ecoc`: one bit function per code column, decoded to the nearest
//!   codeword under L1 distance (lowest class index on exact ties).
//! * `OnePerClass`: the identity code, decoded by the highest activation.
//! * `Multiclass`: a single multiclass tree, decoded by the most probable
//!   class.
//!
//! Tree learners train every column independently, so columns can be
//! trained on several threads with results identical to sequential
//! training. Network learners train one network with an output per column.

mod bundle;
mod decode;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::codes::{one_per_class, CodeMatrix};
use crate::data::{encode_numeric, Dataset, Encoder, Schema};
use crate::error::{Error, Result};
use crate::learners::{BitLearner, BitPredictor, DecisionTree, LearnerRegistry, TreeOptions};

pub use bundle::{load_bundle, save_bundle, BundleManifest, BUNDLE_FORMAT};
pub use decode::{decode_argmax, decode_distribution, decode_l1, l1_distance, PredictionRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Ecoc,
    OnePerClass,
    Multiclass,
}

/// Direct multiclass tree wrapped as a predictor with one output per class.
#[derive(Clone, Debug, PartialEq)]
pub struct MulticlassTree {
    pub tree: DecisionTree,
}

impl BitPredictor for MulticlassTree {
    fn n_outputs(&self) -> usize {
        self.tree.n_classes
    }

    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.tree.distribution(x)
    }

    fn files(&self) -> Vec<(String, String)> {
        vec![("multiclass.tree".into(), self.tree.to_text())]
    }

    fn leaf_counts(&self) -> Vec<usize> {
        vec![self.tree.leaf_count()]
    }
}

#[derive(Debug)]
pub struct EcocModel {
    pub scheme: Scheme,
    /// Code matrix; absent for the multiclass scheme.
    pub code: Option<CodeMatrix>,
    pub learner: String,
    pub learner_options: Value,
    pub seed: u64,
    /// Schema of raw input rows, including imputation values.
    pub schema: Schema,
    /// Applied to raw rows before prediction when the learner needs
    /// numeric input.
    pub encoder: Option<Encoder>,
    pub predictor: Box<dyn BitPredictor>,
    /// Columns whose training targets were all equal.
    pub constant_columns: Vec<usize>,
}

impl EcocModel {
    pub fn n_classes(&self) -> usize {
        self.schema.n_classes()
    }

    pub fn class_names(&self) -> &[String] {
        &self.schema.class_names
    }

    /// Bit probabilities (or class probabilities) for a raw feature row.
    pub fn bit_probs(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.schema.arity() {
            return Err(Error::invalid(format!(
                "feature vector of length {} for a model over {} features",
                x.len(),
                self.schema.arity()
            )));
        }
        match &self.encoder {
            Some(e) => self.predictor.predict(&e.encode_row(x)),
            None => self.predictor.predict(x),
        }
    }

    pub fn classify(&self, x: &[f64]) -> Result<PredictionRecord> {
        let b = self.bit_probs(x)?;
        match self.scheme {
            Scheme::Ecoc => decode_l1(b, self.code.as_ref().expect("ecoc model has a code")),
            Scheme::OnePerClass => decode_argmax(b),
            Scheme::Multiclass => decode_distribution(b),
        }
    }

    /// Classify every row of `data`, recording the true classes.
    pub fn classify_dataset(&self, data: &Dataset) -> Result<Vec<PredictionRecord>> {
        self.check_schema(&data.schema)?;
        data.rows
            .iter()
            .zip(&data.labels)
            .map(|(x, &y)| {
                let mut r = self.classify(x)?;
                r.true_class = Some(y);
                Ok(r)
            })
            .collect()
    }

    /// Whether `schema` describes the same features and classes.
    pub fn check_schema(&self, schema: &Schema) -> Result<()> {
        if schema.class_names != self.schema.class_names {
            return Err(Error::invalid(format!(
                "data classes [{}] differ from model classes [{}]",
                schema.class_names.join(","),
                self.schema.class_names.join(",")
            )));
        }
        let same = schema.features.len() == self.schema.features.len()
            && schema
                .features
                .iter()
                .zip(&self.schema.features)
                .all(|(a, b)| a.name == b.name && a.kind == b.kind);
        if !same {
            return Err(Error::invalid("data features differ from the model's schema"));
        }
        Ok(())
    }

    pub fn leaf_counts(&self) -> Vec<usize> {
        self.predictor.leaf_counts()
    }
}

/// Targets of column `j`: example of class `i` gets `code[i][j]`.
pub fn relabel(data: &Dataset, code: &CodeMatrix, j: usize) -> Result<Vec<u8>> {
    if j >= code.n() {
        return Err(Error::invalid(format!("column {j} of a {}-column code", code.n())));
    }
    data.labels
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            if c >= code.k() {
                Err(Error::invalid(format!(
                    "example {i} has class {c} but the code has {} rows",
                    code.k()
                )))
            } else {
                Ok(u8::from(code.bit(c, j)))
            }
        })
        .collect()
}

fn prepare(data: &Dataset, learner: &dyn BitLearner) -> Result<(Dataset, Option<Encoder>)> {
    if learner.needs_numeric() {
        let (d, e) = encode_numeric(data)?;
        Ok((d, Some(e)))
    } else {
        Ok((data.clone(), None))
    }
}

fn fit_code(
    data: &Dataset,
    code: &CodeMatrix,
    scheme: Scheme,
    learner: &dyn BitLearner,
    seed: u64,
    jobs: usize,
) -> Result<EcocModel> {
    if data.is_empty() {
        return Err(Error::invalid("cannot train on an empty dataset"));
    }
    if data.n_classes() != code.k() {
        return Err(Error::invalid(format!(
            "dataset has {} classes but the code has {} rows",
            data.n_classes(),
            code.k()
        )));
    }
    let columns = (0..code.n())
        .map(|j| relabel(data, code, j))
        .collect::<Result<Vec<_>>>()?;
    let constant_columns = columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.iter().all(|&b| b == c[0]))
        .map(|(j, _)| j)
        .collect();
    let (train, encoder) = prepare(data, learner)?;
    let predictor = learner.fit(&train, &columns, seed, jobs)?;
    Ok(EcocModel {
        scheme,
        code: Some(code.clone()),
        learner: learner.name().to_string(),
        learner_options: learner.options(),
        seed,
        schema: data.schema.clone(),
        encoder,
        predictor,
        constant_columns,
    })
}

/// One bit function per column of `code`. `jobs > 1` trains tree columns
/// in parallel with identical results.
pub fn train_ecoc(
    data: &Dataset,
    code: &CodeMatrix,
    learner: &dyn BitLearner,
    seed: u64,
    jobs: usize,
) -> Result<EcocModel> {
    fit_code(data, code, Scheme::Ecoc, learner, seed, jobs)
}

/// One-per-class baseline: `k` one-vs-rest functions, argmax decoding.
pub fn train_opc(data: &Dataset, learner: &dyn BitLearner, seed: u64, jobs: usize) -> Result<EcocModel> {
    let code = one_per_class(data.n_classes())?;
    fit_code(data, &code, Scheme::OnePerClass, learner, seed, jobs)
}

/// Direct multiclass tree baseline.
pub fn train_multiclass(data: &Dataset, opts: &TreeOptions, seed: u64) -> Result<EcocModel> {
    if data.is_empty() {
        return Err(Error::invalid("cannot train on an empty dataset"));
    }
    let tree = crate::learners::train_tree(data, &data.labels, data.n_classes(), opts)?;
    Ok(EcocModel {
        scheme: Scheme::Multiclass,
        code: None,
        learner: "tree".into(),
        learner_options: serde_json::to_value(opts).expect("options serialize"),
        seed,
        schema: data.schema.clone(),
        encoder: None,
        predictor: Box::new(MulticlassTree { tree }),
        constant_columns: Vec::new(),
    })
}

/// Which output representation to train.
#[derive(Clone, Debug, PartialEq)]
pub enum CodeChoice {
    Matrix(CodeMatrix),
    OnePerClass,
    Multiclass,
}

/// Learner name, its JSON options, master seed and thread count.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learner: String,
    pub learner_options: Option<Value>,
    pub seed: u64,
    pub jobs: usize,
}

impl TrainConfig {
    pub fn new(learner: &str, seed: u64) -> Self {
        TrainConfig {
            learner: learner.to_string(),
            learner_options: None,
            seed,
            jobs: 1,
        }
    }
}

/// Train any scheme with a learner looked up in `registry`.
pub fn train(data: &Dataset, choice: &CodeChoice, cfg: &TrainConfig, registry: &LearnerRegistry) -> Result<EcocModel> {
    let learner = registry.create(&cfg.learner, cfg.learner_options.as_ref())?;
    match choice {
        CodeChoice::Matrix(code) => train_ecoc(data, code, learner.as_ref(), cfg.seed, cfg.jobs),
        CodeChoice::OnePerClass => train_opc(data, learner.as_ref(), cfg.seed, cfg.jobs),
        CodeChoice::Multiclass => {
            if cfg.learner != "tree" {
                return Err(Error::invalid(format!(
                    "the multiclass baseline needs the tree learner, not `{}` (use the one-per-class code instead)",
                    cfg.learner
                )));
            }
            let opts: TreeOptions =
                serde_json::from_value(learner.options()).map_err(|e| Error::invalid(format!("tree options: {e}")))?;
            train_multiclass(data, &opts, cfg.seed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::digit_code_meaningful;
    use crate::data::Schema;

    #[test]
    fn relabel_vl_column() {
        let code = digit_code_meaningful();
        let schema = Schema::numeric(&["x"], &["0", "1", "2", "3", "4", "5", "6", "7", "8", "9"]);
        let d = Dataset::new(schema, (0..10).map(|i| vec![i as f64]).collect(), (0..10).collect()).unwrap();
        let vl = relabel(&d, &code, 0).unwrap();
        assert_eq!(vl, [0, 1, 0, 0, 1, 1, 0, 0, 0, 0]);
        assert!(relabel(&d, &code, 6).is_err());
    }
}
