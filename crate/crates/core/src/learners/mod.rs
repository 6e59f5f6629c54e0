//! Base learners for the bit functions.
//!
//! | name   | predictor                                  |
//! |--------|--------------------------------------------|
//! | `tree` | one decision tree per column               |
//! | `mlp`  | one network with an output unit per column |
//!
//! Learners are looked up by name in a [`LearnerRegistry`] and configured
//! from JSON options (missing fields take their defaults).

pub mod mlp;
pub mod tree;

use std::collections::BTreeMap;
use std::fmt::Debug;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::par;

pub use mlp::{train_mlp, train_mlp_vectors, MlpGradient, MlpModel, MlpOptions, MlpReport};
pub use tree::{train_tree, DecisionTree, TreeNode, TreeOptions};

/// Trained bit functions: maps a feature vector to one probability per
/// code column.
pub trait BitPredictor: Send + Sync + Debug {
    fn n_outputs(&self) -> usize;

    fn predict(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Serialized form as `(file name, contents)` pairs.
    fn files(&self) -> Vec<(String, String)>;

    /// Leaves per column tree; empty for networks.
    fn leaf_counts(&self) -> Vec<usize> {
        Vec::new()
    }
}

/// Reads a file from a model bundle by name.
pub type FileSource<'a> = &'a dyn Fn(&str) -> Result<String>;

pub trait BitLearner: Send + Sync {
    fn name(&self) -> &'static str;

    fn options(&self) -> Value;

    /// Whether categorical features must be one-hot encoded first.
    fn needs_numeric(&self) -> bool;

    /// `columns[j][i]` is the 0/1 target of example `i` for column `j`.
    fn fit(&self, data: &Dataset, columns: &[Vec<u8>], seed: u64, jobs: usize) -> Result<Box<dyn BitPredictor>>;

    fn load(&self, files: FileSource<'_>, n_outputs: usize) -> Result<Box<dyn BitPredictor>>;
}

/// Independent binary trees, one per column.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeEnsemble {
    pub trees: Vec<DecisionTree>,
}

impl TreeEnsemble {
    fn file_name(j: usize) -> String {
        format!("bit_{j:04}.tree")
    }
}

impl BitPredictor for TreeEnsemble {
    fn n_outputs(&self) -> usize {
        self.trees.len()
    }

    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.trees.iter().map(|t| t.prob(x)).collect()
    }

    fn files(&self) -> Vec<(String, String)> {
        self.trees
            .iter()
            .enumerate()
            .map(|(j, t)| (Self::file_name(j), t.to_text()))
            .collect()
    }

    fn leaf_counts(&self) -> Vec<usize> {
        self.trees.iter().map(|t| t.leaf_count()).collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct TreeLearner {
    pub options: TreeOptions,
}

impl BitLearner for TreeLearner {
    fn name(&self) -> &'static str {
        "tree"
    }

    fn options(&self) -> Value {
        serde_json::to_value(&self.options).expect("options serialize")
    }

    fn needs_numeric(&self) -> bool {
        false
    }

    /// Tree induction is deterministic, so `seed` does not affect the
    /// result.
    fn fit(&self, data: &Dataset, columns: &[Vec<u8>], _seed: u64, jobs: usize) -> Result<Box<dyn BitPredictor>> {
        let trees = par::map_indexed(jobs, columns.len(), |j| {
            let y: Vec<usize> = columns[j].iter().map(|&b| b as usize).collect();
            train_tree(data, &y, 2, &self.options)
        })?;
        Ok(Box::new(TreeEnsemble { trees }))
    }

    fn load(&self, files: FileSource<'_>, n_outputs: usize) -> Result<Box<dyn BitPredictor>> {
        let trees = (0..n_outputs)
            .map(|j| {
                let t = DecisionTree::from_text(&files(&TreeEnsemble::file_name(j))?)?;
                if t.n_classes != 2 {
                    return Err(Error::Bundle(format!("bit tree {j} is not binary")));
                }
                Ok(t)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Box::new(TreeEnsemble { trees }))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkPredictor {
    pub model: MlpModel,
    pub report: Option<MlpReport>,
}

impl BitPredictor for NetworkPredictor {
    fn n_outputs(&self) -> usize {
        self.model.outputs
    }

    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.model.outputs(x)
    }

    fn files(&self) -> Vec<(String, String)> {
        vec![("network.mlp".into(), self.model.to_text())]
    }
}

#[derive(Clone, Debug, Default)]
pub struct MlpLearner {
    pub options: MlpOptions,
}

impl BitLearner for MlpLearner {
    fn name(&self) -> &'static str {
        "mlp"
    }

    fn options(&self) -> Value {
        serde_json::to_value(&self.options).expect("options serialize")
    }

    fn needs_numeric(&self) -> bool {
        true
    }

    /// The network's seed is the master `seed`; the `seed` option is
    /// ignored here.
    fn fit(&self, data: &Dataset, columns: &[Vec<u8>], seed: u64, _jobs: usize) -> Result<Box<dyn BitPredictor>> {
        let targets: Vec<Vec<f64>> = (0..data.len())
            .map(|i| columns.iter().map(|c| f64::from(c[i])).collect())
            .collect();
        let opts = MlpOptions {
            seed,
            ..self.options.clone()
        };
        let (model, report) = train_mlp(data, &targets, &opts)?;
        Ok(Box::new(NetworkPredictor {
            model,
            report: Some(report),
        }))
    }

    fn load(&self, files: FileSource<'_>, n_outputs: usize) -> Result<Box<dyn BitPredictor>> {
        let model = MlpModel::from_text(&files("network.mlp")?)?;
        if model.outputs != n_outputs {
            return Err(Error::Bundle(format!(
                "network has {} outputs, code has {n_outputs} columns",
                model.outputs
            )));
        }
        Ok(Box::new(NetworkPredictor { model, report: None }))
    }
}

type Factory = fn(Option<&Value>) -> Result<Box<dyn BitLearner>>;

fn parse_options<T: DeserializeOwned + Serialize + Default>(v: Option<&Value>) -> Result<T> {
    let Some(v) = v else {
        return Ok(T::default());
    };
    // overlay the given fields on the defaults
    let mut base = serde_json::to_value(T::default()).expect("defaults serialize");
    match (base.as_object_mut(), v.as_object()) {
        (Some(b), Some(o)) => {
            for (k, val) in o {
                if !b.contains_key(k) {
                    return Err(Error::invalid(format!("unknown learner option `{k}`")));
                }
                b.insert(k.clone(), val.clone());
            }
        }
        _ => return Err(Error::invalid("learner options must be a JSON object")),
    }
    serde_json::from_value(base).map_err(|e| Error::invalid(format!("learner options: {e}")))
}

/// Learners by name.
pub struct LearnerRegistry {
    factories: BTreeMap<&'static str, Factory>,
}

impl LearnerRegistry {
    pub fn empty() -> Self {
        LearnerRegistry {
            factories: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("tree", |v| {
            Ok(Box::new(TreeLearner {
                options: parse_options(v)?,
            }))
        });
        r.register("mlp", |v| {
            Ok(Box::new(MlpLearner {
                options: parse_options(v)?,
            }))
        });
        r
    }

    pub fn register(&mut self, name: &'static str, factory: Factory) {
        self.factories.insert(name, factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    pub fn create(&self, name: &str, options: Option<&Value>) -> Result<Box<dyn BitLearner>> {
        let f = self
            .factories
            .get(name)
            .ok_or_else(|| Error::invalid(format!("unknown learner `{name}` (known: {})", self.names().join(", "))))?;
        f(options)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn registry_options() {
        let r = LearnerRegistry::builtin();
        assert_eq!(r.names(), ["mlp", "tree"]);
        let t = r.create("tree", Some(&json!({"pruning_enabled": false}))).unwrap();
        assert_eq!(t.options()["pruning_enabled"], json!(false));
        assert_eq!(t.options()["confidence_factor"], json!(0.25));
        assert!(r.create("tree", Some(&json!({"bogus": 1}))).is_err());
        assert!(r.create("svm", None).is_err());
        let m = r.create("mlp", Some(&json!({"hidden_units": 3}))).unwrap();
        assert!(m.needs_numeric());
        assert_eq!(m.options()["hidden_units"], json!(3));
    }
}
