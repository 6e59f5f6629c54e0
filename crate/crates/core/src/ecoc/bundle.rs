//! Model bundles: a directory holding `manifest.json`, the code matrix as
//! `code.txt` (code-based schemes only) and the serialized predictors.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{EcocModel, MulticlassTree, Scheme};
use crate::codes::{parse_code, write_code};
use crate::data::{Encoder, Schema};
use crate::error::{Error, Result};
use crate::learners::{DecisionTree, LearnerRegistry};

pub const BUNDLE_FORMAT: &str = "ecoc-bundle/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub format: String,
    pub scheme: Scheme,
    pub learner: String,
    pub learner_options: Value,
    pub seed: u64,
    pub n_outputs: usize,
    pub class_names: Vec<String>,
    pub constant_columns: Vec<usize>,
    pub leaf_counts: Vec<usize>,
    pub files: Vec<String>,
    pub schema: Schema,
    pub encoder: Option<Encoder>,
}

pub fn save_bundle(model: &EcocModel, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = model.predictor.files();
    let manifest = BundleManifest {
        format: BUNDLE_FORMAT.into(),
        scheme: model.scheme,
        learner: model.learner.clone(),
        learner_options: model.learner_options.clone(),
        seed: model.seed,
        n_outputs: model.predictor.n_outputs(),
        class_names: model.class_names().to_vec(),
        constant_columns: model.constant_columns.clone(),
        leaf_counts: model.leaf_counts(),
        files: files.iter().map(|(n, _)| n.clone()).collect(),
        schema: model.schema.clone(),
        encoder: model.encoder.clone(),
    };
    let write = |name: &str, text: &str| {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| Error::io(&p, e))
    };
    let mut json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Bundle(e.to_string()))?;
    json.push('\n');
    write("manifest.json", &json)?;
    if let Some(code) = &model.code {
        write("code.txt", &write_code(code))?;
    }
    for (name, text) in &files {
        write(name, text)?;
    }
    Ok(())
}

pub fn load_bundle(dir: &Path, registry: &LearnerRegistry) -> Result<EcocModel> {
    let read = |name: &str| {
        let p = dir.join(name);
        fs::read_to_string(&p).map_err(|e| Error::io(&p, e))
    };
    let manifest: BundleManifest =
        serde_json::from_str(&read("manifest.json")?).map_err(|e| Error::Bundle(format!("manifest.json: {e}")))?;
    if manifest.format != BUNDLE_FORMAT {
        return Err(Error::Bundle(format!(
            "unsupported bundle format `{}`",
            manifest.format
        )));
    }
    let (code, predictor): (_, Box<dyn crate::learners::BitPredictor>) = match manifest.scheme {
        Scheme::Multiclass => {
            let tree = DecisionTree::from_text(&read("multiclass.tree")?)?;
            (None, Box::new(MulticlassTree { tree }))
        }
        Scheme::Ecoc | Scheme::OnePerClass => {
            let code = parse_code(&read("code.txt")?, &dir.join("code.txt").display().to_string())?;
            if code.n() != manifest.n_outputs || code.k() != manifest.class_names.len() {
                return Err(Error::Bundle("code shape disagrees with the manifest".into()));
            }
            let learner = registry.create(&manifest.learner, Some(&manifest.learner_options))?;
            let p = learner.load(&read, code.n())?;
            (Some(code), p)
        }
    };
    if manifest.schema.class_names != manifest.class_names {
        return Err(Error::Bundle("schema classes disagree with the manifest".into()));
    }
    Ok(EcocModel {
        scheme: manifest.scheme,
        code,
        learner: manifest.learner,
        learner_options: manifest.learner_options,
        seed: manifest.seed,
        schema: manifest.schema,
        encoder: manifest.encoder,
        predictor,
        constant_columns: manifest.constant_columns,
    })
}
