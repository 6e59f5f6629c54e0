use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use ecoc::codes::{read_code, write_code_with_comments};
use ecoc::data::{load_dataset, load_with_schema, read_schema, split, Dataset};
use ecoc::design::{DesignRequest, DesignerRegistry, SearchConfig};
use ecoc::ecoc::{load_bundle, save_bundle, train, CodeChoice, EcocModel, TrainConfig};
use ecoc::eval::{
    accuracy, cross_validate, learning_curve, paired_proportion_test, permutation_experiment, prediction_rows,
    rejection_curve, rejection_curve_rows, two_proportion_test, write_csv,
};
use ecoc::learners::LearnerRegistry;
use ecoc::seed::derive_tagged;
use ecoc::{Error, Result};

use crate::manifest::{self, RunManifest, MANIFEST_FORMAT};
use crate::{
    Cli, Command, DesignArgs, EvaluateArgs, HoldoutArgs, LearningCurveArgs, ModelArgs, PermuteArgs, PredictArgs,
    ReplayArgs, TrainArgs, XvalArgs,
};

const TAG_HOLDOUT: u64 = 20;
const TAG_PERMUTE: u64 = 21;

/// Inputs and outputs of one run, for its manifest.
struct Recorder {
    started: u64,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    seed: Option<u64>,
}

impl Recorder {
    fn new(seed: Option<u64>) -> Self {
        Recorder {
            started: manifest::now_unix(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed,
        }
    }

    fn input(&mut self, p: &Path) {
        self.inputs.push(p.to_path_buf());
    }

    fn inputs<'a>(&mut self, ps: impl IntoIterator<Item = &'a PathBuf>) {
        self.inputs.extend(ps.into_iter().cloned());
    }

    /// Write the manifest next to `primary`, if there is a primary output.
    fn finish(self, primary: Option<&Path>, command: &Command, argv: &[String]) -> Result<()> {
        let Some(primary) = primary else {
            return Ok(());
        };
        let (name, options) = describe(command);
        let m = RunManifest {
            format: MANIFEST_FORMAT.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: name,
            argv: argv.to_vec(),
            cwd: std::env::current_dir()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
            options,
            seed: self.seed,
            inputs: manifest::digest_paths(&self.inputs)?,
            outputs: manifest::digest_paths(&self.outputs)?,
            started_unix: self.started,
            finished_unix: manifest::now_unix(),
        };
        let path = manifest::manifest_path(primary);
        manifest::write(&path, &m)?;
        eprintln!("manifest: {}", path.display());
        Ok(())
    }
}

fn describe(command: &Command) -> (String, Value) {
    let v = serde_json::to_value(command).unwrap_or(Value::Null);
    match v {
        Value::Object(m) if m.len() == 1 => {
            let (k, v) = m.into_iter().next().expect("one entry");
            (k, v)
        }
        Value::String(s) => (s, Value::Null),
        other => ("unknown".into(), other),
    }
}

pub fn run(command: Command, argv: Vec<String>) -> Result<()> {
    match &command {
        Command::DesignCode(a) => {
            let mut rec = Recorder::new(Some(a.seed));
            design_code(a, &mut rec)?;
            rec.finish(a.out.as_deref(), &command, &argv)
        }
        Command::Train(a) => {
            let mut rec = Recorder::new(Some(a.model.seed));
            cmd_train(a, &mut rec)?;
            rec.finish(Some(&a.out), &command, &argv)
        }
        Command::Predict(a) => {
            let mut rec = Recorder::new(None);
            predict(a, &mut rec)?;
            rec.finish(a.out.as_deref(), &command, &argv)
        }
        Command::Evaluate(a) => {
            let mut rec = Recorder::new(None);
            evaluate(a, &mut rec)?;
            rec.finish(a.out.as_deref(), &command, &argv)
        }
        Command::Xval(a) => {
            let mut rec = Recorder::new(Some(a.model.seed));
            xval(a, &mut rec)?;
            rec.finish(a.out.as_deref(), &command, &argv)
        }
        Command::LearningCurve(a) => {
            let mut rec = Recorder::new(Some(a.model.seed));
            cmd_learning_curve(a, &mut rec)?;
            rec.finish(a.out.as_deref(), &command, &argv)
        }
        Command::Permute(a) => {
            let mut rec = Recorder::new(Some(a.model.seed));
            permute(a, &mut rec)?;
            rec.finish(a.out.as_deref(), &command, &argv)
        }
        Command::Replay(a) => replay(a),
    }
}

fn write_text(out: Option<&Path>, text: &str, rec: &mut Recorder) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            fs::write(p, text).map_err(|e| Error::io(p, e))?;
            rec.outputs.push(p.to_path_buf());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn csv_text<H: AsRef<str>>(header: &[H], rows: &[Vec<String>]) -> Result<String> {
    let mut buf = Vec::new();
    let header: Vec<&str> = header.iter().map(|h| h.as_ref()).collect();
    write_csv(&mut buf, &header, rows)?;
    String::from_utf8(buf).map_err(|e| Error::invalid(e.to_string()))
}

fn design_code(a: &DesignArgs, rec: &mut Recorder) -> Result<()> {
    let mut config = SearchConfig {
        seed: a.seed,
        ..SearchConfig::default()
    };
    if let Some(i) = a.max_iterations {
        config.max_iterations = i;
    }
    if let Some(r) = a.restarts {
        config.restarts = r;
    }
    if let Some(d) = a.min_distance {
        let length = a
            .length
            .ok_or_else(|| Error::invalid("--min-distance needs --length"))?;
        config.column_band = Some((d, length.saturating_sub(d)));
    }
    let req = DesignRequest {
        classes: a.classes,
        length: a.length,
        bch_t: a.bch_t,
        config,
    };
    let outcome = DesignerRegistry::builtin().design(&a.method, &req)?;
    for line in outcome.summary() {
        eprintln!("{line}");
    }
    if outcome.satisfied == Some(false) {
        eprintln!("warning: the search did not meet its distance constraint");
    }
    write_text(
        a.out.as_deref(),
        &write_code_with_comments(&outcome.code, &outcome.summary()),
        rec,
    )?;
    if let Some(p) = &a.report {
        let report = json!({
            "method": outcome.method,
            "classes": outcome.code.k(),
            "length": outcome.code.n(),
            "satisfied": outcome.satisfied,
            "quality": outcome.report,
            "notes": outcome.notes,
        });
        let mut text = serde_json::to_string_pretty(&report).map_err(|e| Error::invalid(e.to_string()))?;
        text.push('\n');
        write_text(Some(p), &text, rec)?;
    }
    Ok(())
}

fn code_choice(code: &str, rec: &mut Recorder) -> Result<CodeChoice> {
    match code {
        "opc" => Ok(CodeChoice::OnePerClass),
        "multiclass" => Ok(CodeChoice::Multiclass),
        path => {
            let p = Path::new(path);
            rec.input(p);
            Ok(CodeChoice::Matrix(read_code(p)?))
        }
    }
}

fn train_config(m: &ModelArgs, rec: &mut Recorder) -> Result<TrainConfig> {
    let learner_options = match &m.config {
        Some(p) => {
            rec.input(p);
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| Error::invalid(format!("{}: {e}", p.display())))?;
            Some(v)
        }
        None => None,
    };
    Ok(TrainConfig {
        learner: m.learner.clone(),
        learner_options,
        seed: m.seed,
        jobs: m.jobs.max(1),
    })
}

fn load_training(m: &ModelArgs, rec: &mut Recorder) -> Result<(Dataset, CodeChoice, TrainConfig)> {
    rec.inputs([&m.data, &m.schema]);
    let data = load_dataset(&m.data, &m.schema)?;
    let choice = code_choice(&m.code, rec)?;
    let cfg = train_config(m, rec)?;
    Ok((data, choice, cfg))
}

fn clear_bundle_dir(dir: &Path) -> Result<()> {
    if !dir.exists() {
        return Ok(());
    }
    if dir.join("manifest.json").is_file() {
        fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))
    } else if fs::read_dir(dir).map_err(|e| Error::io(dir, e))?.next().is_some() {
        Err(Error::invalid(format!(
            "{} exists and is not a model bundle; refusing to overwrite",
            dir.display()
        )))
    } else {
        Ok(())
    }
}

fn cmd_train(a: &TrainArgs, rec: &mut Recorder) -> Result<()> {
    let (data, choice, cfg) = load_training(&a.model, rec)?;
    let model = train(&data, &choice, &cfg, &LearnerRegistry::builtin())?;
    clear_bundle_dir(&a.out)?;
    save_bundle(&model, &a.out)?;
    rec.outputs.push(a.out.clone());
    eprintln!(
        "trained {} predictor output(s) on {} examples",
        model.predictor.n_outputs(),
        data.len()
    );
    if !model.constant_columns.is_empty() {
        eprintln!(
            "warning: constant training targets in columns {:?}",
            model.constant_columns
        );
    }
    if model.encoder.is_some() {
        eprintln!("features one-hot encoded and standardized for the network learner");
    }
    Ok(())
}

fn load_for_prediction(
    model_dir: &Path,
    data: &Path,
    schema: Option<&Path>,
    rec: &mut Recorder,
) -> Result<(EcocModel, Dataset)> {
    rec.inputs([&model_dir.to_path_buf(), &data.to_path_buf()]);
    let model = load_bundle(model_dir, &LearnerRegistry::builtin())?;
    if let Some(s) = schema {
        rec.input(s);
        model.check_schema(&read_schema(s)?)?;
    }
    let data = load_with_schema(data, &model.schema)?;
    Ok((model, data))
}

fn predict(a: &PredictArgs, rec: &mut Recorder) -> Result<()> {
    let (model, data) = load_for_prediction(&a.model, &a.data, a.schema.as_deref(), rec)?;
    let records = model.classify_dataset(&data)?;
    let (header, rows) = prediction_rows(&records, model.class_names());
    write_text(a.out.as_deref(), &csv_text(&header, &rows)?, rec)
}

/// Predicted labels from a prediction CSV, as class indices.
fn read_predicted(path: &Path, class_names: &[String]) -> Result<Vec<usize>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    let headers = r
        .headers()
        .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?
        .clone();
    let col = headers
        .iter()
        .position(|h| h == "predicted_label")
        .ok_or_else(|| Error::invalid(format!("{}: no predicted_label column", path.display())))?;
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row.map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        let label = row.get(col).unwrap_or("");
        let idx = class_names
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::invalid(format!("{} row {}: unknown class `{label}`", path.display(), i + 2)))?;
        out.push(idx);
    }
    Ok(out)
}

fn evaluate(a: &EvaluateArgs, rec: &mut Recorder) -> Result<()> {
    let (model, data) = load_for_prediction(&a.model, &a.data, a.schema.as_deref(), rec)?;
    let records = model.classify_dataset(&data)?;
    let acc = accuracy(&records)?;
    let correct: Vec<bool> = records.iter().map(|r| r.is_correct() == Some(true)).collect();
    let n_correct = correct.iter().filter(|&&c| c).count();
    let mut metrics: Vec<(&str, String)> = vec![
        ("n", records.len().to_string()),
        ("correct", n_correct.to_string()),
        ("accuracy", acc.to_string()),
        ("total_leaves", model.leaf_counts().iter().sum::<usize>().to_string()),
    ];
    if let Some(other) = &a.compare {
        rec.input(other);
        let predicted = read_predicted(other, model.class_names())?;
        if predicted.len() != data.len() {
            return Err(Error::invalid(format!(
                "{} has {} predictions for {} examples",
                other.display(),
                predicted.len(),
                data.len()
            )));
        }
        let other_correct: Vec<bool> = predicted.iter().zip(&data.labels).map(|(p, y)| p == y).collect();
        let other_n = other_correct.iter().filter(|&&c| c).count();
        let two = two_proportion_test(n_correct, records.len(), other_n, records.len())?;
        let paired = paired_proportion_test(&correct, &other_correct)?;
        metrics.extend([
            ("compare_correct", other_n.to_string()),
            ("compare_accuracy", (other_n as f64 / records.len() as f64).to_string()),
            ("two_proportion_z", two.z.to_string()),
            ("two_proportion_p", two.p_value.to_string()),
            ("two_proportion_significant", two.significant_at_05.to_string()),
            ("paired_z", paired.z.to_string()),
            ("paired_p", paired.p_value.to_string()),
            ("paired_significant", paired.significant_at_05.to_string()),
        ]);
    }
    let rows: Vec<Vec<String>> = metrics.into_iter().map(|(k, v)| vec![k.to_string(), v]).collect();
    write_text(a.out.as_deref(), &csv_text(&["metric", "value"], &rows)?, rec)?;
    if let Some(p) = &a.predictions {
        let (header, rows) = prediction_rows(&records, model.class_names());
        write_text(Some(p), &csv_text(&header, &rows)?, rec)?;
    }
    if let Some(p) = &a.rejection_curve {
        let (header, rows) = rejection_curve_rows(&rejection_curve(&records)?);
        write_text(Some(p), &csv_text(&header, &rows)?, rec)?;
    }
    Ok(())
}

fn xval(a: &XvalArgs, rec: &mut Recorder) -> Result<()> {
    let (data, choice, cfg) = load_training(&a.model, rec)?;
    let cv = cross_validate(&data, a.folds, a.model.seed, &choice, &cfg, &LearnerRegistry::builtin())?;
    let mut rows: Vec<Vec<String>> = cv
        .folds
        .iter()
        .map(|f| {
            vec![
                f.fold.to_string(),
                f.train_size.to_string(),
                f.test_size.to_string(),
                f.correct.to_string(),
                f.accuracy.to_string(),
                f.total_leaves.to_string(),
            ]
        })
        .collect();
    let mean_leaves = cv.folds.iter().map(|f| f.total_leaves as f64).sum::<f64>() / cv.folds.len() as f64;
    rows.push(vec![
        "mean".into(),
        String::new(),
        String::new(),
        String::new(),
        cv.mean_accuracy.to_string(),
        mean_leaves.to_string(),
    ]);
    let header = ["fold", "train_size", "test_size", "correct", "accuracy", "total_leaves"];
    eprintln!("mean accuracy {}", cv.mean_accuracy);
    write_text(a.out.as_deref(), &csv_text(&header, &rows)?, rec)
}

fn holdout(data: Dataset, h: &HoldoutArgs, seed: u64, rec: &mut Recorder) -> Result<(Dataset, Dataset)> {
    match &h.test {
        Some(p) => {
            rec.input(p);
            let test = load_with_schema(p, &data.schema)?;
            Ok((data, test))
        }
        None => {
            let (test, train) = split(&data, h.test_fraction, derive_tagged(seed, TAG_HOLDOUT, 0), true)?;
            Ok((train, test))
        }
    }
}

fn cmd_learning_curve(a: &LearningCurveArgs, rec: &mut Recorder) -> Result<()> {
    let (data, choice, cfg) = load_training(&a.model, rec)?;
    let (train_set, test_set) = holdout(data, &a.holdout, a.model.seed, rec)?;
    let seeds = if a.seeds.is_empty() {
        vec![a.model.seed]
    } else {
        a.seeds.clone()
    };
    let table = learning_curve(
        &train_set,
        &test_set,
        &a.sizes,
        &seeds,
        &choice,
        &cfg,
        &LearnerRegistry::builtin(),
    )?;
    let mut rows = Vec::new();
    for r in &table {
        for ((seed, acc), leaves) in r.seeds.iter().zip(&r.accuracies).zip(&r.total_leaves) {
            rows.push(vec![
                r.size.to_string(),
                seed.to_string(),
                acc.to_string(),
                leaves.to_string(),
            ]);
        }
        let mean_leaves = r.total_leaves.iter().sum::<usize>() as f64 / r.total_leaves.len() as f64;
        rows.push(vec![
            r.size.to_string(),
            "mean".into(),
            r.mean_accuracy.to_string(),
            mean_leaves.to_string(),
        ]);
    }
    write_text(
        a.out.as_deref(),
        &csv_text(&["size", "seed", "accuracy", "total_leaves"], &rows)?,
        rec,
    )
}

fn permute(a: &PermuteArgs, rec: &mut Recorder) -> Result<()> {
    let (data, choice, cfg) = load_training(&a.model, rec)?;
    let CodeChoice::Matrix(code) = choice else {
        return Err(Error::invalid("permute needs a code file for --code"));
    };
    if a.trials == 0 {
        return Err(Error::invalid("--trials must be at least 1"));
    }
    let (train_set, test_set) = holdout(data, &a.holdout, a.model.seed, rec)?;
    let seeds: Vec<u64> = (0..a.trials as u64)
        .map(|t| derive_tagged(a.model.seed, TAG_PERMUTE, t))
        .collect();
    let table = permutation_experiment(&train_set, &test_set, &code, &seeds, &cfg, &LearnerRegistry::builtin())?;
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .enumerate()
        .map(|(t, r)| {
            let perm: Vec<String> = r.permutation.iter().map(|p| p.to_string()).collect();
            vec![
                t.to_string(),
                r.seed.to_string(),
                perm.join(" "),
                r.correct.to_string(),
                r.n.to_string(),
                r.accuracy.to_string(),
            ]
        })
        .collect();
    let header = ["trial", "seed", "permutation", "correct", "n", "accuracy"];
    write_text(a.out.as_deref(), &csv_text(&header, &rows)?, rec)?;
    let tests: Vec<Vec<String>> = table
        .tests
        .iter()
        .map(|t| {
            vec![
                t.a.to_string(),
                t.b.to_string(),
                t.test.z.to_string(),
                t.test.p_value.to_string(),
                t.test.significant_at_05.to_string(),
            ]
        })
        .collect();
    let tests_text = csv_text(&["trial_a", "trial_b", "z", "p_value", "significant_at_05"], &tests)?;
    let tests_path = a.tests.clone().or_else(|| {
        a.out.as_ref().map(|o| {
            let mut s = o.as_os_str().to_os_string();
            s.push(".tests.csv");
            PathBuf::from(s)
        })
    });
    match tests_path {
        Some(p) => write_text(Some(&p), &tests_text, rec),
        None => {
            println!();
            write_text(None, &tests_text, rec)
        }
    }
}

#[derive(Serialize)]
struct ReplaySummary<'a> {
    command: &'a str,
    reproduced: bool,
}

fn replay(a: &ReplayArgs) -> Result<()> {
    use clap::Parser;

    let m = manifest::read(&a.manifest)?;
    if !m.cwd.is_empty() {
        std::env::set_current_dir(&m.cwd).map_err(|e| Error::io(Path::new(&m.cwd), e))?;
    }
    let paths: Vec<PathBuf> = m.inputs.iter().map(|d| PathBuf::from(&d.path)).collect();
    let current = manifest::digest_paths(&paths)?;
    let changed = manifest::mismatches(&m.inputs, &current);
    if !changed.is_empty() {
        return Err(Error::invalid(format!(
            "inputs changed since the run: {}",
            changed.join(", ")
        )));
    }
    let cli = Cli::try_parse_from(std::iter::once("ecoc".to_string()).chain(m.argv.iter().cloned()))
        .map_err(|e| Error::invalid(format!("recorded command line no longer parses: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(Error::invalid("a manifest cannot record a replay"));
    }
    run(cli.command, m.argv.clone())?;
    let outputs: Vec<PathBuf> = m.outputs.iter().map(|d| PathBuf::from(&d.path)).collect();
    let now = manifest::digest_paths(&outputs)?;
    let bad = manifest::mismatches(&m.outputs, &now);
    let summary = ReplaySummary {
        command: &m.command,
        reproduced: bad.is_empty(),
    };
    eprintln!("{}", serde_json::to_string(&summary).unwrap_or_default());
    if a.check && !bad.is_empty() {
        return Err(Error::invalid(format!(
            "outputs differ from the recorded run: {}",
            bad.join(", ")
        )));
    }
    Ok(())
}
