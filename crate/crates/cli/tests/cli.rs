use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn glass(file: &str) -> String {
    repo().join("data/glass").join(file).display().to_string()
}

fn ecoc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecoc"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = ecoc(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn code_rows(text: &str) -> Vec<String> {
    let code = ecoc::codes::parse_code(text, "output").unwrap();
    code.rows().iter().map(|r| r.to_string()).collect()
}

fn metric(csv: &str, name: &str) -> String {
    csv.lines()
        .find_map(|l| l.strip_prefix(&format!("{name},")))
        .unwrap_or_else(|| panic!("no metric {name} in {csv}"))
        .to_string()
}

#[test]
fn design_code_writes_exhaustive_codes() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "design-code",
            "--classes",
            "5",
            "--method",
            "exhaustive",
            "--out",
            "five.code",
        ],
    );
    let rows = code_rows(&read(dir.path(), "five.code"));
    assert_eq!(
        rows,
        [
            "111111111111111",
            "000000001111111",
            "000011110000111",
            "001100110011001",
            "010101010101010"
        ]
    );
    assert!(dir.path().join("five.code.run.json").exists());

    let stdout = ok(dir.path(), &["design-code", "--classes", "4"]);
    let rows = code_rows(&stdout);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.len() == 7));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ecoc(dir.path(), &["design-code"]).status.code(), Some(2));
    assert_eq!(
        ecoc(dir.path(), &["design-code", "--classes", "5", "--method", "magic"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(ecoc(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        ecoc(dir.path(), &["design-code", "--classes", "1"]).status.code(),
        Some(1)
    );
    let missing = ecoc(
        dir.path(),
        &[
            "train",
            "--data",
            "nope.csv",
            "--schema",
            "nope.schema",
            "--code",
            "opc",
            "--out",
            "m",
        ],
    );
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope"));
    assert_eq!(ecoc(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn train_predict_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (data, schema) = (glass("glass.csv"), glass("glass.schema"));
    ok(
        d,
        &[
            "train", "--data", &data, "--schema", &schema, "--code", "opc", "--out", "opc",
        ],
    );
    let files: Vec<_> = (0..6).map(|j| format!("bit_{j:04}.tree")).collect();
    for f in &files {
        assert!(d.join("opc").join(f).exists(), "{f}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&read(d, "opc/manifest.json")).unwrap();
    assert_eq!(manifest["scheme"], "one-per-class");
    assert_eq!(manifest["n_outputs"], 6);

    ok(
        d,
        &[
            "train", "--data", &data, "--schema", &schema, "--code", "opc", "--out", "opc2", "--jobs", "3",
        ],
    );
    for f in files.iter().map(String::as_str).chain(["manifest.json", "code.txt"]) {
        assert_eq!(read(d, &format!("opc/{f}")), read(d, &format!("opc2/{f}")), "{f}");
    }

    ok(d, &["predict", "--model", "opc", "--data", &data, "--out", "pred.csv"]);
    let pred = read(d, "pred.csv");
    assert!(pred.starts_with("predicted_label,confidence,d1,d2,b_0,"));
    assert_eq!(pred.lines().count(), 215);

    ok(
        d,
        &[
            "evaluate",
            "--model",
            "opc",
            "--data",
            &data,
            "--out",
            "m.csv",
            "--rejection-curve",
            "rc.csv",
            "--compare",
            "pred.csv",
        ],
    );
    let m = read(d, "m.csv");
    let acc = metric(&m, "accuracy");
    assert_eq!(metric(&m, "two_proportion_z"), "0");
    assert_eq!(metric(&m, "paired_z"), "0");
    assert_eq!(metric(&m, "compare_accuracy"), acc);
    let rc = read(d, "rc.csv");
    let first: Vec<&str> = rc.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((first[0], first[1], first[2]), ("0", "0", acc.as_str()));
}

#[test]
fn unpruned_tree_fits_training_data() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("tree.json"),
        r#"{"pruning_enabled": false, "min_examples_per_leaf": 1}"#,
    )
    .unwrap();
    let (data, schema) = (glass("glass.csv"), glass("glass.schema"));
    ok(
        d,
        &[
            "train",
            "--data",
            &data,
            "--schema",
            &schema,
            "--code",
            "multiclass",
            "--config",
            "tree.json",
            "--out",
            "mc",
        ],
    );
    assert!(d.join("mc/multiclass.tree").exists());
    let m = ok(d, &["evaluate", "--model", "mc", "--data", &data]);
    assert_eq!(metric(&m, "accuracy"), "1");
}

#[test]
fn mlp_encodes_categorical_features() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("toy.schema"),
        "feature size numeric\nfeature shape categorical round,square,star\nclass kind x,y,z\n",
    )
    .unwrap();
    let mut rows = String::new();
    for i in 0..60 {
        let shape = ["round", "square", "star"][i % 3];
        rows.push_str(&format!(
            "{},{shape},{}\n",
            (i % 7) as f64 * 0.5,
            ["x", "y", "z"][i % 3]
        ));
    }
    std::fs::write(d.join("toy.csv"), rows).unwrap();
    std::fs::write(d.join("mlp.json"), r#"{"max_epochs": 30, "hidden_units": 4}"#).unwrap();
    ok(
        d,
        &[
            "train",
            "--data",
            "toy.csv",
            "--schema",
            "toy.schema",
            "--code",
            "opc",
            "--learner",
            "mlp",
            "--config",
            "mlp.json",
            "--out",
            "net",
        ],
    );
    let manifest: serde_json::Value = serde_json::from_str(&read(d, "net/manifest.json")).unwrap();
    assert_eq!(manifest["learner"], "mlp");
    assert_eq!(
        manifest["encoder"]["output_schema"]["features"]
            .as_array()
            .unwrap()
            .len(),
        4
    );
    assert!(d.join("net/network.mlp").exists());
    ok(d, &["predict", "--model", "net", "--data", "toy.csv", "--out", "p.csv"]);

    let bad = ecoc(
        d,
        &[
            "train",
            "--data",
            "toy.csv",
            "--schema",
            "toy.schema",
            "--code",
            "multiclass",
            "--learner",
            "mlp",
            "--out",
            "x",
        ],
    );
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn experiment_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (data, schema) = (glass("glass.csv"), glass("glass.schema"));
    ok(
        d,
        &[
            "design-code",
            "--classes",
            "6",
            "--length",
            "15",
            "--method",
            "hillclimb",
            "--seed",
            "2",
            "--out",
            "six.code",
        ],
    );

    ok(
        d,
        &[
            "xval", "--data", &data, "--schema", &schema, "--code", "six.code", "--out", "xval.csv", "--jobs", "2",
        ],
    );
    let x = read(d, "xval.csv");
    assert_eq!(x.lines().count(), 12);
    assert!(x.lines().last().unwrap().starts_with("mean,"));

    ok(
        d,
        &[
            "learning-curve",
            "--data",
            &data,
            "--schema",
            &schema,
            "--code",
            "opc",
            "--sizes",
            "30,60,149",
            "--seeds",
            "1,2",
            "--out",
            "lc.csv",
        ],
    );
    assert_eq!(read(d, "lc.csv").lines().count(), 1 + 3 * 3);

    ok(
        d,
        &[
            "permute", "--data", &data, "--schema", &schema, "--code", "six.code", "--trials", "5", "--out", "perm.csv",
        ],
    );
    assert_eq!(read(d, "perm.csv").lines().count(), 6);
    assert_eq!(read(d, "perm.csv.tests.csv").lines().count(), 11);
}

#[test]
fn replay_detects_changed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "design-code",
            "--classes",
            "6",
            "--length",
            "12",
            "--method",
            "hillclimb",
            "--out",
            "c.code",
        ],
    );
    let before = read(d, "c.code");
    ok(d, &["replay", "--check", "c.code.run.json"]);
    assert_eq!(read(d, "c.code"), before);

    std::fs::write(d.join("toy.schema"), "feature a numeric\nclass k p,q\n").unwrap();
    std::fs::write(d.join("toy.csv"), "1,p\n2,q\n3,p\n4,q\n").unwrap();
    ok(
        d,
        &[
            "xval",
            "--data",
            "toy.csv",
            "--schema",
            "toy.schema",
            "--code",
            "opc",
            "--folds",
            "2",
            "--out",
            "x.csv",
        ],
    );
    std::fs::write(d.join("toy.csv"), "1,p\n2,q\n3,p\n5,q\n").unwrap();
    let r = ecoc(d, &["replay", "x.csv.run.json"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("toy.csv"));
}
