use std::collections::BTreeSet;
use std::path::PathBuf;

use ecoc::data::{load_dataset, split, Dataset, Schema};
use ecoc::design::exhaustive_code;
use ecoc::ecoc::{train, CodeChoice, PredictionRecord, TrainConfig};
use ecoc::eval::{
    accuracy, cross_validate, kfold, learning_curve, paired_proportion_test, permutation_experiment, rejection_curve,
    subsample, two_proportion_test,
};
use ecoc::learners::LearnerRegistry;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn load(name: &str) -> Dataset {
    let d = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    load_dataset(&d.join(format!("{name}.csv")), &d.join(format!("{name}.schema"))).unwrap()
}

/// Standard normal upper tail by composite Simpson integration of the density.
fn oracle_two_sided(z: f64) -> f64 {
    let z = z.abs();
    let steps = 20_000;
    let h = z / steps as f64;
    let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(0.0) + pdf(z);
    for i in 1..steps {
        s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 * (0.5 - s * h / 3.0)
}

fn oracle_pooled_z(c1: usize, n1: usize, c2: usize, n2: usize) -> f64 {
    let p1 = c1 as f64 / n1 as f64;
    let p2 = c2 as f64 / n2 as f64;
    let p = (c1 + c2) as f64 / (n1 + n2) as f64;
    (p1 - p2) / (p * (1.0 - p) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt()
}

#[test]
fn two_proportion_reference_case() {
    let r = two_proportion_test(80, 100, 60, 100).unwrap();
    assert!((r.z - 3.086).abs() < 1e-3, "z = {}", r.z);
    assert!((r.p_value - 0.002).abs() < 1e-3, "p = {}", r.p_value);
    assert!(r.significant_at_05);
    let same = two_proportion_test(80, 100, 80, 100).unwrap();
    assert_eq!(same.z, 0.0);
    assert!(!same.significant_at_05);
}

#[test]
fn paired_reference_case() {
    let a = [1, 1, 1, 1, 0, 1, 1, 0, 1, 1].map(|v| v == 1);
    let b = [1, 0, 1, 0, 0, 1, 0, 1, 1, 1].map(|v| v == 1);
    // differences 0,1,0,1,0,0,1,-1,0,0: mean 0.2, sample variance 0.4
    let r = paired_proportion_test(&a, &b).unwrap();
    assert!((r.z - 1.0).abs() < 1e-12);
    assert!((r.p_value - 0.317_310_5).abs() < 1e-6);
    assert_eq!(paired_proportion_test(&a, &a).unwrap().z, 0.0);
    let ones = [true; 4];
    let zeros = [false; 4];
    assert_eq!(paired_proportion_test(&ones, &zeros).unwrap().z, f64::INFINITY);
    assert_eq!(paired_proportion_test(&ones, &zeros).unwrap().p_value, 0.0);
}

proptest! {
    #[test]
    fn two_proportion_matches_formula(n1 in 1usize..500, n2 in 1usize..500, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let c1 = (a * n1 as f64).round() as usize;
        let c2 = (b * n2 as f64).round() as usize;
        let r = two_proportion_test(c1, n1, c2, n2).unwrap();
        if c1 + c2 == 0 || c1 + c2 == n1 + n2 {
            prop_assert_eq!(r.z, 0.0);
        } else {
            let z = oracle_pooled_z(c1, n1, c2, n2);
            prop_assert!((r.z - z).abs() <= 1e-12 * z.abs().max(1.0), "{} vs {}", r.z, z);
            if z.abs() < 8.0 {
                prop_assert!((r.p_value - oracle_two_sided(z)).abs() < 1e-6);
            }
            prop_assert_eq!(r.significant_at_05, r.p_value < 0.05);
        }
    }

    #[test]
    fn folds_are_stratified(labels in prop::collection::vec(0usize..4, 10..120), folds in 2usize..11, seed in any::<u64>()) {
        prop_assume!(folds <= labels.len());
        let rows = labels.iter().map(|_| vec![0.0]).collect();
        let d = Dataset::new(Schema::numeric(&["x"], &["a", "b", "c", "d"]), rows, labels.clone()).unwrap();
        let parts = kfold(&d, folds, seed).unwrap();
        prop_assert_eq!(parts.len(), folds);

        let mut seen = BTreeSet::new();
        for p in &parts {
            prop_assert_eq!(p.train.len() + p.test.len(), labels.len());
            for &i in &p.test {
                prop_assert!(seen.insert(i));
            }
        }
        prop_assert_eq!(seen.len(), labels.len());

        let sizes: Vec<usize> = parts.iter().map(|p| p.test.len()).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for c in 0..4 {
            let per: Vec<usize> = parts.iter().map(|p| p.test.iter().filter(|&&i| labels[i] == c).count()).collect();
            prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
        }
        prop_assert_eq!(kfold(&d, folds, seed).unwrap(), parts);
    }

    #[test]
    fn subsamples_are_nested(n in 1usize..300, seed in any::<u64>()) {
        let mut prev: Vec<usize> = Vec::new();
        for size in (1..=n).step_by(1 + n / 7) {
            let s = subsample(n, size, seed).unwrap();
            prop_assert_eq!(s.len(), size);
            prop_assert!(s.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(prev.iter().all(|i| s.contains(i)));
            prev = s;
        }
        prop_assert_eq!(subsample(n, n, seed).unwrap(), (0..n).collect::<Vec<_>>());
    }
}

fn synthetic_records() -> Vec<PredictionRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    (0..100)
        .map(|_| {
            // a coarse grid of confidences so thresholds are shared
            let confidence = f64::from(rng.gen_range(0..25u32)) / 8.0;
            let correct = rng.gen_bool((0.3 + confidence / 4.0).min(0.95));
            PredictionRecord {
                bit_probs: vec![],
                distances: vec![],
                predicted_class: 0,
                confidence,
                true_class: Some(usize::from(!correct)),
            }
        })
        .collect()
}

#[test]
fn rejection_curve_matches_threshold_filter() {
    let recs = synthetic_records();
    let curve = rejection_curve(&recs).unwrap();

    let mut thetas: Vec<f64> = recs.iter().map(|r| r.confidence).collect();
    thetas.push(0.0);
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    let mut expected = Vec::new();
    for &theta in &thetas {
        let kept: Vec<&PredictionRecord> = recs.iter().filter(|r| r.confidence >= theta).collect();
        let rejected = recs.len() - kept.len();
        if theta > 0.0 && rejected == 0 {
            continue;
        }
        let ok = kept.iter().filter(|r| r.is_correct() == Some(true)).count();
        expected.push((theta, rejected as f64 / 100.0, ok as f64 / kept.len() as f64));
    }
    let got: Vec<(f64, f64, f64)> = curve
        .points
        .iter()
        .map(|p| (p.theta, p.rejected_fraction, p.accuracy))
        .collect();
    assert_eq!(got, expected);
    assert_eq!(curve.points[0].accuracy, accuracy(&recs).unwrap());
    assert_eq!(curve.terminal_theta, thetas.last().copied().unwrap());

    let mut shuffled = recs.clone();
    shuffled.reverse();
    assert_eq!(rejection_curve(&shuffled).unwrap(), curve);
}

#[test]
fn full_size_learning_curve_equals_plain_training() {
    let data = load("glass");
    let (tr, te) = split(&data, 0.7, 3, true).unwrap();
    let reg = LearnerRegistry::builtin();
    let rows = learning_curve(
        &tr,
        &te,
        &[40, tr.len()],
        &[5, 6],
        &CodeChoice::OnePerClass,
        &TrainConfig::new("tree", 0),
        &reg,
    )
    .unwrap();
    assert_eq!(rows.len(), 2);
    for (j, seed) in [5u64, 6].into_iter().enumerate() {
        let model = train(&tr, &CodeChoice::OnePerClass, &TrainConfig::new("tree", seed), &reg).unwrap();
        let acc = accuracy(&model.classify_dataset(&te).unwrap()).unwrap();
        assert_eq!(rows[1].accuracies[j], acc);
        assert_eq!(rows[1].total_leaves[j], model.leaf_counts().iter().sum::<usize>());
    }
    assert!(rows[0]
        .total_leaves
        .iter()
        .zip(&rows[1].total_leaves)
        .all(|(a, b)| a <= b));
}

#[test]
fn cross_validation_is_thread_independent() {
    let data = load("glass");
    let reg = LearnerRegistry::builtin();
    let mut cfg = TrainConfig::new("tree", 1);
    let one = cross_validate(&data, 10, 1, &CodeChoice::Multiclass, &cfg, &reg).unwrap();
    cfg.jobs = 4;
    let four = cross_validate(&data, 10, 1, &CodeChoice::Multiclass, &cfg, &reg).unwrap();
    assert_eq!(one, four);
    assert_eq!(one.folds.len(), 10);
    assert_eq!(one.folds.iter().map(|f| f.test_size).sum::<usize>(), 214);
    let pooled = accuracy(&one.records).unwrap();
    assert!((pooled - one.mean_accuracy).abs() < 0.02);
}

#[test]
fn codeword_assignment_does_not_matter_on_blobs() {
    let data = load("blobs");
    let (tr, te) = split(&data, 0.6, 8, true).unwrap();
    let code = exhaustive_code(5).unwrap();
    let reg = LearnerRegistry::builtin();
    let seeds = [21, 22, 23, 24, 25];
    let table = permutation_experiment(&tr, &te, &code, &seeds, &TrainConfig::new("tree", 0), &reg).unwrap();
    assert_eq!(table.rows.len(), 5);
    assert_eq!(table.tests.len(), 10);
    assert!(
        table.tests.iter().all(|t| !t.test.significant_at_05),
        "{:?}",
        table.rows
    );
    let again = permutation_experiment(&tr, &te, &code, &seeds, &TrainConfig::new("tree", 0), &reg).unwrap();
    assert_eq!(again, table);

    // the identity assignment reproduces the plain run
    let ident = (0..100)
        .find(|&s| ecoc::eval::random_permutation(5, s) == [0, 1, 2, 3, 4])
        .unwrap();
    let t = permutation_experiment(&tr, &te, &code, &[ident], &TrainConfig::new("tree", 0), &reg).unwrap();
    let plain = train(
        &tr,
        &CodeChoice::Matrix(code.clone()),
        &TrainConfig::new("tree", 0),
        &reg,
    )
    .unwrap();
    assert_eq!(
        t.rows[0].accuracy,
        accuracy(&plain.classify_dataset(&te).unwrap()).unwrap()
    );
}
