//! Accuracy, significance tests, cross-validation, rejection curves,
//! learning curves and the codeword-permutation experiment.
//!
//! Both significance tests are two-sided and use [`crate::stats`] for the
//! normal CDF.

use std::io::Write;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::codes::CodeMatrix;
use crate::data::Dataset;
use crate::ecoc::{train, CodeChoice, PredictionRecord, TrainConfig};
use crate::error::{Error, Result};
use crate::learners::LearnerRegistry;
use crate::par;
use crate::seed::{derive_tagged, rng_from_seed};
use crate::stats::two_sided_p;

const TAG_FOLDS: u64 = 10;
const TAG_SUBSAMPLE: u64 = 11;

/// Fraction of records whose prediction matches the true class.
pub fn accuracy(records: &[PredictionRecord]) -> Result<f64> {
    Ok(correct_count(records)? as f64 / records.len() as f64)
}

fn correct_count(records: &[PredictionRecord]) -> Result<usize> {
    if records.is_empty() {
        return Err(Error::invalid("accuracy of an empty record set"));
    }
    records.iter().try_fold(0, |acc, r| match r.is_correct() {
        Some(ok) => Ok(acc + usize::from(ok)),
        None => Err(Error::invalid("record without a true class")),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SignificanceResult {
    pub z: f64,
    pub p_value: f64,
    pub significant_at_05: bool,
}

impl SignificanceResult {
    fn from_z(z: f64) -> Self {
        let p_value = two_sided_p(z);
        SignificanceResult {
            z,
            p_value,
            significant_at_05: p_value < 0.05,
        }
    }
}

/// Pooled two-proportion z test of `correct1/n1` against `correct2/n2`.
/// When the pooled proportion is 0 or 1, `z` is defined as 0.
pub fn two_proportion_test(correct1: usize, n1: usize, correct2: usize, n2: usize) -> Result<SignificanceResult> {
    if n1 == 0 || n2 == 0 || correct1 > n1 || correct2 > n2 {
        return Err(Error::invalid(format!(
            "bad proportions {correct1}/{n1} and {correct2}/{n2}"
        )));
    }
    let (c1, n1, c2, n2) = (correct1 as f64, n1 as f64, correct2 as f64, n2 as f64);
    let pooled = (c1 + c2) / (n1 + n2);
    if pooled <= 0.0 || pooled >= 1.0 {
        return Ok(SignificanceResult::from_z(0.0));
    }
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    Ok(SignificanceResult::from_z((c1 / n1 - c2 / n2) / se))
}

/// Paired test on per-example differences `d_i = a_i - b_i`:
/// `z = mean(d) / (s / sqrt(n))` with `s` the sample standard deviation.
/// Zero variance gives `z = 0` for a zero mean and an infinite `z`
/// otherwise.
pub fn paired_proportion_test(a: &[bool], b: &[bool]) -> Result<SignificanceResult> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "paired test on {} and {} outcomes",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::invalid("paired test needs at least 2 examples"));
    }
    let n = a.len() as f64;
    let d: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| f64::from(u8::from(x)) - f64::from(u8::from(y)))
        .collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let z = if var == 0.0 {
        if mean == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(mean)
        }
    } else {
        mean / (var / n).sqrt()
    };
    Ok(SignificanceResult::from_z(z))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified folds. Each class is shuffled and dealt round-robin, the
/// fold counter carrying over from one class to the next, so fold sizes
/// differ by at most one overall and per class.
pub fn kfold(data: &Dataset, folds: usize, seed: u64) -> Result<Vec<Fold>> {
    if folds < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {folds}")));
    }
    if folds > data.len() {
        return Err(Error::invalid(format!("{folds} folds for {} examples", data.len())));
    }
    let mut rng = rng_from_seed(derive_tagged(seed, TAG_FOLDS, 0));
    let mut assign = vec![0; data.len()];
    let mut next = 0;
    for mut group in data.class_indices() {
        group.shuffle(&mut rng);
        for i in group {
            assign[i] = next;
            next = (next + 1) % folds;
        }
    }
    Ok((0..folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..data.len()).partition(|&i| assign[i] == f);
            Fold { train, test }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RejectionPoint {
    pub theta: f64,
    pub rejected_fraction: f64,
    pub accuracy: f64,
}

/// Accuracy on accepted examples as the confidence threshold rises.
///
/// Thresholds are 0 and every distinct confidence, ascending; an example is
/// rejected when its confidence is below the threshold. A threshold that
/// rejects nothing new is not repeated. The sweep ends at
/// `terminal_theta`, the largest confidence: any higher threshold rejects
/// everything, so the last point keeps the most confident examples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RejectionCurve {
    pub points: Vec<RejectionPoint>,
    pub terminal_theta: f64,
}

pub fn rejection_curve(records: &[PredictionRecord]) -> Result<RejectionCurve> {
    correct_count(records)?;
    if let Some(r) = records.iter().find(|r| r.confidence.is_nan() || r.confidence < 0.0) {
        return Err(Error::invalid(format!(
            "confidence {} is not non-negative",
            r.confidence
        )));
    }
    let mut sorted: Vec<(f64, bool)> = records
        .iter()
        .map(|r| (r.confidence, r.is_correct().unwrap_or(false)))
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let total_correct = sorted.iter().filter(|r| r.1).count();

    let mut points = vec![RejectionPoint {
        theta: 0.0,
        rejected_fraction: 0.0,
        accuracy: total_correct as f64 / n as f64,
    }];
    let mut rejected = 0;
    let mut rejected_correct = 0;
    let mut i = 0;
    while i < n {
        // threshold = next distinct confidence; everything below it is out
        let theta = sorted[i].0;
        if rejected > 0 {
            points.push(RejectionPoint {
                theta,
                rejected_fraction: rejected as f64 / n as f64,
                accuracy: (total_correct - rejected_correct) as f64 / (n - rejected) as f64,
            });
        }
        while i < n && sorted[i].0 == theta {
            rejected += 1;
            rejected_correct += usize::from(sorted[i].1);
            i += 1;
        }
    }
    Ok(RejectionCurve {
        points,
        terminal_theta: sorted[n - 1].0,
    })
}

fn fit_and_score(
    train_set: &Dataset,
    test_set: &Dataset,
    choice: &CodeChoice,
    cfg: &TrainConfig,
    registry: &LearnerRegistry,
) -> Result<(Vec<PredictionRecord>, usize)> {
    let model = train(train_set, choice, cfg, registry)?;
    let records = model.classify_dataset(test_set)?;
    let leaves = model.leaf_counts().iter().sum();
    Ok((records, leaves))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub total_leaves: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossValidation {
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
    /// Test predictions in example order.
    pub records: Vec<PredictionRecord>,
}

/// Stratified k-fold cross-validation. Folds run on up to `cfg.jobs`
/// threads; results do not depend on the thread count.
pub fn cross_validate(
    data: &Dataset,
    folds: usize,
    fold_seed: u64,
    choice: &CodeChoice,
    cfg: &TrainConfig,
    registry: &LearnerRegistry,
) -> Result<CrossValidation> {
    let parts = kfold(data, folds, fold_seed)?;
    let inner = TrainConfig { jobs: 1, ..cfg.clone() };
    let per_fold = par::map_indexed(cfg.jobs, parts.len(), |f| {
        let p = &parts[f];
        fit_and_score(&data.subset(&p.train), &data.subset(&p.test), choice, &inner, registry)
    })?;
    let mut records: Vec<Option<PredictionRecord>> = vec![None; data.len()];
    let mut results = Vec::new();
    for (f, (recs, leaves)) in per_fold.into_iter().enumerate() {
        let correct = correct_count(&recs)?;
        results.push(FoldResult {
            fold: f,
            train_size: parts[f].train.len(),
            test_size: parts[f].test.len(),
            correct,
            accuracy: correct as f64 / recs.len() as f64,
            total_leaves: leaves,
        });
        for (&i, r) in parts[f].test.iter().zip(recs) {
            records[i] = Some(r);
        }
    }
    let mean_accuracy = results.iter().map(|r| r.accuracy).sum::<f64>() / results.len() as f64;
    Ok(CrossValidation {
        folds: results,
        mean_accuracy,
        records: records
            .into_iter()
            .map(|r| r.expect("every example is tested once"))
            .collect(),
    })
}

/// The first `size` entries of a seeded permutation of the training set,
/// in original order. Samples for one seed are nested, and the full size
/// is the whole training set.
pub fn subsample(n: usize, size: usize, seed: u64) -> Result<Vec<usize>> {
    if size == 0 || size > n {
        return Err(Error::invalid(format!("sample size {size} outside 1..={n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(derive_tagged(seed, TAG_SUBSAMPLE, 0)));
    let mut pick = order[..size].to_vec();
    pick.sort_unstable();
    Ok(pick)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearningCurveRow {
    pub size: usize,
    pub seeds: Vec<u64>,
    pub accuracies: Vec<f64>,
    pub total_leaves: Vec<usize>,
    pub mean_accuracy: f64,
}

/// Train on nested subsamples of `train_set` and score on `test_set`.
/// Each seed is used both to draw the sample and as the training seed.
pub fn learning_curve(
    train_set: &Dataset,
    test_set: &Dataset,
    sizes: &[usize],
    seeds: &[u64],
    choice: &CodeChoice,
    cfg: &TrainConfig,
    registry: &LearnerRegistry,
) -> Result<Vec<LearningCurveRow>> {
    if seeds.is_empty() {
        return Err(Error::invalid("learning curve needs at least one seed"));
    }
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("sizes must be non-empty and strictly ascending"));
    }
    for &s in sizes {
        subsample(train_set.len(), s, 0)?;
    }
    let cells: Vec<(usize, u64)> = sizes
        .iter()
        .flat_map(|&s| seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let inner = TrainConfig { jobs: 1, ..cfg.clone() };
    let scored = par::map_indexed(cfg.jobs, cells.len(), |c| {
        let (size, seed) = cells[c];
        let pick = subsample(train_set.len(), size, seed)?;
        let run = TrainConfig { seed, ..inner.clone() };
        let (recs, leaves) = fit_and_score(&train_set.subset(&pick), test_set, choice, &run, registry)?;
        Ok((accuracy(&recs)?, leaves))
    })?;
    Ok(sizes
        .iter()
        .enumerate()
        .map(|(i, &size)| {
            let cell = &scored[i * seeds.len()..(i + 1) * seeds.len()];
            let accuracies: Vec<f64> = cell.iter().map(|c| c.0).collect();
            LearningCurveRow {
                size,
                seeds: seeds.to_vec(),
                mean_accuracy: accuracies.iter().sum::<f64>() / accuracies.len() as f64,
                accuracies,
                total_leaves: cell.iter().map(|c| c.1).collect(),
            }
        })
        .collect())
}

/// Random assignment of codewords to classes drawn from `seed`.
pub fn random_permutation(k: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..k).collect();
    p.shuffle(&mut rng_from_seed(seed));
    p
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PermutationRow {
    pub seed: u64,
    pub permutation: Vec<usize>,
    pub correct: usize,
    pub n: usize,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairwiseTest {
    pub a: usize,
    pub b: usize,
    pub test: SignificanceResult,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PermutationTable {
    pub rows: Vec<PermutationRow>,
    /// Two-proportion test for every pair of rows.
    pub tests: Vec<PairwiseTest>,
}

/// Retrain with the codewords reassigned to classes by each seed's random
/// permutation and score on `test_set`.
pub fn permutation_experiment(
    train_set: &Dataset,
    test_set: &Dataset,
    code: &CodeMatrix,
    perm_seeds: &[u64],
    cfg: &TrainConfig,
    registry: &LearnerRegistry,
) -> Result<PermutationTable> {
    if perm_seeds.is_empty() {
        return Err(Error::invalid("permutation experiment needs at least one seed"));
    }
    let inner = TrainConfig { jobs: 1, ..cfg.clone() };
    let rows = par::map_indexed(cfg.jobs, perm_seeds.len(), |t| {
        let permutation = random_permutation(code.k(), perm_seeds[t]);
        let permuted = code.permute_rows(&permutation)?;
        let (recs, _) = fit_and_score(train_set, test_set, &CodeChoice::Matrix(permuted), &inner, registry)?;
        let correct = correct_count(&recs)?;
        Ok(PermutationRow {
            seed: perm_seeds[t],
            permutation,
            correct,
            n: recs.len(),
            accuracy: correct as f64 / recs.len() as f64,
        })
    })?;
    let mut tests = Vec::new();
    for a in 0..rows.len() {
        for b in a + 1..rows.len() {
            tests.push(PairwiseTest {
                a,
                b,
                test: two_proportion_test(rows[a].correct, rows[a].n, rows[b].correct, rows[b].n)?,
            });
        }
    }
    Ok(PermutationTable { rows, tests })
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::invalid(format!("csv output: {e}"))
}

/// Write rows as CSV with a header.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

/// `theta, rejected fraction, accuracy` plus both as percentages.
pub fn rejection_curve_rows(curve: &RejectionCurve) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec![
        "theta",
        "rejected_fraction",
        "accuracy",
        "rejected_percent",
        "accuracy_percent",
    ];
    let rows = curve
        .points
        .iter()
        .map(|p| {
            vec![
                p.theta.to_string(),
                p.rejected_fraction.to_string(),
                p.accuracy.to_string(),
                (100.0 * p.rejected_fraction).to_string(),
                (100.0 * p.accuracy).to_string(),
            ]
        })
        .collect();
    (header, rows)
}

/// `predicted_label, confidence, d1, d2, b_0 .. b_{n-1}` per record.
pub fn prediction_rows(records: &[PredictionRecord], class_names: &[String]) -> (Vec<String>, Vec<Vec<String>>) {
    let n = records.first().map_or(0, |r| r.bit_probs.len());
    let mut header: Vec<String> = ["predicted_label", "confidence", "d1", "d2"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..n).map(|j| format!("b_{j}")));
    let rows = records
        .iter()
        .map(|r| {
            let (d1, d2) = r.nearest_two();
            let mut row = vec![
                class_names[r.predicted_class].clone(),
                r.confidence.to_string(),
                d1.to_string(),
                d2.to_string(),
            ];
            row.extend(r.bit_probs.iter().map(|b| b.to_string()));
            row
        })
        .collect();
    (header, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Schema;

    fn rec(conf: f64, ok: bool) -> PredictionRecord {
        PredictionRecord {
            bit_probs: vec![],
            distances: vec![0.0, conf],
            predicted_class: 0,
            confidence: conf,
            true_class: Some(if ok { 0 } else { 1 }),
        }
    }

    #[test]
    fn accuracy_counts() {
        let r = [rec(0.1, true), rec(0.2, true), rec(0.3, false), rec(0.4, true)];
        assert_eq!(accuracy(&r).unwrap(), 0.75);
        assert!(accuracy(&[]).is_err());
    }

    #[test]
    fn two_proportion_examples() {
        let s = two_proportion_test(80, 100, 60, 100).unwrap();
        assert!((s.z - 3.086).abs() < 1e-3, "{}", s.z);
        assert!((s.p_value - 0.002).abs() < 1e-3);
        assert!(s.significant_at_05);
        let r = two_proportion_test(60, 100, 80, 100).unwrap();
        assert_eq!(r.z, -s.z);
        assert_eq!(r.p_value, s.p_value);
        let e = two_proportion_test(50, 100, 50, 100).unwrap();
        assert_eq!((e.z, e.p_value), (0.0, 1.0));
        assert_eq!(two_proportion_test(10, 10, 5, 5).unwrap().z, 0.0);
        assert!(two_proportion_test(3, 2, 1, 1).is_err());
    }

    #[test]
    fn paired_examples() {
        let a = vec![true, false, true, true];
        assert_eq!(paired_proportion_test(&a, &a).unwrap().z, 0.0);
        let s = paired_proportion_test(&[true; 5], &[false; 5]).unwrap();
        assert!(s.z.is_infinite() && s.significant_at_05);
        assert!(paired_proportion_test(&[true], &[true]).is_err());
    }

    #[test]
    fn rejection_hand_sweep() {
        let r = [rec(0.1, false), rec(0.2, true), rec(0.3, true), rec(0.4, true)];
        let c = rejection_curve(&r).unwrap();
        assert_eq!(
            c.points[0],
            RejectionPoint {
                theta: 0.0,
                rejected_fraction: 0.0,
                accuracy: 0.75
            }
        );
        let p = c.points.iter().find(|p| p.theta == 0.2).unwrap();
        assert_eq!((p.rejected_fraction, p.accuracy), (0.25, 1.0));
        assert_eq!(c.points.len(), 4);
        assert_eq!(c.terminal_theta, 0.4);

        let same = [rec(0.5, true), rec(0.5, false)];
        let c = rejection_curve(&same).unwrap();
        assert_eq!(c.points.len(), 1);
        assert_eq!(c.terminal_theta, 0.5);
    }

    #[test]
    fn kfold_balanced() {
        let schema = Schema::numeric(&["x"], &["a", "b"]);
        let d = Dataset::new(
            schema,
            (0..20).map(|i| vec![i as f64]).collect(),
            (0..20).map(|i| i % 2).collect(),
        )
        .unwrap();
        let folds = kfold(&d, 10, 3).unwrap();
        let mut seen = [0; 20];
        for f in &folds {
            assert_eq!(f.test.len(), 2);
            assert_eq!(d.subset(&f.test).class_counts(), [1, 1]);
            for &i in &f.test {
                seen[i] += 1;
            }
            assert_eq!(f.train.len() + f.test.len(), 20);
        }
        assert!(seen.iter().all(|&c| c == 1));
        assert_eq!(kfold(&d, 10, 3).unwrap(), folds);
        assert!(kfold(&d, 21, 3).is_err());
    }

    #[test]
    fn subsample_nested() {
        let small = subsample(50, 10, 4).unwrap();
        let big = subsample(50, 30, 4).unwrap();
        assert!(small.iter().all(|i| big.contains(i)));
        assert_eq!(subsample(50, 50, 4).unwrap(), (0..50).collect::<Vec<_>>());
        assert!(subsample(50, 51, 4).is_err());
    }
}
