use serde::{Deserialize, Serialize};

use crate::codes::{BitRow, CodeMatrix};
use crate::error::{Error, Result};

/// One decoded example.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    /// Bit probabilities `B`, or class probabilities for a direct
    /// multiclass tree.
    pub bit_probs: Vec<f64>,
    /// Distance of `B` to each class. L1 to the codewords for code-based
    /// models; `1 - p_i` for a direct multiclass tree.
    pub distances: Vec<f64>,
    pub predicted_class: usize,
    pub confidence: f64,
    pub true_class: Option<usize>,
}

impl PredictionRecord {
    /// The two smallest distances.
    pub fn nearest_two(&self) -> (f64, f64) {
        two_smallest(&self.distances)
    }

    pub fn is_correct(&self) -> Option<bool> {
        self.true_class.map(|t| t == self.predicted_class)
    }
}

fn two_smallest(v: &[f64]) -> (f64, f64) {
    let mut a = f64::INFINITY;
    let mut b = f64::INFINITY;
    for &x in v {
        if x < a {
            b = a;
            a = x;
        } else if x < b {
            b = x;
        }
    }
    (a, b)
}

/// `sum_j |b_j - w_j|`.
pub fn l1_distance(b: &[f64], w: &BitRow) -> Result<f64> {
    if b.len() != w.len() {
        return Err(Error::invalid(format!(
            "probability vector of length {} against a codeword of length {}",
            b.len(),
            w.len()
        )));
    }
    Ok(b.iter()
        .zip(w.iter())
        .map(|(&p, bit)| if bit { 1.0 - p } else { p })
        .sum())
}

/// Index of the minimum, first index on exact ties.
fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Nearest codeword under L1; confidence is `d2 - d1`.
pub fn decode_l1(b: Vec<f64>, code: &CodeMatrix) -> Result<PredictionRecord> {
    let distances = code
        .rows()
        .iter()
        .map(|w| l1_distance(&b, w))
        .collect::<Result<Vec<_>>>()?;
    let predicted_class = argmin(&distances);
    let (d1, d2) = two_smallest(&distances);
    Ok(PredictionRecord {
        bit_probs: b,
        distances,
        predicted_class,
        confidence: d2 - d1,
        true_class: None,
    })
}

/// Highest activation wins; confidence is the gap to the runner-up.
/// Distances are the L1 distances to the one-per-class codewords.
pub fn decode_argmax(b: Vec<f64>) -> Result<PredictionRecord> {
    if b.len() < 2 {
        return Err(Error::invalid("argmax decoding needs at least two outputs"));
    }
    let distances: Vec<f64> = (0..b.len())
        .map(|i| {
            b.iter()
                .enumerate()
                .map(|(j, &p)| if j == i { 1.0 - p } else { p })
                .sum()
        })
        .collect();
    let predicted_class = argmax(&b);
    let top = b[predicted_class];
    let second = b
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != predicted_class)
        .map(|(_, &p)| p)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(PredictionRecord {
        bit_probs: b,
        distances,
        predicted_class,
        confidence: top - second,
        true_class: None,
    })
}

/// Decision from a class-probability vector.
pub fn decode_distribution(p: Vec<f64>) -> Result<PredictionRecord> {
    let mut r = decode_argmax(p)?;
    r.distances = r.bit_probs.iter().map(|p| 1.0 - p).collect();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{digit_code_meaningful, one_per_class};

    #[test]
    fn l1_examples() {
        let w = BitRow::parse("100").unwrap();
        assert!((l1_distance(&[0.9, 0.2, 0.4], &w).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(l1_distance(&[1.0, 0.0, 0.0], &w).unwrap(), 0.0);
        assert_eq!(l1_distance(&[0.5; 3], &w).unwrap(), 1.5);
        assert!(l1_distance(&[0.5; 2], &w).is_err());
    }

    #[test]
    fn digit_code_hard_bits() {
        // 110001 is nearest to 110000, class 4
        let b: Vec<f64> = "110001".chars().map(|c| if c == '1' { 1.0 } else { 0.0 }).collect();
        let r = decode_l1(b, &digit_code_meaningful()).unwrap();
        assert_eq!(r.predicted_class, 4);
        assert_eq!(r.nearest_two().0, 1.0);
    }

    #[test]
    fn argmax_examples() {
        let r = decode_argmax(vec![0.2, 0.9, 0.3]).unwrap();
        assert_eq!(r.predicted_class, 1);
        assert!((r.confidence - 0.6).abs() < 1e-15);
        let r = decode_argmax(vec![0.4; 4]).unwrap();
        assert_eq!((r.predicted_class, r.confidence), (0, 0.0));
        let r = decode_distribution(vec![0.7, 0.2, 0.1]).unwrap();
        assert_eq!(r.predicted_class, 0);
        assert!((r.confidence - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ties_go_low_and_opc_agrees() {
        let code = one_per_class(3).unwrap();
        let r = decode_l1(vec![0.5, 0.5, 0.1], &code).unwrap();
        assert_eq!((r.predicted_class, r.confidence), (0, 0.0));
        let a = decode_argmax(vec![0.3, 0.8, 0.1]).unwrap();
        let l = decode_l1(vec![0.3, 0.8, 0.1], &code).unwrap();
        assert_eq!(a.predicted_class, l.predicted_class);
        assert_eq!(a.distances, l.distances);
    }
}
