//! Column selection from the exhaustive code by GSAT-style local search.
//!
//! One boolean per candidate column (included or not). For every pair of
//! codewords, the number of chosen columns in which they differ must lie
//! in the band `[d, L - d]`; a cardinality term requires exactly `L`
//! chosen columns. The score is the number of violated pair constraints
//! plus `|chosen - L|`; each step flips the variable that minimizes the
//! score, breaking ties uniformly at random.

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::exhaustive::exhaustive_columns;
use super::SearchConfig;
use crate::codes::CodeMatrix;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Debug)]
pub struct ColumnSelection {
    pub code: CodeMatrix,
    /// Indices into the exhaustive code's columns, ascending.
    pub columns: Vec<usize>,
    pub satisfied: bool,
    pub score: usize,
    /// Restart that produced the result.
    pub restart: usize,
}

struct Problem {
    /// `diff[c]` lists the codeword pairs that column `c` separates.
    diff: Vec<Vec<u16>>,
    pairs: usize,
    lo: usize,
    hi: usize,
    length: usize,
}

impl Problem {
    fn score(&self, dist: &[usize], chosen: usize) -> usize {
        dist.iter().filter(|&&d| d < self.lo || d > self.hi).count() + chosen.abs_diff(self.length)
    }

    /// Score after flipping column `c`.
    fn flipped_score(&self, dist: &[usize], violated: usize, chosen: usize, on: bool, c: usize) -> usize {
        let mut v = violated;
        for &p in &self.diff[c] {
            let d = dist[p as usize];
            let nd = if on { d - 1 } else { d + 1 };
            let was = d < self.lo || d > self.hi;
            let now = nd < self.lo || nd > self.hi;
            match (was, now) {
                (true, false) => v -= 1,
                (false, true) => v += 1,
                _ => {}
            }
        }
        let nc = if on { chosen - 1 } else { chosen + 1 };
        v + nc.abs_diff(self.length)
    }
}

pub fn select_columns(k: usize, length: usize, cfg: &SearchConfig) -> Result<ColumnSelection> {
    cfg.check()?;
    if !(3..=11).contains(&k) {
        return Err(Error::UnsupportedSize(format!(
            "column selection works on exhaustive codes with 3..=11 classes, got {k}"
        )));
    }
    let candidates = exhaustive_columns(k);
    if length == 0 || length > candidates.len() {
        return Err(Error::invalid(format!(
            "length {length} outside 1..={} for k={k}",
            candidates.len()
        )));
    }
    let (lo, hi) = cfg
        .column_band
        .ok_or_else(|| Error::invalid("column selection requires a band (d, L - d)"))?;
    if lo > length / 2 || hi != length - lo {
        return Err(Error::invalid(format!(
            "infeasible band [{lo}, {hi}] for length {length}: need d <= {} and upper = L - d",
            length / 2
        )));
    }

    let mut pair_index = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            pair_index.push((a, b));
        }
    }
    let diff = candidates
        .iter()
        .map(|col| {
            pair_index
                .iter()
                .enumerate()
                .filter(|(_, &(a, b))| col.get(a) != col.get(b))
                .map(|(p, _)| p as u16)
                .collect()
        })
        .collect();
    let problem = Problem {
        diff,
        pairs: pair_index.len(),
        lo,
        hi,
        length,
    };

    let tries = cfg.restarts + 1;
    let flips_per_try = (cfg.max_iterations / tries).max(1);
    let mut best: Option<(usize, usize, Vec<bool>)> = None;
    for r in 0..tries {
        let (score, state) = run_try(
            &problem,
            candidates.len(),
            flips_per_try,
            seed::derive(cfg.seed, r as u64),
        );
        if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
            best = Some((score, r, state));
        }
        if score == 0 {
            break;
        }
    }
    let (score, restart, state) = best.expect("at least one try");
    let columns: Vec<usize> = (0..state.len()).filter(|&c| state[c]).collect();
    let chosen: Vec<_> = columns.iter().map(|&c| candidates[c].clone()).collect();
    let code = CodeMatrix::from_columns(k, &chosen)?;
    Ok(ColumnSelection {
        code,
        columns,
        satisfied: score == 0,
        score,
        restart,
    })
}

fn run_try(p: &Problem, ncols: usize, flips: usize, seed: u64) -> (usize, Vec<bool>) {
    let mut rng = seed::rng_from_seed(seed);
    let mut order: Vec<usize> = (0..ncols).collect();
    order.shuffle(&mut rng);
    let mut state = vec![false; ncols];
    let mut dist = vec![0usize; p.pairs];
    for &c in &order[..p.length] {
        state[c] = true;
        for &q in &p.diff[c] {
            dist[q as usize] += 1;
        }
    }
    let mut chosen = p.length;
    let mut score = p.score(&dist, chosen);
    let mut best = (score, state.clone());
    let mut ties = Vec::new();
    for _ in 0..flips {
        if score == 0 {
            break;
        }
        let violated = score - chosen.abs_diff(p.length);
        let mut min = usize::MAX;
        ties.clear();
        for (c, &on) in state.iter().enumerate() {
            let s = p.flipped_score(&dist, violated, chosen, on, c);
            if s < min {
                min = s;
                ties.clear();
            }
            if s == min {
                ties.push(c);
            }
        }
        let c = ties[rng.gen_range(0..ties.len())];
        let on = state[c];
        state[c] = !on;
        for &q in &p.diff[c] {
            if on {
                dist[q as usize] -= 1;
            } else {
                dist[q as usize] += 1;
            }
        }
        chosen = if on { chosen - 1 } else { chosen + 1 };
        score = min;
        if score < best.0 {
            best = (score, state.clone());
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::hamming_distance;

    fn cfg(seed: u64, band: (usize, usize)) -> SearchConfig {
        SearchConfig {
            seed,
            max_iterations: 2000,
            restarts: 3,
            column_band: Some(band),
            ..SearchConfig::default()
        }
    }

    #[test]
    fn full_length_unconstrained_is_the_exhaustive_code() {
        let sel = select_columns(8, 127, &cfg(1, (0, 127))).unwrap();
        assert!(sel.satisfied);
        assert_eq!(sel.columns, (0..127).collect::<Vec<_>>());
        assert_eq!(sel.code.columns(), exhaustive_columns(8));
    }

    #[test]
    fn band_is_respected_when_satisfied() {
        let sel = select_columns(8, 31, &cfg(7, (10, 21))).unwrap();
        assert!(sel.satisfied);
        assert_eq!(sel.code.n(), 31);
        for a in 0..8 {
            for b in a + 1..8 {
                let d = hamming_distance(sel.code.row(a), sel.code.row(b)).unwrap();
                assert!((10..=21).contains(&d), "rows {a},{b}: {d}");
            }
        }
    }

    #[test]
    fn infeasible_band() {
        let r = select_columns(8, 63, &cfg(1, (32, 31)));
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
        let r = select_columns(8, 31, &cfg(1, (10, 20)));
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn tight_budget_flags_unsatisfied() {
        let c = SearchConfig {
            seed: 3,
            max_iterations: 1,
            restarts: 0,
            column_band: Some((15, 16)),
            ..SearchConfig::default()
        };
        let sel = select_columns(11, 31, &c).unwrap();
        assert!(!sel.satisfied);
        assert!(sel.score > 0);
    }

    #[test]
    fn deterministic() {
        let a = select_columns(9, 40, &cfg(11, (14, 26))).unwrap();
        let b = select_columns(9, 40, &cfg(11, (14, 26))).unwrap();
        assert_eq!(a.columns, b.columns);
    }
}
