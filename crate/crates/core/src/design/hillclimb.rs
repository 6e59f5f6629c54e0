//! Randomized hill climbing on row and column separation.
//!
//! Starting from `k` random codewords of length `L`, each step locates the
//! closest pair of rows and the most extreme pair of columns and tries all
//! 16 assignments of the four bits where they intersect. When none of them
//! improves the objective (a local maximum), a random pair of rows and a
//! random pair of columns are tried instead and any non-worsening
//! assignment is taken.
//!
//! The objective is compared lexicographically:
//! 1. minimum row distance (higher is better);
//! 2. column extremity, the largest `|H(c_i, c_j) - k/2|` over column
//!    pairs (lower is better);
//! 3. number of row pairs at the minimum distance (lower is better).

use std::cmp::Ordering;

use rand::Rng as _;

use super::SearchConfig;
use crate::codes::{BitRow, CodeMatrix};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Objective {
    pub min_row_distance: usize,
    /// `max |2 H(c_i, c_j) - k|`, i.e. twice the column extremity.
    pub column_extremity_x2: usize,
    pub pairs_at_min: usize,
}

impl Objective {
    pub fn column_extremity(&self) -> f64 {
        self.column_extremity_x2 as f64 / 2.0
    }
}

impl Ord for Objective {
    fn cmp(&self, other: &Self) -> Ordering {
        self.min_row_distance
            .cmp(&other.min_row_distance)
            .then(other.column_extremity_x2.cmp(&self.column_extremity_x2))
            .then(other.pairs_at_min.cmp(&self.pairs_at_min))
    }
}

impl PartialOrd for Objective {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug)]
pub struct HillClimbResult {
    pub code: CodeMatrix,
    pub initial: CodeMatrix,
    pub initial_objective: Objective,
    /// Objective after every accepted move, starting with the initial one.
    pub accepted: Vec<Objective>,
    pub iterations: usize,
}

pub fn hill_climb_code(k: usize, length: usize, cfg: &SearchConfig) -> Result<HillClimbResult> {
    cfg.check()?;
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 classes, got {k}")));
    }
    if length == 0 || (length < usize::BITS as usize && (1usize << length) < k) {
        return Err(Error::invalid(format!(
            "length {length} cannot hold {k} distinct codewords"
        )));
    }
    let mut rng = seed::rng_from_seed(cfg.seed);
    let mut rows: Vec<BitRow> = (0..k)
        .map(|_| BitRow::from_bits(&(0..length).map(|_| rng.gen::<bool>()).collect::<Vec<_>>()))
        .collect();
    // make codewords distinct
    loop {
        let dup = (0..k).find_map(|a| (a + 1..k).find(|&b| rows[a] == rows[b]));
        match dup {
            Some(b) => {
                let j = rng.gen_range(0..length);
                rows[b].flip(j);
            }
            None => break,
        }
    }
    let initial = CodeMatrix::from_rows(rows.clone())?;
    let mut state = State::new(rows);
    let mut current = state.objective();
    let initial_objective = current;
    let mut accepted = vec![current];
    let mut iterations = 0;

    for _ in 0..cfg.max_iterations {
        if let Some(t) = cfg.target_row_distance {
            if current.min_row_distance >= t {
                break;
            }
        }
        iterations += 1;
        let (r1, r2) = state.closest_rows(&mut rng);
        let cols = state.extreme_columns(&mut rng);
        let (best, assignment) = state.best_assignment(&[r1, r2], &cols);
        if best > current {
            state.apply(&[r1, r2], &cols, assignment);
            current = best;
            accepted.push(current);
            continue;
        }
        // local maximum: random rows and columns, accept sideways moves
        let r1 = rng.gen_range(0..k);
        let r2 = (r1 + rng.gen_range(1..k)) % k;
        let cols = if length >= 2 {
            let c1 = rng.gen_range(0..length);
            vec![c1, (c1 + rng.gen_range(1..length)) % length]
        } else {
            vec![0]
        };
        let (best, assignment) = state.best_assignment(&[r1, r2], &cols);
        if best >= current && assignment != state.read(&[r1, r2], &cols) {
            state.apply(&[r1, r2], &cols, assignment);
            current = best;
            accepted.push(current);
        }
    }

    Ok(HillClimbResult {
        code: CodeMatrix::from_rows(state.rows)?,
        initial,
        initial_objective,
        accepted,
        iterations,
    })
}

struct State {
    rows: Vec<BitRow>,
    k: usize,
    len: usize,
}

impl State {
    fn new(rows: Vec<BitRow>) -> Self {
        let k = rows.len();
        let len = rows[0].len();
        State { rows, k, len }
    }

    fn column(&self, j: usize) -> BitRow {
        let mut c = BitRow::zeros(self.k);
        for (i, r) in self.rows.iter().enumerate() {
            c.set(i, r.get(j));
        }
        c
    }

    fn objective(&self) -> Objective {
        let mut min = usize::MAX;
        let mut at_min = 0;
        for a in 0..self.k {
            for b in a + 1..self.k {
                let d = self.rows[a].distance_unchecked(&self.rows[b]);
                match d.cmp(&min) {
                    Ordering::Less => {
                        min = d;
                        at_min = 1;
                    }
                    Ordering::Equal => at_min += 1,
                    Ordering::Greater => {}
                }
            }
        }
        let cols: Vec<BitRow> = (0..self.len).map(|j| self.column(j)).collect();
        let mut ext = 0;
        for a in 0..cols.len() {
            for b in a + 1..cols.len() {
                let h = cols[a].distance_unchecked(&cols[b]);
                ext = ext.max((2 * h).abs_diff(self.k));
            }
        }
        Objective {
            min_row_distance: min,
            column_extremity_x2: ext,
            pairs_at_min: at_min,
        }
    }

    fn closest_rows(&self, rng: &mut seed::Rng) -> (usize, usize) {
        let mut min = usize::MAX;
        let mut ties = Vec::new();
        for a in 0..self.k {
            for b in a + 1..self.k {
                let d = self.rows[a].distance_unchecked(&self.rows[b]);
                if d < min {
                    min = d;
                    ties.clear();
                }
                if d == min {
                    ties.push((a, b));
                }
            }
        }
        ties[rng.gen_range(0..ties.len())]
    }

    fn extreme_columns(&self, rng: &mut seed::Rng) -> Vec<usize> {
        if self.len < 2 {
            return vec![0];
        }
        let cols: Vec<BitRow> = (0..self.len).map(|j| self.column(j)).collect();
        let mut max = 0;
        let mut ties = Vec::new();
        for a in 0..cols.len() {
            for b in a + 1..cols.len() {
                let e = (2 * cols[a].distance_unchecked(&cols[b])).abs_diff(self.k);
                if e > max || ties.is_empty() {
                    max = e;
                    ties.clear();
                }
                if e == max {
                    ties.push((a, b));
                }
            }
        }
        let (a, b) = ties[rng.gen_range(0..ties.len())];
        vec![a, b]
    }

    fn read(&self, rows: &[usize], cols: &[usize]) -> u32 {
        let mut bits = 0;
        let mut pos = 0;
        for &r in rows {
            for &c in cols {
                if self.rows[r].get(c) {
                    bits |= 1 << pos;
                }
                pos += 1;
            }
        }
        bits
    }

    fn apply(&mut self, rows: &[usize], cols: &[usize], bits: u32) {
        let mut pos = 0;
        for &r in rows {
            for &c in cols {
                self.rows[r].set(c, (bits >> pos) & 1 == 1);
                pos += 1;
            }
        }
    }

    /// Best assignment of the intersection bits; ties keep the lowest
    /// assignment index. Restores the original bits before returning.
    fn best_assignment(&mut self, rows: &[usize], cols: &[usize]) -> (Objective, u32) {
        let original = self.read(rows, cols);
        let nbits = rows.len() * cols.len();
        let mut best: Option<(Objective, u32)> = None;
        for bits in 0..(1u32 << nbits) {
            self.apply(rows, cols, bits);
            let obj = self.objective();
            if best.is_none_or(|(b, _)| obj > b) {
                best = Some((obj, bits));
            }
        }
        self.apply(rows, cols, original);
        best.expect("at least one assignment")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::quality_report;

    fn cfg(seed: u64, iters: usize) -> SearchConfig {
        SearchConfig {
            seed,
            max_iterations: iters,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn two_classes_one_bit() {
        for s in 0..10 {
            let r = hill_climb_code(2, 1, &cfg(s, 20)).unwrap();
            let mut rows: Vec<String> = r.code.rows().iter().map(|r| r.to_string()).collect();
            rows.sort();
            assert_eq!(rows, ["0", "1"]);
        }
    }

    #[test]
    fn improves_random_start() {
        let r = hill_climb_code(26, 40, &cfg(5, 1500)).unwrap();
        let before = quality_report(&r.initial).min_row_distance;
        let after = quality_report(&r.code).min_row_distance;
        assert!(after > before, "{before} -> {after}");
        assert!(r.accepted.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(r.accepted.last().unwrap().min_row_distance, after);
    }

    #[test]
    fn reproducible() {
        let a = hill_climb_code(12, 20, &cfg(9, 300)).unwrap();
        let b = hill_climb_code(12, 20, &cfg(9, 300)).unwrap();
        assert_eq!(a.code, b.code);
        assert_eq!(a.accepted, b.accepted);
    }

    #[test]
    fn too_short() {
        assert!(hill_climb_code(5, 2, &cfg(0, 10)).is_err());
        assert!(hill_climb_code(4, 2, &cfg(0, 10)).is_ok());
    }

    #[test]
    fn objective_order() {
        let a = Objective {
            min_row_distance: 3,
            column_extremity_x2: 10,
            pairs_at_min: 1,
        };
        let b = Objective {
            min_row_distance: 4,
            column_extremity_x2: 20,
            pairs_at_min: 9,
        };
        let c = Objective {
            min_row_distance: 4,
            column_extremity_x2: 18,
            pairs_at_min: 9,
        };
        let d = Objective {
            min_row_distance: 4,
            column_extremity_x2: 18,
            pairs_at_min: 2,
        };
        assert!(a < b && b < c && c < d);
    }
}
