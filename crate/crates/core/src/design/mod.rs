//! Code construction.
//!
//! Four constructions are available, each behind the [`CodeDesigner`]
//! trait and registered by name in a [`DesignerRegistry`]:
//!
//! | name        | classes | construction                                  |
//! |-------------|---------|-----------------------------------------------|
//! | `exhaustive`| 3–7     | all `2^(k-1) - 1` usable columns              |
//! | `gsat`      | 8–11    | local-search column subset of the exhaustive code |
//! | `hillclimb` | any     | random codewords improved by hill climbing    |
//! | `bch`       | any     | shortened binary BCH code, length 7/15/31/63  |
//!
//! `auto` picks one from the class count.

mod bch;
mod exhaustive;
mod gsat;
mod hillclimb;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use bch::{bch_design, degree_for_length, max_t_for, BchDesign};
pub use exhaustive::exhaustive_code;
pub use gsat::{select_columns, ColumnSelection};
pub use hillclimb::{hill_climb_code, HillClimbResult, Objective};

use crate::codes::{quality_report, CodeMatrix, CodeQualityReport};
use crate::error::{Error, Result};

/// Default code length for column selection and the `k > 11` methods.
pub const DEFAULT_LENGTH: usize = 63;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub max_iterations: usize,
    pub restarts: usize,
    /// Hill climbing stops once the minimum row distance reaches this.
    pub target_row_distance: Option<usize>,
    /// `(d, L - d)`: allowed range of pairwise codeword distances for
    /// column selection.
    pub column_band: Option<(usize, usize)>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            seed: 0,
            max_iterations: 2000,
            restarts: 4,
            target_row_distance: None,
            column_band: None,
        }
    }
}

impl SearchConfig {
    pub(crate) fn check(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct DesignRequest {
    pub classes: usize,
    pub length: Option<usize>,
    /// Designed error correction for BCH; chosen automatically when absent.
    pub bch_t: Option<usize>,
    pub config: SearchConfig,
}

impl DesignRequest {
    pub fn new(classes: usize) -> Self {
        DesignRequest {
            classes,
            length: None,
            bch_t: None,
            config: SearchConfig::default(),
        }
    }

    pub fn length(mut self, length: usize) -> Self {
        self.length = Some(length);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.config.seed = seed;
        self
    }
}

#[derive(Clone, Debug)]
pub struct DesignOutcome {
    pub code: CodeMatrix,
    /// Name of the construction that ran.
    pub method: &'static str,
    pub report: CodeQualityReport,
    /// For searches with a hard constraint: whether it was met.
    pub satisfied: Option<bool>,
    pub notes: Vec<String>,
}

impl DesignOutcome {
    fn new(code: CodeMatrix, method: &'static str) -> Self {
        let report = quality_report(&code);
        DesignOutcome {
            code,
            method,
            report,
            satisfied: None,
            notes: Vec::new(),
        }
    }

    /// Comment lines for the code file.
    pub fn summary(&self) -> Vec<String> {
        let r = &self.report;
        let mut lines = vec![
            format!("method {}", self.method),
            format!("classes {} length {}", self.code.k(), self.code.n()),
            format!("min_row_distance {}", r.min_row_distance),
            format!("correction_capacity {}", r.correction_capacity),
            format!("min_column_separation {}", r.min_column_separation),
            format!("duplicate_rows {}", r.duplicate_rows.len()),
            format!("constant_columns {}", r.constant_columns.len()),
            format!(
                "complementary_or_duplicate_columns {}",
                r.complementary_or_duplicate_columns.len()
            ),
        ];
        if let Some(s) = self.satisfied {
            lines.push(format!("satisfied {s}"));
        }
        lines.extend(self.notes.iter().cloned());
        lines
    }
}

pub trait CodeDesigner: Send + Sync {
    fn name(&self) -> &'static str;
    fn design(&self, request: &DesignRequest) -> Result<DesignOutcome>;
}

struct Exhaustive;
struct Gsat;
struct HillClimb;
struct Bch;
struct Auto;

impl CodeDesigner for Exhaustive {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn design(&self, req: &DesignRequest) -> Result<DesignOutcome> {
        Ok(DesignOutcome::new(exhaustive_code(req.classes)?, self.name()))
    }
}

/// `d = floor(L/3)` unless the request carries a band.
fn band_for(req: &DesignRequest, length: usize) -> (usize, usize) {
    req.config.column_band.unwrap_or_else(|| {
        let d = length / 3;
        (d, length - d)
    })
}

impl CodeDesigner for Gsat {
    fn name(&self) -> &'static str {
        "gsat"
    }

    fn design(&self, req: &DesignRequest) -> Result<DesignOutcome> {
        let available = 1usize
            .checked_shl(req.classes.saturating_sub(1) as u32)
            .unwrap_or(usize::MAX)
            - 1;
        let length = req.length.unwrap_or(DEFAULT_LENGTH.min(available));
        let mut cfg = req.config.clone();
        cfg.column_band = Some(band_for(req, length));
        let sel = select_columns(req.classes, length, &cfg)?;
        let mut out = DesignOutcome::new(sel.code, self.name());
        out.satisfied = Some(sel.satisfied);
        let (lo, hi) = cfg.column_band.unwrap();
        out.notes.push(format!("band {lo} {hi}"));
        out.notes.push(format!("violations {}", sel.score));
        Ok(out)
    }
}

impl CodeDesigner for HillClimb {
    fn name(&self) -> &'static str {
        "hillclimb"
    }

    fn design(&self, req: &DesignRequest) -> Result<DesignOutcome> {
        let length = req.length.unwrap_or(DEFAULT_LENGTH);
        let r = hill_climb_code(req.classes, length, &req.config)?;
        let mut out = DesignOutcome::new(r.code, self.name());
        out.notes.push(format!(
            "initial_min_row_distance {}",
            r.initial_objective.min_row_distance
        ));
        out.notes.push(format!("accepted_moves {}", r.accepted.len() - 1));
        Ok(out)
    }
}

impl CodeDesigner for Bch {
    fn name(&self) -> &'static str {
        "bch"
    }

    fn design(&self, req: &DesignRequest) -> Result<DesignOutcome> {
        let length = req.length.unwrap_or(DEFAULT_LENGTH);
        let t = match req.bch_t {
            Some(t) => t,
            None => max_t_for(req.classes, length).ok_or_else(|| {
                Error::InfeasibleDesign(format!(
                    "no BCH code of length {length} holds {} codewords",
                    req.classes
                ))
            })?,
        };
        let d = bch_design(req.classes, length, t)?;
        let mut out = DesignOutcome::new(d.code, self.name());
        out.notes
            .push(format!("bch m {} t {} codebook {}", d.m, d.t, d.codebook_size));
        out.notes.push(format!("deleted_columns {}", d.deleted_columns.len()));
        Ok(out)
    }
}

impl CodeDesigner for Auto {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn design(&self, req: &DesignRequest) -> Result<DesignOutcome> {
        design_auto(req)
    }
}

/// Choose a construction from the class count: exhaustive for 3–7,
/// column selection for 8–11, and for larger `k` BCH when the length is
/// 7/15/31/63 and some `t` fits, hill climbing otherwise.
pub fn design_auto(req: &DesignRequest) -> Result<DesignOutcome> {
    let k = req.classes;
    match k {
        0..=2 => Err(Error::invalid(format!(
            "automatic design needs at least 3 classes, got {k}"
        ))),
        3..=7 => Exhaustive.design(req),
        8..=11 => Gsat.design(req),
        _ => {
            let length = req.length.unwrap_or(DEFAULT_LENGTH);
            if req.bch_t.is_some() || max_t_for(k, length).is_some() {
                Bch.design(req)
            } else {
                HillClimb.design(req)
            }
        }
    }
}

/// Name-keyed set of code designers.
pub struct DesignerRegistry {
    designers: BTreeMap<&'static str, Box<dyn CodeDesigner>>,
}

impl DesignerRegistry {
    pub fn empty() -> Self {
        DesignerRegistry {
            designers: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Exhaustive));
        r.register(Box::new(Gsat));
        r.register(Box::new(HillClimb));
        r.register(Box::new(Bch));
        r.register(Box::new(Auto));
        r
    }

    pub fn register(&mut self, designer: Box<dyn CodeDesigner>) {
        self.designers.insert(designer.name(), designer);
    }

    pub fn get(&self, name: &str) -> Option<&dyn CodeDesigner> {
        self.designers.get(name).map(|d| d.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.designers.keys().copied().collect()
    }

    pub fn design(&self, name: &str, req: &DesignRequest) -> Result<DesignOutcome> {
        let d = self.get(name).ok_or_else(|| {
            Error::invalid(format!(
                "unknown design method {name:?}; known: {}",
                self.names().join(", ")
            ))
        })?;
        d.design(req)
    }
}
