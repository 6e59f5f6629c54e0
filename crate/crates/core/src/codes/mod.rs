//! Output code matrices: one binary codeword per class, one learned
//! binary function per column.

mod bits;
mod format;
mod quality;

pub use bits::{hamming_distance, BitRow};
pub use format::{parse_code, read_code, write_code, write_code_with_comments};
pub use quality::{quality_report, validate, CodeQualityReport, Violation};

use crate::error::{Error, Result};

/// A `k × n` binary matrix. Row `i` is the codeword of class `i`; column
/// `j` is the target labeling of the `j`-th binary function.
///
/// Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeMatrix {
    n: usize,
    rows: Vec<BitRow>,
    class_names: Option<Vec<String>>,
}

impl CodeMatrix {
    pub fn from_rows(rows: Vec<BitRow>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::invalid(format!(
                "a code needs at least 2 rows, got {}",
                rows.len()
            )));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::invalid("a code needs at least 1 column"));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::invalid(format!("row {i} has length {}, expected {n}", r.len())));
        }
        Ok(CodeMatrix {
            n,
            rows,
            class_names: None,
        })
    }

    pub fn from_strs(rows: &[&str]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|s| BitRow::parse(s).ok_or_else(|| Error::invalid(format!("bad row {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(parsed)
    }

    pub fn from_columns(k: usize, columns: &[BitRow]) -> Result<Self> {
        if let Some(c) = columns.iter().find(|c| c.len() != k) {
            return Err(Error::invalid(format!(
                "column of length {} in a {k}-row code",
                c.len()
            )));
        }
        let mut rows = vec![BitRow::zeros(columns.len()); k];
        for (j, col) in columns.iter().enumerate() {
            for (i, row) in rows.iter_mut().enumerate() {
                row.set(j, col.get(i));
            }
        }
        Self::from_rows(rows)
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.k() {
            return Err(Error::invalid(format!(
                "{} class names for {} codewords",
                names.len(),
                self.k()
            )));
        }
        self.class_names = Some(names);
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    pub fn row(&self, i: usize) -> &BitRow {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitRow] {
        &self.rows
    }

    pub fn bit(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn column(&self, j: usize) -> BitRow {
        let mut col = BitRow::zeros(self.k());
        for (i, row) in self.rows.iter().enumerate() {
            col.set(i, row.get(j));
        }
        col
    }

    pub fn columns(&self) -> Vec<BitRow> {
        (0..self.n).map(|j| self.column(j)).collect()
    }

    /// Reassign codewords: class `i` of the result gets the codeword that
    /// class `perm[i]` had. Class names stay attached to class indices.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.k())?;
        Ok(CodeMatrix {
            n: self.n,
            rows: perm.iter().map(|&p| self.rows[p].clone()).collect(),
            class_names: self.class_names.clone(),
        })
    }

    /// Keep only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&c) = cols.iter().find(|&&c| c >= self.n) {
            return Err(Error::invalid(format!("column {c} out of range {}", self.n)));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| BitRow::from_bits(&cols.iter().map(|&c| r.get(c)).collect::<Vec<_>>()))
            .collect();
        let mut m = Self::from_rows(rows)?;
        m.class_names = self.class_names.clone();
        Ok(m)
    }
}

fn check_permutation(perm: &[usize], k: usize) -> Result<()> {
    let mut seen = vec![false; k];
    if perm.len() != k {
        return Err(Error::invalid(format!(
            "permutation of length {} for {k} rows",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= k || seen[p] {
            return Err(Error::invalid(format!("not a permutation of 0..{k}: {perm:?}")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// The identity-pattern code: class `i` has a single 1 in column `i`.
pub fn one_per_class(k: usize) -> Result<CodeMatrix> {
    if k < 2 {
        return Err(Error::invalid(format!("one-per-class code needs k >= 2, got {k}")));
    }
    let rows = (0..k)
        .map(|i| {
            let mut r = BitRow::zeros(k);
            r.set(i, true);
            r
        })
        .collect();
    CodeMatrix::from_rows(rows)
}

/// The 10×15 code for the ten-class digit task (minimum distance 7).
pub fn digit_code_15() -> CodeMatrix {
    CodeMatrix::from_strs(&[
        "110000101001101",
        "001111010110010",
        "100100011110101",
        "001101110000101",
        "111010110010001",
        "010011011100001",
        "101110000101001",
        "000111101011001",
        "110101100100011",
        "011100001010011",
    ])
    .expect("static code is well formed")
}

/// The six-column "meaningful" distributed code for the digit task
/// (columns vl, hl, dl, cc, ol, or). Rows 0 and 8 are identical;
/// [`validate`] reports it.
pub fn digit_code_meaningful() -> CodeMatrix {
    CodeMatrix::from_strs(&[
        "000100", "100000", "011010", "000010", "110000", "110010", "001101", "001000", "000100", "001100",
    ])
    .expect("static code is well formed")
}
