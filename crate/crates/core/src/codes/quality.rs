use serde::{Deserialize, Serialize};

use super::CodeMatrix;

/// Row and column separation summary of a code.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeQualityReport {
    pub min_row_distance: usize,
    /// `floor((min_row_distance - 1) / 2)`.
    pub correction_capacity: usize,
    /// Minimum over column pairs of `min(H, k - H)`, where `H` is the
    /// distance between the two length-`k` columns. Zero for single-column
    /// codes.
    pub min_column_separation: usize,
    pub duplicate_rows: Vec<(usize, usize)>,
    pub constant_columns: Vec<usize>,
    pub complementary_or_duplicate_columns: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    DuplicateRows(usize, usize),
    ConstantColumn(usize),
    DuplicateColumns(usize, usize),
    ComplementaryColumns(usize, usize),
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::DuplicateRows(a, b) => write!(f, "rows {a} and {b} are identical"),
            Violation::ConstantColumn(c) => write!(f, "column {c} is constant"),
            Violation::DuplicateColumns(a, b) => write!(f, "columns {a} and {b} are identical"),
            Violation::ComplementaryColumns(a, b) => {
                write!(f, "columns {a} and {b} are complements")
            }
        }
    }
}

pub fn quality_report(m: &CodeMatrix) -> CodeQualityReport {
    let k = m.k();
    let mut min_row = usize::MAX;
    let mut duplicate_rows = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            let d = m.row(a).distance_unchecked(m.row(b));
            min_row = min_row.min(d);
            if d == 0 {
                duplicate_rows.push((a, b));
            }
        }
    }

    let cols = m.columns();
    let mut constant_columns = Vec::new();
    for (j, c) in cols.iter().enumerate() {
        let ones = c.count_ones();
        if ones == 0 || ones == k {
            constant_columns.push(j);
        }
    }
    let mut min_col = usize::MAX;
    let mut paired = Vec::new();
    for a in 0..cols.len() {
        for b in a + 1..cols.len() {
            let h = cols[a].distance_unchecked(&cols[b]);
            let sep = h.min(k - h);
            min_col = min_col.min(sep);
            if sep == 0 {
                paired.push((a, b));
            }
        }
    }

    CodeQualityReport {
        min_row_distance: min_row,
        correction_capacity: min_row.saturating_sub(1) / 2,
        min_column_separation: if min_col == usize::MAX { 0 } else { min_col },
        duplicate_rows,
        constant_columns,
        complementary_or_duplicate_columns: paired,
    }
}

/// Structural problems of a code. An empty list means rows are distinct and
/// columns are non-constant, pairwise distinct and non-complementary.
pub fn validate(m: &CodeMatrix) -> Vec<Violation> {
    let report = quality_report(m);
    let mut out: Vec<Violation> = report
        .duplicate_rows
        .iter()
        .map(|&(a, b)| Violation::DuplicateRows(a, b))
        .collect();
    out.extend(report.constant_columns.iter().map(|&c| Violation::ConstantColumn(c)));
    for &(a, b) in &report.complementary_or_duplicate_columns {
        if m.column(a) == m.column(b) {
            out.push(Violation::DuplicateColumns(a, b));
        } else {
            out.push(Violation::ComplementaryColumns(a, b));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{digit_code_15, digit_code_meaningful, one_per_class};

    #[test]
    fn digit_code_corrects_three() {
        let r = quality_report(&digit_code_15());
        assert_eq!(r.min_row_distance, 7);
        assert_eq!(r.correction_capacity, 3);
    }

    #[test]
    fn one_per_class_cannot_correct() {
        for k in 2..12 {
            let r = quality_report(&one_per_class(k).unwrap());
            assert_eq!(r.min_row_distance, 2);
            assert_eq!(r.correction_capacity, 0);
        }
        // every column pair: H = 2, min(2, 3 - 2) = 1
        assert_eq!(quality_report(&one_per_class(3).unwrap()).min_column_separation, 1);
    }

    #[test]
    fn meaningful_code_has_duplicate_rows() {
        let v = validate(&digit_code_meaningful());
        assert!(v.contains(&Violation::DuplicateRows(0, 8)));
        let r = quality_report(&digit_code_meaningful());
        assert_eq!(r.min_row_distance, 0);
    }

    #[test]
    fn violations() {
        let m = CodeMatrix::from_strs(&["01", "01"]).unwrap();
        let v = validate(&m);
        assert!(v.contains(&Violation::DuplicateRows(0, 1)));
        assert!(v.contains(&Violation::ConstantColumn(0)));

        let m = CodeMatrix::from_strs(&["0101", "0110", "0011"]).unwrap();
        assert_eq!(validate(&m), [Violation::ConstantColumn(0)]);
        let m = CodeMatrix::from_strs(&["101", "011", "101"]).unwrap();
        // columns: 101, 010, 111 -> col0 and col1 complementary, col2 constant
        let v = validate(&m);
        assert!(v.contains(&Violation::ComplementaryColumns(0, 1)));
        assert!(v.contains(&Violation::ConstantColumn(2)));
        let m = CodeMatrix::from_strs(&["110", "001", "110"]).unwrap();
        assert!(validate(&m).contains(&Violation::DuplicateColumns(0, 1)));
    }
}
