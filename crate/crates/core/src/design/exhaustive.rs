use crate::codes::{BitRow, CodeMatrix};
use crate::error::{Error, Result};

/// Row `i` (1-based) of the exhaustive code: row 1 all ones, row `i > 1`
/// alternating runs of `2^(k-i)` zeroes and ones, truncated to
/// `2^(k-1) - 1` columns.
fn exhaustive_rows(k: usize) -> Vec<BitRow> {
    let len = (1usize << (k - 1)) - 1;
    let mut rows = vec![BitRow::ones(len)];
    for i in 2..=k {
        let run = 1usize << (k - i);
        let mut row = BitRow::zeros(len);
        for j in 0..len {
            row.set(j, (j / run) % 2 == 1);
        }
        rows.push(row);
    }
    rows
}

/// Columns of the exhaustive code for any `k` in `2..=16`; used as the
/// candidate pool for column selection.
pub(crate) fn exhaustive_columns(k: usize) -> Vec<BitRow> {
    CodeMatrix::from_rows(exhaustive_rows(k)).expect("k >= 2").columns()
}

/// The `k × (2^(k-1) - 1)` exhaustive code, for `3 <= k <= 7`.
pub fn exhaustive_code(k: usize) -> Result<CodeMatrix> {
    match k {
        3..=7 => CodeMatrix::from_rows(exhaustive_rows(k)),
        8..=11 => Err(Error::UnsupportedSize(format!(
            "exhaustive codes are limited to 3..=7 classes; use column selection (gsat) for k={k}"
        ))),
        _ if k > 11 => Err(Error::UnsupportedSize(format!(
            "exhaustive codes are limited to 3..=7 classes; use hill climbing or BCH for k={k}"
        ))),
        _ => Err(Error::UnsupportedSize(format!(
            "exhaustive codes are limited to 3..=7 classes; use one-per-class for k={k}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{quality_report, validate};

    #[test]
    fn small_cases() {
        let m = exhaustive_code(3).unwrap();
        let rows: Vec<String> = m.rows().iter().map(|r| r.to_string()).collect();
        assert_eq!(rows, ["111", "001", "010"]);
        assert_eq!(quality_report(&m).min_row_distance, 2);

        let m = exhaustive_code(4).unwrap();
        assert_eq!(m.n(), 7);
        assert_eq!(quality_report(&m).min_row_distance, 4);
    }

    #[test]
    fn structurally_clean_for_all_supported_k() {
        for k in 3..=7 {
            let m = exhaustive_code(k).unwrap();
            assert_eq!(m.n(), (1 << (k - 1)) - 1);
            assert!(validate(&m).is_empty(), "k={k}: {:?}", validate(&m));
            assert_eq!(quality_report(&m).min_row_distance, 1 << (k - 2));
        }
    }

    #[test]
    fn out_of_range() {
        for k in [0, 1, 2, 8, 11, 12, 30] {
            assert!(matches!(exhaustive_code(k), Err(Error::UnsupportedSize(_))));
        }
        let msg = exhaustive_code(9).unwrap_err().to_string();
        assert!(msg.contains("gsat"));
    }
}
