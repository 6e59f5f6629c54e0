//! BCH-based codes shortened to `k` rows.
//!
//! Rows are chosen greedily: start from the first codeword of the sorted
//! codebook (the all-zero word), then repeatedly add the codeword whose
//! minimum distance to the chosen set is largest, ties going to the lowest
//! codebook index. Columns that are constant or duplicate an earlier column
//! after row selection are deleted.

use crate::codes::{quality_report, BitRow, CodeMatrix};
use crate::error::{Error, Result};
use crate::galois::{bch_generator, code_dimension, enumerate_codebook, GaloisField};

#[derive(Clone, Debug)]
pub struct BchDesign {
    /// Shortened code.
    pub code: CodeMatrix,
    /// The selected codebook rows before column deletion.
    pub selected_rows: Vec<BitRow>,
    /// Indices of the selected rows in the sorted codebook.
    pub selected_indices: Vec<usize>,
    pub deleted_columns: Vec<usize>,
    pub m: u32,
    pub t: usize,
    pub codebook_size: usize,
    /// Minimum distance of the selected rows before column deletion.
    pub row_distance_before_deletion: usize,
}

/// `m` such that `length = 2^m - 1`, for the supported fields.
pub fn degree_for_length(length: usize) -> Option<u32> {
    (3..=6).find(|&m| (1usize << m) - 1 == length)
}

/// Largest designed correction `t` whose codebook has between
/// `ceil(log2 k)` and 16 message bits.
pub fn max_t_for(k: usize, length: usize) -> Option<usize> {
    let m = degree_for_length(length)?;
    let field = GaloisField::new(m).ok()?;
    let mut best = None;
    for t in 1..=length / 2 {
        let Ok(g) = bch_generator(&field, t) else { break };
        let dim = code_dimension(&field, &g);
        if dim <= crate::galois::MAX_CODEBOOK_DIMENSION && (1usize << dim) >= k {
            best = Some(t);
        }
    }
    best
}

pub fn bch_design(k: usize, length: usize, t: usize) -> Result<BchDesign> {
    let m = degree_for_length(length)
        .ok_or_else(|| Error::UnsupportedSize(format!("BCH length must be 7, 15, 31 or 63, got {length}")))?;
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 classes, got {k}")));
    }
    let field = GaloisField::new(m)?;
    let g = bch_generator(&field, t)?;
    let book = enumerate_codebook(&field, &g)?;
    if k > book.len() {
        return Err(Error::invalid(format!(
            "{k} classes exceed the {}-word codebook for length {length}, t={t}",
            book.len()
        )));
    }

    let mut chosen = vec![0usize];
    let mut is_chosen = vec![false; book.len()];
    is_chosen[0] = true;
    let mut dmin: Vec<usize> = book.iter().map(|w| w.distance_unchecked(&book[0])).collect();
    while chosen.len() < k {
        let mut best: Option<usize> = None;
        for i in 0..book.len() {
            if !is_chosen[i] && best.is_none_or(|b| dmin[i] > dmin[b]) {
                best = Some(i);
            }
        }
        let b = best.expect("codebook larger than k");
        is_chosen[b] = true;
        chosen.push(b);
        for (i, w) in book.iter().enumerate() {
            dmin[i] = dmin[i].min(w.distance_unchecked(&book[b]));
        }
    }

    let selected_rows: Vec<BitRow> = chosen.iter().map(|&i| book[i].clone()).collect();
    let full = CodeMatrix::from_rows(selected_rows.clone())?;
    let row_distance_before_deletion = quality_report(&full).min_row_distance;

    let cols = full.columns();
    let mut keep = Vec::new();
    let mut deleted = Vec::new();
    for (j, c) in cols.iter().enumerate() {
        let ones = c.count_ones();
        let constant = ones == 0 || ones == k;
        let duplicate = keep.iter().any(|&p: &usize| cols[p] == *c);
        if constant || duplicate {
            deleted.push(j);
        } else {
            keep.push(j);
        }
    }
    let code = full.select_columns(&keep)?;

    Ok(BchDesign {
        code,
        selected_rows,
        selected_indices: chosen,
        deleted_columns: deleted,
        m,
        t,
        codebook_size: book.len(),
        row_distance_before_deletion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_rows_from_15_5_7() {
        let d = bch_design(10, 15, 3).unwrap();
        assert_eq!(d.codebook_size, 32);
        assert!(d.row_distance_before_deletion >= 7);
        assert!(quality_report(&d.code).min_row_distance >= 7);
        assert_eq!(d.code.k(), 10);
    }

    #[test]
    fn full_codebook_keeps_designed_distance() {
        let d = bch_design(32, 15, 3).unwrap();
        assert!(d.row_distance_before_deletion >= 7);
        assert!(d.deleted_columns.is_empty());
    }

    #[test]
    fn errors() {
        assert!(matches!(bch_design(33, 15, 3), Err(Error::InvalidArgument(_))));
        assert!(matches!(bch_design(4, 15, 8), Err(Error::InfeasibleDesign(_))));
        assert!(matches!(bch_design(4, 16, 1), Err(Error::UnsupportedSize(_))));
    }

    #[test]
    fn t_selection() {
        // length 63: (63,7,31) is the smallest dimension that still holds 26 words
        assert_eq!(max_t_for(26, 63), Some(15));
        assert_eq!(max_t_for(10, 15), Some(3));
        assert_eq!(max_t_for(3, 12), None);
    }
}
