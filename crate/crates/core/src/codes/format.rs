//! Text format for code matrices:
//!
//! ```text
//! # optional comment lines, anywhere
//! k n
//! <k lines of n characters from {0,1}>
//! label <i> <name>        (optional, after the rows)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{BitRow, CodeMatrix};
use crate::error::{Error, Result};

pub fn parse_code(text: &str, source_name: &str) -> Result<CodeMatrix> {
    let err = |line: usize, message: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    };

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| err(0, "empty code file".into()))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let (k, n) = match dims.as_slice() {
        [k, n] => (
            k.parse::<usize>()
                .map_err(|_| err(hline, format!("bad class count {k:?}")))?,
            n.parse::<usize>()
                .map_err(|_| err(hline, format!("bad code length {n:?}")))?,
        ),
        _ => return Err(err(hline, format!("expected `k n`, got {header:?}"))),
    };

    let mut rows = Vec::with_capacity(k);
    for _ in 0..k {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| err(hline, format!("expected {k} codeword rows")))?;
        let row = BitRow::parse(l).ok_or_else(|| err(ln, format!("invalid codeword {l:?}")))?;
        if row.len() != n {
            return Err(err(ln, format!("codeword has {} bits, expected {n}", row.len())));
        }
        rows.push(row);
    }

    let mut names: Vec<Option<String>> = vec![None; k];
    let mut any_label = false;
    for (ln, l) in lines {
        let mut parts = l.splitn(3, char::is_whitespace);
        match (parts.next(), parts.next(), parts.next()) {
            (Some("label"), Some(idx), Some(name)) => {
                let i: usize = idx.parse().map_err(|_| err(ln, format!("bad label index {idx:?}")))?;
                if i >= k {
                    return Err(err(ln, format!("label index {i} out of range {k}")));
                }
                names[i] = Some(name.trim().to_string());
                any_label = true;
            }
            _ => return Err(err(ln, format!("unexpected line {l:?}"))),
        }
    }

    let m = CodeMatrix::from_rows(rows).map_err(|e| err(hline, e.to_string()))?;
    if any_label {
        let names = names
            .into_iter()
            .enumerate()
            .map(|(i, n)| n.ok_or_else(|| err(0, format!("missing label for class {i}"))))
            .collect::<Result<Vec<_>>>()?;
        m.with_class_names(names)
    } else {
        Ok(m)
    }
}

pub fn write_code(m: &CodeMatrix) -> String {
    write_code_with_comments(m, &[])
}

/// Serialize, prefixing each of `comments` as a `# ` line.
pub fn write_code_with_comments(m: &CodeMatrix, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    let _ = writeln!(out, "{} {}", m.k(), m.n());
    for r in m.rows() {
        let _ = writeln!(out, "{r}");
    }
    if let Some(names) = m.class_names() {
        for (i, name) in names.iter().enumerate() {
            let _ = writeln!(out, "label {i} {name}");
        }
    }
    out
}

pub fn read_code(path: &Path) -> Result<CodeMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_code(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::digit_code_15;

    #[test]
    fn roundtrip_with_labels_and_comments() {
        let m = digit_code_15()
            .with_class_names((0..10).map(|i| format!("digit {i}")).collect())
            .unwrap();
        let text = write_code_with_comments(&m, &["min_row_distance 7".into()]);
        assert!(text.starts_with("# min_row_distance 7\n10 15\n"));
        assert_eq!(parse_code(&text, "t").unwrap(), m);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_code("", "t").is_err());
        assert!(parse_code("2 3\n101\n", "t").is_err());
        assert!(parse_code("2 3\n101\n1x1\n", "t").is_err());
        assert!(parse_code("2 3\n101\n11\n", "t").is_err());
        assert!(parse_code("2 3\n101\n011\nlabel 5 x\n", "t").is_err());
        assert!(parse_code("2 3\n101\n011\nlabel 0 x\n", "t").is_err());
        let m = parse_code("# c\n2 3\n# mid\n101\n011\n", "t").unwrap();
        assert_eq!(m.k(), 2);
    }
}
