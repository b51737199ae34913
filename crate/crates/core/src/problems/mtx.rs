use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::SparseSymMatrix;

const HEADER: &str = "%%MatrixMarket matrix coordinate real symmetric";

/// Serializes the lower triangle in coordinate format, 1-based, 17
/// significant digits.
pub fn write_matrix_market_string(m: &SparseSymMatrix) -> String {
    let mut entries = Vec::new();
    for i in 0..m.n() {
        for (j, v) in m.row(i) {
            if j <= i {
                entries.push((i, j, v));
            }
        }
    }
    let mut s = String::with_capacity(32 * entries.len() + 64);
    let _ = writeln!(s, "{HEADER}");
    let _ = writeln!(s, "{} {} {}", m.n(), m.n(), entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(s, "{} {} {:.16e}", i + 1, j + 1, v);
    }
    s
}

pub fn write_matrix_market(m: &SparseSymMatrix, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, write_matrix_market_string(m))?;
    Ok(())
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseSymMatrix> {
    read_matrix_market_str(&fs::read_to_string(path)?)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses a symmetric real (or integer) coordinate matrix; only the lower
/// triangle may be stored.
pub fn read_matrix_market_str(text: &str) -> Result<SparseSymMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(1, "malformed header"));
    }
    if fields[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format '{}'", fields[2])));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(parse_err(1, format!("unsupported field '{}'", fields[3])));
    }
    if fields[4] != "symmetric" {
        return Err(parse_err(1, format!("expected symmetric storage, found '{}'", fields[4])));
    }

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = data.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(size_line, format!("bad integer '{t}'"))))
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(parse_err(size_line, "size line needs rows, columns and entry count"));
    }
    let (rows, cols, nnz) = (dims[0], dims[1], dims[2]);
    if rows != cols || rows == 0 {
        return Err(parse_err(size_line, format!("symmetric matrix must be square and nonempty, got {rows}x{cols}")));
    }

    let mut triplets = Vec::with_capacity(nnz);
    let mut last_line = size_line;
    for (line, text) in data {
        last_line = line;
        let mut tok = text.split_whitespace();
        let mut index = |name: &str| -> Result<usize> {
            let t = tok.next().ok_or_else(|| parse_err(line, format!("missing {name} index")))?;
            let v: usize = t.parse().map_err(|_| parse_err(line, format!("bad {name} index '{t}'")))?;
            if v == 0 || v > rows {
                return Err(parse_err(line, format!("{name} index {v} out of range 1..={rows}")));
            }
            Ok(v - 1)
        };
        let i = index("row")?;
        let j = index("column")?;
        let t = tok.next().ok_or_else(|| parse_err(line, "missing value"))?;
        let v: f64 = t.parse().map_err(|_| parse_err(line, format!("bad value '{t}'")))?;
        if !v.is_finite() {
            return Err(parse_err(line, "non-finite value"));
        }
        if tok.next().is_some() {
            return Err(parse_err(line, "trailing tokens"));
        }
        if i < j {
            return Err(parse_err(line, format!("entry ({}, {}) lies above the diagonal", i + 1, j + 1)));
        }
        if triplets.len() == nnz {
            return Err(parse_err(line, format!("more than the declared {nnz} entries")));
        }
        triplets.push((i, j, v));
    }
    if triplets.len() != nnz {
        return Err(parse_err(last_line, format!("expected {nnz} entries, found {}", triplets.len())));
    }
    SparseSymMatrix::from_lower_triplets(rows, &triplets)
}
