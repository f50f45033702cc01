//! Reader and writer for real MatrixMarket files (coordinate or array
//! storage, general or symmetric), densified on read.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Storage {
    Coordinate,
    Array,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix_market(&text)
}

pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(hline, format!("bad header `{header}`")));
    }
    let storage = match tokens[2].as_str() {
        "coordinate" => Storage::Coordinate,
        "array" => Storage::Array,
        other => return Err(parse_err(hline, format!("unsupported storage `{other}`"))),
    };
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(parse_err(hline, format!("unsupported field `{other}`"))),
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(hline, format!("unsupported symmetry `{other}`"))),
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (sline, size) = data.next().ok_or_else(|| parse_err(hline, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|s| s.parse::<usize>().map_err(|_| parse_err(sline, format!("bad integer `{s}`"))))
        .collect::<Result<_>>()?;
    let expected_len = if storage == Storage::Coordinate { 3 } else { 2 };
    if dims.len() != expected_len {
        return Err(parse_err(sline, format!("size line needs {expected_len} integers")));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if rows == 0 || cols == 0 {
        return Err(parse_err(sline, "matrix dimensions must be positive"));
    }
    if symmetric && rows != cols {
        return Err(parse_err(sline, "symmetric matrix must be square"));
    }
    let mut m = DenseMatrix::zeros(rows, cols);

    let parse_value = |line: usize, s: &str| -> Result<f64> {
        let v = s
            .parse::<f64>()
            .map_err(|_| parse_err(line, format!("bad value `{s}`")))?;
        if !v.is_finite() {
            return Err(parse_err(line, "non-finite value"));
        }
        Ok(v)
    };

    match storage {
        Storage::Coordinate => {
            let nnz = dims[2];
            let mut count = 0;
            for (ln, l) in data {
                let t: Vec<&str> = l.split_whitespace().collect();
                if t.len() != 3 {
                    return Err(parse_err(ln, "coordinate entry needs `row col value`"));
                }
                let i: usize = t[0].parse().map_err(|_| parse_err(ln, "bad row index"))?;
                let j: usize = t[1].parse().map_err(|_| parse_err(ln, "bad column index"))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(ln, format!("index ({i}, {j}) out of range")));
                }
                if symmetric && j > i {
                    return Err(parse_err(ln, "symmetric storage expects the lower triangle"));
                }
                let v = parse_value(ln, t[2])?;
                m[(i - 1, j - 1)] += v;
                if symmetric && i != j {
                    m[(j - 1, i - 1)] += v;
                }
                count += 1;
            }
            if count != nnz {
                return Err(Error::DimensionMismatch {
                    context: "MatrixMarket entry count",
                    expected: nnz,
                    found: count,
                });
            }
        }
        Storage::Array => {
            // Column-major; symmetric arrays list the lower triangle only.
            let slots: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = if symmetric { j } else { 0 };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            let mut values = Vec::with_capacity(slots.len());
            for (ln, l) in data {
                for tok in l.split_whitespace() {
                    values.push(parse_value(ln, tok)?);
                }
            }
            if values.len() != slots.len() {
                return Err(Error::DimensionMismatch {
                    context: "MatrixMarket array entries",
                    expected: slots.len(),
                    found: values.len(),
                });
            }
            for ((i, j), v) in slots.into_iter().zip(values) {
                m[(i, j)] = v;
                if symmetric {
                    m[(j, i)] = v;
                }
            }
        }
    }
    Ok(m)
}

/// Coordinate/general text with shortest round-trip float formatting.
pub fn format_matrix_market(m: &DenseMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    let entries: Vec<(usize, usize, f64)> = (0..m.cols())
        .flat_map(|j| (0..m.rows()).map(move |i| (i, j)))
        .filter(|&(i, j)| m[(i, j)] != 0.0)
        .map(|(i, j)| (i, j, m[(i, j)]))
        .collect();
    let _ = writeln!(out, "{} {} {}", m.rows(), m.cols(), entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(out, "{} {} {:e}", i + 1, j + 1, v);
    }
    out
}

pub fn write_matrix_market(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    std::fs::write(path, format_matrix_market(m))?;
    Ok(())
}
