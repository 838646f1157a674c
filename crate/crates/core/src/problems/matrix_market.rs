//! Loading quadratic problems from files.
//!
//! The Hessian comes from a Matrix Market coordinate file with `symmetric`
//! storage (1-based indices, entries from one triangle); the linear term
//! from a plain-text file with one value per whitespace-separated token.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::quadratic::{quadratic_spec, QuadraticProblem};
use super::ProblemSpec;
use crate::error::{Result, SolverError};
use crate::problem::ObjectiveProblem;
use crate::vector::Vector;

fn parse_err(path: &Path, line_no: usize, msg: impl std::fmt::Display) -> SolverError {
    SolverError::Parse(format!("{}:{line_no}: {msg}", path.display()))
}

/// Reads a symmetric real matrix in Matrix Market coordinate format.
pub fn load_symmetric_matrix_market(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();

    let (header_no, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "%%MatrixMarket" {
        return Err(parse_err(
            path,
            header_no + 1,
            "header must be '%%MatrixMarket matrix coordinate real symmetric'",
        ));
    }
    let lower: Vec<String> = fields[1..].iter().map(|s| s.to_lowercase()).collect();
    if lower[0] != "matrix" || lower[1] != "coordinate" {
        return Err(parse_err(path, header_no + 1, "only coordinate matrices are supported"));
    }
    if lower[2] != "real" && lower[2] != "integer" {
        return Err(parse_err(path, header_no + 1, "only real or integer fields are supported"));
    }
    if lower[3] != "symmetric" {
        return Err(parse_err(path, header_no + 1, "matrix must be declared symmetric"));
    }

    // Skip comments, read the size line.
    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for (no, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if toks.len() != 3 {
                    return Err(parse_err(path, no + 1, "size line must be 'rows cols nnz'"));
                }
                let rows: usize = toks[0]
                    .parse()
                    .map_err(|e| parse_err(path, no + 1, e))?;
                let cols: usize = toks[1]
                    .parse()
                    .map_err(|e| parse_err(path, no + 1, e))?;
                let nnz: usize = toks[2]
                    .parse()
                    .map_err(|e| parse_err(path, no + 1, e))?;
                if rows != cols || rows == 0 {
                    return Err(parse_err(path, no + 1, "matrix must be square and nonempty"));
                }
                size = Some((rows, cols, nnz));
            }
            Some((rows, _, _)) => {
                if toks.len() != 3 {
                    return Err(parse_err(path, no + 1, "entry must be 'i j value'"));
                }
                let i: usize = toks[0].parse().map_err(|e| parse_err(path, no + 1, e))?;
                let j: usize = toks[1].parse().map_err(|e| parse_err(path, no + 1, e))?;
                let v: f64 = toks[2].parse().map_err(|e| parse_err(path, no + 1, e))?;
                if i < 1 || i > rows || j < 1 || j > rows {
                    return Err(parse_err(path, no + 1, "index out of range (1-based)"));
                }
                if !v.is_finite() {
                    return Err(parse_err(path, no + 1, "non-finite value"));
                }
                entries.push((i - 1, j - 1, v));
            }
        }
    }
    let (rows, _, nnz) = size.ok_or_else(|| parse_err(path, 1, "missing size line"))?;
    if entries.len() != nnz {
        return Err(SolverError::Parse(format!(
            "{}: expected {nnz} entries, found {}",
            path.display(),
            entries.len()
        )));
    }

    let mut m = DMatrix::zeros(rows, rows);
    let mut seen = vec![false; rows * rows];
    for (i, j, v) in entries {
        if seen[i * rows + j] {
            return Err(SolverError::Parse(format!(
                "{}: duplicate entry ({}, {})",
                path.display(),
                i + 1,
                j + 1
            )));
        }
        seen[i * rows + j] = true;
        seen[j * rows + i] = true;
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    Ok(m)
}

/// Reads a plain-text vector: whitespace-separated floats, `%`/`#` comments
/// and blank lines ignored.
pub fn load_vector_file(path: impl AsRef<Path>) -> Result<Vector> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') || line.starts_with('#') {
            continue;
        }
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|e| parse_err(path, no + 1, e))?;
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(SolverError::Parse(format!(
            "{}: no values found",
            path.display()
        )));
    }
    Ok(Vector::from_vec(values))
}

/// Quadratic problem from a Matrix Market Hessian and an optional linear
/// term file (zero when absent).
pub fn load_quadratic_files(
    matrix_path: impl AsRef<Path>,
    b_path: Option<impl AsRef<Path>>,
) -> Result<(Box<dyn ObjectiveProblem>, ProblemSpec)> {
    let a = load_symmetric_matrix_market(&matrix_path)?;
    let n = a.nrows();
    let b = match b_path {
        Some(p) => {
            let b = load_vector_file(p)?;
            if b.len() != n {
                return Err(SolverError::Dimension {
                    expected: n,
                    got: b.len(),
                });
            }
            b
        }
        None => Vector::zeros(n),
    };
    let problem = QuadraticProblem::new(a, b)?;
    let name = format!("mm:{}", matrix_path.as_ref().display());
    let spec = quadratic_spec(name, &problem);
    Ok((Box::new(problem), spec))
}
