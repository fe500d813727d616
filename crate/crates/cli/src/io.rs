//! Matrix, vector and frame files.
//!
//! Matrices are JSON objects `{"rows": r, "cols": c, "data": [[re, im], ...]}`
//! in row-major order, or real CSV (one matrix row per line). Frames are JSON
//! `{"dim": d, "vectors": [[[re, im], ...], ...]}` or real CSV with one vector
//! per line. The format is chosen by the `.csv` extension.

use std::fmt;
use std::fs;
use std::path::Path;

use kframe::{DenseOperator, Frame, Operator, Vector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Input problem with enough context to point at the offending spot.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct InputError {
    pub file: Option<String>,
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl InputError {
    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            file: None,
            line: None,
            field: Some(field.into()),
            message: message.into(),
        }
    }

    fn in_file(path: &Path, line: Option<usize>, field: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            file: Some(path.display().to_string()),
            line,
            field: field.map(str::to_string),
            message: message.into(),
        }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}")?;
            if let Some(line) = self.line {
                write!(f, ":{line}")?;
            }
            write!(f, ": ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "field `{field}`: ")?;
        }
        write!(f, "{}", self.message)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameFile {
    dim: usize,
    vectors: Vec<Vec<[f64; 2]>>,
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn read(path: &Path, field: &str) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError::in_file(path, None, Some(field), format!("cannot read: {e}")))
}

/// 1-based line of the first occurrence of `"key"`, for semantic errors.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

fn parse_json<'a, D: Deserialize<'a>>(path: &Path, text: &'a str, field: &str) -> Result<D, InputError> {
    serde_json::from_str(text).map_err(|e| InputError::in_file(path, Some(e.line()), Some(field), e.to_string()))
}

fn complex(pair: &[f64; 2]) -> Complex<f64> {
    Complex::new(pair[0], pair[1])
}

/// Real CSV rows, all of the same length.
fn parse_csv(path: &Path, text: &str, field: &str) -> Result<Vec<Vec<f64>>, InputError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            InputError::in_file(path, line, Some(field), e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize);
        let row = record
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                cell.parse::<f64>().map_err(|_| {
                    InputError::in_file(
                        path,
                        line,
                        Some(field),
                        format!("column {}: `{cell}` is not a number", i + 1),
                    )
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(InputError::in_file(
                    path,
                    line,
                    Some(field),
                    format!("row has {} entries, expected {}", row.len(), first.len()),
                ));
            }
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(InputError::in_file(path, line, Some(field), "non-finite entry"));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(InputError::in_file(path, None, Some(field), "no data rows"));
    }
    Ok(rows)
}

/// Loads a matrix; `field` names the flag it came from.
pub fn load_matrix(path: &Path, field: &str) -> Result<Operator, InputError> {
    let text = read(path, field)?;
    if is_csv(path) {
        let rows = parse_csv(path, &text, field)?;
        return DenseOperator::from_real_rows(&rows)
            .map_err(|e| InputError::in_file(path, None, Some(field), e.to_string()));
    }
    let m: MatrixFile = parse_json(path, &text, field)?;
    if m.rows == 0 || m.cols == 0 {
        let line = line_of_key(&text, "rows");
        return Err(InputError::in_file(
            path,
            line,
            Some("rows"),
            "matrix dimensions must be positive",
        ));
    }
    if m.data.len() != m.rows * m.cols {
        return Err(InputError::in_file(
            path,
            line_of_key(&text, "data"),
            Some("data"),
            format!(
                "{} entries for a {}x{} matrix (expected {})",
                m.data.len(),
                m.rows,
                m.cols,
                m.rows * m.cols
            ),
        ));
    }
    if let Some(i) = m.data.iter().position(|z| !z[0].is_finite() || !z[1].is_finite()) {
        return Err(InputError::in_file(
            path,
            line_of_key(&text, "data"),
            Some(&format!("data[{i}]")),
            "non-finite entry",
        ));
    }
    DenseOperator::new(m.rows, m.cols, m.data.iter().map(complex).collect())
        .map_err(|e| InputError::in_file(path, None, Some(field), e.to_string()))
}

/// Loads a vector: a matrix file with one row or one column.
pub fn load_vector(path: &Path, field: &str) -> Result<Vector<f64>, InputError> {
    let m = load_matrix(path, field)?;
    if m.rows() != 1 && m.cols() != 1 {
        return Err(InputError::in_file(
            path,
            None,
            Some(field),
            format!("expected a single row or column, got {}x{}", m.rows(), m.cols()),
        ));
    }
    Ok(m.data().to_vec())
}

/// Loads a frame family.
pub fn load_frame(path: &Path, field: &str) -> Result<Frame, InputError> {
    let text = read(path, field)?;
    if is_csv(path) {
        let rows = parse_csv(path, &text, field)?;
        let dim = rows[0].len();
        return Frame::from_real(dim, &rows).map_err(|e| InputError::in_file(path, None, Some(field), e.to_string()));
    }
    let f: FrameFile = parse_json(path, &text, field)?;
    if f.dim == 0 {
        return Err(InputError::in_file(
            path,
            line_of_key(&text, "dim"),
            Some("dim"),
            "dimension must be positive",
        ));
    }
    if f.vectors.is_empty() {
        return Err(InputError::in_file(
            path,
            line_of_key(&text, "vectors"),
            Some("vectors"),
            "no vectors",
        ));
    }
    for (i, v) in f.vectors.iter().enumerate() {
        if v.len() != f.dim {
            return Err(InputError::in_file(
                path,
                line_of_key(&text, "vectors"),
                Some(&format!("vectors[{i}]")),
                format!("length {} but dim is {}", v.len(), f.dim),
            ));
        }
        if v.iter().any(|z| !z[0].is_finite() || !z[1].is_finite()) {
            return Err(InputError::in_file(
                path,
                line_of_key(&text, "vectors"),
                Some(&format!("vectors[{i}]")),
                "non-finite entry",
            ));
        }
    }
    Frame::new(
        f.dim,
        f.vectors.iter().map(|v| v.iter().map(complex).collect()).collect(),
    )
    .map_err(|e| InputError::in_file(path, None, Some(field), e.to_string()))
}

pub fn matrix_json(m: &Operator) -> String {
    let file = MatrixFile {
        rows: m.rows(),
        cols: m.cols(),
        data: m.data().iter().map(|z| [z.re, z.im]).collect(),
    };
    serde_json::to_string_pretty(&file).expect("matrix serializes") + "\n"
}

pub fn frame_json(f: &Frame) -> String {
    let file = FrameFile {
        dim: f.dim(),
        vectors: f
            .vectors()
            .iter()
            .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("frame serializes") + "\n"
}

pub fn save(path: &Path, contents: &str) -> Result<(), InputError> {
    fs::write(path, contents).map_err(|e| InputError::in_file(path, None, Some("--out"), format!("cannot write: {e}")))
}
