//! Readers and writers for the on-disk matrix, vector and dataset formats.
//!
//! * Matrix Market (`.mtx`), `coordinate` or `array` layout, real general.
//! * Dense CSV, optionally with a header row.
//! * Vectors: one number per line; `#` comments and blank lines skipped.
//! * svmlight datasets (`label idx:val ...`, 1-based indices), densified.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::dense::Matrix;
use crate::error::{Error, Result};

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(path, line, format!("bad number `{tok}`")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value `{tok}`")));
    }
    Ok(v)
}

fn parse_usize(path: &Path, line: usize, tok: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| parse_err(path, line, format!("bad integer `{tok}`")))
}

/// Reads a matrix, choosing the format from the extension (`.mtx` or
/// anything else as CSV).
pub fn read_matrix(path: &Path) -> Result<Matrix> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("mtx") => read_matrix_market(path),
        _ => read_csv_matrix(path),
    }
}

pub fn read_matrix_market(path: &Path) -> Result<Matrix> {
    parse_matrix_market(&read_text(path)?, path)
}

pub fn parse_matrix_market(text: &str, path: &Path) -> Result<Matrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (n, banner) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let fields: Vec<String> = banner
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if fields.len() < 4 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(path, n, "missing %%MatrixMarket matrix banner"));
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(parse_err(path, n, format!("unsupported layout `{other}`"))),
    };
    if !matches!(fields[3].as_str(), "real" | "integer" | "double") {
        return Err(parse_err(
            path,
            n,
            format!("unsupported field `{}`", fields[3]),
        ));
    }
    if fields.get(4).is_some_and(|s| s != "general") {
        return Err(parse_err(
            path,
            n,
            format!("unsupported symmetry `{}`", fields[4]),
        ));
    }

    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (n, size) = body
        .next()
        .ok_or_else(|| parse_err(path, n, "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let expected = if coordinate { 3 } else { 2 };
    if dims.len() != expected {
        return Err(parse_err(path, n, "malformed size line"));
    }
    let rows = parse_usize(path, n, dims[0])?;
    let cols = parse_usize(path, n, dims[1])?;
    let mut m = Matrix::zeros(rows, cols);

    if coordinate {
        let nnz = parse_usize(path, n, dims[2])?;
        let mut seen = 0;
        for (n, l) in body {
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() != 3 {
                return Err(parse_err(path, n, "expected `row col value`"));
            }
            let i = parse_usize(path, n, t[0])?;
            let j = parse_usize(path, n, t[1])?;
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(parse_err(path, n, format!("entry ({i}, {j}) out of range")));
            }
            m.set(i - 1, j - 1, parse_f64(path, n, t[2])?);
            seen += 1;
        }
        if seen != nnz {
            return Err(parse_err(
                path,
                n,
                format!("declared {nnz} entries, found {seen}"),
            ));
        }
    } else {
        // column-major
        let mut k = 0;
        for (n, l) in body {
            for tok in l.split_whitespace() {
                if k >= rows * cols {
                    return Err(parse_err(path, n, "too many entries"));
                }
                m.set(k % rows, k / rows, parse_f64(path, n, tok)?);
                k += 1;
            }
        }
        if k != rows * cols {
            return Err(parse_err(
                path,
                n,
                format!("expected {} entries, found {k}", rows * cols),
            ));
        }
    }
    Ok(m)
}

pub fn write_matrix_market(path: &Path, m: &Matrix) -> Result<()> {
    let mut s = String::from("%%MatrixMarket matrix array real general\n");
    writeln!(s, "{} {}", m.rows(), m.cols()).unwrap();
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            writeln!(s, "{}", m.get(i, j)).unwrap();
        }
    }
    write_text(path, &s)
}

/// Dense CSV. A first row that does not parse as numbers is taken as a
/// header.
pub fn read_csv_matrix(path: &Path) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(i + 1, |p| p.line() as usize);
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(r) => {
                if let Some(bad) = r.iter().position(|v| !v.is_finite()) {
                    return Err(parse_err(
                        path,
                        line,
                        format!("non-finite value in column {}", bad + 1),
                    ));
                }
                rows.push(r)
            }
            Err(_) if i == 0 => continue,
            Err(_) => return Err(parse_err(path, line, "non-numeric field")),
        }
    }
    if rows.is_empty() {
        return Err(parse_err(path, 1, "no numeric rows"));
    }
    Matrix::from_rows(&rows)
}

pub fn write_csv_matrix(path: &Path, m: &Matrix) -> Result<()> {
    let mut s = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(f64::to_string).collect();
        writeln!(s, "{}", row.join(",")).unwrap();
    }
    write_text(path, &s)
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    parse_vector(&read_text(path)?, path)
}

pub fn parse_vector(text: &str, path: &Path) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') || l.starts_with('%') {
            continue;
        }
        out.push(parse_f64(path, i + 1, l)?);
    }
    Ok(out)
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    let mut s = String::new();
    for x in v {
        writeln!(s, "{x}").unwrap();
    }
    write_text(path, &s)
}

/// Labeled dataset: rows of `points` with `labels` in `{−1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Matrix,
    pub labels: Vec<f64>,
}

/// Reads an svmlight file. `dim` fixes the feature count; otherwise the
/// largest index seen is used.
pub fn read_svmlight(path: &Path, dim: Option<usize>) -> Result<Dataset> {
    parse_svmlight(&read_text(path)?, path, dim)
}

pub fn parse_svmlight(text: &str, path: &Path, dim: Option<usize>) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut sparse: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut max_idx = 0;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let mut toks = l.split_whitespace();
        let label = parse_f64(path, n, toks.next().unwrap())?;
        let label = if label > 0.0 {
            1.0
        } else if label < 0.0 {
            -1.0
        } else {
            return Err(parse_err(path, n, "label must be nonzero"));
        };
        let mut row = Vec::new();
        for tok in toks {
            if tok.starts_with("qid:") {
                continue;
            }
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(path, n, format!("expected idx:value, got `{tok}`")))?;
            let idx = parse_usize(path, n, idx)?;
            if idx == 0 {
                return Err(parse_err(path, n, "feature indices are 1-based"));
            }
            max_idx = max_idx.max(idx);
            row.push((idx - 1, parse_f64(path, n, val)?));
        }
        labels.push(label);
        sparse.push(row);
    }
    if labels.is_empty() {
        return Err(parse_err(path, 1, "no samples"));
    }
    let d = dim.unwrap_or(max_idx);
    if max_idx > d {
        return Err(parse_err(
            path,
            0,
            format!("feature index {max_idx} exceeds dimension {d}"),
        ));
    }
    let mut points = Matrix::zeros(labels.len(), d);
    for (i, row) in sparse.iter().enumerate() {
        for &(j, v) in row {
            points.set(i, j, v);
        }
    }
    Ok(Dataset { points, labels })
}

pub fn write_svmlight(path: &Path, data: &Dataset) -> Result<()> {
    let mut s = String::new();
    for (i, &y) in data.labels.iter().enumerate() {
        write!(s, "{}", if y > 0.0 { "+1" } else { "-1" }).unwrap();
        for (j, &v) in data.points.row(i).iter().enumerate() {
            if v != 0.0 {
                write!(s, " {}:{}", j + 1, v).unwrap();
            }
        }
        s.push('\n');
    }
    write_text(path, &s)
}
