//! Dense matrix files: MatrixMarket `array real general` (column-major values)
//! and headerless CSV (one row per line).

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::linalg::DenseMatrix;

const MM_HEADER: &str = "%%MatrixMarket matrix array real general";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot infer matrix format from {0:?}; use .mtx or .csv or pass a format")]
    UnknownFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    MatrixMarket,
    Csv,
}

impl MatrixFormat {
    pub fn from_path(path: &Path) -> Result<Self, IoError> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("mtx") => Ok(Self::MatrixMarket),
            Some("csv") => Ok(Self::Csv),
            _ => Err(IoError::UnknownFormat(path.display().to_string())),
        }
    }
}

impl std::str::FromStr for MatrixFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mtx" | "matrixmarket" | "mm" => Ok(Self::MatrixMarket),
            "csv" => Ok(Self::Csv),
            other => Err(format!(
                "unknown matrix format {other:?} (expected mtx or csv)"
            )),
        }
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn parse_value(token: &str, line: usize) -> Result<f64, IoError> {
    let v: f64 = token.trim().parse().map_err(|_| IoError::Parse {
        line,
        message: format!("not a number: {token:?}"),
    })?;
    if !v.is_finite() {
        return Err(IoError::Parse {
            line,
            message: format!("non-finite value {token:?}"),
        });
    }
    Ok(v)
}

pub fn format_matrix_market(m: &DenseMatrix) -> String {
    let mut out = String::with_capacity(16 * m.len() + 64);
    out.push_str(MM_HEADER);
    out.push('\n');
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    // nalgebra storage is column-major, as the array format requires.
    for v in m.iter() {
        out.push_str(&format_value(*v));
        out.push('\n');
    }
    out
}

pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix, IoError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or(IoError::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let fields: Vec<String> = header
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(IoError::Parse {
            line: 1,
            message: format!("bad MatrixMarket header {header:?}"),
        });
    }
    if fields[2] != "array" || fields[3] != "real" || fields[4] != "general" {
        return Err(IoError::Parse {
            line: 1,
            message: format!("only 'array real general' is supported, got {header:?}"),
        });
    }
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or(IoError::Parse {
        line: 2,
        message: "missing size line".into(),
    })?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let parse_dim = |s: &str| {
        s.parse::<usize>().map_err(|_| IoError::Parse {
            line: size_line,
            message: format!("bad dimension {s:?}"),
        })
    };
    if dims.len() != 2 {
        return Err(IoError::Parse {
            line: size_line,
            message: "size line must hold 'rows cols'".into(),
        });
    }
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
    let mut values = Vec::with_capacity(rows * cols);
    let mut last_line = size_line;
    for (line, l) in body {
        last_line = line;
        for token in l.split_whitespace() {
            values.push(parse_value(token, line)?);
        }
    }
    if values.len() != rows * cols {
        return Err(IoError::Parse {
            line: last_line,
            message: format!("expected {} values, found {}", rows * cols, values.len()),
        });
    }
    Ok(DenseMatrix::from_vec(rows, cols, values))
}

pub fn format_csv(m: &DenseMatrix) -> String {
    let mut out = String::with_capacity(16 * m.len());
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_csv(text: &str) -> Result<DenseMatrix, IoError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, l) in text.lines().enumerate() {
        if l.trim().is_empty() {
            continue;
        }
        let row = l
            .split(',')
            .map(|tok| parse_value(tok, i + 1))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(IoError::Parse {
                    line: i + 1,
                    message: format!("row has {} columns, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(IoError::Parse {
            line: 1,
            message: "empty file".into(),
        });
    }
    let cols = rows[0].len();
    Ok(DenseMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

pub fn format_matrix(m: &DenseMatrix, format: MatrixFormat) -> String {
    match format {
        MatrixFormat::MatrixMarket => format_matrix_market(m),
        MatrixFormat::Csv => format_csv(m),
    }
}

pub fn parse_matrix(text: &str, format: MatrixFormat) -> Result<DenseMatrix, IoError> {
    match format {
        MatrixFormat::MatrixMarket => parse_matrix_market(text),
        MatrixFormat::Csv => parse_csv(text),
    }
}

/// Reads a matrix; the format is inferred from the extension unless given.
pub fn read_matrix(path: &Path, format: Option<MatrixFormat>) -> Result<DenseMatrix, IoError> {
    let format = match format {
        Some(f) => f,
        None => MatrixFormat::from_path(path)?,
    };
    let text = std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })?;
    parse_matrix(&text, format)
}

pub fn write_matrix(
    path: &Path,
    m: &DenseMatrix,
    format: Option<MatrixFormat>,
) -> Result<(), IoError> {
    let format = match format {
        Some(f) => f,
        None => MatrixFormat::from_path(path)?,
    };
    std::fs::write(path, format_matrix(m, format)).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;
    use proptest::prelude::*;

    #[test]
    fn matrix_market_layout_is_column_major() {
        let m = dmatrix![1.0, 2.0; 3.0, 4.0; 5.0, 6.0];
        let text = format_matrix_market(&m);
        assert_eq!(text, format!("{MM_HEADER}\n3 2\n1\n3\n5\n2\n4\n6\n"));
        assert_eq!(parse_matrix_market(&text).unwrap(), m);
    }

    #[test]
    fn matrix_market_accepts_comments_and_rejects_coordinate() {
        let text = "%%MatrixMarket matrix array real general\n% made by hand\n2 1\n0.5\n-1e-3\n";
        assert_eq!(parse_matrix_market(text).unwrap(), dmatrix![0.5; -1e-3]);
        let coord = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1.0\n";
        assert!(parse_matrix_market(coord).is_err());
        let short = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n";
        assert!(matches!(
            parse_matrix_market(short),
            Err(IoError::Parse { .. })
        ));
    }

    #[test]
    fn csv_examples() {
        let m = dmatrix![1.0, 2.5; -3.0, 1e-20];
        let text = format_csv(&m);
        assert_eq!(text, "1,2.5\n-3,1e-20\n");
        assert_eq!(parse_csv(&text).unwrap(), m);
        assert!(parse_csv("1,2\n3\n").is_err());
        assert!(parse_csv("1,x\n").is_err());
        assert!(parse_csv("1,NaN\n").is_err());
    }

    #[test]
    fn format_inference() {
        assert_eq!(
            MatrixFormat::from_path(Path::new("a/D.mtx")).unwrap(),
            MatrixFormat::MatrixMarket
        );
        assert_eq!(
            MatrixFormat::from_path(Path::new("T.CSV")).unwrap(),
            MatrixFormat::Csv
        );
        assert!(MatrixFormat::from_path(Path::new("T.txt")).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact(
            rows in 1usize..6,
            cols in 1usize..6,
            values in proptest::collection::vec(
                proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO,
                36,
            ),
        ) {
            let m = DenseMatrix::from_fn(rows, cols, |i, j| values[i * 6 + j]);
            for format in [MatrixFormat::MatrixMarket, MatrixFormat::Csv] {
                let back = parse_matrix(&format_matrix(&m, format), format).unwrap();
                prop_assert_eq!(&back, &m);
            }
        }
    }
}
