//! Plain-text numeric tables: feature rows, cost matrices, warp paths and
//! raw signals. No header lines; `,` separates fields, `\n` ends rows.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::audio_io::Signal;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// 17 significant digits, which round-trips every binary64 value.
pub fn fmt_real(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.16e}")
}

/// Renders every row as comma-separated [`fmt_real`] fields.
pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for row in m.iter_rows() {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&fmt_real(*v));
        }
        out.push('\n');
    }
    out
}

/// Parses a rectangular table of finite reals.
pub fn parse_matrix(text: &str, path: &Path) -> Result<Matrix> {
    let bad = |reason: String| Error::MalformedCsv {
        path: path.to_path_buf(),
        reason,
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| bad(format!("line {}: `{}` is not a finite number", lineno + 1, f.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(bad(format!(
                    "line {} has {} fields, expected {}",
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(bad("no data rows".into()));
    }
    Ok(Matrix::from_rows(&rows).expect("row widths checked"))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    parse_matrix(&text, path)
}

/// Two columns `i,j` (1-based).
pub fn path_to_csv(path: &[(usize, usize)]) -> String {
    let mut out = String::new();
    for (i, j) in path {
        let _ = writeln!(out, "{i},{j}");
    }
    out
}

/// Two columns: time in seconds and amplitude.
pub fn signal_to_csv(signal: &Signal) -> String {
    let fs = f64::from(signal.sample_rate_hz);
    let mut out = String::new();
    for (n, s) in signal.samples.iter().enumerate() {
        let _ = writeln!(out, "{},{}", fmt_real(n as f64 / fs), fmt_real(*s));
    }
    out
}
