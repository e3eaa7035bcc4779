use std::fmt::Write as _;
use std::path::Path;

use super::{LogRegLassoInstance, SparseMatrix};
use crate::error::{Error, Result};

/// Reads a binary-classification LIBSVM file. Labels {0,1} and {1,2} are
/// mapped to {−1,+1}; the column count is the largest index seen.
pub fn read_libsvm(path: impl AsRef<Path>) -> Result<LogRegLassoInstance> {
    let text = std::fs::read_to_string(path)?;
    parse_libsvm(&text)
}

pub fn parse_libsvm(text: &str) -> Result<LogRegLassoInstance> {
    let mut raw_labels = Vec::new();
    let mut rows = Vec::new();
    let mut n_cols = 0usize;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: lineno, message };
        let mut parts = body.split_whitespace();
        let label_tok = parts.next().unwrap_or_default();
        let label: f64 = label_tok
            .parse()
            .map_err(|_| err(format!("bad label `{label_tok}`")))?;
        let mut row = Vec::new();
        let mut last_idx = 0usize;
        for tok in parts {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected `index:value`, found `{tok}`")))?;
            let idx: usize = idx.parse().map_err(|_| err(format!("bad index `{idx}`")))?;
            if idx == 0 {
                return Err(err("indices are 1-based".into()));
            }
            if idx <= last_idx {
                return Err(err(format!("index {idx} is not increasing")));
            }
            last_idx = idx;
            let val: f64 = val.parse().map_err(|_| err(format!("bad value `{val}`")))?;
            n_cols = n_cols.max(idx);
            row.push((idx - 1, val));
        }
        raw_labels.push((lineno, label));
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no data rows".into(),
        });
    }
    let labels = map_labels(&raw_labels)?;
    LogRegLassoInstance::new(SparseMatrix::new(n_cols, rows)?, labels, 0.0)
}

fn map_labels(raw: &[(usize, f64)]) -> Result<Vec<f64>> {
    let all_in = |set: &[f64]| raw.iter().all(|(_, y)| set.contains(y));
    let map: fn(f64) -> f64 = if all_in(&[-1.0, 1.0]) {
        |y| y
    } else if all_in(&[0.0, 1.0]) {
        |y| 2.0 * y - 1.0
    } else if all_in(&[1.0, 2.0]) {
        |y| 2.0 * y - 3.0
    } else {
        let (line, y) = raw
            .iter()
            .find(|(_, y)| ![-1.0, 0.0, 1.0, 2.0].contains(y))
            .or_else(|| raw.iter().find(|(_, y)| *y == 2.0 || *y == 0.0))
            .copied()
            .unwrap_or(raw[0]);
        return Err(Error::Parse {
            line,
            message: format!("label {y} does not fit a binary {{-1,+1}}, {{0,1}} or {{1,2}} labelling"),
        });
    };
    Ok(raw.iter().map(|(_, y)| map(*y)).collect())
}

pub fn write_libsvm(inst: &LogRegLassoInstance, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for (row, y) in inst.a.rows.iter().zip(&inst.labels) {
        out.push_str(if *y > 0.0 { "+1" } else { "-1" });
        for (j, v) in row {
            let _ = write!(out, " {}:{}", j + 1, v);
        }
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
