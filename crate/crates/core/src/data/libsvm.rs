//! LIBSVM text format: `label idx:val idx:val ...` with 1-based, strictly
//! ascending indices. Input is densified on read.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Dataset, LabeledSample, Task};
use crate::vector::DenseVector;

struct SparseRow {
    label: f64,
    entries: Vec<(usize, f64)>,
}

fn parse_line(line: &str, line_no: usize) -> Result<Option<SparseRow>> {
    let err = |reason: String| Error::Parse {
        line: line_no,
        reason,
    };
    let content = match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    };
    let mut tokens = content.split_whitespace();
    let Some(label_tok) = tokens.next() else {
        return Ok(None);
    };
    let label: f64 = label_tok
        .parse()
        .map_err(|_| err(format!("invalid label '{label_tok}'")))?;
    if !label.is_finite() {
        return Err(err(format!("non-finite label '{label_tok}'")));
    }
    let mut entries = Vec::new();
    let mut prev = 0usize;
    for tok in tokens {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| err(format!("expected idx:val, got '{tok}'")))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| err(format!("invalid feature index '{idx}'")))?;
        if idx == 0 {
            return Err(err("feature indices are 1-based".into()));
        }
        if idx <= prev {
            return Err(err(format!("non-ascending feature index {idx} after {prev}")));
        }
        let val: f64 = val
            .parse()
            .map_err(|_| err(format!("invalid feature value '{val}'")))?;
        if !val.is_finite() {
            return Err(err(format!("non-finite feature value '{val}'")));
        }
        entries.push((idx, val));
        prev = idx;
    }
    Ok(Some(SparseRow { label, entries }))
}

fn infer_task(rows: &[SparseRow]) -> Task {
    if rows
        .iter()
        .all(|r| r.label == -1.0 || r.label == 0.0 || r.label == 1.0)
    {
        Task::Classification
    } else {
        Task::Regression
    }
}

/// Parses LIBSVM text into a dense dataset.
///
/// The dimension is `expected_d` when given (larger indices are an error),
/// otherwise the largest index seen. When `task` is `None` it is inferred:
/// labels drawn only from `{-1, 0, 1}` mean classification. Classification
/// labels are mapped to `{-1, +1}` with `0` becoming `-1`.
pub fn parse_libsvm<R: BufRead>(reader: R, expected_d: Option<usize>, task: Option<Task>) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut line_nos = Vec::new();
    let mut max_idx = 0;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if let Some(row) = parse_line(&line, line_no)? {
            if let Some(&(last, _)) = row.entries.last() {
                if let Some(d) = expected_d {
                    if last > d {
                        return Err(Error::Parse {
                            line: line_no,
                            reason: format!("feature index {last} exceeds dimension {d}"),
                        });
                    }
                }
                max_idx = max_idx.max(last);
            }
            rows.push(row);
            line_nos.push(line_no);
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d = expected_d.unwrap_or(max_idx);
    if d == 0 {
        return Err(Error::invalid("cannot infer a nonzero dimension"));
    }
    let task = task.unwrap_or_else(|| infer_task(&rows));
    let mut samples = Vec::with_capacity(rows.len());
    for (row, line_no) in rows.into_iter().zip(line_nos) {
        let label = match task {
            Task::Regression => row.label,
            Task::Classification => match row.label {
                1.0 => 1.0,
                -1.0 | 0.0 => -1.0,
                l => {
                    return Err(Error::Parse {
                        line: line_no,
                        reason: format!("classification label {l} is not in {{-1, 0, 1}}"),
                    })
                }
            },
        };
        let mut dense = DenseVector::zeros(d);
        for (idx, val) in row.entries {
            dense[idx - 1] = val;
        }
        samples.push(LabeledSample::new(dense, label));
    }
    Dataset::new(samples, task)
}

pub fn read_libsvm_file(
    path: impl AsRef<Path>,
    expected_d: Option<usize>,
    task: Option<Task>,
) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::PathIo {
        path: path.to_path_buf(),
        source,
    })?;
    parse_libsvm(BufReader::new(file), expected_d, task)
}

/// Writes `ds` in LIBSVM format, omitting zero features. Values use the
/// shortest representation that reads back to the same `f64`.
pub fn write_libsvm<W: Write>(ds: &Dataset, mut out: W) -> Result<()> {
    for s in ds.samples() {
        write!(out, "{}", s.label)?;
        for (j, v) in s.features.iter().enumerate() {
            if *v != 0.0 {
                write!(out, " {}:{}", j + 1, v)?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}
