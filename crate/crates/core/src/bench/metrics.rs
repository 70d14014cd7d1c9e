use std::fs;
use std::io::Write;
use std::path::Path;

use super::config::Mode;
use crate::error::{Error, Result};
use crate::optim::Algorithm;

pub const CSV_HEADER: &str = "algo,mode,workers,epoch,wall_ms,objective,rel_grad_norm,eta,seed";

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub algo: Algorithm,
    pub mode: Mode,
    pub workers: usize,
    pub epoch: usize,
    pub wall_ms: f64,
    pub objective: f64,
    pub rel_grad_norm: f64,
    pub eta: f64,
    pub seed: u64,
}

/// Header plus one line per row. Reals carry 17 significant digits.
pub fn render_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            r.algo, r.mode, r.workers, r.epoch, r.wall_ms, r.objective, r.rel_grad_norm, r.eta, r.seed
        ));
    }
    out
}

/// Writes the CSV to a sibling temporary file and renames it into place.
pub fn write_csv(rows: &[MetricsRow], path: &Path) -> Result<()> {
    let io_err = |source| Error::PathIo {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp_name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let mut f = fs::File::create(&tmp).map_err(io_err)?;
    f.write_all(render_csv(rows).as_bytes()).map_err(io_err)?;
    f.sync_all().map_err(io_err)?;
    drop(f);
    fs::rename(&tmp, path).map_err(io_err)
}
