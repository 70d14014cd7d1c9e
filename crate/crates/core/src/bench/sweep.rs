use std::thread;

use super::config::ExperimentConfig;
use super::runner::run_with_eta;
use crate::error::{Error, Result};
use crate::model::{Dataset, LossModel};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub eta: f64,
    pub epochs_to_target: Option<usize>,
    pub final_rel_grad_norm: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub best: Option<f64>,
    /// One entry per distinct stepsize, ascending.
    pub points: Vec<SweepPoint>,
}

impl SweepOutcome {
    pub fn point(&self, eta: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.eta == eta)
    }

    pub fn best_point(&self) -> Option<&SweepPoint> {
        self.best.and_then(|b| self.point(b))
    }
}

/// `2^k * 1e-4` for `k = 0..=12`.
pub fn default_grid() -> Vec<f64> {
    (0..=12).map(|k| 1e-4 * f64::powi(2.0, k)).collect()
}

/// Picks the constant stepsize that reaches `cfg.target` in the fewest
/// epochs, preferring the smaller stepsize on ties. Diverged runs are
/// excluded. If no run reaches the target, the smallest final relative
/// gradient norm wins. An empty grid means [`default_grid`].
pub fn stepsize_sweep(
    cfg: &ExperimentConfig,
    model: &LossModel,
    ds: &Dataset,
    grid: &[f64],
) -> Result<SweepOutcome> {
    let mut grid = if grid.is_empty() {
        default_grid()
    } else {
        grid.to_vec()
    };
    if grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::invalid("sweep grid must contain positive stepsizes"));
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let reports = thread::scope(|scope| {
        let handles: Vec<_> = grid
            .iter()
            .map(|&eta| scope.spawn(move || run_with_eta(cfg, model, ds, eta, Some(cfg.target))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect::<Result<Vec<_>>>()
    })?;

    let points: Vec<SweepPoint> = reports
        .iter()
        .map(|r| SweepPoint {
            eta: r.eta,
            epochs_to_target: if r.diverged() {
                None
            } else {
                r.epochs_to(cfg.target)
            },
            final_rel_grad_norm: r.final_rel_grad_norm(),
            diverged: r.diverged(),
        })
        .collect();

    let live = || points.iter().filter(|p| !p.diverged);
    if live().next().is_none() {
        return Err(Error::AllDiverged);
    }
    // Points are ascending in eta and min_by_key keeps the first minimum.
    let best = live()
        .filter_map(|p| p.epochs_to_target.map(|e| (e, p.eta)))
        .min_by_key(|(e, _)| *e)
        .map(|(_, eta)| eta)
        .or_else(|| {
            live()
                .min_by(|a, b| a.final_rel_grad_norm.total_cmp(&b.final_rel_grad_norm))
                .map(|p| p.eta)
        });
    Ok(SweepOutcome { best, points })
}
