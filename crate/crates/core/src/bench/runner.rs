use log::info;

use super::config::{DatasetSource, EtaChoice, ExperimentConfig};
use super::metrics::{write_csv, MetricsRow};
use super::sweep::stepsize_sweep;
use crate::data::{gen_gaussian_classification, gen_linear_regression, read_libsvm_file, SyntheticSpec};
use crate::dist::{run_distributed, DistConfig};
use crate::error::{Error, Result};
use crate::model::{Dataset, LossModel, Task};
use crate::optim::SequentialRun;
use crate::vector::DenseVector;
use crate::VIRTUAL_MS_PER_GRAD_EVAL;

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub eta: f64,
    pub rows: Vec<MetricsRow>,
    /// Epoch at which the iterate stopped being finite.
    pub diverged_at: Option<usize>,
}

impl RunReport {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    pub fn final_rel_grad_norm(&self) -> f64 {
        self.rows.last().map_or(f64::INFINITY, |r| r.rel_grad_norm)
    }

    /// First recorded epoch whose relative gradient norm is at most `target`.
    pub fn epochs_to(&self, target: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.rel_grad_norm <= target)
            .map(|r| r.epoch)
    }
}

/// Builds the dataset and the matching loss for a configuration.
pub fn load_problem(cfg: &ExperimentConfig) -> Result<(LossModel, Dataset)> {
    let ds = match &cfg.dataset {
        DatasetSource::ToyClass => {
            gen_gaussian_classification(&SyntheticSpec::toy(Task::Classification, cfg.seed))?
        }
        DatasetSource::ToyReg => {
            gen_linear_regression(&SyntheticSpec::toy(Task::Regression, cfg.seed))?.dataset
        }
        DatasetSource::Libsvm(path) => read_libsvm_file(path, None, None)?,
    };
    let model = LossModel::for_task(ds.task(), cfg.lambda)?;
    Ok((model, ds))
}

struct Recorder<'a> {
    cfg: &'a ExperimentConfig,
    model: &'a LossModel,
    ds: &'a Dataset,
    eta: f64,
    base_norm: f64,
    rows: Vec<MetricsRow>,
}

impl Recorder<'_> {
    /// Appends a row for `x`, or returns `false` if anything is non-finite.
    fn record(&mut self, epoch: usize, x: &DenseVector, wall_ms: f64) -> Result<bool> {
        if !x.is_finite() {
            return Ok(false);
        }
        let objective = self.model.objective(self.ds.samples(), x)?;
        let rel = self.model.full_gradient(self.ds.samples(), x)?.norm() / self.base_norm;
        if !(objective.is_finite() && rel.is_finite()) {
            return Ok(false);
        }
        self.rows.push(MetricsRow {
            algo: self.cfg.algo,
            mode: self.cfg.mode,
            workers: self.cfg.workers,
            epoch,
            wall_ms,
            objective,
            rel_grad_norm: rel,
            eta: self.eta,
            seed: self.cfg.seed,
        });
        Ok(true)
    }
}

/// Runs the configured optimizer at one stepsize. Row 0 is the starting
/// point `x = 0`. When `stop_at` is set, sequential runs end at the first
/// epoch whose relative gradient norm reaches it.
pub fn run_with_eta(
    cfg: &ExperimentConfig,
    model: &LossModel,
    ds: &Dataset,
    eta: f64,
    stop_at: Option<f64>,
) -> Result<RunReport> {
    let x0 = DenseVector::zeros(ds.dim());
    let base_norm = model.full_gradient(ds.samples(), &x0)?.norm();
    if base_norm == 0.0 {
        return Err(Error::ZeroInitialGradient);
    }
    let mut rec = Recorder {
        cfg,
        model,
        ds,
        eta,
        base_norm,
        rows: Vec::with_capacity(cfg.epochs + 1),
    };
    rec.record(0, &x0, 0.0)?;
    let mut diverged_at = None;
    match cfg.mode.distributed() {
        None => {
            let mut run = SequentialRun::new(cfg.algo, *model, ds, eta, cfg.seed, cfg.grad_point)?;
            for epoch in 1..=cfg.epochs {
                run.advance(ds)?;
                let wall = run.grad_evals() as f64 * VIRTUAL_MS_PER_GRAD_EVAL;
                if !rec.record(epoch, run.x(), wall)? {
                    diverged_at = Some(epoch);
                    break;
                }
                if stop_at.is_some_and(|t| rec.rows.last().unwrap().rel_grad_norm <= t) {
                    break;
                }
            }
        }
        Some(mode) => {
            let dcfg = DistConfig {
                mode,
                workers: cfg.workers,
                transport: cfg.transport,
                latency_ms: cfg.latency_ms,
                seed: cfg.seed,
                epochs: cfg.epochs,
                eta,
                grad_point: cfg.grad_point,
                speeds: Vec::new(),
            };
            match run_distributed(model, ds, &dcfg) {
                Ok(out) => {
                    for r in &out.rounds {
                        if !rec.record(r.epoch, &r.x, r.wall_ms)? {
                            diverged_at = Some(r.epoch);
                            break;
                        }
                    }
                }
                Err(Error::Diverged { epoch }) => diverged_at = Some(epoch),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(RunReport {
        eta,
        rows: rec.rows,
        diverged_at,
    })
}

/// Runs an experiment end to end: resolves the stepsize (sweeping if asked),
/// runs it for the full epoch budget and writes the CSV when an output path
/// is configured. A diverged run still writes its finite rows.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let (model, ds) = load_problem(cfg)?;
    let eta = match &cfg.eta {
        EtaChoice::Fixed(eta) => *eta,
        EtaChoice::Sweep(grid) => {
            let outcome = stepsize_sweep(cfg, &model, &ds, grid)?;
            let best = outcome.best.ok_or(Error::AllDiverged)?;
            info!("sweep picked eta = {best}");
            best
        }
    };
    let report = run_with_eta(cfg, &model, &ds, eta, None)?;
    if let Some(path) = &cfg.out_path {
        write_csv(&report.rows, path)?;
    }
    Ok(report)
}
