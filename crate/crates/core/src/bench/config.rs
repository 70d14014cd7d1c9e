use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::dist::{DistMode, TransportKind};
use crate::error::{Error, Result};
use crate::model::DEFAULT_LAMBDA;
use crate::optim::{Algorithm, GradientPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Seq,
    Sync,
    Async,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Seq => "seq",
            Mode::Sync => "sync",
            Mode::Async => "async",
        }
    }

    pub fn distributed(self) -> Option<DistMode> {
        match self {
            Mode::Seq => None,
            Mode::Sync => Some(DistMode::Sync),
            Mode::Async => Some(DistMode::Async),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "seq" => Ok(Mode::Seq),
            "sync" => Ok(Mode::Sync),
            "async" => Ok(Mode::Async),
            _ => Err(Error::invalid(format!("unknown mode '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetSource {
    /// Two-class Gaussian toy data, 5000 x 20.
    ToyClass,
    /// Noisy linear toy data, 5000 x 20.
    ToyReg,
    Libsvm(PathBuf),
}

impl FromStr for DatasetSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toy-class" => Ok(DatasetSource::ToyClass),
            "toy-reg" => Ok(DatasetSource::ToyReg),
            _ => match s.strip_prefix("libsvm:") {
                Some(path) if !path.is_empty() => Ok(DatasetSource::Libsvm(PathBuf::from(path))),
                _ => Err(Error::invalid(format!(
                    "unknown dataset '{s}' (expected toy-class, toy-reg or libsvm:<path>)"
                ))),
            },
        }
    }
}

impl fmt::Display for DatasetSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetSource::ToyClass => f.write_str("toy-class"),
            DatasetSource::ToyReg => f.write_str("toy-reg"),
            DatasetSource::Libsvm(p) => write!(f, "libsvm:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EtaChoice {
    Fixed(f64),
    Sweep(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algo: Algorithm,
    pub mode: Mode,
    pub dataset: DatasetSource,
    pub eta: EtaChoice,
    pub lambda: f64,
    pub epochs: usize,
    pub workers: usize,
    pub transport: TransportKind,
    pub latency_ms: f64,
    pub seed: u64,
    pub out_path: Option<PathBuf>,
    /// Relative gradient norm that counts as converged in sweeps.
    pub target: f64,
    pub grad_point: GradientPoint,
}

impl ExperimentConfig {
    pub fn new(algo: Algorithm, dataset: DatasetSource, eta: EtaChoice) -> Self {
        ExperimentConfig {
            algo,
            mode: Mode::Seq,
            dataset,
            eta,
            lambda: DEFAULT_LAMBDA,
            epochs: 30,
            workers: 1,
            transport: TransportKind::Sim,
            latency_ms: 0.0,
            seed: 0,
            out_path: None,
            target: 1e-6,
            grad_point: GradientPoint::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode != Mode::Seq && self.algo != Algorithm::VrLite {
            return Err(Error::invalid(format!(
                "mode {} is only available for vrlite",
                self.mode
            )));
        }
        if self.workers == 0 {
            return Err(Error::invalid("workers must be >= 1"));
        }
        if self.mode == Mode::Seq && self.workers != 1 {
            return Err(Error::invalid("sequential runs use exactly one worker"));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid("lambda must be finite and >= 0"));
        }
        if self.target.is_nan() || self.target <= 0.0 {
            return Err(Error::invalid("target must be positive"));
        }
        if !(self.latency_ms >= 0.0 && self.latency_ms.is_finite()) {
            return Err(Error::invalid("latency must be finite and >= 0"));
        }
        match &self.eta {
            EtaChoice::Fixed(eta) if !(*eta > 0.0 && eta.is_finite()) => {
                Err(Error::invalid(format!("stepsize must be positive, got {eta}")))
            }
            EtaChoice::Sweep(grid) if grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) => {
                Err(Error::invalid("sweep grid must contain positive stepsizes"))
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_dataset_sources() {
        assert_eq!(
            "toy-class".parse::<DatasetSource>().unwrap(),
            DatasetSource::ToyClass
        );
        assert_eq!(
            "libsvm:/tmp/a b".parse::<DatasetSource>().unwrap(),
            DatasetSource::Libsvm(PathBuf::from("/tmp/a b"))
        );
        assert!("libsvm:".parse::<DatasetSource>().is_err());
        assert!("mnist".parse::<DatasetSource>().is_err());
    }

    #[test]
    fn distributed_modes_need_vrlite() {
        let mut cfg = ExperimentConfig::new(Algorithm::Saga, DatasetSource::ToyReg, EtaChoice::Fixed(0.01));
        cfg.mode = Mode::Sync;
        cfg.workers = 2;
        assert!(cfg.validate().is_err());
        cfg.algo = Algorithm::VrLite;
        assert!(cfg.validate().is_ok());
        cfg.workers = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_bad_stepsizes() {
        let cfg = ExperimentConfig::new(Algorithm::Sgd, DatasetSource::ToyReg, EtaChoice::Fixed(-1.0));
        assert!(cfg.validate().is_err());
        let cfg = ExperimentConfig::new(
            Algorithm::Sgd,
            DatasetSource::ToyReg,
            EtaChoice::Sweep(vec![0.1, 0.0]),
        );
        assert!(cfg.validate().is_err());
    }
}
