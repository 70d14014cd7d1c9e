//! Sequential optimizers that advance one epoch at a time: VR-lite and the
//! SGD, SVRG and SAGA baselines. All start from `x = 0`.

pub mod saga;
pub mod sampler;
pub mod svrg;
pub mod vrlite;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Dataset, LossModel};
use crate::rng::{self, SeededRng};
use crate::vector::DenseVector;

pub use saga::{saga_epoch, saga_step, SagaState};
pub use sampler::{permutation, PermutationSampler};
pub use svrg::{default_inner_steps, svrg_epoch, svrg_inner, Snapshot};
pub use vrlite::{
    corrected_step, sgd_epoch, vrlite_epoch, vrlite_epoch_observed, vrlite_init, vrlite_init_observed,
    vrlite_step, EpochAverages, GradientPoint, OptState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Sgd,
    Svrg,
    Saga,
    VrLite,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Sgd,
        Algorithm::Svrg,
        Algorithm::Saga,
        Algorithm::VrLite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sgd => "sgd",
            Algorithm::Svrg => "svrg",
            Algorithm::Saga => "saga",
            Algorithm::VrLite => "vrlite",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone)]
enum RunState {
    Sgd(OptState),
    /// Origin before the bootstrap pass, then the running state.
    VrLite(DenseVector, Option<OptState>),
    Svrg(DenseVector),
    Saga(DenseVector, SagaState),
}

/// Drives one sequential optimizer epoch by epoch with its own seeded
/// stream, counting sample-gradient evaluations.
///
/// For VR-lite the bootstrap SGD pass is the first epoch.
#[derive(Debug, Clone)]
pub struct SequentialRun {
    algo: Algorithm,
    model: LossModel,
    eta: f64,
    grad_point: GradientPoint,
    rng: SeededRng,
    state: RunState,
    epochs: usize,
    grad_evals: u64,
}

impl SequentialRun {
    pub fn new(
        algo: Algorithm,
        model: LossModel,
        ds: &Dataset,
        eta: f64,
        seed: u64,
        grad_point: GradientPoint,
    ) -> Result<Self> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!(
                "stepsize must be finite and >= 0, got {eta}"
            )));
        }
        let d = ds.dim();
        let mut grad_evals = 0;
        let state = match algo {
            Algorithm::Sgd => RunState::Sgd(OptState::zeros(d, grad_point)),
            Algorithm::VrLite => RunState::VrLite(DenseVector::zeros(d), None),
            Algorithm::Svrg => RunState::Svrg(DenseVector::zeros(d)),
            Algorithm::Saga => {
                let x0 = DenseVector::zeros(d);
                let st = SagaState::new(&model, ds, &x0)?;
                grad_evals = ds.len() as u64;
                RunState::Saga(x0, st)
            }
        };
        Ok(SequentialRun {
            algo,
            model,
            eta,
            grad_point,
            rng: rng::stream(seed, rng::PRIMARY_STREAM),
            state,
            epochs: 0,
            grad_evals,
        })
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algo
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn grad_evals(&self) -> u64 {
        self.grad_evals
    }

    pub fn x(&self) -> &DenseVector {
        match &self.state {
            RunState::Sgd(st) => &st.x,
            RunState::VrLite(_, Some(st)) => &st.x,
            RunState::VrLite(x0, None) => x0,
            RunState::Svrg(x) => x,
            RunState::Saga(x, _) => x,
        }
    }

    /// The VR-lite / SGD state, when the algorithm carries one.
    pub fn opt_state(&self) -> Option<&OptState> {
        match &self.state {
            RunState::Sgd(st) => Some(st),
            RunState::VrLite(_, st) => st.as_ref(),
            _ => None,
        }
    }

    pub fn saga_state(&self) -> Option<&SagaState> {
        match &self.state {
            RunState::Saga(_, st) => Some(st),
            _ => None,
        }
    }

    /// Runs one epoch.
    pub fn advance(&mut self, ds: &Dataset) -> Result<()> {
        let n = ds.len() as u64;
        let gp = self.grad_point;
        match &mut self.state {
            RunState::Sgd(st) => {
                sgd_epoch(st, &self.model, ds, self.eta, &mut self.rng)?;
                self.grad_evals += n * gp.sgd_evals();
            }
            RunState::VrLite(_, slot) => match slot {
                None => {
                    *slot = Some(vrlite_init(&self.model, ds, self.eta, gp, &mut self.rng)?);
                    self.grad_evals += n * gp.sgd_evals();
                }
                Some(st) => {
                    vrlite_epoch(st, &self.model, ds, self.eta, &mut self.rng)?;
                    self.grad_evals += n * gp.vrlite_evals();
                }
            },
            RunState::Svrg(x) => {
                let inner = default_inner_steps(ds.len());
                *x = svrg_epoch(x, &self.model, ds, self.eta, inner, &mut self.rng)?;
                self.grad_evals += n + 2 * inner as u64;
            }
            RunState::Saga(x, st) => {
                saga_epoch(x, &self.model, ds, st, self.eta, &mut self.rng)?;
                self.grad_evals += n;
            }
        }
        self.epochs += 1;
        Ok(())
    }
}
