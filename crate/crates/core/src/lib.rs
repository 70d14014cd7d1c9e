//! Variance-reduced stochastic optimization with epoch-average correction
//! (VR-lite), its synchronous and asynchronous distributed variants, and
//! SGD / SVRG / SAGA baselines for regularized logistic and ridge
//! regression.
//!
//! * [`model`]: losses, gradients, objective and the relative gradient norm.
//! * [`optim`]: sequential optimizers, one epoch at a time.
//! * [`dist`]: sharding, worker and central node logic, wire codec and the
//!   simulated / TCP runtimes.
//! * [`data`]: toy generators and LIBSVM input.
//! * [`bench`]: experiment driver, stepsize sweeps and CSV metrics.

pub mod bench;
pub mod data;
pub mod dist;
pub mod error;
pub mod model;
pub mod optim;
pub mod rng;
pub mod vector;

pub use error::{Error, Result};
pub use model::{Dataset, LabeledSample, LossKind, LossModel, Task};
pub use optim::{Algorithm, GradientPoint};
pub use vector::DenseVector;

/// Virtual milliseconds charged per sample-gradient evaluation when runs are
/// timed on the deterministic clock.
pub const VIRTUAL_MS_PER_GRAD_EVAL: f64 = 1e-3;
