use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{Dataset, LabeledSample, Task};
use crate::rng;
use crate::vector::DenseVector;

/// Parameters for the toy generators.
///
/// For classification `noise_sigma` is the per-feature standard deviation
/// of both classes; for regression it is the standard deviation of the
/// additive label noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub task: Task,
    pub class_mean_shift: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// 5000 samples with 20 features, unit noise.
    pub fn toy(task: Task, seed: u64) -> Self {
        SyntheticSpec {
            n: 5000,
            d: 20,
            task,
            class_mean_shift: 1.0,
            noise_sigma: 1.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::invalid("synthetic data needs n >= 1 and d >= 1"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid("noise_sigma must be finite and >= 0"));
        }
        if !self.class_mean_shift.is_finite() {
            return Err(Error::invalid("class_mean_shift must be finite"));
        }
        Ok(())
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, mean: f64, sigma: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    mean + sigma * z
}

/// Two Gaussian classes of equal size: label `-1` centred at zero and
/// label `+1` centred at `class_mean_shift` in every coordinate. Labels
/// alternate starting with `-1`.
pub fn gen_gaussian_classification(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    if !spec.n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "classification needs an even sample count, got {}",
            spec.n
        )));
    }
    let mut rng = rng::stream(spec.seed, rng::DATA_STREAM);
    let samples = (0..spec.n)
        .map(|i| {
            let (label, mean) = if i % 2 == 0 {
                (-1.0, 0.0)
            } else {
                (1.0, spec.class_mean_shift)
            };
            let a: Vec<f64> = (0..spec.d)
                .map(|_| gaussian(&mut rng, mean, spec.noise_sigma))
                .collect();
            LabeledSample::new(a, label)
        })
        .collect();
    Dataset::new(samples, Task::Classification)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    pub dataset: Dataset,
    /// Coefficients the labels were generated from.
    pub truth: DenseVector,
}

/// `b = A x* + eps` with standard Gaussian `A` and `x*`, and
/// `eps ~ N(0, noise_sigma^2)`.
pub fn gen_linear_regression(spec: &SyntheticSpec) -> Result<RegressionData> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed, rng::DATA_STREAM);
    let truth = DenseVector::from_vec((0..spec.d).map(|_| gaussian(&mut rng, 0.0, 1.0)).collect());
    let samples = (0..spec.n)
        .map(|_| {
            let a = DenseVector::from_vec((0..spec.d).map(|_| gaussian(&mut rng, 0.0, 1.0)).collect());
            let b = a.dot(&truth) + gaussian(&mut rng, 0.0, spec.noise_sigma);
            LabeledSample {
                features: a,
                label: b,
            }
        })
        .collect();
    Ok(RegressionData {
        dataset: Dataset::new(samples, Task::Regression)?,
        truth,
    })
}
