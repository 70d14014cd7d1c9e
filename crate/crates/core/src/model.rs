//! Regularized empirical-risk problems: per-sample losses, their gradients,
//! full-dataset averages and the relative gradient norm used to measure
//! convergence.
//!
//! Every per-sample term carries the full `lambda * ||x||^2` penalty, so the
//! mean of the per-sample losses is exactly the regularized objective.
//!
//! The logistic loss is `log(1 + exp(b * a.x))`. With labels in `{-1, +1}`
//! this is the conventional logistic loss with the label sign flipped; callers
//! who want the usual orientation should negate their labels.

use crate::error::{Error, Result};
use crate::vector::DenseVector;

pub const DEFAULT_LAMBDA: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Classification,
    Regression,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub features: DenseVector,
    pub label: f64,
}

impl LabeledSample {
    pub fn new(features: impl Into<DenseVector>, label: f64) -> Self {
        LabeledSample {
            features: features.into(),
            label,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<LabeledSample>,
    dim: usize,
    task: Task,
}

impl Dataset {
    /// Builds a dataset, checking that it is nonempty and that every sample
    /// has the same dimension.
    pub fn new(samples: Vec<LabeledSample>, task: Task) -> Result<Self> {
        let first = samples.first().ok_or(Error::EmptyDataset)?;
        let dim = first.features.dim();
        for s in &samples {
            s.features.check_dim(dim)?;
        }
        Ok(Dataset { samples, dim, task })
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn task(&self) -> Task {
        self.task
    }

    /// Copy of the samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let samples = indices
            .iter()
            .map(|&i| {
                self.samples.get(i).cloned().ok_or(Error::IndexOutOfRange {
                    index: i,
                    len: self.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(samples, self.task)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Logistic,
    Ridge,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossModel {
    pub kind: LossKind,
    pub lambda: f64,
}

impl LossModel {
    pub fn new(kind: LossKind, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be >= 0, got {lambda}")));
        }
        Ok(LossModel { kind, lambda })
    }

    pub fn logistic() -> Self {
        LossModel {
            kind: LossKind::Logistic,
            lambda: DEFAULT_LAMBDA,
        }
    }

    pub fn ridge() -> Self {
        LossModel {
            kind: LossKind::Ridge,
            lambda: DEFAULT_LAMBDA,
        }
    }

    /// The natural loss for a task: logistic for classification, ridge for
    /// regression.
    pub fn for_task(task: Task, lambda: f64) -> Result<Self> {
        let kind = match task {
            Task::Classification => LossKind::Logistic,
            Task::Regression => LossKind::Ridge,
        };
        LossModel::new(kind, lambda)
    }

    pub fn loss_sample(&self, s: &LabeledSample, x: &DenseVector) -> Result<f64> {
        s.features.check_dim(x.dim())?;
        Ok(self.loss_unchecked(s, x))
    }

    pub(crate) fn loss_unchecked(&self, s: &LabeledSample, x: &[f64]) -> f64 {
        let z = s.features.dot(x);
        let reg = self.lambda * x.iter().map(|v| v * v).sum::<f64>();
        let data = match self.kind {
            LossKind::Logistic => softplus(s.label * z),
            LossKind::Ridge => {
                let r = z - s.label;
                r * r
            }
        };
        data + reg
    }

    pub fn grad_sample(&self, s: &LabeledSample, x: &DenseVector) -> Result<DenseVector> {
        s.features.check_dim(x.dim())?;
        let mut out = DenseVector::zeros(x.dim());
        self.grad_into(s, x, &mut out);
        Ok(out)
    }

    /// Writes the per-sample gradient at `x` into `out`. Dimensions are only
    /// checked in debug builds.
    pub fn grad_into(&self, s: &LabeledSample, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(s.features.dim(), x.len());
        debug_assert_eq!(out.len(), x.len());
        let z = s.features.dot(x);
        let coef = match self.kind {
            LossKind::Logistic => s.label * sigmoid(s.label * z),
            LossKind::Ridge => 2.0 * (z - s.label),
        };
        let two_lambda = 2.0 * self.lambda;
        for ((o, a), xi) in out.iter_mut().zip(s.features.iter()).zip(x) {
            *o = coef * a + two_lambda * xi;
        }
    }

    /// Mean of the per-sample losses, summed in index order.
    pub fn objective(&self, samples: &[LabeledSample], x: &DenseVector) -> Result<f64> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut total = 0.0;
        for s in samples {
            s.features.check_dim(x.dim())?;
            total += self.loss_unchecked(s, x);
        }
        Ok(total / samples.len() as f64)
    }

    /// Mean of the per-sample gradients, summed in index order.
    pub fn full_gradient(&self, samples: &[LabeledSample], x: &DenseVector) -> Result<DenseVector> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let d = x.dim();
        let mut sum = DenseVector::zeros(d);
        let mut g = vec![0.0; d];
        for s in samples {
            s.features.check_dim(d)?;
            self.grad_into(s, x, &mut g);
            sum.add_assign(&g);
        }
        sum.scale(1.0 / samples.len() as f64);
        Ok(sum)
    }

    /// `||grad f(x)|| / ||grad f(x0)||`.
    pub fn rel_grad_norm(&self, samples: &[LabeledSample], x: &DenseVector, x0: &DenseVector) -> Result<f64> {
        let base = self.full_gradient(samples, x0)?.norm();
        if base == 0.0 {
            return Err(Error::ZeroInitialGradient);
        }
        Ok(self.full_gradient(samples, x)?.norm() / base)
    }
}

/// `log(1 + exp(z))` without overflow.
pub fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Logistic function `exp(z) / (1 + exp(z))`, evaluated through
/// `exp(-|z|)` so that neither branch overflows.
pub fn sigmoid(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    if z >= 0.0 {
        1.0 / (1.0 + e)
    } else {
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample(a: &[f64], b: f64) -> LabeledSample {
        LabeledSample::new(a.to_vec(), b)
    }

    fn v(x: &[f64]) -> DenseVector {
        DenseVector::from(x)
    }

    #[test]
    fn ridge_loss_hand_value() {
        let m = LossModel::new(LossKind::Ridge, 0.0).unwrap();
        let l = m.loss_sample(&sample(&[1.0, 0.0], 2.0), &v(&[0.0, 0.0])).unwrap();
        assert_eq!(l, 4.0);
    }

    #[test]
    fn logistic_loss_at_zero_is_ln2() {
        let m = LossModel::new(LossKind::Logistic, 0.0).unwrap();
        let l = m.loss_sample(&sample(&[1.0, 1.0], 1.0), &v(&[0.0, 0.0])).unwrap();
        assert_abs_diff_eq!(l, std::f64::consts::LN_2, epsilon = 1e-15);
    }

    #[test]
    fn regularizer_vanishes_at_origin() {
        for kind in [LossKind::Logistic, LossKind::Ridge] {
            let with = LossModel::new(kind, 3.5).unwrap();
            let without = LossModel::new(kind, 0.0).unwrap();
            let s = sample(&[0.3, -1.2], 1.0);
            let x = DenseVector::zeros(2);
            assert_eq!(
                with.loss_sample(&s, &x).unwrap(),
                without.loss_sample(&s, &x).unwrap()
            );
        }
    }

    #[test]
    fn gradient_hand_values() {
        let lg = LossModel::new(LossKind::Logistic, 0.0).unwrap();
        let g = lg
            .grad_sample(&sample(&[1.0, 1.0], 1.0), &v(&[0.0, 0.0]))
            .unwrap();
        assert_eq!(g.as_slice(), &[0.5, 0.5]);

        let rg = LossModel::new(LossKind::Ridge, 0.0).unwrap();
        let g = rg
            .grad_sample(&sample(&[1.0, 0.0], 2.0), &v(&[0.0, 0.0]))
            .unwrap();
        assert_eq!(g.as_slice(), &[-4.0, 0.0]);

        let rg = LossModel::ridge();
        let g = rg
            .grad_sample(&sample(&[0.0, 0.0], 0.0), &v(&[1.0, 1.0]))
            .unwrap();
        assert_abs_diff_eq!(g[0], 2e-4, epsilon = 1e-18);
        assert_abs_diff_eq!(g[1], 2e-4, epsilon = 1e-18);
    }

    #[test]
    fn logistic_is_stable_for_huge_margins() {
        let m = LossModel::new(LossKind::Logistic, 0.0).unwrap();
        for b in [1.0, -1.0] {
            let s = sample(&[1000.0], b);
            let x = v(&[1.0]);
            let l = m.loss_sample(&s, &x).unwrap();
            let g = m.grad_sample(&s, &x).unwrap();
            assert!(l.is_finite() && g.is_finite());
        }
        assert_eq!(sigmoid(800.0), 1.0);
        assert_eq!(sigmoid(-800.0), 0.0);
        assert_eq!(softplus(800.0), 800.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let m = LossModel::ridge();
        let s = sample(&[1.0, 2.0], 0.0);
        assert!(matches!(
            m.loss_sample(&s, &DenseVector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(m.grad_sample(&s, &DenseVector::zeros(1)).is_err());
        assert!(Dataset::new(vec![s.clone(), sample(&[1.0], 0.0)], Task::Regression).is_err());
    }

    #[test]
    fn empty_inputs_are_rejected() {
        assert!(matches!(
            Dataset::new(vec![], Task::Regression),
            Err(Error::EmptyDataset)
        ));
        let m = LossModel::ridge();
        assert!(matches!(
            m.objective(&[], &DenseVector::zeros(1)),
            Err(Error::EmptyDataset)
        ));
        assert!(matches!(
            m.full_gradient(&[], &DenseVector::zeros(1)),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn objective_of_single_and_duplicate_samples() {
        let m = LossModel::logistic();
        let s = sample(&[0.4, -0.7], -1.0);
        let x = v(&[0.2, 0.9]);
        let single = m.loss_sample(&s, &x).unwrap();
        assert_eq!(m.objective(std::slice::from_ref(&s), &x).unwrap(), single);
        assert_eq!(m.objective(&[s.clone(), s.clone()], &x).unwrap(), single);
        assert_eq!(
            m.full_gradient(std::slice::from_ref(&s), &x).unwrap(),
            m.grad_sample(&s, &x).unwrap()
        );
    }

    #[test]
    fn rel_grad_norm_basics() {
        let m = LossModel::ridge();
        let samples = vec![sample(&[1.0, 0.5], 1.0), sample(&[-0.3, 2.0], -0.5)];
        let x0 = DenseVector::zeros(2);
        assert_eq!(m.rel_grad_norm(&samples, &x0, &x0).unwrap(), 1.0);
        let x = v(&[0.1, 0.2]);
        let a = m.rel_grad_norm(&samples, &x, &x0).unwrap();
        let b = m.rel_grad_norm(&samples, &x, &x0).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());

        let flat = vec![sample(&[0.0, 0.0], 0.0)];
        assert!(matches!(
            m.rel_grad_norm(&flat, &x, &x0),
            Err(Error::ZeroInitialGradient)
        ));
    }

    #[test]
    fn negative_lambda_is_rejected() {
        assert!(LossModel::new(LossKind::Ridge, -1.0).is_err());
        assert!(LossModel::new(LossKind::Ridge, f64::NAN).is_err());
    }
}
