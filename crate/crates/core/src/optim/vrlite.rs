//! Epoch-average variance reduction.
//!
//! Each step corrects the fresh stochastic gradient with the same sample's
//! gradient at the previous epoch's average iterate, plus the previous
//! epoch's average gradient:
//!
//! ```text
//! x <- x - eta * (grad f_i(x) - grad f_i(x_bar) + g_bar)
//! ```
//!
//! `x_bar` and `g_bar` are running means accumulated on the fly during the
//! previous epoch, so no snapshot full gradient and no per-sample gradient
//! table is ever needed. The very first averages come from one plain SGD
//! epoch started at zero.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Dataset, LabeledSample, LossModel};
use crate::optim::sampler::permutation;
use crate::vector::DenseVector;

/// Where the gradient added to the epoch accumulator is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GradientPoint {
    /// Re-evaluate `grad f_i` at the iterate produced by the step (three
    /// gradient evaluations per step).
    #[default]
    PostUpdate,
    /// Reuse `grad f_i(x)` from the step itself (two evaluations per step).
    PreUpdate,
}

impl GradientPoint {
    /// Sample-gradient evaluations per VR-lite step.
    pub fn vrlite_evals(self) -> u64 {
        match self {
            GradientPoint::PostUpdate => 3,
            GradientPoint::PreUpdate => 2,
        }
    }

    /// Sample-gradient evaluations per plain SGD step.
    pub fn sgd_evals(self) -> u64 {
        match self {
            GradientPoint::PostUpdate => 2,
            GradientPoint::PreUpdate => 1,
        }
    }
}

/// Averages `(x_bar, g_bar)` from the last closed epoch together with the
/// accumulators for the epoch in progress.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochAverages {
    pub x_bar: DenseVector,
    pub g_bar: DenseVector,
    acc_x: DenseVector,
    acc_g: DenseVector,
    steps: usize,
}

impl EpochAverages {
    pub fn zeros(dim: usize) -> Self {
        EpochAverages {
            x_bar: DenseVector::zeros(dim),
            g_bar: DenseVector::zeros(dim),
            acc_x: DenseVector::zeros(dim),
            acc_g: DenseVector::zeros(dim),
            steps: 0,
        }
    }

    /// Averages with the given `(x_bar, g_bar)` and empty accumulators.
    pub fn with_averages(x_bar: DenseVector, g_bar: DenseVector) -> Self {
        let dim = x_bar.dim();
        EpochAverages {
            x_bar,
            g_bar,
            acc_x: DenseVector::zeros(dim),
            acc_g: DenseVector::zeros(dim),
            steps: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.x_bar.dim()
    }

    pub fn steps_accumulated(&self) -> usize {
        self.steps
    }

    pub fn acc_x(&self) -> &DenseVector {
        &self.acc_x
    }

    pub fn acc_g(&self) -> &DenseVector {
        &self.acc_g
    }

    pub fn begin_epoch(&mut self) {
        self.acc_x.fill_zero();
        self.acc_g.fill_zero();
        self.steps = 0;
    }

    pub fn accumulate(&mut self, x: &[f64], g: &[f64]) {
        self.acc_x.add_assign(x);
        self.acc_g.add_assign(g);
        self.steps += 1;
    }

    /// Replaces `(x_bar, g_bar)` with the accumulator means. The accumulators
    /// and step count are left intact for inspection until the next
    /// [`begin_epoch`](Self::begin_epoch).
    pub fn close_epoch(&mut self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::invalid("closing an epoch with no steps"));
        }
        let n = self.steps as f64;
        for (bar, acc) in self.x_bar.iter_mut().zip(self.acc_x.iter()) {
            *bar = acc / n;
        }
        for (bar, acc) in self.g_bar.iter_mut().zip(self.acc_g.iter()) {
            *bar = acc / n;
        }
        Ok(())
    }
}

/// Optimizer state shared by VR-lite and the instrumented plain SGD.
#[derive(Debug, Clone, PartialEq)]
pub struct OptState {
    pub x: DenseVector,
    pub averages: EpochAverages,
    pub epoch_index: usize,
    pub grad_point: GradientPoint,
}

impl OptState {
    /// Zero iterate, zero averages, no epochs run.
    pub fn zeros(dim: usize, grad_point: GradientPoint) -> Self {
        OptState {
            x: DenseVector::zeros(dim),
            averages: EpochAverages::zeros(dim),
            epoch_index: 0,
            grad_point,
        }
    }
}

/// What a step observer sees after each update: the sample index and the
/// post-update iterate.
pub type StepObserver<'a> = dyn FnMut(usize, &[f64]) + 'a;

fn check_eta(eta: f64) -> Result<()> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!(
            "stepsize must be finite and >= 0, got {eta}"
        )));
    }
    Ok(())
}

/// `x - eta * (grad_x - grad_ref + g_bar)`.
pub fn corrected_step(
    x: &DenseVector,
    grad_x: &[f64],
    grad_ref: &[f64],
    g_bar: &[f64],
    eta: f64,
) -> DenseVector {
    let mut out = x.clone();
    for (((xi, gx), gr), gb) in out.iter_mut().zip(grad_x).zip(grad_ref).zip(g_bar) {
        *xi -= eta * (gx - gr + gb);
    }
    out
}

/// One VR-lite update at `x` for a single sample.
pub fn vrlite_step(
    model: &LossModel,
    x: &DenseVector,
    sample: &LabeledSample,
    averages: &EpochAverages,
    eta: f64,
) -> Result<DenseVector> {
    let grad_x = model.grad_sample(sample, x)?;
    let grad_ref = model.grad_sample(sample, &averages.x_bar)?;
    Ok(corrected_step(x, &grad_x, &grad_ref, &averages.g_bar, eta))
}

/// Runs VR-lite steps over `samples` in `order`, accumulating into
/// `averages` and closing the epoch at the end. Shared by the sequential
/// optimizer and the distributed workers.
#[allow(clippy::too_many_arguments)]
pub(crate) fn vrlite_pass(
    model: &LossModel,
    samples: &[LabeledSample],
    order: impl Iterator<Item = usize>,
    x: &mut DenseVector,
    averages: &mut EpochAverages,
    eta: f64,
    grad_point: GradientPoint,
    observer: &mut StepObserver<'_>,
) -> Result<()> {
    let d = x.dim();
    let mut g_x = vec![0.0; d];
    let mut g_ref = vec![0.0; d];
    averages.begin_epoch();
    for i in order {
        let s = &samples[i];
        model.grad_into(s, x, &mut g_x);
        model.grad_into(s, &averages.x_bar, &mut g_ref);
        for (((xj, gx), gr), gb) in x.iter_mut().zip(&g_x).zip(&g_ref).zip(averages.g_bar.iter()) {
            *xj -= eta * (gx - gr + gb);
        }
        if grad_point == GradientPoint::PostUpdate {
            model.grad_into(s, x, &mut g_x);
        }
        averages.accumulate(x, &g_x);
        observer(i, x);
    }
    averages.close_epoch()
}

/// Plain SGD steps over `samples` in `order`, with the same accumulator
/// bookkeeping as [`vrlite_pass`].
#[allow(clippy::too_many_arguments)]
pub(crate) fn sgd_pass(
    model: &LossModel,
    samples: &[LabeledSample],
    order: impl Iterator<Item = usize>,
    x: &mut DenseVector,
    averages: &mut EpochAverages,
    eta: f64,
    grad_point: GradientPoint,
    observer: &mut StepObserver<'_>,
) -> Result<()> {
    let mut g = vec![0.0; x.dim()];
    averages.begin_epoch();
    for i in order {
        let s = &samples[i];
        model.grad_into(s, x, &mut g);
        x.axpy(-eta, &g);
        if grad_point == GradientPoint::PostUpdate {
            model.grad_into(s, x, &mut g);
        }
        averages.accumulate(x, &g);
        observer(i, x);
    }
    averages.close_epoch()
}

/// Bootstraps VR-lite: one plain SGD epoch from `x = 0`, whose averages
/// become the first `(x_bar, g_bar)`.
pub fn vrlite_init<R: Rng + ?Sized>(
    model: &LossModel,
    ds: &Dataset,
    eta: f64,
    grad_point: GradientPoint,
    rng: &mut R,
) -> Result<OptState> {
    vrlite_init_observed(model, ds, eta, grad_point, rng, &mut |_, _| {})
}

pub fn vrlite_init_observed<R: Rng + ?Sized>(
    model: &LossModel,
    ds: &Dataset,
    eta: f64,
    grad_point: GradientPoint,
    rng: &mut R,
    observer: &mut StepObserver<'_>,
) -> Result<OptState> {
    check_eta(eta)?;
    let mut state = OptState::zeros(ds.dim(), grad_point);
    let order = permutation(ds.len(), rng)?;
    sgd_pass(
        model,
        ds.samples(),
        order,
        &mut state.x,
        &mut state.averages,
        eta,
        grad_point,
        observer,
    )?;
    state.epoch_index = 1;
    Ok(state)
}

/// One VR-lite epoch over a fresh permutation of the dataset.
pub fn vrlite_epoch<R: Rng + ?Sized>(
    state: &mut OptState,
    model: &LossModel,
    ds: &Dataset,
    eta: f64,
    rng: &mut R,
) -> Result<()> {
    vrlite_epoch_observed(state, model, ds, eta, rng, &mut |_, _| {})
}

pub fn vrlite_epoch_observed<R: Rng + ?Sized>(
    state: &mut OptState,
    model: &LossModel,
    ds: &Dataset,
    eta: f64,
    rng: &mut R,
    observer: &mut StepObserver<'_>,
) -> Result<()> {
    check_eta(eta)?;
    state.x.check_dim(ds.dim())?;
    let order = permutation(ds.len(), rng)?;
    vrlite_pass(
        model,
        ds.samples(),
        order,
        &mut state.x,
        &mut state.averages,
        eta,
        state.grad_point,
        observer,
    )?;
    state.epoch_index += 1;
    Ok(())
}

/// One epoch of constant-stepsize SGD over a fresh permutation.
pub fn sgd_epoch<R: Rng + ?Sized>(
    state: &mut OptState,
    model: &LossModel,
    ds: &Dataset,
    eta: f64,
    rng: &mut R,
) -> Result<()> {
    check_eta(eta)?;
    state.x.check_dim(ds.dim())?;
    let order = permutation(ds.len(), rng)?;
    sgd_pass(
        model,
        ds.samples(),
        order,
        &mut state.x,
        &mut state.averages,
        eta,
        state.grad_point,
        &mut |_, _| {},
    )?;
    state.epoch_index += 1;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LossKind, Task};
    use crate::rng;
    use approx::assert_abs_diff_eq;

    fn small_ridge() -> (LossModel, Dataset) {
        let samples = vec![
            LabeledSample::new(vec![1.0, 0.5], 1.0),
            LabeledSample::new(vec![-0.3, 2.0], -0.5),
            LabeledSample::new(vec![0.7, -1.1], 0.25),
            LabeledSample::new(vec![0.2, 0.4], 2.0),
        ];
        (
            LossModel::ridge(),
            Dataset::new(samples, Task::Regression).unwrap(),
        )
    }

    #[test]
    fn corrected_step_hand_value() {
        let x = DenseVector::zeros(2);
        let out = corrected_step(&x, &[2.0, 0.0], &[1.0, 0.0], &[0.5, 0.5], 0.1);
        assert_abs_diff_eq!(out[0], -0.15, epsilon = 1e-15);
        assert_abs_diff_eq!(out[1], -0.05, epsilon = 1e-15);
    }

    #[test]
    fn step_is_identity_when_correction_cancels() {
        let (model, ds) = small_ridge();
        let x = DenseVector::from_vec(vec![0.3, -0.2]);
        // x_bar == x makes the two sample gradients equal.
        let averages = EpochAverages::with_averages(x.clone(), DenseVector::zeros(2));
        let out = vrlite_step(&model, &x, &ds.samples()[1], &averages, 0.5).unwrap();
        assert_eq!(out, x);
    }

    #[test]
    fn step_with_exact_gradient_matches_svrg_form() {
        let (model, ds) = small_ridge();
        let x = DenseVector::from_vec(vec![0.3, -0.2]);
        let y = DenseVector::from_vec(vec![0.1, 0.1]);
        let full = model.full_gradient(ds.samples(), &y).unwrap();
        let averages = EpochAverages::with_averages(y.clone(), full.clone());
        let s = &ds.samples()[2];
        let out = vrlite_step(&model, &x, s, &averages, 0.05).unwrap();
        let gx = model.grad_sample(s, &x).unwrap();
        let gy = model.grad_sample(s, &y).unwrap();
        let expected = corrected_step(&x, &gx, &gy, &full, 0.05);
        assert_eq!(out, expected);
    }

    #[test]
    fn init_with_zero_eta_averages_gradients_at_origin() {
        let (model, ds) = small_ridge();
        for gp in [GradientPoint::PostUpdate, GradientPoint::PreUpdate] {
            let st = vrlite_init(&model, &ds, 0.0, gp, &mut rng::stream(5, 0)).unwrap();
            assert_eq!(st.x, DenseVector::zeros(2));
            assert_eq!(st.averages.x_bar, DenseVector::zeros(2));
            let full = model.full_gradient(ds.samples(), &st.x).unwrap();
            assert!(st.averages.g_bar.max_abs_diff(&full) <= 1e-12);
            assert_eq!(st.averages.steps_accumulated(), ds.len());
        }
    }

    #[test]
    fn init_single_sample() {
        let model = LossModel::new(LossKind::Ridge, 0.0).unwrap();
        let ds = Dataset::new(vec![LabeledSample::new(vec![1.0, 0.0], 2.0)], Task::Regression).unwrap();
        let st = vrlite_init(
            &model,
            &ds,
            0.25,
            GradientPoint::PostUpdate,
            &mut rng::stream(0, 0),
        )
        .unwrap();
        assert_eq!(st.x.as_slice(), &[1.0, 0.0]);
        assert_eq!(st.averages.x_bar, st.x);
        let g = model.grad_sample(&ds.samples()[0], &st.x).unwrap();
        assert_eq!(st.averages.g_bar, g);
    }

    #[test]
    fn init_is_deterministic() {
        let (model, ds) = small_ridge();
        let a = vrlite_init(
            &model,
            &ds,
            0.1,
            GradientPoint::PostUpdate,
            &mut rng::stream(9, 0),
        );
        let b = vrlite_init(
            &model,
            &ds,
            0.1,
            GradientPoint::PostUpdate,
            &mut rng::stream(9, 0),
        );
        assert_eq!(a.unwrap(), b.unwrap());
    }

    #[test]
    fn zero_eta_epoch_keeps_x_and_resets_averages_to_it() {
        let (model, ds) = small_ridge();
        let mut rng = rng::stream(2, 0);
        let mut st = vrlite_init(&model, &ds, 0.1, GradientPoint::PostUpdate, &mut rng).unwrap();
        let before = st.x.clone();
        vrlite_epoch(&mut st, &model, &ds, 0.0, &mut rng).unwrap();
        assert_eq!(st.x, before);
        assert!(st.averages.x_bar.max_abs_diff(&before) <= 1e-12);
        let full = model.full_gradient(ds.samples(), &before).unwrap();
        assert!(st.averages.g_bar.max_abs_diff(&full) <= 1e-12);
        assert_eq!(st.epoch_index, 2);
    }

    #[test]
    fn sgd_single_sample_hand_value() {
        let model = LossModel::new(LossKind::Ridge, 0.0).unwrap();
        let ds = Dataset::new(vec![LabeledSample::new(vec![1.0, 0.0], 2.0)], Task::Regression).unwrap();
        let mut st = OptState::zeros(2, GradientPoint::PreUpdate);
        sgd_epoch(&mut st, &model, &ds, 0.25, &mut rng::stream(0, 0)).unwrap();
        assert_eq!(st.x.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn zero_eta_sgd_is_identity() {
        let (model, ds) = small_ridge();
        let mut st = OptState::zeros(2, GradientPoint::PostUpdate);
        st.x = DenseVector::from_vec(vec![0.4, 0.4]);
        sgd_epoch(&mut st, &model, &ds, 0.0, &mut rng::stream(0, 0)).unwrap();
        assert_eq!(st.x.as_slice(), &[0.4, 0.4]);
    }

    #[test]
    fn negative_eta_rejected() {
        let (model, ds) = small_ridge();
        assert!(vrlite_init(
            &model,
            &ds,
            -0.1,
            GradientPoint::PostUpdate,
            &mut rng::stream(0, 0)
        )
        .is_err());
    }

    #[test]
    fn close_without_steps_is_an_error() {
        let mut avg = EpochAverages::zeros(3);
        assert!(avg.close_epoch().is_err());
    }
}
