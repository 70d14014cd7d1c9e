//! SAGA baseline: a table of the most recent gradient of every sample and
//! the running mean of that table.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Dataset, LossModel};
use crate::optim::sampler::permutation;
use crate::vector::DenseVector;

#[derive(Debug, Clone, PartialEq)]
pub struct SagaState {
    grad_table: Vec<DenseVector>,
    table_mean: DenseVector,
}

impl SagaState {
    /// Fills the table with every sample's gradient at `x0`.
    pub fn new(model: &LossModel, ds: &Dataset, x0: &DenseVector) -> Result<Self> {
        x0.check_dim(ds.dim())?;
        let grad_table = ds
            .samples()
            .iter()
            .map(|s| model.grad_sample(s, x0))
            .collect::<Result<Vec<_>>>()?;
        let table_mean = mean_of(&grad_table);
        Ok(SagaState {
            grad_table,
            table_mean,
        })
    }

    /// Builds a state from an explicit table.
    pub fn from_table(grad_table: Vec<DenseVector>) -> Result<Self> {
        if grad_table.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let table_mean = mean_of(&grad_table);
        Ok(SagaState {
            grad_table,
            table_mean,
        })
    }

    pub fn grad_table(&self) -> &[DenseVector] {
        &self.grad_table
    }

    pub fn table_mean(&self) -> &DenseVector {
        &self.table_mean
    }

    /// Mean of the table recomputed from scratch.
    pub fn recomputed_mean(&self) -> DenseVector {
        mean_of(&self.grad_table)
    }
}

fn mean_of(table: &[DenseVector]) -> DenseVector {
    let mut mean = DenseVector::zeros(table[0].dim());
    for g in table {
        mean.add_assign(g);
    }
    mean.scale(1.0 / table.len() as f64);
    mean
}

/// One SAGA update on sample `i`. The table entry is replaced by the
/// gradient at the pre-update `x`, i.e. the one used in the step.
pub fn saga_step(
    x: &mut DenseVector,
    i: usize,
    model: &LossModel,
    ds: &Dataset,
    st: &mut SagaState,
    eta: f64,
) -> Result<()> {
    let n = ds.len();
    if i >= n || i >= st.grad_table.len() {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    x.check_dim(ds.dim())?;
    let mut fresh = DenseVector::zeros(x.dim());
    model.grad_into(&ds.samples()[i], x, &mut fresh);
    saga_apply(x, i, fresh, st, eta);
    Ok(())
}

fn saga_apply(x: &mut DenseVector, i: usize, fresh: DenseVector, st: &mut SagaState, eta: f64) {
    let n = st.grad_table.len() as f64;
    let old = &st.grad_table[i];
    for (((xj, g), o), m) in x
        .iter_mut()
        .zip(fresh.iter())
        .zip(old.iter())
        .zip(st.table_mean.iter())
    {
        *xj -= eta * (g - o + m);
    }
    for ((m, g), o) in st.table_mean.iter_mut().zip(fresh.iter()).zip(old.iter()) {
        *m += (g - o) / n;
    }
    st.grad_table[i] = fresh;
}

/// `n` SAGA steps over a fresh permutation.
pub fn saga_epoch<R: Rng + ?Sized>(
    x: &mut DenseVector,
    model: &LossModel,
    ds: &Dataset,
    st: &mut SagaState,
    eta: f64,
    rng: &mut R,
) -> Result<()> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!(
            "stepsize must be finite and >= 0, got {eta}"
        )));
    }
    for i in permutation(ds.len(), rng)? {
        saga_step(x, i, model, ds, st, eta)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LabeledSample, Task};
    use crate::rng;
    use rand::Rng;

    fn ds(n: usize) -> Dataset {
        let mut rng = rng::stream(42, 0);
        let samples = (0..n)
            .map(|_| {
                let a: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                LabeledSample::new(a, rng.random_range(-1.0..1.0))
            })
            .collect();
        Dataset::new(samples, Task::Regression).unwrap()
    }

    #[test]
    fn unchanged_when_table_matches_and_mean_is_zero() {
        let model = LossModel::ridge();
        let ds = ds(4);
        let mut x = DenseVector::from_vec(vec![0.1, 0.2, 0.3]);
        let table: Vec<DenseVector> = ds
            .samples()
            .iter()
            .map(|s| model.grad_sample(s, &x).unwrap())
            .collect();
        let mut st = SagaState::from_table(table).unwrap();
        st.table_mean = DenseVector::zeros(3);
        let before = x.clone();
        saga_step(&mut x, 0, &model, &ds, &mut st, 0.3).unwrap();
        assert_eq!(x, before);
    }

    #[test]
    fn single_sample_is_gradient_descent() {
        let model = LossModel::ridge();
        let ds = ds(1);
        let x0 = DenseVector::from_vec(vec![0.5, -0.5, 1.0]);
        let mut st = SagaState::new(&model, &ds, &x0).unwrap();
        let mut x = x0.clone();
        saga_step(&mut x, 0, &model, &ds, &mut st, 0.1).unwrap();
        let g = model.grad_sample(&ds.samples()[0], &x0).unwrap();
        let mut expected = x0.clone();
        expected.axpy(-0.1, &g);
        assert!(x.max_abs_diff(&expected) <= 1e-15);
    }

    #[test]
    fn out_of_range_index_rejected() {
        let model = LossModel::ridge();
        let ds = ds(3);
        let mut x = DenseVector::zeros(3);
        let mut st = SagaState::new(&model, &ds, &x).unwrap();
        assert!(matches!(
            saga_step(&mut x, 3, &model, &ds, &mut st, 0.1),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn incremental_mean_tracks_recomputation() {
        let model = LossModel::ridge();
        let ds = ds(50);
        let mut x = DenseVector::zeros(3);
        let mut st = SagaState::new(&model, &ds, &x).unwrap();
        let mut rng = rng::stream(7, 0);
        for _ in 0..10_000 {
            let i = rng.random_range(0..ds.len());
            saga_step(&mut x, i, &model, &ds, &mut st, 0.05).unwrap();
        }
        assert!(st.table_mean().max_abs_diff(&st.recomputed_mean()) <= 1e-12);
    }

    #[test]
    fn zero_eta_epoch_is_identity() {
        let model = LossModel::ridge();
        let ds = ds(5);
        let x0 = DenseVector::from_vec(vec![1.0, 2.0, 3.0]);
        let mut st = SagaState::new(&model, &ds, &DenseVector::zeros(3)).unwrap();
        let mut x = x0.clone();
        saga_epoch(&mut x, &model, &ds, &mut st, 0.0, &mut rng::stream(0, 0)).unwrap();
        assert_eq!(x, x0);
    }
}
