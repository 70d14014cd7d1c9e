//! SVRG baseline: exact gradient at a snapshot, then uniformly sampled
//! corrected steps. The epoch returns the last inner iterate.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Dataset, LossModel};
use crate::vector::DenseVector;

/// A snapshot point together with the exact full gradient there.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub y: DenseVector,
    pub grad: DenseVector,
}

impl Snapshot {
    pub fn take(model: &LossModel, ds: &Dataset, y: &DenseVector) -> Result<Self> {
        Ok(Snapshot {
            y: y.clone(),
            grad: model.full_gradient(ds.samples(), y)?,
        })
    }
}

/// Default inner loop length, twice the number of samples.
pub fn default_inner_steps(n: usize) -> usize {
    2 * n
}

/// `inner_steps` corrected updates starting from `x`, with indices drawn
/// uniformly with replacement.
pub fn svrg_inner<R: Rng + ?Sized>(
    x: &DenseVector,
    snapshot: &Snapshot,
    model: &LossModel,
    ds: &Dataset,
    eta: f64,
    inner_steps: usize,
    rng: &mut R,
) -> Result<DenseVector> {
    if !(eta >= 0.0 && eta.is_finite()) {
        return Err(Error::invalid(format!(
            "stepsize must be finite and >= 0, got {eta}"
        )));
    }
    x.check_dim(ds.dim())?;
    let d = x.dim();
    let n = ds.len();
    let mut x = x.clone();
    let mut g_x = vec![0.0; d];
    let mut g_y = vec![0.0; d];
    for _ in 0..inner_steps {
        let s = &ds.samples()[rng.random_range(0..n)];
        model.grad_into(s, &x, &mut g_x);
        model.grad_into(s, &snapshot.y, &mut g_y);
        for (((xj, gx), gy), gt) in x.iter_mut().zip(&g_x).zip(&g_y).zip(snapshot.grad.iter()) {
            *xj -= eta * (gx - gy + gt);
        }
    }
    Ok(x)
}

/// Snapshot at `x`, then `inner_steps` corrected updates.
pub fn svrg_epoch<R: Rng + ?Sized>(
    x: &DenseVector,
    model: &LossModel,
    ds: &Dataset,
    eta: f64,
    inner_steps: usize,
    rng: &mut R,
) -> Result<DenseVector> {
    let snapshot = Snapshot::take(model, ds, x)?;
    svrg_inner(x, &snapshot, model, ds, eta, inner_steps, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LabeledSample, Task};
    use crate::rng;

    fn ds() -> Dataset {
        Dataset::new(
            vec![
                LabeledSample::new(vec![1.0, 0.5], 1.0),
                LabeledSample::new(vec![-0.3, 2.0], -0.5),
                LabeledSample::new(vec![0.7, -1.1], 0.25),
            ],
            Task::Regression,
        )
        .unwrap()
    }

    #[test]
    fn zero_eta_is_identity() {
        let x = DenseVector::from_vec(vec![0.3, 0.7]);
        let out = svrg_epoch(&x, &LossModel::ridge(), &ds(), 0.0, 6, &mut rng::stream(1, 0));
        assert_eq!(out.unwrap(), x);
    }

    #[test]
    fn snapshot_gradient_is_the_full_gradient_bitwise() {
        let model = LossModel::ridge();
        let ds = ds();
        let y = DenseVector::from_vec(vec![0.3, 0.7]);
        let snap = Snapshot::take(&model, &ds, &y).unwrap();
        let full = model.full_gradient(ds.samples(), &y).unwrap();
        for (a, b) in snap.grad.iter().zip(full.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // Averaging the correction over all samples at the snapshot leaves
        // exactly the stored gradient.
        let mut mean = DenseVector::zeros(2);
        for s in ds.samples() {
            let gy = model.grad_sample(s, &y).unwrap();
            let corr = gy.sub(&gy);
            mean.add_assign(&corr);
        }
        mean.scale(1.0 / ds.len() as f64);
        mean.add_assign(&snap.grad);
        assert_eq!(mean, full);
    }

    #[test]
    fn default_inner_length_is_two_passes() {
        assert_eq!(default_inner_steps(5000), 10_000);
    }
}
