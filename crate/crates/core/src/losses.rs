//! Smooth convex losses with exact gradients.
//!
//! Both losses sum over samples and tasks, so the regularization weight has
//! the same meaning regardless of which one is used. There is no intercept;
//! append a constant feature column if one is needed.

use ndarray::{Array1, Array2, Zip};

use crate::dataset::TaskDataset;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::weights::WeightMatrix;

/// A smooth convex loss over a multi-task dataset.
pub trait LossFunction<T: Real>: Send + Sync {
    /// Loss-specific checks on the dataset (label domain etc.).
    fn check_dataset(&self, _data: &TaskDataset<T>) -> Result<()> {
        Ok(())
    }

    /// Value and gradient. Shapes are assumed to match; use
    /// [`LossFunction::evaluate`] for a checked call.
    fn value_and_gradient(&self, w: &WeightMatrix<T>, data: &TaskDataset<T>) -> (T, WeightMatrix<T>);

    fn value(&self, w: &WeightMatrix<T>, data: &TaskDataset<T>) -> T {
        self.value_and_gradient(w, data).0
    }

    fn evaluate(&self, w: &WeightMatrix<T>, data: &TaskDataset<T>) -> Result<(T, WeightMatrix<T>)> {
        check_shape(w, data)?;
        self.check_dataset(data)?;
        Ok(self.value_and_gradient(w, data))
    }
}

pub(crate) fn check_shape<T: Real>(w: &WeightMatrix<T>, data: &TaskDataset<T>) -> Result<()> {
    if w.num_features() != data.num_features() || w.num_tasks() != data.num_tasks() {
        return Err(Error::InvalidInput(format!(
            "weight matrix is {}x{}, dataset has {} features and {} tasks",
            w.num_features(),
            w.num_tasks(),
            data.num_features(),
            data.num_tasks()
        )));
    }
    Ok(())
}

/// `½ Σ_j ‖y_j − A_j w_j‖²`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LeastSquares;

impl<T: Real> LossFunction<T> for LeastSquares {
    fn value_and_gradient(&self, w: &WeightMatrix<T>, data: &TaskDataset<T>) -> (T, WeightMatrix<T>) {
        let mut grad = Array2::zeros((w.num_features(), w.num_tasks()));
        let mut value = T::zero();
        for (j, task) in data.tasks().iter().enumerate() {
            let residual = task.design.dot(&w.column(j)) - &task.targets;
            value += residual.dot(&residual);
            grad.column_mut(j).assign(&task.design.t().dot(&residual));
        }
        (T::lit(0.5) * value, WeightMatrix::from_array_unchecked(grad))
    }

    fn value(&self, w: &WeightMatrix<T>, data: &TaskDataset<T>) -> T {
        let value: T = data
            .tasks()
            .iter()
            .enumerate()
            .map(|(j, task)| {
                let r = task.design.dot(&w.column(j)) - &task.targets;
                r.dot(&r)
            })
            .sum();
        T::lit(0.5) * value
    }
}

/// Binary logistic loss with labels in `{−1, +1}`:
/// `Σ_j Σ_i log(1 + exp(−y_i^j · w_jᵀ a_i^j))`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Logistic;

/// `log(1 + exp(x))` without overflow.
fn softplus<T: Real>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

impl<T: Real> LossFunction<T> for Logistic {
    fn check_dataset(&self, data: &TaskDataset<T>) -> Result<()> {
        for (j, task) in data.tasks().iter().enumerate() {
            if let Some(bad) = task.targets.iter().find(|&&y| y != T::one() && y != -T::one()) {
                return Err(Error::InvalidInput(format!(
                    "logistic loss needs labels in {{-1, +1}}, task {} has {bad}",
                    j + 1
                )));
            }
        }
        Ok(())
    }

    fn value_and_gradient(&self, w: &WeightMatrix<T>, data: &TaskDataset<T>) -> (T, WeightMatrix<T>) {
        let mut grad = Array2::zeros((w.num_features(), w.num_tasks()));
        let mut value = T::zero();
        for (j, task) in data.tasks().iter().enumerate() {
            let scores = task.design.dot(&w.column(j));
            let mut coef = Array1::zeros(scores.len());
            Zip::from(&mut coef).and(&scores).and(&task.targets).for_each(|c, &s, &y| {
                let margin = y * s;
                value += softplus(-margin);
                *c = -y * sigmoid(-margin);
            });
            grad.column_mut(j).assign(&task.design.t().dot(&coef));
        }
        (value, WeightMatrix::from_array_unchecked(grad))
    }
}

/// Checked least-squares evaluation.
pub fn least_squares<T: Real>(w: &WeightMatrix<T>, data: &TaskDataset<T>) -> Result<(T, WeightMatrix<T>)> {
    LeastSquares.evaluate(w, data)
}

/// Checked logistic evaluation.
pub fn logistic<T: Real>(w: &WeightMatrix<T>, data: &TaskDataset<T>) -> Result<(T, WeightMatrix<T>)> {
    Logistic.evaluate(w, data)
}
