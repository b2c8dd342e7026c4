//! Weight matrices and the ℓ2,1-norm.
//!
//! A weight matrix is `n × k`: row `i` collects the weights of feature `i`
//! across all tasks, column `j` is the linear predictor of task `j`. The
//! ℓ2,1-norm sums the Euclidean norms of the rows, so shrinking it drives
//! entire rows (features) to zero for every task at once.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense `n × k` weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix<T> {
    entries: Array2<T>,
}

impl<T: Real> WeightMatrix<T> {
    /// Wraps `entries`, rejecting non-finite values.
    pub fn new(entries: Array2<T>) -> Result<Self> {
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("weight matrix".into()));
        }
        Ok(Self { entries })
    }

    pub fn zeros(features: usize, tasks: usize) -> Self {
        Self { entries: Array2::zeros((features, tasks)) }
    }

    pub(crate) fn from_array_unchecked(entries: Array2<T>) -> Self {
        Self { entries }
    }

    pub fn num_features(&self) -> usize {
        self.entries.nrows()
    }

    pub fn num_tasks(&self) -> usize {
        self.entries.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, T> {
        self.entries.view()
    }

    pub fn as_array(&self) -> &Array2<T> {
        &self.entries
    }

    pub(crate) fn as_array_mut(&mut self) -> &mut Array2<T> {
        &mut self.entries
    }

    pub fn into_array(self) -> Array2<T> {
        self.entries
    }

    /// Weights of feature `i` across tasks (`w^i`).
    pub fn row(&self, i: usize) -> ArrayView1<'_, T> {
        self.entries.row(i)
    }

    /// Predictor of task `j` (`w_j`).
    pub fn column(&self, j: usize) -> ArrayView1<'_, T> {
        self.entries.column(j)
    }

    pub fn row_norms(&self) -> Array1<T> {
        row_norms_unchecked(self.view())
    }

    pub fn l21_norm(&self) -> T {
        self.row_norms().sum()
    }

    /// Number of rows whose norm exceeds `1e-8 · max_row_norm`.
    pub fn selected_rows(&self) -> usize {
        selected_rows(&self.row_norms())
    }
}

/// The variable of the cone-constrained reformulation: per-row upper bounds
/// `t` paired with a weight matrix. Only projection outputs are guaranteed to
/// satisfy `‖w^i‖ ≤ t_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPoint<T> {
    pub t: Array1<T>,
    pub w: WeightMatrix<T>,
}

impl<T: Real> AugmentedPoint<T> {
    pub fn new(t: Array1<T>, w: WeightMatrix<T>) -> Result<Self> {
        if t.len() != w.num_features() {
            return Err(Error::InvalidInput(format!(
                "bound vector has length {}, weight matrix has {} rows",
                t.len(),
                w.num_features()
            )));
        }
        Ok(Self { t, w })
    }

    pub fn zeros(features: usize, tasks: usize) -> Self {
        Self { t: Array1::zeros(features), w: WeightMatrix::zeros(features, tasks) }
    }

    /// Whether `‖w^i‖ ≤ t_i (1 + slack) + slack` holds for every row.
    pub fn is_feasible(&self, slack: T) -> bool {
        self.w.row_norms().iter().zip(self.t.iter()).all(|(&r, &t)| r <= t + slack * (T::one() + t.abs()))
    }
}

fn check_finite<T: Real>(w: &ArrayView2<'_, T>) -> Result<()> {
    if w.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("weight matrix".into()));
    }
    Ok(())
}

pub(crate) fn row_norms_unchecked<T: Real>(w: ArrayView2<'_, T>) -> Array1<T> {
    w.map_axis(Axis(1), |row| row.iter().map(|&x| x * x).sum::<T>().sqrt())
}

/// Euclidean norm of every row.
pub fn row_norms<T: Real>(w: ArrayView2<'_, T>) -> Result<Array1<T>> {
    check_finite(&w)?;
    Ok(row_norms_unchecked(w))
}

/// `‖W‖₂,₁ = Σ_i ‖w^i‖`.
pub fn l21_norm<T: Real>(w: ArrayView2<'_, T>) -> Result<T> {
    Ok(row_norms(w)?.sum())
}

/// Counts rows treated as selected features: norm above `1e-8` times the
/// largest row norm. An all-zero matrix selects nothing.
pub fn selected_rows<T: Real>(norms: &Array1<T>) -> usize {
    let max = norms.iter().copied().fold(T::zero(), T::max);
    if max == T::zero() {
        return 0;
    }
    let cut = T::lit(1e-8) * max;
    norms.iter().filter(|&&r| r > cut).count()
}
