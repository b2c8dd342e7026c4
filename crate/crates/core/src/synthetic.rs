//! Seeded synthetic multi-task regression data with a shared row-sparsity
//! pattern.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{Task, TaskDataset};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::weights::WeightMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub features: usize,
    pub tasks: usize,
    pub samples_per_task: usize,
    /// Fraction of feature rows that are zero in the ground truth.
    pub sparsity: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SyntheticData<T> {
    pub dataset: TaskDataset<T>,
    pub truth: WeightMatrix<T>,
}

/// Draws `A_j` and nonzero rows of the ground truth from `N(0, 1)`, zeroes
/// `⌈sparsity · n⌉` randomly chosen rows for every task, and sets
/// `y_j = A_j w_j + σ ε`. Identical specs give bitwise-identical output.
pub fn generate_synthetic<T: Real>(spec: &SyntheticSpec) -> Result<SyntheticData<T>> {
    if spec.features == 0 || spec.tasks == 0 || spec.samples_per_task == 0 {
        return Err(Error::InvalidInput("features, tasks and samples per task must be positive".into()));
    }
    if !(0.0..=1.0).contains(&spec.sparsity) {
        return Err(Error::InvalidInput(format!("sparsity must lie in [0, 1], got {}", spec.sparsity)));
    }
    if !(spec.noise_sigma.is_finite() && spec.noise_sigma >= 0.0) {
        return Err(Error::InvalidInput(format!("noise sigma must be nonnegative, got {}", spec.noise_sigma)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut normal = || -> T { T::lit(StandardNormal.sample(&mut rng)) };

    let (n, k, m) = (spec.features, spec.tasks, spec.samples_per_task);
    let mut truth = Array2::from_shape_simple_fn((n, k), &mut normal);
    let zero_rows = ((spec.sparsity * n as f64).ceil() as usize).min(n);
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut rng);
    for &i in &rows[..zero_rows] {
        truth.row_mut(i).fill(T::zero());
    }

    let sigma = T::lit(spec.noise_sigma);
    let mut normal = || -> T { T::lit(StandardNormal.sample(&mut rng)) };
    let tasks = (0..k)
        .map(|j| {
            let design = Array2::from_shape_simple_fn((m, n), &mut normal);
            let noise = Array1::from_shape_simple_fn(m, &mut normal);
            let targets = design.dot(&truth.column(j)) + noise * sigma;
            Task::new(design, targets)
        })
        .collect();
    Ok(SyntheticData { dataset: TaskDataset::new(tasks)?, truth: WeightMatrix::new(truth)? })
}
