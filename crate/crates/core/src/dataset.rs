//! Per-task training data.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Design matrix and targets for a single task.
#[derive(Debug, Clone, PartialEq)]
pub struct Task<T> {
    /// `m_j × n` design matrix, one sample per row.
    pub design: Array2<T>,
    /// Targets, one per row of `design`.
    pub targets: Array1<T>,
}

impl<T: Real> Task<T> {
    pub fn new(design: Array2<T>, targets: Array1<T>) -> Self {
        Self { design, targets }
    }

    pub fn samples(&self) -> usize {
        self.design.nrows()
    }
}

/// A collection of `k` tasks sharing the same `n` features.
///
/// Construct with [`TaskDataset::new`], which runs [`validate_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDataset<T> {
    tasks: Vec<Task<T>>,
}

impl<T: Real> TaskDataset<T> {
    pub fn new(tasks: Vec<Task<T>>) -> Result<Self> {
        let d = Self { tasks };
        validate_dataset(&d)?;
        Ok(d)
    }

    /// Skips validation. Callers that later hand the dataset to a solver
    /// should run [`validate_dataset`] themselves.
    pub fn new_unchecked(tasks: Vec<Task<T>>) -> Self {
        Self { tasks }
    }

    pub fn tasks(&self) -> &[Task<T>] {
        &self.tasks
    }

    pub fn task(&self, j: usize) -> &Task<T> {
        &self.tasks[j]
    }

    /// Number of tasks `k`.
    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    /// Number of shared features `n`.
    pub fn num_features(&self) -> usize {
        self.tasks.first().map_or(0, |t| t.design.ncols())
    }

    /// Total sample count `m = Σ m_j`.
    pub fn num_samples(&self) -> usize {
        self.tasks.iter().map(Task::samples).sum()
    }

    pub fn into_tasks(self) -> Vec<Task<T>> {
        self.tasks
    }
}

/// Checks every structural invariant of a dataset: at least one task, every
/// task non-empty, consistent feature count, targets matching rows, finite
/// entries.
pub fn validate_dataset<T: Real>(d: &TaskDataset<T>) -> Result<()> {
    let first = d.tasks.first().ok_or_else(|| Error::InvalidInput("dataset has no tasks".into()))?;
    let n = first.design.ncols();
    if n == 0 {
        return Err(Error::InvalidInput("dataset has no features".into()));
    }
    for (j, task) in d.tasks.iter().enumerate() {
        let id = j + 1;
        let (rows, cols) = task.design.dim();
        if cols != n {
            return Err(Error::DimensionMismatch {
                task: id,
                detail: format!("design has {cols} columns, expected {n}"),
            });
        }
        if rows == 0 {
            return Err(Error::EmptyTask { task: id });
        }
        if task.targets.len() != rows {
            return Err(Error::DimensionMismatch {
                task: id,
                detail: format!("{} targets for {rows} design rows", task.targets.len()),
            });
        }
        if task.design.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("design matrix of task {id}")));
        }
        if task.targets.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("targets of task {id}")));
        }
    }
    Ok(())
}
