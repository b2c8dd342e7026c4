//! ℓ2,1-norm regularized multi-task feature learning.
//!
//! Solves `min_W loss(W) + ρ‖W‖₂,₁` through two equivalent smooth
//! constrained reformulations, both handled by an accelerated projected
//! gradient method with a doubling line search:
//!
//! * [`mtfl::build_amtfl1`]: auxiliary row bounds `t` and the cone
//!   constraint `‖w^i‖ ≤ t_i`, projected in closed form
//!   ([`projections::project_onto_d`]);
//! * [`mtfl::build_amtfl2`]: the ball `‖W‖₂,₁ ≤ z`, projected by group
//!   soft-thresholding at the root of a piecewise-linear dual function
//!   ([`projections::project_onto_z`]).
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*F64`
//! aliases below fix the scalar to `f64`, which is what the tolerances in
//! this crate are tuned for.
//!
//! ```
//! use mtfl_core::{
//!     build_amtfl1, generate_synthetic, nesterov_solve, Amtfl1Spec, LeastSquares, SolverConfigF64,
//!     SyntheticSpec,
//! };
//!
//! let data = generate_synthetic::<f64>(&SyntheticSpec {
//!     features: 8, tasks: 3, samples_per_task: 20, sparsity: 0.5, noise_sigma: 0.1, seed: 1,
//! })
//! .unwrap();
//! let problem = build_amtfl1(Amtfl1Spec { loss: &LeastSquares, dataset: &data.dataset, rho: 5.0 }).unwrap();
//! let result = nesterov_solve(&problem, &problem.origin(), &SolverConfigF64::default()).unwrap();
//! assert!(result.solution.is_feasible(1e-12));
//! ```

pub mod dataset;
pub mod error;
pub mod losses;
pub mod mtfl;
pub mod projections;
pub mod scalar;
pub mod solver;
pub mod synthetic;
pub mod weights;

pub use dataset::{validate_dataset, Task, TaskDataset};
pub use error::{Error, Result};
pub use losses::{least_squares, logistic, LeastSquares, Logistic, LossFunction};
pub use mtfl::{
    build_amtfl1, build_amtfl2, rho_max, rho_to_z, solve_path, Amtfl1Problem, Amtfl1Spec, Amtfl2Problem, Amtfl2Spec,
    PathPoint, PathResult, Reformulation, StartMode,
};
pub use projections::{
    find_dual_lambda, find_dual_lambda_bisection, find_dual_lambda_sorted, omega, project_onto_d, project_onto_z,
    shrink_rows, DualRoot, L21Ball,
};
pub use scalar::Real;
pub use solver::{
    line_search, model_value, nesterov_solve, projected_gradient_solve, ClosureProblem, ConstrainedProblem,
    IterationRecord, LineSearchStep, Point, SolveResult, SolverConfig,
};
pub use synthetic::{generate_synthetic, SyntheticData, SyntheticSpec};
pub use weights::{l21_norm, row_norms, selected_rows, AugmentedPoint, WeightMatrix};

pub type TaskF64 = Task<f64>;
pub type TaskDatasetF64 = TaskDataset<f64>;
pub type WeightMatrixF64 = WeightMatrix<f64>;
pub type AugmentedPointF64 = AugmentedPoint<f64>;
pub type L21BallF64 = L21Ball<f64>;
pub type DualRootF64 = DualRoot<f64>;
pub type SolverConfigF64 = SolverConfig<f64>;
pub type IterationRecordF64 = IterationRecord<f64>;
pub type PathResultF64 = PathResult<f64>;

pub type TaskDatasetF32 = TaskDataset<f32>;
pub type WeightMatrixF32 = WeightMatrix<f32>;
pub type AugmentedPointF32 = AugmentedPoint<f32>;
pub type SolverConfigF32 = SolverConfig<f32>;
