//! The two smooth reformulations of ℓ2,1-regularized multi-task learning
//! and regularization paths over them.
//!
//! `min_W loss(W) + ρ‖W‖₂,₁` is solved either as
//!
//! * **aMTFL₁**: `min loss(W) + ρ Σ_i t_i` over `(t, W)` with `‖w^i‖ ≤ t_i`, or
//! * **aMTFL₂**: `min loss(W)` over `‖W‖₂,₁ ≤ z`.
//!
//! For every `ρ` there is a `z` giving the same solution; [`rho_to_z`]
//! recovers it from an aMTFL₁ solution.

use ndarray::Array1;

use crate::dataset::{validate_dataset, TaskDataset};
use crate::error::{Error, Result};
use crate::losses::{check_shape, LossFunction};
use crate::projections::{project_onto_d_unchecked, project_onto_z_unchecked, L21Ball};
use crate::scalar::Real;
use crate::solver::{nesterov_solve, ConstrainedProblem, SolverConfig};
use crate::weights::{row_norms_unchecked, AugmentedPoint, WeightMatrix};

/// Inputs of the cone-constrained reformulation.
#[derive(Debug, Clone, Copy)]
pub struct Amtfl1Spec<'a, T, L> {
    pub loss: &'a L,
    pub dataset: &'a TaskDataset<T>,
    pub rho: T,
}

/// Inputs of the ball-constrained reformulation.
#[derive(Debug, Clone, Copy)]
pub struct Amtfl2Spec<'a, T, L> {
    pub loss: &'a L,
    pub dataset: &'a TaskDataset<T>,
    pub ball: L21Ball<T>,
}

/// `loss(W) + ρ Σ t_i` over the cone product.
#[derive(Debug, Clone, Copy)]
pub struct Amtfl1Problem<'a, T, L> {
    loss: &'a L,
    dataset: &'a TaskDataset<T>,
    rho: T,
}

impl<'a, T: Real, L: LossFunction<T>> Amtfl1Problem<'a, T, L> {
    pub fn rho(&self) -> T {
        self.rho
    }

    /// `(0, 0)`, feasible for every `ρ`.
    pub fn origin(&self) -> AugmentedPoint<T> {
        AugmentedPoint::zeros(self.dataset.num_features(), self.dataset.num_tasks())
    }

    /// Regularized objective `loss(W) + ρ‖W‖₂,₁` at a weight matrix.
    pub fn regularized_objective(&self, w: &WeightMatrix<T>) -> T {
        self.loss.value(w, self.dataset) + self.rho * w.l21_norm()
    }
}

impl<'a, T: Real, L: LossFunction<T>> ConstrainedProblem<T> for Amtfl1Problem<'a, T, L> {
    type Point = AugmentedPoint<T>;

    fn objective(&self, x: &AugmentedPoint<T>) -> T {
        self.loss.value(&x.w, self.dataset) + self.rho * x.t.sum()
    }

    fn gradient(&self, x: &AugmentedPoint<T>) -> AugmentedPoint<T> {
        self.objective_and_gradient(x).1
    }

    fn objective_and_gradient(&self, x: &AugmentedPoint<T>) -> (T, AugmentedPoint<T>) {
        let (loss, grad_w) = self.loss.value_and_gradient(&x.w, self.dataset);
        let grad = AugmentedPoint { t: Array1::from_elem(x.t.len(), self.rho), w: grad_w };
        (loss + self.rho * x.t.sum(), grad)
    }

    fn project(&self, x: &AugmentedPoint<T>) -> AugmentedPoint<T> {
        let (t, w) = project_onto_d_unchecked(x.t.view(), x.w.view());
        AugmentedPoint { t, w: WeightMatrix::from_array_unchecked(w) }
    }

    fn dimension(&self) -> usize {
        self.dataset.num_features() * (self.dataset.num_tasks() + 1)
    }
}

/// `loss(W)` over the ℓ2,1-ball.
#[derive(Debug, Clone, Copy)]
pub struct Amtfl2Problem<'a, T, L> {
    loss: &'a L,
    dataset: &'a TaskDataset<T>,
    ball: L21Ball<T>,
}

impl<'a, T: Real, L: LossFunction<T>> Amtfl2Problem<'a, T, L> {
    pub fn ball(&self) -> L21Ball<T> {
        self.ball
    }

    pub fn origin(&self) -> WeightMatrix<T> {
        WeightMatrix::zeros(self.dataset.num_features(), self.dataset.num_tasks())
    }
}

impl<'a, T: Real, L: LossFunction<T>> ConstrainedProblem<T> for Amtfl2Problem<'a, T, L> {
    type Point = WeightMatrix<T>;

    fn objective(&self, w: &WeightMatrix<T>) -> T {
        self.loss.value(w, self.dataset)
    }

    fn gradient(&self, w: &WeightMatrix<T>) -> WeightMatrix<T> {
        self.loss.value_and_gradient(w, self.dataset).1
    }

    fn objective_and_gradient(&self, w: &WeightMatrix<T>) -> (T, WeightMatrix<T>) {
        self.loss.value_and_gradient(w, self.dataset)
    }

    fn project(&self, w: &WeightMatrix<T>) -> WeightMatrix<T> {
        WeightMatrix::from_array_unchecked(project_onto_z_unchecked(w.view(), &self.ball, T::lit(1e-12)))
    }

    fn dimension(&self) -> usize {
        self.dataset.num_features() * self.dataset.num_tasks()
    }
}

fn check_loss_and_data<T: Real, L: LossFunction<T>>(loss: &L, dataset: &TaskDataset<T>) -> Result<()> {
    validate_dataset(dataset)?;
    loss.check_dataset(dataset)?;
    check_shape(&WeightMatrix::zeros(dataset.num_features(), dataset.num_tasks()), dataset)
}

pub fn build_amtfl1<'a, T: Real, L: LossFunction<T>>(spec: Amtfl1Spec<'a, T, L>) -> Result<Amtfl1Problem<'a, T, L>> {
    if !(spec.rho.is_finite() && spec.rho >= T::zero()) {
        return Err(Error::InvalidInput(format!("rho must be nonnegative, got {}", spec.rho)));
    }
    check_loss_and_data(spec.loss, spec.dataset)?;
    Ok(Amtfl1Problem { loss: spec.loss, dataset: spec.dataset, rho: spec.rho })
}

pub fn build_amtfl2<'a, T: Real, L: LossFunction<T>>(spec: Amtfl2Spec<'a, T, L>) -> Result<Amtfl2Problem<'a, T, L>> {
    check_loss_and_data(spec.loss, spec.dataset)?;
    Ok(Amtfl2Problem { loss: spec.loss, dataset: spec.dataset, ball: spec.ball })
}

/// Ball radius matching an aMTFL₁ solution: `z = ‖W̄‖₂,₁`. Zero means the
/// solution is fully sparse and no ball can be built from it.
pub fn rho_to_z<T: Real>(solution: &WeightMatrix<T>) -> T {
    solution.l21_norm()
}

/// Smallest `ρ` for which `W = 0` is optimal: the largest row norm of the
/// loss gradient at zero.
pub fn rho_max<T: Real, L: LossFunction<T>>(loss: &L, dataset: &TaskDataset<T>) -> Result<T> {
    check_loss_and_data(loss, dataset)?;
    let zero = WeightMatrix::zeros(dataset.num_features(), dataset.num_tasks());
    let (_, grad) = loss.value_and_gradient(&zero, dataset);
    Ok(row_norms_unchecked(grad.view()).iter().copied().fold(T::zero(), T::max))
}

/// Which reformulation a path runs over; the parameter is `ρ` for
/// [`Reformulation::Amtfl1`] and `z` for [`Reformulation::Amtfl2`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reformulation {
    Amtfl1,
    Amtfl2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartMode {
    /// Every problem starts from zero.
    Cold,
    /// Problem `i + 1` starts from the solution of problem `i`.
    Warm,
}

#[derive(Debug, Clone)]
pub struct PathPoint<T> {
    pub param: T,
    pub solution: WeightMatrix<T>,
    pub objective: T,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct PathResult<T> {
    pub points: Vec<PathPoint<T>>,
    pub total_iterations: usize,
    pub mode: StartMode,
}

fn check_path_params<T: Real>(reformulation: Reformulation, params: &[T]) -> Result<()> {
    if params.is_empty() {
        return Err(Error::InvalidInput("parameter path is empty".into()));
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidInput("parameter path has non-finite values".into()));
    }
    let ok = match reformulation {
        Reformulation::Amtfl1 => params.windows(2).all(|w| w[1] < w[0]),
        Reformulation::Amtfl2 => params.windows(2).all(|w| w[1] > w[0]),
    };
    if !ok {
        let dir = match reformulation {
            Reformulation::Amtfl1 => "strictly decreasing rho",
            Reformulation::Amtfl2 => "strictly increasing z",
        };
        return Err(Error::InvalidInput(format!("path parameters must be {dir}")));
    }
    Ok(())
}

/// Solves a sequence of problems along `params`.
pub fn solve_path<T: Real, L: LossFunction<T>>(
    loss: &L,
    dataset: &TaskDataset<T>,
    reformulation: Reformulation,
    params: &[T],
    mode: StartMode,
    cfg: &SolverConfig<T>,
) -> Result<PathResult<T>> {
    check_path_params(reformulation, params)?;
    let mut points = Vec::with_capacity(params.len());
    match reformulation {
        Reformulation::Amtfl1 => {
            let mut previous: Option<AugmentedPoint<T>> = None;
            for &rho in params {
                let problem = build_amtfl1(Amtfl1Spec { loss, dataset, rho })?;
                let x0 = match (&previous, mode) {
                    (Some(p), StartMode::Warm) => p.clone(),
                    _ => problem.origin(),
                };
                let res = nesterov_solve(&problem, &x0, cfg)?;
                points.push(PathPoint {
                    param: rho,
                    solution: res.solution.w.clone(),
                    objective: res.final_objective,
                    iterations: res.iterations,
                    converged: res.converged,
                });
                previous = Some(res.solution);
            }
        }
        Reformulation::Amtfl2 => {
            let mut previous: Option<WeightMatrix<T>> = None;
            for &z in params {
                let ball = L21Ball::new(z)?;
                let problem = build_amtfl2(Amtfl2Spec { loss, dataset, ball })?;
                let x0 = match (previous.take(), mode) {
                    (Some(w), StartMode::Warm) => {
                        // nested balls: the previous solution is feasible here
                        let norm = w.l21_norm();
                        if norm > z * (T::one() + T::lit(1e-10)) {
                            return Err(Error::InvalidInput(format!(
                                "warm start with norm {norm} lies outside the ball of radius {z}"
                            )));
                        }
                        w
                    }
                    _ => problem.origin(),
                };
                let res = nesterov_solve(&problem, &x0, cfg)?;
                points.push(PathPoint {
                    param: z,
                    solution: res.solution.clone(),
                    objective: res.final_objective,
                    iterations: res.iterations,
                    converged: res.converged,
                });
                previous = Some(res.solution);
            }
        }
    }
    let total_iterations = points.iter().map(|p| p.iterations).sum();
    Ok(PathResult { points, total_iterations, mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Task;
    use crate::losses::LeastSquares;
    use ndarray::{array, Array2};

    fn tiny() -> TaskDataset<f64> {
        TaskDataset::new(vec![
            Task::new(
                array![[1.0, 0.5, 0.0], [0.2, 1.0, -0.3], [0.0, 0.1, 1.0], [1.0, 1.0, 1.0]],
                array![1.0, 2.0, -1.0, 0.5],
            ),
            Task::new(array![[0.5, -1.0, 0.2], [1.0, 0.0, 0.0], [0.3, 0.3, 0.9]], array![0.0, 1.5, 0.7]),
        ])
        .unwrap()
    }

    fn tight() -> SolverConfig<f64> {
        SolverConfig { rel_gap_tol: 1e-13, max_iterations: 50_000, ..SolverConfig::default() }
    }

    #[test]
    fn amtfl1_gradient_t_block_is_constant() {
        let d = tiny();
        let p = build_amtfl1(Amtfl1Spec { loss: &LeastSquares, dataset: &d, rho: 0.7 }).unwrap();
        let x = AugmentedPoint::new(array![1.0, -2.0, 3.0], WeightMatrix::new(Array2::ones((3, 2))).unwrap()).unwrap();
        assert_eq!(p.gradient(&x).t, array![0.7, 0.7, 0.7]);
        assert_eq!(p.gradient(&p.origin()).t, array![0.7, 0.7, 0.7]);
        assert_eq!(p.dimension(), 9);
    }

    #[test]
    fn amtfl1_optimum_has_tight_bounds() {
        let d = tiny();
        let rho = 0.3;
        let p = build_amtfl1(Amtfl1Spec { loss: &LeastSquares, dataset: &d, rho }).unwrap();
        let res = nesterov_solve(&p, &p.origin(), &tight()).unwrap();
        let norms = res.solution.w.row_norms();
        for i in 0..3 {
            assert!((res.solution.t[i] - norms[i]).abs() <= 1e-6);
        }
        let eq9 = p.regularized_objective(&res.solution.w);
        assert!((eq9 - res.final_objective).abs() <= 1e-6 * eq9.abs().max(1.0));
    }

    #[test]
    fn inactive_ball_gives_unconstrained_minimizer() {
        let d = tiny();
        let free = build_amtfl1(Amtfl1Spec { loss: &LeastSquares, dataset: &d, rho: 0.0 }).unwrap();
        let unconstrained = nesterov_solve(&free, &free.origin(), &tight()).unwrap().solution.w;
        let z = unconstrained.l21_norm() * 2.0;
        let p = build_amtfl2(Amtfl2Spec { loss: &LeastSquares, dataset: &d, ball: L21Ball::new(z).unwrap() }).unwrap();
        let res = nesterov_solve(&p, &p.origin(), &tight()).unwrap();
        for (a, b) in res.solution.as_array().iter().zip(unconstrained.as_array().iter()) {
            assert!((a - b).abs() <= 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn solution_norm_shrinks_with_radius() {
        let d = tiny();
        let mut last = f64::INFINITY;
        for z in [2.0, 1.0, 0.5, 0.1, 0.01] {
            let p =
                build_amtfl2(Amtfl2Spec { loss: &LeastSquares, dataset: &d, ball: L21Ball::new(z).unwrap() }).unwrap();
            let res = nesterov_solve(&p, &p.origin(), &tight()).unwrap();
            let norm = res.solution.l21_norm();
            assert!(norm <= z + 1e-8);
            assert!(norm <= last + 1e-12);
            last = norm;
        }
        assert!(last <= 0.01 + 1e-8);
    }

    #[test]
    fn rho_z_roundtrip_and_monotonicity() {
        let d = tiny();
        let rmax = rho_max(&LeastSquares, &d).unwrap();
        let mut prev_z = -1.0;
        for frac in [0.8, 0.5, 0.2] {
            let rho = frac * rmax;
            let p1 = build_amtfl1(Amtfl1Spec { loss: &LeastSquares, dataset: &d, rho }).unwrap();
            let r1 = nesterov_solve(&p1, &p1.origin(), &tight()).unwrap();
            let z = rho_to_z(&r1.solution.w);
            assert!(z >= prev_z);
            prev_z = z;
            let p2 =
                build_amtfl2(Amtfl2Spec { loss: &LeastSquares, dataset: &d, ball: L21Ball::new(z).unwrap() }).unwrap();
            let r2 = nesterov_solve(&p2, &p2.origin(), &tight()).unwrap();
            let l1 = LeastSquares.value(&r1.solution.w, &d);
            assert!((l1 - r2.final_objective).abs() <= 1e-4 * l1.abs());
        }
    }

    #[test]
    fn rho_max_gives_zero_solution() {
        let d = tiny();
        let rho = rho_max(&LeastSquares, &d).unwrap() * 1.01;
        let p = build_amtfl1(Amtfl1Spec { loss: &LeastSquares, dataset: &d, rho }).unwrap();
        let res = nesterov_solve(&p, &p.origin(), &tight()).unwrap();
        assert_eq!(rho_to_z(&res.solution.w), 0.0);
        assert!(L21Ball::new(rho_to_z(&res.solution.w)).is_err());
    }

    #[test]
    fn builders_reject_bad_input() {
        let d = tiny();
        assert!(build_amtfl1(Amtfl1Spec { loss: &LeastSquares, dataset: &d, rho: -1.0 }).is_err());
        let bad = TaskDataset::new_unchecked(vec![Task::new(array![[1.0]], array![1.0, 2.0])]);
        assert!(build_amtfl1(Amtfl1Spec { loss: &LeastSquares, dataset: &bad, rho: 1.0 }).is_err());
        let labels = crate::losses::Logistic;
        assert!(build_amtfl2(Amtfl2Spec { loss: &labels, dataset: &d, ball: L21Ball::new(1.0).unwrap() }).is_err());
    }

    #[test]
    fn path_parameter_checks() {
        let d = tiny();
        let cfg = SolverConfig::default();
        assert!(solve_path(&LeastSquares, &d, Reformulation::Amtfl1, &[1.0, 2.0], StartMode::Warm, &cfg).is_err());
        assert!(solve_path(&LeastSquares, &d, Reformulation::Amtfl2, &[2.0, 1.0], StartMode::Warm, &cfg).is_err());
        assert!(solve_path(&LeastSquares, &d, Reformulation::Amtfl2, &[1.0, 1.0], StartMode::Cold, &cfg).is_err());
        assert!(solve_path::<f64, _>(&LeastSquares, &d, Reformulation::Amtfl1, &[], StartMode::Cold, &cfg).is_err());
    }

    #[test]
    fn single_point_path_is_mode_independent() {
        let d = tiny();
        let cfg = SolverConfig::default();
        for reformulation in [Reformulation::Amtfl1, Reformulation::Amtfl2] {
            let warm = solve_path(&LeastSquares, &d, reformulation, &[0.5], StartMode::Warm, &cfg).unwrap();
            let cold = solve_path(&LeastSquares, &d, reformulation, &[0.5], StartMode::Cold, &cfg).unwrap();
            assert_eq!(warm.points[0].solution, cold.points[0].solution);
            assert_eq!(warm.total_iterations, cold.total_iterations);
        }
    }

    #[test]
    fn z_path_warm_starts_stay_feasible() {
        let d = tiny();
        let res = solve_path(
            &LeastSquares,
            &d,
            Reformulation::Amtfl2,
            &[0.1, 0.3, 0.6, 1.0],
            StartMode::Warm,
            &SolverConfig::default(),
        )
        .unwrap();
        for pair in res.points.windows(2) {
            assert!(pair[0].solution.l21_norm() <= pair[0].param + 1e-9);
            assert!(pair[0].param < pair[1].param);
        }
    }
}
