//! Accelerated projected gradient for `min_{x ∈ G} g(x)` with smooth convex
//! `g` and a closed convex `G` reachable through its Euclidean projection.
//!
//! Each iteration forms the search point `s_i = x_i + α_i (x_i − x_{i−1})`,
//! then takes a projected gradient step from `s_i` with step size `1/γ`.
//! `γ` starts at the previous iteration's value and doubles until the
//! quadratic model
//!
//! ```text
//! g(s) + ⟨g'(s), y − s⟩ + (γ/2)‖y − s‖²
//! ```
//!
//! upper-bounds `g` at the new point. The momentum weights follow
//! `θ_{−1} = 0`, `θ_0 = 1`, `θ_i = (1 + √(1 + 4θ_{i−1}²))/2` and
//! `α_i = (θ_{i−2} − 1)/θ_{i−1}`. Because `x_1 = x_0`, the first search point
//! equals the starting point even though `α_1 = −1`, and `α_2 = 0`.
//!
//! [`projected_gradient_solve`] runs the same loop with `α_i = 0`.

use std::time::Instant;

use ndarray::{Array1, Array2, Zip};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::weights::{AugmentedPoint, WeightMatrix};

/// Vector-space operations the solver needs on its iterates. Inner product
/// and norm are Euclidean over every coordinate of the point.
pub trait Point<T: Real>: Clone {
    /// `⟨self, other⟩`.
    fn dot(&self, other: &Self) -> T;

    /// `self += alpha · x`.
    fn axpy(&mut self, alpha: T, x: &Self);

    /// Number of scalar coordinates.
    fn dimension(&self) -> usize;

    fn is_finite(&self) -> bool;

    fn norm_squared(&self) -> T {
        self.dot(self)
    }
}

impl<T: Real> Point<T> for Array1<T> {
    fn dot(&self, other: &Self) -> T {
        Zip::from(self).and(other).fold(T::zero(), |acc, &a, &b| acc + a * b)
    }

    fn axpy(&mut self, alpha: T, x: &Self) {
        self.scaled_add(alpha, x);
    }

    fn dimension(&self) -> usize {
        self.len()
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

impl<T: Real> Point<T> for Array2<T> {
    fn dot(&self, other: &Self) -> T {
        Zip::from(self).and(other).fold(T::zero(), |acc, &a, &b| acc + a * b)
    }

    fn axpy(&mut self, alpha: T, x: &Self) {
        self.scaled_add(alpha, x);
    }

    fn dimension(&self) -> usize {
        self.len()
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

impl<T: Real> Point<T> for WeightMatrix<T> {
    fn dot(&self, other: &Self) -> T {
        Point::dot(self.as_array(), other.as_array())
    }

    fn axpy(&mut self, alpha: T, x: &Self) {
        self.as_array_mut().scaled_add(alpha, x.as_array());
    }

    fn dimension(&self) -> usize {
        self.as_array().len()
    }

    fn is_finite(&self) -> bool {
        Point::is_finite(self.as_array())
    }
}

impl<T: Real> Point<T> for AugmentedPoint<T> {
    fn dot(&self, other: &Self) -> T {
        Point::dot(&self.t, &other.t) + Point::dot(&self.w, &other.w)
    }

    fn axpy(&mut self, alpha: T, x: &Self) {
        self.t.scaled_add(alpha, &x.t);
        self.w.axpy(alpha, &x.w);
    }

    fn dimension(&self) -> usize {
        self.t.len() + self.w.dimension()
    }

    fn is_finite(&self) -> bool {
        Point::is_finite(&self.t) && Point::is_finite(&self.w)
    }
}

/// A smooth convex objective over a closed convex feasible set.
///
/// Objective and gradient must be defined at every finite point, feasible
/// or not. `project` must return a feasible point and be idempotent.
pub trait ConstrainedProblem<T: Real> {
    type Point: Point<T>;

    fn objective(&self, x: &Self::Point) -> T;

    fn gradient(&self, x: &Self::Point) -> Self::Point;

    fn objective_and_gradient(&self, x: &Self::Point) -> (T, Self::Point) {
        (self.objective(x), self.gradient(x))
    }

    fn project(&self, x: &Self::Point) -> Self::Point;

    /// Number of scalar coordinates of the point space.
    fn dimension(&self) -> usize;
}

/// A [`ConstrainedProblem`] assembled from closures.
pub struct ClosureProblem<P, F, G, Pr> {
    objective: F,
    gradient: G,
    project: Pr,
    dimension: usize,
    _point: std::marker::PhantomData<fn() -> P>,
}

impl<P, F, G, Pr> ClosureProblem<P, F, G, Pr> {
    pub fn new(dimension: usize, objective: F, gradient: G, project: Pr) -> Self {
        Self { objective, gradient, project, dimension, _point: std::marker::PhantomData }
    }
}

impl<T, P, F, G, Pr> ConstrainedProblem<T> for ClosureProblem<P, F, G, Pr>
where
    T: Real,
    P: Point<T>,
    F: Fn(&P) -> T,
    G: Fn(&P) -> P,
    Pr: Fn(&P) -> P,
{
    type Point = P;

    fn objective(&self, x: &P) -> T {
        (self.objective)(x)
    }

    fn gradient(&self, x: &P) -> P {
        (self.gradient)(x)
    }

    fn project(&self, x: &P) -> P {
        (self.project)(x)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    /// Initial guess for the Lipschitz constant of the gradient.
    pub l0: T,
    pub max_iterations: usize,
    /// Stop when `|g(x_{i+1}) − g(x_i)| / max(1, |g(x_i)|)` falls to this.
    pub rel_gap_tol: T,
    /// When set, stop as soon as `g(x_{i+1}) ≤ target` instead of using the
    /// relative gap.
    pub target_objective: Option<T>,
    pub max_linesearch_doublings: usize,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            l0: T::one(),
            max_iterations: 10_000,
            rel_gap_tol: T::lit(1e-4),
            target_objective: None,
            max_linesearch_doublings: 60,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.l0.is_finite() && self.l0 > T::zero()) {
            return Err(Error::InvalidInput(format!("L0 must be positive, got {}", self.l0)));
        }
        if !(self.rel_gap_tol.is_finite() && self.rel_gap_tol > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "relative gap tolerance must be positive, got {}",
                self.rel_gap_tol
            )));
        }
        if let Some(target) = self.target_objective {
            if target.is_nan() {
                return Err(Error::InvalidInput("target objective is NaN".into()));
            }
        }
        Ok(())
    }

    pub fn with_target(mut self, target: T) -> Self {
        self.target_objective = Some(target);
        self
    }
}

/// One row of the convergence trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T> {
    /// 1-based iteration index `i`.
    pub iteration: usize,
    /// `g(x_{i+1})`.
    pub objective: T,
    /// Accepted `γ_i`.
    pub gamma: T,
    /// Momentum weight `α_i` used to form the search point.
    pub alpha: T,
    pub linesearch_trials: usize,
    /// Seconds since the solve started.
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult<T, P> {
    pub solution: P,
    pub final_objective: T,
    pub trace: Vec<IterationRecord<T>>,
    pub converged: bool,
    pub iterations: usize,
}

/// Quadratic model `g(x) + ⟨∇g(x), y − x⟩ + (γ/2)‖y − x‖²`.
pub fn model_value<T: Real, P: Point<T>>(gamma: T, x: &P, y: &P, g_x: T, grad_x: &P) -> T {
    let mut diff = y.clone();
    diff.axpy(-T::one(), x);
    g_x + grad_x.dot(&diff) + T::lit(0.5) * gamma * diff.norm_squared()
}

/// Outcome of one line search.
#[derive(Debug, Clone)]
pub struct LineSearchStep<T, P> {
    pub gamma: T,
    pub point: P,
    pub objective: T,
    /// Number of `γ` values tried, `j + 1`.
    pub trials: usize,
}

/// Doubling search for an appropriate `γ` at the search point `s`, given
/// `g(s)` and `∇g(s)`.
///
/// A relative slack of `16 ε (|g(s)| + |g(x_next)|)` is allowed in the
/// acceptance test so that rounding in `g` near convergence cannot force
/// `γ` to grow without bound.
pub fn line_search_from<T, Pb>(
    problem: &Pb,
    s: &Pb::Point,
    g_s: T,
    grad_s: &Pb::Point,
    gamma_prev: T,
    max_doublings: usize,
) -> Option<LineSearchStep<T, Pb::Point>>
where
    T: Real,
    Pb: ConstrainedProblem<T> + ?Sized,
{
    let slack_factor = T::lit(16.0) * T::epsilon();
    let mut gamma = gamma_prev;
    for j in 0..=max_doublings {
        let mut trial = s.clone();
        trial.axpy(-T::one() / gamma, grad_s);
        let next = problem.project(&trial);
        let g_next = problem.objective(&next);
        let model = model_value(gamma, s, &next, g_s, grad_s);
        if g_next <= model + slack_factor * (g_s.abs() + g_next.abs()) {
            return Some(LineSearchStep { gamma, point: next, objective: g_next, trials: j + 1 });
        }
        gamma = gamma + gamma;
    }
    None
}

/// Doubling line search starting at `gamma_prev`; evaluates `g` and `∇g` at
/// `s` itself.
pub fn line_search<T, Pb>(
    problem: &Pb,
    s: &Pb::Point,
    gamma_prev: T,
    cfg: &SolverConfig<T>,
) -> Result<LineSearchStep<T, Pb::Point>>
where
    T: Real,
    Pb: ConstrainedProblem<T> + ?Sized,
{
    if !(gamma_prev.is_finite() && gamma_prev > T::zero()) {
        return Err(Error::InvalidInput(format!("gamma must be positive, got {gamma_prev}")));
    }
    let (g_s, grad_s) = problem.objective_and_gradient(s);
    if !g_s.is_finite() {
        return Err(Error::Divergence { iteration: 0 });
    }
    line_search_from(problem, s, g_s, &grad_s, gamma_prev, cfg.max_linesearch_doublings)
        .ok_or(Error::LineSearchFailure { iteration: 0, doublings: cfg.max_linesearch_doublings })
}

/// Accelerated projected gradient.
pub fn nesterov_solve<T, Pb>(problem: &Pb, x0: &Pb::Point, cfg: &SolverConfig<T>) -> Result<SolveResult<T, Pb::Point>>
where
    T: Real,
    Pb: ConstrainedProblem<T> + ?Sized,
{
    run(problem, x0, cfg, true)
}

/// Projected gradient descent with the same line search and stopping rule.
pub fn projected_gradient_solve<T, Pb>(
    problem: &Pb,
    x0: &Pb::Point,
    cfg: &SolverConfig<T>,
) -> Result<SolveResult<T, Pb::Point>>
where
    T: Real,
    Pb: ConstrainedProblem<T> + ?Sized,
{
    run(problem, x0, cfg, false)
}

fn run<T, Pb>(problem: &Pb, x0: &Pb::Point, cfg: &SolverConfig<T>, momentum: bool) -> Result<SolveResult<T, Pb::Point>>
where
    T: Real,
    Pb: ConstrainedProblem<T> + ?Sized,
{
    cfg.validate()?;
    if !x0.is_finite() {
        return Err(Error::NonFinite("starting point".into()));
    }
    let start = Instant::now();

    let mut x_prev = x0.clone();
    let mut x = x0.clone();
    let mut g_x = problem.objective(&x);
    if !g_x.is_finite() {
        return Err(Error::Divergence { iteration: 0 });
    }
    // θ_{i−2}, θ_{i−1}
    let mut theta_older = T::zero();
    let mut theta_old = T::one();
    let mut gamma = cfg.l0;
    let mut trace = Vec::new();
    let mut converged = false;
    let four = T::lit(4.0);
    let two = T::lit(2.0);

    for i in 1..=cfg.max_iterations {
        let alpha = if momentum { (theta_older - T::one()) / theta_old } else { T::zero() };
        let mut s = x.clone();
        if alpha != T::zero() {
            s.axpy(alpha, &x);
            s.axpy(-alpha, &x_prev);
        }
        let (g_s, grad_s) = problem.objective_and_gradient(&s);
        if !g_s.is_finite() {
            return Err(Error::Divergence { iteration: i });
        }
        let step = line_search_from(problem, &s, g_s, &grad_s, gamma, cfg.max_linesearch_doublings)
            .ok_or(Error::LineSearchFailure { iteration: i, doublings: cfg.max_linesearch_doublings })?;
        if !step.objective.is_finite() {
            return Err(Error::Divergence { iteration: i });
        }
        gamma = step.gamma;

        let theta_new = (T::one() + (T::one() + four * theta_old * theta_old).sqrt()) / two;
        theta_older = theta_old;
        theta_old = theta_new;

        trace.push(IterationRecord {
            iteration: i,
            objective: step.objective,
            gamma,
            alpha,
            linesearch_trials: step.trials,
            elapsed_seconds: start.elapsed().as_secs_f64(),
        });

        let done = match cfg.target_objective {
            Some(target) => step.objective <= target,
            None => (step.objective - g_x).abs() / g_x.abs().max(T::one()) <= cfg.rel_gap_tol,
        };
        x_prev = std::mem::replace(&mut x, step.point);
        g_x = step.objective;
        if done {
            converged = true;
            break;
        }
    }

    let iterations = trace.len();
    let (solution, final_objective) = if iterations == 0 {
        let p = problem.project(x0);
        let g = problem.objective(&p);
        (p, g)
    } else {
        (x, g_x)
    };
    Ok(SolveResult { solution, final_objective, trace, converged, iterations })
}
