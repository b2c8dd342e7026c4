//! Euclidean projections onto the two feasible sets.
//!
//! * `D = {(t, W) : ‖w^i‖ ≤ t_i ∀i}` is a product of second-order cones, one
//!   per row, and its projection has a closed form applied row by row.
//! * `Z = {W : ‖W‖₂,₁ ≤ z}` is the ℓ2,1-ball. Its projection is a group
//!   soft-threshold whose threshold is the root of the piecewise-linear dual
//!   function `ω(λ) = Σ_i max(‖u^i‖ − λ, 0) − z`.
//!
//! Both run in `O(nk)`; the dual root costs expected `O(n)`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::weights::row_norms_unchecked;

/// The ℓ2,1-ball `{W : ‖W‖₂,₁ ≤ z}` with `z > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L21Ball<T> {
    radius: T,
}

impl<T: Real> L21Ball<T> {
    pub fn new(radius: T) -> Result<Self> {
        if !(radius.is_finite() && radius > T::zero()) {
            return Err(Error::InvalidInput(format!("ball radius must be positive and finite, got {radius}")));
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> T {
        self.radius
    }
}

/// Optimal multiplier of the ℓ2,1-ball projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualRoot<T> {
    pub lambda: T,
    /// Segments scanned (exact solve) or halvings (bisection).
    pub iterations: usize,
    /// `|ω(λ)|` at the returned multiplier; zero when the constraint is
    /// inactive and `λ = 0`.
    pub residual: T,
}

fn check_vector<T: Real>(v: &ArrayView1<'_, T>, what: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(what.into()));
    }
    Ok(())
}

fn check_matrix<T: Real>(u: &ArrayView2<'_, T>, what: &str) -> Result<()> {
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(what.into()));
    }
    Ok(())
}

/// Projects `(v, U)` onto the cone product `D`.
pub fn project_onto_d<T: Real>(v: ArrayView1<'_, T>, u: ArrayView2<'_, T>) -> Result<(Array1<T>, Array2<T>)> {
    if v.len() != u.nrows() {
        return Err(Error::InvalidInput(format!("bound vector has length {}, matrix has {} rows", v.len(), u.nrows())));
    }
    check_vector(&v, "projection input v")?;
    check_matrix(&u, "projection input U")?;
    Ok(project_onto_d_unchecked(v, u))
}

pub(crate) fn project_onto_d_unchecked<T: Real>(v: ArrayView1<'_, T>, u: ArrayView2<'_, T>) -> (Array1<T>, Array2<T>) {
    let mut t = Array1::zeros(v.len());
    let mut w = u.to_owned();
    let half = T::lit(0.5);
    Zip::from(&mut t).and(w.axis_iter_mut(Axis(0))).and(&v).for_each(|t_i, mut w_i, &v_i| {
        let r = w_i.iter().map(|&x| x * x).sum::<T>().sqrt();
        if r <= v_i {
            // already inside the cone
            *t_i = v_i;
        } else if r <= -v_i {
            // polar cone: nearest point is the apex
            *t_i = T::zero();
            w_i.fill(T::zero());
        } else {
            let s = (r + v_i) * half;
            *t_i = s;
            w_i.mapv_inplace(|x| x * (s / r));
        }
    });
    (t, w)
}

/// `ω(λ) = Σ_i max(‖u^i‖ − λ, 0) − z`, summed in index order.
pub fn omega<T: Real>(lambda: T, row_norms: ArrayView1<'_, T>, z: T) -> T {
    row_norms.iter().fold(T::zero(), |acc, &r| acc + (r - lambda).max(T::zero())) - z
}

fn check_root_inputs<T: Real>(row_norms: &ArrayView1<'_, T>, z: T, tol: T) -> Result<()> {
    if !(z.is_finite() && z > T::zero()) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {z}")));
    }
    if !(tol.is_finite() && tol > T::zero()) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    check_vector(row_norms, "row norms")?;
    if row_norms.iter().any(|&r| r < T::zero()) {
        return Err(Error::InvalidInput("row norms must be nonnegative".into()));
    }
    Ok(())
}

/// Exact root of `ω` in expected linear time.
///
/// Repeatedly splits the undecided norms around their median with
/// `select_nth_unstable`: if `ω(pivot) > 0` the root lies above the pivot and
/// everything below it is inactive; otherwise everything at or above the
/// pivot is active. Once no undecided norms remain, `ω` is linear on the
/// active set and `λ = (Σ_active ‖u^i‖ − z) / |active|`. Returns `λ = 0`
/// when `Σ norms ≤ z`.
pub fn find_dual_lambda<T: Real>(row_norms: ArrayView1<'_, T>, z: T, tol: T) -> Result<DualRoot<T>> {
    check_root_inputs(&row_norms, z, tol)?;
    let total: T = row_norms.iter().copied().sum();
    if total <= z {
        return Ok(DualRoot { lambda: T::zero(), iterations: 0, residual: T::zero() });
    }
    let mut pool: Vec<T> = row_norms.iter().copied().filter(|&r| r > T::zero()).collect();
    let mut undecided = &mut pool[..];
    let mut active_sum = T::zero();
    let mut active_count = 0usize;
    let mut rounds = 0;
    while !undecided.is_empty() {
        rounds += 1;
        let mid = undecided.len() / 2;
        let (above, pivot, below) =
            undecided.select_nth_unstable_by(mid, |a, b| b.partial_cmp(a).expect("finite norms"));
        let pivot = *pivot;
        let upper_sum = active_sum + above.iter().copied().sum::<T>() + pivot;
        let upper_count = active_count + above.len() + 1;
        let omega_at_pivot = upper_sum - T::from_usize(upper_count).expect("count fits scalar") * pivot - z;
        if omega_at_pivot > T::zero() {
            undecided = above;
        } else {
            active_sum = upper_sum;
            active_count = upper_count;
            undecided = below;
        }
    }
    let lambda = ((active_sum - z) / T::from_usize(active_count).expect("count fits scalar")).max(T::zero());
    Ok(DualRoot { lambda, iterations: rounds, residual: omega(lambda, row_norms, z).abs() })
}

/// Exact root of `ω` by sorting the norms in decreasing order and solving
/// the linear piece on which `ω` changes sign. `O(n log n)`.
pub fn find_dual_lambda_sorted<T: Real>(row_norms: ArrayView1<'_, T>, z: T, tol: T) -> Result<DualRoot<T>> {
    check_root_inputs(&row_norms, z, tol)?;
    let total: T = row_norms.iter().copied().sum();
    if total <= z {
        return Ok(DualRoot { lambda: T::zero(), iterations: 0, residual: T::zero() });
    }
    let mut sorted: Vec<T> = row_norms.iter().copied().filter(|&r| r > T::zero()).collect();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite norms"));

    // Largest k with sorted[k-1] > (S_k − z)/k; ω is linear with slope −k
    // between sorted[k] and sorted[k-1].
    let mut prefix = T::zero();
    let mut lambda = T::zero();
    let mut segments = 0;
    for (idx, &r) in sorted.iter().enumerate() {
        let next = prefix + r;
        let candidate = (next - z) / T::from_usize(idx + 1).expect("count fits scalar");
        if r <= candidate {
            break;
        }
        prefix = next;
        lambda = candidate;
        segments = idx + 1;
    }
    let lambda = lambda.max(T::zero());
    Ok(DualRoot { lambda, iterations: segments, residual: omega(lambda, row_norms, z).abs() })
}

/// Plain bisection on `(0, max_i ‖u^i‖)`. Stops once both the residual is
/// below `tol · max(1, z)` and the bracket is narrower than `tol`.
pub fn find_dual_lambda_bisection<T: Real>(row_norms: ArrayView1<'_, T>, z: T, tol: T) -> Result<DualRoot<T>> {
    check_root_inputs(&row_norms, z, tol)?;
    let total: T = row_norms.iter().copied().sum();
    if total <= z {
        return Ok(DualRoot { lambda: T::zero(), iterations: 0, residual: T::zero() });
    }
    let scale = tol * z.max(T::one());
    let mut lo = T::zero();
    let mut hi = row_norms.iter().copied().fold(T::zero(), T::max);
    let two = T::lit(2.0);
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mid = (lo + hi) / two;
        let value = omega(mid, row_norms, z);
        if value > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        let stalled = hi - lo <= T::epsilon() * hi;
        if (value.abs() <= scale && hi - lo <= tol) || stalled || iterations >= 2000 {
            return Ok(DualRoot { lambda: mid, iterations, residual: value.abs() });
        }
    }
}

/// Projects `U` onto the ℓ2,1-ball.
pub fn project_onto_z<T: Real>(u: ArrayView2<'_, T>, ball: &L21Ball<T>, tol: T) -> Result<Array2<T>> {
    // a non-finite entry (or an overflowing row) always yields a non-finite norm
    let norms = row_norms_unchecked(u);
    if norms.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("projection input U".into()));
    }
    let root = find_dual_lambda(norms.view(), ball.radius(), tol)?;
    Ok(shrink_rows(u, &norms, root.lambda))
}

pub(crate) fn project_onto_z_unchecked<T: Real>(u: ArrayView2<'_, T>, ball: &L21Ball<T>, tol: T) -> Array2<T> {
    let norms = row_norms_unchecked(u);
    match find_dual_lambda(norms.view(), ball.radius(), tol) {
        Ok(root) => shrink_rows(u, &norms, root.lambda),
        // only reachable with non-finite rows; let the solver see NaN
        Err(_) => Array2::from_elem(u.dim(), T::nan()),
    }
}

/// Group soft-threshold: `w^i = max(1 − λ/‖u^i‖, 0) u^i`, identity at `λ = 0`.
pub fn shrink_rows<T: Real>(u: ArrayView2<'_, T>, row_norms: &Array1<T>, lambda: T) -> Array2<T> {
    if lambda == T::zero() {
        return u.to_owned();
    }
    let mut w = Array2::zeros(u.dim());
    Zip::from(w.rows_mut()).and(u.rows()).and(row_norms).for_each(|mut out, row, &r| {
        if r > lambda {
            let s = T::one() - lambda / r;
            Zip::from(&mut out).and(&row).for_each(|o, &x| *o = x * s);
        }
    });
    w
}
