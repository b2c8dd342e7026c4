//! Reference solvers used only by tests. None of them call into the
//! projection or solver code they check.

#![allow(dead_code)]

use mtfl_core::{Task, TaskDataset};
use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};
use rand::Rng;

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Projection onto `{(t, w) : ‖w‖ ≤ t}` row by row.
///
/// For a fixed bound `t ≥ 0` the nearest `w` is the radial projection of `u`
/// onto the ball of radius `t`, leaving the convex 1-D problem
/// `min_{t ≥ 0} ½(t − v)² + ½ max(‖u‖ − t, 0)²`, solved by projected
/// gradient with step `1/2` (gradient Lipschitz constant 2).
pub fn project_d_oracle(v: &Array1<f64>, u: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let mut t_out = Array1::zeros(v.len());
    let mut w_out = Array2::zeros(u.dim());
    for i in 0..v.len() {
        let row: Vec<f64> = u.row(i).to_vec();
        let r = norm(&row);
        let vi = v[i];
        let mut t = vi.max(0.0);
        for _ in 0..1_000_000 {
            let grad = (t - vi) - (r - t).max(0.0);
            let next = (t - 0.5 * grad).max(0.0);
            let done = (next - t).abs() <= 1e-16 * (1.0 + t.abs());
            t = next;
            if done || grad.abs() <= 1e-15 {
                break;
            }
        }
        t_out[i] = t;
        let scale = if r > t { t / r } else { 1.0 };
        for (c, &x) in row.iter().enumerate() {
            w_out[[i, c]] = scale * x;
        }
    }
    (t_out, w_out)
}

/// Projection of `x` onto `{r ≥ 0, Σ r ≤ z}` by enumerating supports. Only
/// practical for a handful of coordinates.
pub fn capped_simplex_projection(x: &[f64], z: f64) -> Vec<f64> {
    let clamped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    if clamped.iter().sum::<f64>() <= z {
        return clamped;
    }
    let n = x.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let tau = (support.iter().map(|&i| x[i]).sum::<f64>() - z) / support.len() as f64;
        let mut cand = vec![0.0; n];
        let mut feasible = true;
        for &i in &support {
            cand[i] = x[i] - tau;
            if cand[i] < -1e-15 {
                feasible = false;
            }
            cand[i] = cand[i].max(0.0);
        }
        if !feasible {
            continue;
        }
        let dist: f64 = cand.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((dist, cand));
        }
    }
    best.expect("some support is feasible").1
}

/// Projection onto the ℓ2,1-ball of radius `z`.
///
/// Each row of the answer is the radial projection of `u^i` onto a ball of
/// radius `r_i`, with the radii solving
/// `min ½ Σ max(‖u^i‖ − r_i, 0)²` over `{r ≥ 0, Σ r ≤ z}`. That reduced QP
/// is solved by projected gradient (step 1, the gradient's Lipschitz
/// constant) using [`capped_simplex_projection`].
pub fn project_z_oracle(u: &Array2<f64>, z: f64) -> Array2<f64> {
    let norms: Vec<f64> = (0..u.nrows()).map(|i| norm(&u.row(i).to_vec())).collect();
    let mut r = capped_simplex_projection(&norms, z);
    for _ in 0..1_000_000 {
        let grad: Vec<f64> = norms.iter().zip(&r).map(|(n, ri)| -(n - ri).max(0.0)).collect();
        let step: Vec<f64> = r.iter().zip(&grad).map(|(ri, g)| ri - g).collect();
        let next = capped_simplex_projection(&step, z);
        let change: f64 = next.iter().zip(&r).map(|(a, b)| (a - b).abs()).sum();
        r = next;
        if change <= 1e-15 {
            break;
        }
    }
    let mut w = Array2::zeros(u.dim());
    for i in 0..u.nrows() {
        let scale = if norms[i] > r[i] { r[i] / norms[i] } else { 1.0 };
        for c in 0..u.ncols() {
            w[[i, c]] = scale * u[[i, c]];
        }
    }
    w
}

/// Cyclic coordinate descent for `½‖y − Aw‖² + ρ‖w‖₁`.
pub fn lasso_cd(a: &Array2<f64>, y: &Array1<f64>, rho: f64) -> Array1<f64> {
    let (m, n) = a.dim();
    let mut w = vec![0.0; n];
    let mut resid: Vec<f64> = y.to_vec();
    let col_sq: Vec<f64> = (0..n).map(|j| (0..m).map(|i| a[[i, j]] * a[[i, j]]).sum()).collect();
    for _ in 0..200_000 {
        let mut max_change = 0.0f64;
        for j in 0..n {
            if col_sq[j] == 0.0 {
                continue;
            }
            let corr: f64 = (0..m).map(|i| a[[i, j]] * resid[i]).sum::<f64>() + col_sq[j] * w[j];
            let new = corr.signum() * (corr.abs() - rho).max(0.0) / col_sq[j];
            let delta = new - w[j];
            if delta != 0.0 {
                for i in 0..m {
                    resid[i] -= a[[i, j]] * delta;
                }
                w[j] = new;
            }
            max_change = max_change.max(delta.abs());
        }
        if max_change <= 1e-14 {
            break;
        }
    }
    Array1::from(w)
}

pub fn lasso_objective(a: &Array2<f64>, y: &Array1<f64>, w: &Array1<f64>, rho: f64) -> f64 {
    let r = a.dot(w) - y;
    0.5 * r.dot(&r) + rho * w.iter().map(|x| x.abs()).sum::<f64>()
}

/// Solves the normal equations `AᵀA w = Aᵀy` by Cholesky.
pub fn normal_equations(a: &Array2<f64>, y: &Array1<f64>) -> Array1<f64> {
    let (m, n) = a.dim();
    let am = DMatrix::from_fn(m, n, |i, j| a[[i, j]]);
    let yv = DVector::from_iterator(m, y.iter().copied());
    let gram = am.transpose() * &am;
    let rhs = am.transpose() * yv;
    let sol = gram.cholesky().expect("full column rank").solve(&rhs);
    Array1::from_iter(sol.iter().copied())
}

/// Largest eigenvalue of a symmetric matrix.
pub fn max_eigenvalue(q: &Array2<f64>) -> f64 {
    let n = q.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| q[[i, j]]);
    m.symmetric_eigen().eigenvalues.iter().copied().fold(f64::MIN, f64::max)
}

/// Minimizes `½ xᵀQx − bᵀx` over the box `[lo, hi]^d` by projected gradient
/// with step `1/L`. Returns the minimizer and minimum.
pub fn box_qp_oracle(q: &Array2<f64>, b: &Array1<f64>, lo: f64, hi: f64) -> (Array1<f64>, f64) {
    let l = max_eigenvalue(q);
    let mut x = Array1::<f64>::zeros(b.len());
    for _ in 0..2_000_000 {
        let grad = q.dot(&x) - b;
        let next = (&x - &(grad / l)).mapv(|v| v.clamp(lo, hi));
        let change = (&next - &x).iter().map(|d| d.abs()).fold(0.0, f64::max);
        x = next;
        if change <= 1e-16 {
            break;
        }
    }
    let value = 0.5 * x.dot(&q.dot(&x)) - b.dot(&x);
    (x, value)
}

pub fn uniform_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, lo: f64, hi: f64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(lo..hi))
}

pub fn uniform_vector<R: Rng>(rng: &mut R, len: usize, lo: f64, hi: f64) -> Array1<f64> {
    Array1::from_shape_fn(len, |_| rng.random_range(lo..hi))
}

/// Random regression dataset with design entries in `[-1, 1)`.
pub fn random_dataset<R: Rng>(rng: &mut R, n: usize, sizes: &[usize]) -> TaskDataset<f64> {
    let tasks = sizes
        .iter()
        .map(|&m| Task::new(uniform_matrix(rng, m, n, -1.0, 1.0), uniform_vector(rng, m, -2.0, 2.0)))
        .collect();
    TaskDataset::new(tasks).unwrap()
}

/// Random classification dataset with `±1` labels.
pub fn random_labeled_dataset<R: Rng>(rng: &mut R, n: usize, sizes: &[usize]) -> TaskDataset<f64> {
    let tasks = sizes
        .iter()
        .map(|&m| {
            let y = Array1::from_shape_fn(m, |_| if rng.random_bool(0.5) { 1.0 } else { -1.0 });
            Task::new(uniform_matrix(rng, m, n, -1.0, 1.0), y)
        })
        .collect();
    TaskDataset::new(tasks).unwrap()
}

/// Rowwise group soft-threshold of `Y` at `ρ`, the closed-form minimizer of
/// `½‖Y − W‖²_F + ρ‖W‖₂,₁`.
pub fn group_soft_threshold(y: &Array2<f64>, rho: f64) -> Array2<f64> {
    let mut w = y.clone();
    for mut row in w.rows_mut() {
        let r = norm(&row.to_vec());
        let s = if r > 0.0 { (1.0 - rho / r).max(0.0) } else { 0.0 };
        row.mapv_inplace(|x| x * s);
    }
    w
}
