//! ISTA / FISTA with complex soft thresholding for `min ½‖y − Ax‖² + λ‖x‖₁`.

use num_complex::Complex;
use num_traits::Zero;

use super::SolverTrajectory;
use crate::error::{param_err, Result};
use crate::linalg::CMatrix;
use crate::scalar::{Scalar, C};
use crate::system_model::Instance;

/// `max(|u| − s, 0) · u/|u|`
#[inline]
pub fn soft_threshold<T: Scalar>(u: C<T>, s: T) -> C<T> {
    let mag = u.norm();
    if mag <= s {
        Complex::zero()
    } else {
        u * ((mag - s) / mag)
    }
}

/// Largest eigenvalue of `Aᴴ A` by power iteration on the smaller Gram matrix `A Aᴴ`.
pub fn lipschitz<T: Scalar>(pilot: &CMatrix<T>) -> T {
    let gram = pilot.matmul(&pilot.adjoint());
    let m = gram.rows();
    let mut v: Vec<C<T>> = (0..m)
        .map(|i| Complex::new(T::one(), T::from_usize_lossy(i) * T::lit(1e-3)))
        .collect();
    let mut est = T::zero();
    for _ in 0..500 {
        let w = gram.matvec(&v);
        let nrm = crate::scalar::norm_sqr(&w).sqrt();
        if nrm == T::zero() {
            return T::zero();
        }
        let next = nrm / crate::scalar::norm_sqr(&v).sqrt();
        v = w.into_iter().map(|z| z / nrm).collect();
        if (next - est).abs() <= T::epsilon() * T::lit(8.0) * next {
            return next;
        }
        est = next;
    }
    est
}

fn gradient_step<T: Scalar>(y: &[C<T>], pilot: &CMatrix<T>, x: &[C<T>], step: T) -> Vec<C<T>> {
    let resid = crate::vqc::residual(y, pilot, x);
    pilot
        .adjoint_matvec(&resid)
        .into_iter()
        .zip(x)
        .map(|(g, xi)| xi + g * step)
        .collect()
}

fn check(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) {
        return Err(param_err("lambda", format!("need lambda > 0, got {lambda}")));
    }
    Ok(())
}

pub fn ista<T: Scalar>(y: &[C<T>], pilot: &CMatrix<T>, lambda: T, iterations: usize) -> Result<SolverTrajectory<T>> {
    check(lambda.to_f64_lossy())?;
    let step = T::one() / lipschitz(pilot);
    let thr = lambda * step;
    let mut traj = SolverTrajectory::start(y, pilot.cols());
    let mut x = traj.nle_estimates[0].clone();
    for _ in 0..iterations {
        let u = gradient_step(y, pilot, &x, step);
        x = u.iter().map(|&z| soft_threshold(z, thr)).collect();
        traj.push(y, pilot, u, x.clone(), thr);
    }
    Ok(traj)
}

pub fn fista<T: Scalar>(y: &[C<T>], pilot: &CMatrix<T>, lambda: T, iterations: usize) -> Result<SolverTrajectory<T>> {
    check(lambda.to_f64_lossy())?;
    let step = T::one() / lipschitz(pilot);
    let thr = lambda * step;
    let mut traj = SolverTrajectory::start(y, pilot.cols());
    let mut x = traj.nle_estimates[0].clone();
    let mut z = x.clone();
    let mut t = T::one();
    let (one, two, four) = (T::one(), T::lit(2.0), T::lit(4.0));
    for _ in 0..iterations {
        let u = gradient_step(y, pilot, &z, step);
        let x_next: Vec<C<T>> = u.iter().map(|&v| soft_threshold(v, thr)).collect();
        let t_next = (one + (one + four * t * t).sqrt()) / two;
        let beta = (t - one) / t_next;
        z = x_next
            .iter()
            .zip(&x)
            .map(|(a, b)| a + (a - b) * beta)
            .collect();
        x = x_next;
        t = t_next;
        traj.push(y, pilot, u, x.clone(), thr);
    }
    Ok(traj)
}

/// Candidate thresholds `{0.01, …, 0.5} · √(σ² ln N)`.
pub fn threshold_grid(sigma2: f64, n: usize) -> Vec<f64> {
    let base = (sigma2 * (n as f64).ln()).sqrt();
    [0.01, 0.02, 0.05, 0.1, 0.2, 0.5].iter().map(|f| f * base).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparseSolver {
    Ista,
    Fista,
}

/// Picks the grid threshold minimizing mean final MSE over `validation`.
pub fn select_threshold<T: Scalar>(
    validation: &[Instance<T>],
    solver: SparseSolver,
    iterations: usize,
) -> Result<f64> {
    let first = validation
        .first()
        .ok_or_else(|| param_err("validation", "threshold search needs at least one instance"))?;
    let grid = threshold_grid(first.noise_var.to_f64_lossy(), first.n_devices());
    let mut best = (f64::INFINITY, grid[0]);
    for &lam in &grid {
        let mut total = 0.0;
        for inst in validation {
            let traj = match solver {
                SparseSolver::Ista => ista(&inst.observation, &inst.pilot, T::lit(lam), iterations)?,
                SparseSolver::Fista => fista(&inst.observation, &inst.pilot, T::lit(lam), iterations)?,
            };
            total += crate::metrics::mse(traj.final_estimate(), &inst.signal).to_f64_lossy();
        }
        if total < best.0 {
            best = (total, lam);
        }
    }
    Ok(best.1)
}
