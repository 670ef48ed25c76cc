use rand::Rng;

use super::le::{apply_le, estimate_tau2, LeVariant, LinearEstimator};
use super::SolverTrajectory;
use crate::error::{dim_err, Result};
use crate::linalg::CMatrix;
use crate::scalar::{Scalar, C};
use crate::vqc::{denoise, embed, prep_angle, scaling_factors, scaling_factors_sampled, DenoiserParams};

/// Compressed sensing with a circuit-driven NLE.
///
/// Per iteration: LE step, residual-energy preparation angle, embedding of `l`,
/// exact Z expectations of both circuit banks, and the scaling denoise.
/// `params[t]` drives iteration `t`.
pub fn vqc_cs<T: Scalar>(
    y: &[C<T>],
    pilot: &CMatrix<T>,
    sigma2: T,
    params: &[DenoiserParams<T>],
    iterations: usize,
    variant: LeVariant,
) -> Result<SolverTrajectory<T>> {
    run::<T, rand_chacha::ChaCha8Rng>(y, pilot, sigma2, params, iterations, variant, None)
}

/// As [`vqc_cs`], with every expectation estimated from `shots` measurement samples.
#[allow(clippy::too_many_arguments)]
pub fn vqc_cs_sampled<T: Scalar, R: Rng>(
    y: &[C<T>],
    pilot: &CMatrix<T>,
    sigma2: T,
    params: &[DenoiserParams<T>],
    iterations: usize,
    variant: LeVariant,
    shots: u32,
    rng: &mut R,
) -> Result<SolverTrajectory<T>> {
    run(y, pilot, sigma2, params, iterations, variant, Some((shots, rng)))
}

fn run<T: Scalar, R: Rng>(
    y: &[C<T>],
    pilot: &CMatrix<T>,
    sigma2: T,
    params: &[DenoiserParams<T>],
    iterations: usize,
    variant: LeVariant,
    mut sampler: Option<(u32, &mut R)>,
) -> Result<SolverTrajectory<T>> {
    if params.len() < iterations {
        return Err(dim_err("vqc_cs parameter list", iterations, params.len()));
    }
    let n = pilot.cols();
    for p in &params[..iterations] {
        p.validate()?;
        if p.n_qubits() != n {
            return Err(dim_err("vqc_cs qubit count", n, p.n_qubits()));
        }
    }
    let est = LinearEstimator::new(pilot, variant, sigma2)?;
    let mut traj = SolverTrajectory::start(y, n);
    let mut x = traj.nle_estimates[0].clone();
    for p in &params[..iterations] {
        let v2_err = estimate_tau2(y, pilot, &x, sigma2);
        let (d, _) = est.matrices(pilot, v2_err)?;
        let l = apply_le(&d, y, pilot, &x);
        let v2 = prep_angle(y, pilot, &x);
        let r = embed(&l);
        let (s1, s2) = match sampler.as_mut() {
            None => (scaling_factors(&r, v2, &p.vqc_s1), scaling_factors(&r, v2, &p.vqc_s2)),
            Some((shots, rng)) => (
                scaling_factors_sampled(&r, v2, &p.vqc_s1, *shots, &mut **rng),
                scaling_factors_sampled(&r, v2, &p.vqc_s2, *shots, &mut **rng),
            ),
        };
        x = denoise(&l, &s1, &s2);
        traj.push(y, pilot, l, x.clone(), v2_err);
    }
    Ok(traj)
}
