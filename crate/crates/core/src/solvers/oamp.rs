use serde::{Deserialize, Serialize};

use super::le::{apply_le, estimate_tau2, le_output_variance, LeVariant, LinearEstimator, TAU2_FLOOR};
use super::mmse::{divergence_free, mmse_denoise};
use super::SolverTrajectory;
use crate::error::{param_err, Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{Scalar, C};

/// Which NLE output is recorded as the iteration's estimate.
///
/// The divergence-free (extrinsic) estimate always drives the next LE step; `Posterior`
/// reports the plain posterior mean `η(l)` instead, which is the estimate OAMP hands out
/// once it stops iterating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OampReadout {
    #[default]
    Posterior,
    Extrinsic,
}

/// OAMP with the Bernoulli–Gaussian posterior-mean denoiser.
///
/// Each iteration estimates the NLE error variance from the residual, propagates it
/// through the LE step to obtain the denoiser's input variance, then applies the
/// divergence-free NLE. A degenerate denoiser (divergence 1) freezes the estimate.
#[allow(clippy::too_many_arguments)]
pub fn oamp<T: Scalar>(
    y: &[C<T>],
    pilot: &CMatrix<T>,
    rho: T,
    sigma2: T,
    iterations: usize,
    variant: LeVariant,
    readout: OampReadout,
) -> Result<SolverTrajectory<T>> {
    if !(rho > T::zero() && rho <= T::one()) {
        return Err(param_err("activity_rate", "need 0 < rho <= 1"));
    }
    let est = LinearEstimator::new(pilot, variant, sigma2)?;
    let mut traj = SolverTrajectory::start(y, pilot.cols());
    let mut x = traj.nle_estimates[0].clone();
    let mut report = x.clone();
    for _ in 0..iterations {
        let v2 = estimate_tau2(y, pilot, &x, sigma2);
        let (d, b) = est.matrices(pilot, v2)?;
        let l = apply_le(&d, y, pilot, &x);
        let tau2 = le_output_variance(&d, &b, v2, sigma2).max(T::lit(TAU2_FLOOR));
        let (eta, div) = mmse_denoise(&l, tau2, rho)?;
        match divergence_free(&l, &eta, div) {
            Ok(next) => {
                report = match readout {
                    OampReadout::Posterior => eta,
                    OampReadout::Extrinsic => next.clone(),
                };
                x = next;
            }
            Err(Error::DegenerateDenoiser(_)) => {}
            Err(e) => return Err(e),
        }
        traj.push(y, pilot, l, report.clone(), tau2);
    }
    Ok(traj)
}
