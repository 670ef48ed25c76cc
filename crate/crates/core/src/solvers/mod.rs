//! Iterative recovery algorithms sharing the [`SolverTrajectory`] output.

pub mod le;
pub mod mmse;
pub mod oamp;
pub mod sparse;
pub mod vqc_cs;

use num_complex::Complex;
use num_traits::Zero;

use crate::linalg::CMatrix;
use crate::scalar::{Scalar, C};

pub use le::{apply_le, decorrelation_matrix, estimate_tau2, le_output_variance, le_step, LeVariant, LinearEstimator};
pub use mmse::{divergence_free, mmse_denoise, oamp_nle};
pub use oamp::{oamp, OampReadout};
pub use sparse::{fista, ista, select_threshold, soft_threshold, threshold_grid};
pub use vqc_cs::{vqc_cs, vqc_cs_sampled};

/// Per-iteration record of a solver run.
///
/// `nle_estimates[0]` is the all-zero initial estimate, so it holds `T + 1` entries while
/// `le_estimates` and `tau2` hold `T`. `residual_mse[t]` is `‖y − A x̂ᵗ‖² / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrajectory<T> {
    pub le_estimates: Vec<Vec<C<T>>>,
    pub nle_estimates: Vec<Vec<C<T>>>,
    pub residual_mse: Vec<T>,
    pub tau2: Vec<T>,
    pub iterations: usize,
}

impl<T: Scalar> SolverTrajectory<T> {
    pub(crate) fn start(y: &[C<T>], n: usize) -> Self {
        let m = T::from_usize_lossy(y.len());
        Self {
            le_estimates: Vec::new(),
            nle_estimates: vec![vec![Complex::zero(); n]],
            residual_mse: vec![crate::scalar::norm_sqr(y) / m],
            tau2: Vec::new(),
            iterations: 0,
        }
    }

    pub(crate) fn push(&mut self, y: &[C<T>], pilot: &CMatrix<T>, le: Vec<C<T>>, nle: Vec<C<T>>, tau2: T) {
        let m = T::from_usize_lossy(y.len());
        let r = crate::scalar::norm_sqr(&crate::vqc::residual(y, pilot, &nle)) / m;
        self.le_estimates.push(le);
        self.nle_estimates.push(nle);
        self.residual_mse.push(r);
        self.tau2.push(tau2);
        self.iterations += 1;
    }

    pub fn final_estimate(&self) -> &[C<T>] {
        self.nle_estimates.last().expect("trajectory holds the initial estimate")
    }

    /// Per-iteration MSE `(1/N)‖x̂ᵗ − x‖²` for `t = 0..=T`.
    pub fn mse_curve(&self, x: &[C<T>]) -> Vec<T> {
        self.nle_estimates.iter().map(|e| crate::metrics::mse(e, x)).collect()
    }
}
