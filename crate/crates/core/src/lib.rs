//! Compressed-sensing recovery for grant-free access with a variational-quantum-circuit
//! denoiser (VQC-CS), plus ISTA/FISTA/OAMP baselines, training and evaluation.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix the
//! common `f64` instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod metrics;
pub mod persist;
pub mod postproc;
pub mod quantum;
pub mod scalar;
pub mod solvers;
pub mod system_model;
pub mod training;
pub mod vqc;

pub use error::{Error, Result};
pub use scalar::{Scalar, C};

pub type Complex64 = num_complex::Complex<f64>;
pub type Matrix64 = linalg::CMatrix<f64>;
pub type Instance64 = system_model::Instance<f64>;
pub type Instance32 = system_model::Instance<f32>;
pub type Trajectory64 = solvers::SolverTrajectory<f64>;
pub type VqcParams64 = vqc::VqcParams<f64>;
pub type DenoiserParams64 = vqc::DenoiserParams<f64>;
pub type Checkpoint64 = training::Checkpoint<f64>;
pub type MlpParams64 = postproc::MlpParams<f64>;
pub type QubitState64 = quantum::QubitState<f64>;
pub type QubitCircuit64 = quantum::QubitCircuit<f64>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
