//! Synthetic grant-free access instances: correlated device activity, Rayleigh channels,
//! structured pilot matrices and noisy observations `y = A x + z`.

use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, param_err, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cplx, Scalar, C};

/// Whether a dataset shares one pilot matrix or draws a fresh one per instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PilotPolicy {
    Shared,
    #[default]
    PerInstance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_devices: usize,
    pub n_measurements: usize,
    pub activity_rate: f64,
    pub correlation: f64,
    /// `+∞` (written `"inf"` in JSON) disables the noise.
    #[serde(with = "crate::scalar::extended_f64")]
    pub snr_db: f64,
    pub condition_number: f64,
    pub seed: u64,
    pub pilot_policy: PilotPolicy,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_devices: 10,
            n_measurements: 7,
            activity_rate: 0.2,
            correlation: 0.6,
            snr_db: 30.0,
            condition_number: 1.0,
            seed: 1,
            pilot_policy: PilotPolicy::PerInstance,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_devices == 0 {
            return Err(param_err("n_devices", "must be positive"));
        }
        if self.n_measurements == 0 || self.n_measurements >= self.n_devices {
            return Err(param_err(
                "n_measurements",
                format!("need 0 < M < N, got M={} N={}", self.n_measurements, self.n_devices),
            ));
        }
        check_rate(self.activity_rate)?;
        check_correlation(self.correlation)?;
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(param_err("snr_db", "must be a number or +inf"));
        }
        if !(self.condition_number >= 1.0) || !self.condition_number.is_finite() {
            return Err(param_err("condition_number", "must be finite and >= 1"));
        }
        Ok(())
    }
}

/// One realization of the access problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<T> {
    pub pilot: CMatrix<T>,
    pub activity: Vec<bool>,
    pub channel: Vec<C<T>>,
    pub signal: Vec<C<T>>,
    pub observation: Vec<C<T>>,
    pub noise_var: T,
}

impl<T: Scalar> Instance<T> {
    pub fn n_devices(&self) -> usize {
        self.signal.len()
    }

    pub fn n_measurements(&self) -> usize {
        self.observation.len()
    }
}

/// Singular values and row permutation of a generated pilot; the DFT factor is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotFactors<T> {
    pub singular_values: Vec<T>,
    pub permutation: Vec<usize>,
}

fn check_rate(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(param_err("activity_rate", format!("need 0 < rho < 1, got {rho}")));
    }
    Ok(())
}

fn check_correlation(gamma: f64) -> Result<()> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(param_err("correlation", format!("need 0 <= gamma < 1, got {gamma}")));
    }
    Ok(())
}

/// Transition probabilities `(P(1|1), P(1|0))` of the stationary binary Markov chain with
/// marginal `rho` and lag-d correlation `gamma^d`.
pub fn activity_transitions(rho: f64, gamma: f64) -> Result<(f64, f64)> {
    check_rate(rho)?;
    check_correlation(gamma)?;
    Ok((rho + gamma * (1.0 - rho), rho * (1.0 - gamma)))
}

pub fn gen_activity<R: Rng + ?Sized>(n: usize, rho: f64, gamma: f64, rng: &mut R) -> Result<Vec<bool>> {
    let (p11, p01) = activity_transitions(rho, gamma)?;
    let mut out = Vec::with_capacity(n);
    let mut prev = false;
    for i in 0..n {
        let p = if i == 0 {
            rho
        } else if prev {
            p11
        } else {
            p01
        };
        prev = rng.random::<f64>() < p;
        out.push(prev);
    }
    Ok(out)
}

fn complex_gaussian<T: Scalar, R: Rng + ?Sized>(var: f64, rng: &mut R) -> C<T> {
    let sd = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    cplx(T::lit(re * sd), T::lit(im * sd))
}

/// Rayleigh channel: i.i.d. `CN(0, 1/rho)`.
pub fn gen_channel<T: Scalar, R: Rng + ?Sized>(n: usize, rho: f64, rng: &mut R) -> Result<Vec<C<T>>> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(param_err("activity_rate", format!("need 0 < rho <= 1, got {rho}")));
    }
    Ok((0..n).map(|_| complex_gaussian(1.0 / rho, rng)).collect())
}

/// Geometric singular-value profile summing to `n` with ratio `kappa^(1/m)`.
pub fn singular_profile(n: usize, m: usize, kappa: f64) -> Vec<f64> {
    let q = kappa.powf(1.0 / m as f64);
    let raw: Vec<f64> = (0..m).map(|i| q.powi(-(i as i32))).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v * n as f64 / total).collect()
}

/// Unitary DFT entry `exp(-2πi·jk/n)/√n`.
pub fn dft_entry<T: Scalar>(j: usize, k: usize, n: usize) -> C<T> {
    let jk = (j * k) % n;
    let ang = -2.0 * std::f64::consts::PI * jk as f64 / n as f64;
    let s = 1.0 / (n as f64).sqrt();
    cplx(T::lit(ang.cos() * s), T::lit(ang.sin() * s))
}

/// `A = Λ Π F`: M×N pilot with geometric singular values and permuted DFT right factor.
pub fn build_pilot<T: Scalar, R: Rng + ?Sized>(
    n: usize,
    m: usize,
    kappa: f64,
    rng: &mut R,
) -> Result<(CMatrix<T>, PilotFactors<T>)> {
    if m == 0 || m >= n {
        return Err(param_err("n_measurements", format!("need 0 < M < N, got M={m} N={n}")));
    }
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(param_err("condition_number", format!("need kappa >= 1, got {kappa}")));
    }
    let lambdas = singular_profile(n, m, kappa);
    // Fisher-Yates
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let pilot = CMatrix::from_fn(m, n, |r, k| dft_entry::<T>(perm[r], k, n) * T::lit(lambdas[r]));
    Ok((
        pilot,
        PilotFactors {
            singular_values: lambdas.into_iter().map(T::lit).collect(),
            permutation: perm,
        },
    ))
}

/// Noise variance giving the requested average per-measurement SNR for unit-power `x`.
pub fn noise_variance<T: Scalar>(pilot: &CMatrix<T>, snr_db: f64) -> T {
    if snr_db == f64::INFINITY {
        return T::zero();
    }
    let snr = 10f64.powf(snr_db / 10.0);
    let m = pilot.rows() as f64;
    T::lit(pilot.frobenius_sqr().to_f64_lossy() / (m * snr))
}

/// `y = A x + z`, `z ~ CN(0, σ²I)`. `snr_db = +∞` disables the noise.
pub fn transmit<T: Scalar, R: Rng + ?Sized>(
    pilot: &CMatrix<T>,
    signal: &[C<T>],
    snr_db: f64,
    rng: &mut R,
) -> Result<(Vec<C<T>>, T)> {
    if signal.len() != pilot.cols() {
        return Err(dim_err("transmit", pilot.cols(), signal.len()));
    }
    let sigma2 = noise_variance(pilot, snr_db);
    let mut y = pilot.matvec(signal);
    if sigma2 > T::zero() {
        let var = sigma2.to_f64_lossy();
        for yi in y.iter_mut() {
            *yi += complex_gaussian::<T, _>(var, rng);
        }
    }
    Ok((y, sigma2))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent sub-stream for `(seed, stream, index)`.
pub fn derived_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let s = splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
    ChaCha8Rng::seed_from_u64(s)
}

const SHARED_PILOT_INDEX: u64 = u64::MAX;

fn instance_from_rng<T: Scalar>(
    cfg: &ScenarioConfig,
    shared: Option<&CMatrix<T>>,
    rng: &mut ChaCha8Rng,
) -> Result<Instance<T>> {
    let n = cfg.n_devices;
    let pilot = match shared {
        Some(p) => p.clone(),
        None => build_pilot(n, cfg.n_measurements, cfg.condition_number, rng)?.0,
    };
    let activity = gen_activity(n, cfg.activity_rate, cfg.correlation, rng)?;
    let channel: Vec<C<T>> = gen_channel(n, cfg.activity_rate, rng)?;
    let signal: Vec<C<T>> = activity
        .iter()
        .zip(&channel)
        .map(|(&a, &h)| if a { h } else { Complex::zero() })
        .collect();
    let (observation, noise_var) = transmit(&pilot, &signal, cfg.snr_db, rng)?;
    Ok(Instance {
        pilot,
        activity,
        channel,
        signal,
        observation,
        noise_var,
    })
}

/// Generates `count` instances from sub-stream `stream` of `cfg.seed`.
///
/// Instance `i` depends only on `(cfg, stream, i)`, so generation runs in parallel and the
/// result is identical for any worker count.
pub fn gen_dataset_stream<T: Scalar>(
    cfg: &ScenarioConfig,
    count: usize,
    stream: u64,
) -> Result<Vec<Instance<T>>> {
    cfg.validate()?;
    if count == 0 {
        return Err(param_err("count", "dataset must contain at least one instance"));
    }
    let shared = match cfg.pilot_policy {
        PilotPolicy::Shared => {
            let mut rng = derived_rng(cfg.seed, stream, SHARED_PILOT_INDEX);
            Some(build_pilot::<T, _>(cfg.n_devices, cfg.n_measurements, cfg.condition_number, &mut rng)?.0)
        }
        PilotPolicy::PerInstance => None,
    };
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = derived_rng(cfg.seed, stream, i as u64);
            instance_from_rng(cfg, shared.as_ref(), &mut rng)
        })
        .collect()
}

pub fn gen_dataset<T: Scalar>(cfg: &ScenarioConfig, count: usize) -> Result<Vec<Instance<T>>> {
    gen_dataset_stream(cfg, count, 0)
}
