//! End-to-end training of the per-iteration circuit parameters through the unrolled
//! VQC-CS pipeline, under the exponentially weighted MSE loss
//! `C = (1/N) Σ_t ζ^{T−t} ‖x̂ᵗ − x‖²`.
//!
//! Gradients are exact reverse-mode derivatives: every LE map, the residual-energy
//! preparation angle, the embedding, both circuit banks and the scaling denoise are
//! differentiated by hand. Complex gradients use the convention
//! `g = ∂C/∂Re z + i·∂C/∂Im z`, so a linear map `z' = M z` pulls back as `g_z = Mᴴ g_z'`.

use num_complex::Complex;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::linalg::CMatrix;
use crate::postproc::MlpParams;
use crate::quantum::GradientMethod;
use crate::scalar::{norm_sqr, Scalar, C};
use crate::solvers::{LeVariant, LinearEstimator, SolverTrajectory};
use crate::system_model::{derived_rng, Instance, ScenarioConfig};
use crate::vqc::{
    backprop_scaling, embed, scaling_factors_with_jacobian, DenoiserParams, Slot, StatePrep, VqcJacobian,
};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    #[default]
    RmsProp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub decay: f64,
    pub learning_rate: f64,
    pub n_layers: usize,
    pub n_iterations: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub optimizer: Optimizer,
    pub rmsprop_smoothing: f64,
    pub rmsprop_epsilon: f64,
    pub seed: u64,
    /// Fraction of the training data held out for model selection.
    pub validation_fraction: f64,
    /// One parameter set reused by every iteration instead of one per iteration.
    pub share_params: bool,
    pub le_variant: LeVariant,
    pub state_prep: StatePrep,
    pub gradient: GradientMethod,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            decay: 0.85,
            learning_rate: 0.01,
            n_layers: 3,
            n_iterations: 10,
            batch_size: 128,
            epochs: 150,
            optimizer: Optimizer::RmsProp,
            rmsprop_smoothing: 0.9,
            rmsprop_epsilon: 1e-8,
            seed: 1,
            validation_fraction: 0.2,
            share_params: false,
            le_variant: LeVariant::PseudoInverse,
            state_prep: StatePrep::EveryLayer,
            gradient: GradientMethod::Adjoint,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(param_err("decay", "need 0 < decay <= 1"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(param_err("learning_rate", "must be positive"));
        }
        if self.n_layers == 0 {
            return Err(param_err("n_layers", "must be positive"));
        }
        if self.n_iterations == 0 {
            return Err(param_err("n_iterations", "must be positive"));
        }
        if self.batch_size == 0 {
            return Err(param_err("batch_size", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.rmsprop_smoothing) {
            return Err(param_err("rmsprop_smoothing", "need 0 <= beta < 1"));
        }
        if !(self.rmsprop_epsilon > 0.0) {
            return Err(param_err("rmsprop_epsilon", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(param_err("validation_fraction", "need 0 <= fraction < 1"));
        }
        if self.le_variant.depends_on_tau2() {
            return Err(param_err(
                "le_variant",
                "training differentiates fixed linear estimators only (matched-filter, pseudo-inverse)",
            ));
        }
        Ok(())
    }
}

/// `(1/N) Σ_{t=1..T} ζ^{T−t} ‖x̂ᵗ − x‖²` over `nle_estimates[1..]`.
pub fn loss<T: Scalar>(trajectory: &SolverTrajectory<T>, x: &[C<T>], zeta: T) -> T {
    let n = T::from_usize_lossy(x.len());
    let t_total = trajectory.nle_estimates.len() - 1;
    let mut acc = T::zero();
    for (t, est) in trajectory.nle_estimates.iter().enumerate().skip(1) {
        let w = zeta.powi((t_total - t) as i32);
        let e: T = est.iter().zip(x).map(|(a, b)| (a - b).norm_sqr()).sum();
        acc += w * e;
    }
    acc / n
}

/// Loss weights `ζ^{T−t}` for `t = 1..=T`.
pub fn decay_weights<T: Scalar>(zeta: T, iterations: usize) -> Vec<T> {
    (1..=iterations).map(|t| zeta.powi((iterations - t) as i32)).collect()
}

/// One training example with its linear-estimator matrices cached.
#[derive(Debug)]
pub struct Prepared<'a, T> {
    pub instance: &'a Instance<T>,
    d: CMatrix<T>,
    b: CMatrix<T>,
}

impl<'a, T: Scalar> Prepared<'a, T> {
    pub fn new(instance: &'a Instance<T>, variant: LeVariant) -> Result<Self> {
        if variant.depends_on_tau2() {
            return Err(Error::Unsupported(format!("{variant:?} linear estimator in training")));
        }
        let est = LinearEstimator::new(&instance.pilot, variant, instance.noise_var)?;
        let (d, b) = est.matrices(&instance.pilot, T::one())?;
        Ok(Self {
            instance,
            d: d.into_owned(),
            b: b.into_owned(),
        })
    }
}

struct Step<T> {
    resid: Vec<C<T>>,
    resid_energy: T,
    l: Vec<C<T>>,
    r: Vec<T>,
    jac1: VqcJacobian<T>,
    jac2: VqcJacobian<T>,
}

/// Loss and gradient of one instance under per-iteration loss `weights` (`len == T`).
/// `params.len()` must equal `weights.len()`; the returned gradient mirrors `params`.
pub fn instance_gradient<T: Scalar>(
    prep: &Prepared<'_, T>,
    params: &[DenoiserParams<T>],
    weights: &[T],
    method: GradientMethod,
) -> Result<(T, Vec<DenoiserParams<T>>)> {
    let inst = prep.instance;
    let (y, a, x) = (&inst.observation, &inst.pilot, &inst.signal);
    let n = x.len();
    let nt = T::from_usize_lossy(n);
    let pi = T::PI();
    let iterations = weights.len();
    debug_assert_eq!(params.len(), iterations);
    let layout: Vec<Slot> = params[0].vqc_s1.layout();

    // forward
    let mut steps: Vec<Step<T>> = Vec::with_capacity(iterations);
    let mut x_hat: Vec<C<T>> = vec![Complex::zero(); n];
    let mut outputs: Vec<Vec<C<T>>> = Vec::with_capacity(iterations);
    let mut total = T::zero();
    for (t, p) in params.iter().enumerate() {
        let resid = crate::vqc::residual(y, a, &x_hat);
        let resid_energy = norm_sqr(&resid);
        let v2 = pi * (resid_energy / nt).tanh();
        let corr = prep.d.matvec(&resid);
        let l: Vec<C<T>> = x_hat.iter().zip(&corr).map(|(xi, ci)| xi + ci).collect();
        let r = embed(&l);
        let jac1 = scaling_factors_with_jacobian(&r, v2, &p.vqc_s1, &layout, method);
        let jac2 = scaling_factors_with_jacobian(&r, v2, &p.vqc_s2, &layout, method);
        let next: Vec<C<T>> = l
            .iter()
            .zip(jac1.scaling.iter().zip(&jac2.scaling))
            .map(|(li, (&s1, &s2))| li * (s1 / (T::one() + s2)))
            .collect();
        let err: T = next.iter().zip(x).map(|(e, xi)| (e - xi).norm_sqr()).sum();
        total += weights[t] * err;
        if !total.is_finite() {
            return Err(Error::NonFinite(format!("loss at iteration {}", t + 1)));
        }
        x_hat.clone_from(&next);
        steps.push(Step {
            resid,
            resid_energy,
            l,
            r,
            jac1,
            jac2,
        });
        outputs.push(next);
    }
    let loss = total / nt;

    // backward
    let mut grads: Vec<DenoiserParams<T>> = params
        .iter()
        .map(|p| DenoiserParams::zeros(p.n_qubits(), p.n_layers()))
        .collect();
    let two = T::lit(2.0);
    let mut g_x: Vec<C<T>> = vec![Complex::zero(); n];
    for t in (0..iterations).rev() {
        let st = &steps[t];
        let p = &params[t];
        let coef = two * weights[t] / nt;
        for (g, (e, xi)) in g_x.iter_mut().zip(outputs[t].iter().zip(x)) {
            *g += (e - xi) * coef;
        }
        // x̂ᵗ⁺¹ = k ⊙ l
        let mut g_l = vec![Complex::zero(); n];
        let mut g_s1 = vec![T::zero(); n];
        let mut g_s2 = vec![T::zero(); n];
        for i in 0..n {
            let (s1, s2) = (st.jac1.scaling[i], st.jac2.scaling[i]);
            let denom = T::one() + s2;
            let k = s1 / denom;
            g_l[i] = g_x[i] * k;
            let g_k = (g_x[i].conj() * st.l[i]).re;
            g_s1[i] = g_k / denom;
            g_s2[i] = -g_k * s1 / (denom * denom);
        }
        let mut g_r = vec![T::zero(); n];
        let mut flat1 = vec![T::zero(); p.vqc_s1.n_params()];
        let mut flat2 = vec![T::zero(); p.vqc_s2.n_params()];
        let mut g_v2 = backprop_scaling(&st.jac1, &g_s1, &st.r, &p.vqc_s1, &layout, &mut flat1, &mut g_r);
        g_v2 += backprop_scaling(&st.jac2, &g_s2, &st.r, &p.vqc_s2, &layout, &mut flat2, &mut g_r);
        for (dst, src) in grads[t].vqc_s1.iter_mut().zip(flat1) {
            *dst = src;
        }
        for (dst, src) in grads[t].vqc_s2.iter_mut().zip(flat2) {
            *dst = src;
        }
        // r = π tanh(|l|²)
        for i in 0..n {
            let th = st.l[i].norm_sqr().tanh();
            let g_u = g_r[i] * pi * (T::one() - th * th);
            g_l[i] += st.l[i] * (two * g_u);
        }
        // l = B x̂ + D y
        let mut g_in = prep.b.adjoint_matvec(&g_l);
        // ṽ² = π tanh(‖y − A x̂‖²/N)
        let th = (st.resid_energy / nt).tanh();
        let g_e = g_v2 * pi * (T::one() - th * th) / nt;
        if g_e != T::zero() {
            let back = a.adjoint_matvec(&st.resid);
            for (g, bk) in g_in.iter_mut().zip(back) {
                *g -= bk * (two * g_e);
            }
        }
        g_x = g_in;
    }
    Ok((loss, grads))
}

/// Loss only, via the solver path.
pub fn instance_loss<T: Scalar>(
    instance: &Instance<T>,
    params: &[DenoiserParams<T>],
    variant: LeVariant,
    zeta: T,
) -> Result<T> {
    let traj = crate::solvers::vqc_cs(
        &instance.observation,
        &instance.pilot,
        instance.noise_var,
        params,
        params.len(),
        variant,
    )?;
    Ok(loss(&traj, &instance.signal, zeta))
}

/// Mean batch loss and gradient; per-instance terms are reduced in batch order.
pub fn grad_all<T: Scalar>(
    batch: &[&Prepared<'_, T>],
    params: &[DenoiserParams<T>],
    cfg: &TrainConfig,
) -> Result<(T, Vec<DenoiserParams<T>>)> {
    let weights = decay_weights(T::lit(cfg.decay), params.len());
    let parts: Vec<Result<(T, Vec<DenoiserParams<T>>)>> = batch
        .par_iter()
        .map(|p| instance_gradient(p, params, &weights, cfg.gradient))
        .collect();
    let mut total = T::zero();
    let mut acc: Vec<Vec<T>> = params.iter().map(|p| vec![T::zero(); flat_len(p)]).collect();
    for part in parts {
        let (l, g) = part?;
        total += l;
        for (a, gp) in acc.iter_mut().zip(&g) {
            for (dst, v) in a.iter_mut().zip(gp.vqc_s1.iter().chain(gp.vqc_s2.iter())) {
                *dst += *v;
            }
        }
    }
    let inv = T::one() / T::from_usize_lossy(batch.len().max(1));
    let mut out: Vec<DenoiserParams<T>> = params
        .iter()
        .map(|p| DenoiserParams::zeros(p.n_qubits(), p.n_layers()))
        .collect();
    for (o, a) in out.iter_mut().zip(acc) {
        for (dst, v) in o.vqc_s1.iter_mut().chain(o.vqc_s2.iter_mut()).zip(a) {
            *dst = v * inv;
        }
    }
    if !total.is_finite() {
        return Err(Error::NonFinite("batch loss".into()));
    }
    Ok((total * inv, out))
}

fn flat_len<T: Scalar>(p: &DenoiserParams<T>) -> usize {
    p.vqc_s1.n_params() + p.vqc_s2.n_params()
}

pub fn flatten<T: Scalar>(params: &[DenoiserParams<T>]) -> Vec<T> {
    params
        .iter()
        .flat_map(|p| p.vqc_s1.iter().chain(p.vqc_s2.iter()).copied().collect::<Vec<_>>())
        .collect()
}

pub fn unflatten_into<T: Scalar>(params: &mut [DenoiserParams<T>], flat: &[T]) {
    let mut it = flat.iter();
    for p in params.iter_mut() {
        for v in p.vqc_s1.iter_mut().chain(p.vqc_s2.iter_mut()) {
            *v = *it.next().expect("flat vector long enough");
        }
    }
}

/// Root-mean-square propagation state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsProp<T> {
    pub learning_rate: T,
    pub smoothing: T,
    pub epsilon: T,
    pub mean_square: Vec<T>,
}

impl<T: Scalar> RmsProp<T> {
    pub fn new(n: usize, learning_rate: T, smoothing: T, epsilon: T) -> Self {
        Self {
            learning_rate,
            smoothing,
            epsilon,
            mean_square: vec![T::zero(); n],
        }
    }

    /// `v ← βv + (1−β)g²`, `θ ← θ − lr·g/(√v + ε)`
    pub fn step(&mut self, params: &mut [T], grads: &[T]) {
        debug_assert_eq!(params.len(), grads.len());
        let one = T::one();
        for ((p, &g), v) in params.iter_mut().zip(grads).zip(self.mean_square.iter_mut()) {
            *v = self.smoothing * *v + (one - self.smoothing) * g * g;
            *p -= self.learning_rate * g / (v.sqrt() + self.epsilon);
        }
    }
}

pub fn rmsprop_step<T: Scalar>(
    params: &mut [DenoiserParams<T>],
    grads: &[DenoiserParams<T>],
    state: &mut RmsProp<T>,
) {
    let mut flat = flatten(params);
    state.step(&mut flat, &flatten(grads));
    unflatten_into(params, &flat);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

/// Trained model plus the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint<T> {
    pub version: u32,
    pub scenario: ScenarioConfig,
    pub train: TrainConfig,
    /// One entry per solver iteration (a single entry when `train.share_params`).
    pub params: Vec<DenoiserParams<T>>,
    pub loss_history: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    #[serde(default)]
    pub mlp: Option<MlpParams<T>>,
}

impl<T: Scalar> Checkpoint<T> {
    /// Parameter list with one entry per iteration.
    pub fn iteration_params(&self) -> Vec<DenoiserParams<T>> {
        expand(&self.params, self.train.n_iterations, self.train.share_params)
    }

    pub fn validate(&self, scenario: &ScenarioConfig) -> Result<()> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Format(format!(
                "checkpoint version {} (expected {CHECKPOINT_VERSION})",
                self.version
            )));
        }
        let want = if self.train.share_params { 1 } else { self.train.n_iterations };
        if self.params.len() != want {
            return Err(crate::error::dim_err("checkpoint parameter sets", want, self.params.len()));
        }
        for p in &self.params {
            p.validate()?;
            if p.n_qubits() != scenario.n_devices || p.n_layers() != self.train.n_layers {
                return Err(crate::error::dim_err(
                    "checkpoint circuit shape (N x L)",
                    format!("{}x{}", scenario.n_devices, self.train.n_layers),
                    format!("{}x{}", p.n_qubits(), p.n_layers()),
                ));
            }
        }
        Ok(())
    }
}

fn expand<T: Scalar>(params: &[DenoiserParams<T>], iterations: usize, shared: bool) -> Vec<DenoiserParams<T>> {
    if shared {
        vec![params[0].clone(); iterations]
    } else {
        params.to_vec()
    }
}

/// Sums per-iteration gradients onto the single shared parameter set.
fn collapse<T: Scalar>(grads: Vec<DenoiserParams<T>>) -> Vec<DenoiserParams<T>> {
    let mut it = grads.into_iter();
    let mut first = it.next().expect("at least one iteration");
    for g in it {
        for (a, b) in first
            .vqc_s1
            .iter_mut()
            .chain(first.vqc_s2.iter_mut())
            .zip(g.vqc_s1.iter().chain(g.vqc_s2.iter()))
        {
            *a += *b;
        }
    }
    vec![first]
}

#[derive(Debug)]
pub enum TrainError<T> {
    /// Loss or gradient became non-finite; carries the last finite model.
    Diverged {
        epoch: usize,
        reason: String,
        last_finite: Box<Checkpoint<T>>,
    },
    Invalid(Error),
}

impl<T> std::fmt::Display for TrainError<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrainError::Diverged { epoch, reason, .. } => write!(f, "training diverged in epoch {epoch}: {reason}"),
            TrainError::Invalid(e) => write!(f, "{e}"),
        }
    }
}

impl<T: std::fmt::Debug> std::error::Error for TrainError<T> {}

impl<T> From<Error> for TrainError<T> {
    fn from(e: Error) -> Self {
        TrainError::Invalid(e)
    }
}

/// Splits off the trailing validation fraction.
pub fn split_validation<T>(data: &[T], fraction: f64) -> (&[T], &[T]) {
    let n_val = if data.len() < 2 || fraction == 0.0 {
        0
    } else {
        ((data.len() as f64 * fraction).round() as usize).clamp(1, data.len() - 1)
    };
    data.split_at(data.len() - n_val)
}

fn mean_loss<T: Scalar>(items: &[Prepared<'_, T>], params: &[DenoiserParams<T>], cfg: &TrainConfig) -> Result<f64> {
    if items.is_empty() {
        return Ok(f64::NAN);
    }
    let zeta = T::lit(cfg.decay);
    let losses: Vec<Result<T>> = items
        .par_iter()
        .map(|p| instance_loss(p.instance, params, cfg.le_variant, zeta))
        .collect();
    let mut total = 0.0;
    for l in losses {
        total += l?.to_f64_lossy();
    }
    Ok(total / items.len() as f64)
}

/// Optional per-epoch observer `(epoch, train_loss, val_loss)`.
pub type Progress<'a> = &'a mut dyn FnMut(&EpochStats);

/// Mini-batch RMSProp over the unrolled pipeline, keeping the parameters with the best
/// validation loss (the final ones when no validation split is held out).
pub fn train<T: Scalar>(
    dataset: &[Instance<T>],
    cfg: &TrainConfig,
    scenario: &ScenarioConfig,
    mut progress: Option<Progress<'_>>,
) -> std::result::Result<Checkpoint<T>, TrainError<T>> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(param_err("dataset", "training needs at least one instance").into());
    }
    let n = dataset[0].n_devices();
    let prepared: Vec<Prepared<'_, T>> = dataset
        .iter()
        .map(|d| Prepared::new(d, cfg.le_variant))
        .collect::<Result<_>>()?;
    let (train_set, val_set) = split_validation(&prepared, cfg.validation_fraction);

    let mut rng = derived_rng(cfg.seed, 0x7EA1, 0);
    let n_sets = if cfg.share_params { 1 } else { cfg.n_iterations };
    let mut params: Vec<DenoiserParams<T>> = (0..n_sets)
        .map(|_| {
            let mut p = DenoiserParams::random(n, cfg.n_layers, &mut rng);
            p.vqc_s1.state_prep = cfg.state_prep;
            p.vqc_s2.state_prep = cfg.state_prep;
            p
        })
        .collect();
    let n_flat = flatten(&params).len();
    let mut opt = RmsProp::new(
        n_flat,
        T::lit(cfg.learning_rate),
        T::lit(cfg.rmsprop_smoothing),
        T::lit(cfg.rmsprop_epsilon),
    );

    let snapshot = |params: &[DenoiserParams<T>], history: &[EpochStats], best_epoch: usize, best: f64| Checkpoint {
        version: CHECKPOINT_VERSION,
        scenario: scenario.clone(),
        train: cfg.clone(),
        params: params.to_vec(),
        loss_history: history.to_vec(),
        best_epoch,
        best_val_loss: best,
        mlp: None,
    };

    let expanded = expand(&params, cfg.n_iterations, cfg.share_params);
    let init = EpochStats {
        epoch: 0,
        train_loss: mean_loss(train_set, &expanded, cfg)?,
        val_loss: mean_loss(val_set, &expanded, cfg)?,
    };
    if let Some(cb) = progress.as_mut() {
        cb(&init);
    }
    let mut history = vec![init];
    let mut best = (init.val_loss, 0usize, params.clone());

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=cfg.epochs {
        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        let mut seen = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Prepared<'_, T>> = chunk.iter().map(|&i| &train_set[i]).collect();
            let expanded = expand(&params, cfg.n_iterations, cfg.share_params);
            let (l, grads) = match grad_all(&batch, &expanded, cfg) {
                Ok(v) => v,
                Err(e) => {
                    return Err(TrainError::Diverged {
                        epoch,
                        reason: e.to_string(),
                        last_finite: Box::new(snapshot(&params, &history, best.1, best.0)),
                    })
                }
            };
            let grads = if cfg.share_params { collapse(grads) } else { grads };
            let before = params.clone();
            rmsprop_step(&mut params, &grads, &mut opt);
            if flatten(&params).iter().any(|v| !v.is_finite()) {
                return Err(TrainError::Diverged {
                    epoch,
                    reason: "non-finite parameter after update".into(),
                    last_finite: Box::new(snapshot(&before, &history, best.1, best.0)),
                });
            }
            epoch_loss += l.to_f64_lossy() * chunk.len() as f64;
            seen += chunk.len();
        }
        let expanded = expand(&params, cfg.n_iterations, cfg.share_params);
        let stats = EpochStats {
            epoch,
            train_loss: epoch_loss / seen.max(1) as f64,
            val_loss: mean_loss(val_set, &expanded, cfg)?,
        };
        if let Some(cb) = progress.as_mut() {
            cb(&stats);
        }
        history.push(stats);
        let score = if val_set.is_empty() { stats.train_loss } else { stats.val_loss };
        if score < best.0 || best.0.is_nan() {
            best = (score, epoch, params.clone());
        }
    }
    Ok(snapshot(&best.2, &history, best.1, best.0))
}

/// Trains once per seed and keeps the checkpoint with the lowest validation loss.
pub fn train_best_of<T: Scalar>(
    dataset: &[Instance<T>],
    cfg: &TrainConfig,
    scenario: &ScenarioConfig,
    seeds: &[u64],
) -> std::result::Result<Checkpoint<T>, TrainError<T>> {
    let mut best: Option<Checkpoint<T>> = None;
    for &seed in seeds {
        let run_cfg = TrainConfig { seed, ..cfg.clone() };
        let ck = train(dataset, &run_cfg, scenario, None)?;
        if best.as_ref().is_none_or(|b| ck.best_val_loss < b.best_val_loss) {
            best = Some(ck);
        }
    }
    best.ok_or_else(|| param_err("seeds", "need at least one training seed").into())
}
