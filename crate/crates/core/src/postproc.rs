//! Post-processing perceptron mapping final estimate magnitudes `|x̂ᵀ|` to activity
//! probabilities: `N → 4N → 2N → N`, ReLU hidden layers, logistic output, BCE objective.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, param_err, Error, Result};
use crate::scalar::Scalar;
use crate::training::RmsProp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams<T> {
    /// Layer widths, input first.
    pub sizes: Vec<usize>,
    /// Row-major `(out × in)` weight matrix per layer.
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<Vec<T>>,
}

impl<T: Scalar> MlpParams<T> {
    pub fn zeros(sizes: &[usize]) -> Self {
        Self {
            sizes: sizes.to_vec(),
            weights: sizes.windows(2).map(|w| vec![T::zero(); w[0] * w[1]]).collect(),
            biases: sizes.windows(2).map(|w| vec![T::zero(); w[1]]).collect(),
        }
    }

    /// Detector shape for `n` devices.
    pub fn detector_sizes(n: usize) -> Vec<usize> {
        vec![n, 4 * n, 2 * n, n]
    }

    /// He-uniform weights, zero biases.
    pub fn random<R: rand::Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        let mut p = Self::zeros(sizes);
        for (w, win) in p.weights.iter_mut().zip(sizes.windows(2)) {
            let bound = (6.0 / win[0] as f64).sqrt();
            let dist = Uniform::new(-bound, bound).expect("non-empty range");
            for v in w.iter_mut() {
                *v = T::lit(dist.sample(rng));
            }
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.len() < 2 || self.weights.len() != self.sizes.len() - 1 || self.biases.len() != self.weights.len() {
            return Err(dim_err("MlpParams layers", self.sizes.len().saturating_sub(1), self.weights.len()));
        }
        for (k, win) in self.sizes.windows(2).enumerate() {
            if self.weights[k].len() != win[0] * win[1] || self.biases[k].len() != win[1] {
                return Err(dim_err("MlpParams layer shape", win[0] * win[1], self.weights[k].len()));
            }
        }
        Ok(())
    }

    fn n_params(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>() + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    fn flatten(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.n_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }

    fn unflatten(&mut self, flat: &[T]) {
        let mut off = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            let (nw, nb) = (w.len(), b.len());
            w.copy_from_slice(&flat[off..off + nw]);
            off += nw;
            b.copy_from_slice(&flat[off..off + nb]);
            off += nb;
        }
    }
}

#[inline]
fn sigmoid<T: Scalar>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

fn affine<T: Scalar>(w: &[T], b: &[T], x: &[T]) -> Vec<T> {
    let n_in = x.len();
    b.iter()
        .enumerate()
        .map(|(o, &bo)| bo + w[o * n_in..(o + 1) * n_in].iter().zip(x).map(|(a, c)| *a * *c).sum::<T>())
        .collect()
}

/// Pre-activations of every layer.
fn forward_trace<T: Scalar>(features: &[T], params: &MlpParams<T>) -> Vec<Vec<T>> {
    let last = params.weights.len() - 1;
    let mut acts = vec![features.to_vec()];
    for (k, (w, b)) in params.weights.iter().zip(&params.biases).enumerate() {
        let z = affine(w, b, acts.last().expect("non-empty"));
        let a = if k == last {
            z.iter().map(|&v| sigmoid(v)).collect()
        } else {
            z.iter().map(|&v| v.max(T::zero())).collect()
        };
        acts.push(a);
    }
    acts
}

pub fn mlp_forward<T: Scalar>(features: &[T], params: &MlpParams<T>) -> Vec<T> {
    forward_trace(features, params).pop().expect("output layer")
}

pub const PROB_CLAMP: f64 = 1e-12;

/// `−(1/N) Σ [a log p + (1−a) log(1−p)]`, with `p` clamped to `[1e-12, 1 − 1e-12]`.
pub fn bce_loss<T: Scalar>(probs: &[T], labels: &[bool]) -> T {
    let lo = T::lit(PROB_CLAMP);
    let hi = T::one() - lo;
    let n = T::from_usize_lossy(probs.len().max(1));
    -probs
        .iter()
        .zip(labels)
        .map(|(&p, &a)| {
            let p = p.max(lo).min(hi);
            if a {
                p.ln()
            } else {
                (T::one() - p).ln()
            }
        })
        .sum::<T>()
        / n
}

/// BCE of one example and its gradient w.r.t. the flattened parameters.
pub fn example_gradient<T: Scalar>(features: &[T], labels: &[bool], params: &MlpParams<T>) -> (T, Vec<T>) {
    let acts = forward_trace(features, params);
    let out = acts.last().expect("output");
    let loss = bce_loss(out, labels);
    let n = T::from_usize_lossy(out.len());
    // logistic + BCE: ∂/∂z = (p − a)/N
    let mut delta: Vec<T> = out
        .iter()
        .zip(labels)
        .map(|(&p, &a)| (p - if a { T::one() } else { T::zero() }) / n)
        .collect();
    let mut gw: Vec<Vec<T>> = Vec::with_capacity(params.weights.len());
    let mut gb: Vec<Vec<T>> = Vec::with_capacity(params.weights.len());
    for k in (0..params.weights.len()).rev() {
        let input = &acts[k];
        let n_in = input.len();
        let mut w_grad = vec![T::zero(); delta.len() * n_in];
        for (o, &d) in delta.iter().enumerate() {
            for (j, &x) in input.iter().enumerate() {
                w_grad[o * n_in + j] = d * x;
            }
        }
        let next: Vec<T> = if k > 0 {
            (0..n_in)
                .map(|j| {
                    if input[j] > T::zero() {
                        delta
                            .iter()
                            .enumerate()
                            .map(|(o, &d)| d * params.weights[k][o * n_in + j])
                            .sum()
                    } else {
                        T::zero()
                    }
                })
                .collect()
        } else {
            Vec::new()
        };
        gb.push(delta);
        gw.push(w_grad);
        delta = next;
    }
    gw.reverse();
    gb.reverse();
    let mut flat = Vec::with_capacity(params.n_params());
    for (w, b) in gw.iter().zip(&gb) {
        flat.extend_from_slice(w);
        flat.extend_from_slice(b);
    }
    (loss, flat)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MlpHyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub smoothing: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for MlpHyper {
    fn default() -> Self {
        Self {
            learning_rate: 0.005,
            epochs: 200,
            batch_size: 64,
            smoothing: 0.9,
            epsilon: 1e-8,
            seed: 1,
        }
    }
}

/// Mean BCE over a dataset.
pub fn dataset_loss<T: Scalar>(features: &[Vec<T>], labels: &[Vec<bool>], params: &MlpParams<T>) -> T {
    let n = T::from_usize_lossy(features.len().max(1));
    features
        .iter()
        .zip(labels)
        .map(|(f, l)| bce_loss(&mlp_forward(f, params), l))
        .sum::<T>()
        / n
}

/// Mini-batch RMSProp on BCE. Returns the parameters and the per-epoch mean loss,
/// entry 0 being the loss before training.
pub fn train_mlp<T: Scalar>(
    features: &[Vec<T>],
    labels: &[Vec<bool>],
    hyper: &MlpHyper,
) -> Result<(MlpParams<T>, Vec<f64>)> {
    if features.is_empty() {
        return Err(param_err("features", "MLP training needs at least one example"));
    }
    if features.len() != labels.len() {
        return Err(dim_err("train_mlp labels", features.len(), labels.len()));
    }
    if hyper.batch_size == 0 {
        return Err(param_err("batch_size", "must be positive"));
    }
    let n = features[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut params = MlpParams::random(&MlpParams::<T>::detector_sizes(n), &mut rng);
    let mut flat = params.flatten();
    let mut opt = RmsProp::new(
        flat.len(),
        T::lit(hyper.learning_rate),
        T::lit(hyper.smoothing),
        T::lit(hyper.epsilon),
    );
    let mut history = vec![dataset_loss(features, labels, &params).to_f64_lossy()];
    let mut order: Vec<usize> = (0..features.len()).collect();
    for epoch in 1..=hyper.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(hyper.batch_size) {
            let mut grad = vec![T::zero(); flat.len()];
            for &i in chunk {
                let (l, g) = example_gradient(&features[i], &labels[i], &params);
                total += l.to_f64_lossy();
                for (a, b) in grad.iter_mut().zip(g) {
                    *a += b;
                }
            }
            let inv = T::one() / T::from_usize_lossy(chunk.len());
            grad.iter_mut().for_each(|g| *g *= inv);
            opt.step(&mut flat, &grad);
            if flat.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("MLP parameters in epoch {epoch}")));
            }
            params.unflatten(&flat);
        }
        let mean = total / features.len() as f64;
        if !mean.is_finite() {
            return Err(Error::NonFinite(format!("MLP loss in epoch {epoch}")));
        }
        history.push(mean);
    }
    Ok((params, history))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weights_give_half() {
        let p = MlpParams::<f64>::zeros(&MlpParams::<f64>::detector_sizes(3));
        assert!(mlp_forward(&[1.0, -2.0, 5.0], &p).iter().all(|&v| v == 0.5));
    }

    #[test]
    fn hand_evaluated_unit_weights() {
        let mut p = MlpParams::<f64>::zeros(&[1, 4, 2, 1]);
        for w in p.weights.iter_mut() {
            w.iter_mut().for_each(|v| *v = 1.0);
        }
        // hidden1 = [1;4], hidden2 = [4;2], output = σ(8)
        let out = mlp_forward(&[1.0], &p);
        assert!((out[0] - 1.0 / (1.0 + (-8.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn bce_cases() {
        assert!((bce_loss(&[0.5, 0.5], &[true, false]) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(bce_loss(&[1.0, 0.0], &[true, false]) < 1e-11);
        let probs = [0.2, 0.7, 0.9];
        let labels = [false, true, false];
        let manual = -((0.8f64).ln() + (0.7f64).ln() + (0.1f64).ln()) / 3.0;
        assert!((bce_loss(&probs, &labels) - manual).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = MlpParams::<f64>::random(&MlpParams::<f64>::detector_sizes(3), &mut rng);
        let f = [0.3, 1.4, 0.05];
        let l = [false, true, false];
        let (_, g) = example_gradient(&f, &l, &p);
        let base = p.flatten();
        let h = 1e-6;
        for k in 0..base.len() {
            let mut q = p.clone();
            let mut v = base.clone();
            v[k] += h;
            q.unflatten(&v);
            let up = bce_loss(&mlp_forward(&f, &q), &l);
            v[k] -= 2.0 * h;
            q.unflatten(&v);
            let dn = bce_loss(&mlp_forward(&f, &q), &l);
            let fd = (up - dn) / (2.0 * h);
            assert!((fd - g[k]).abs() <= 1e-4 * fd.abs().max(1e-4), "param {k}: {fd} vs {}", g[k]);
        }
    }

    #[test]
    fn separable_toy_problem() {
        let features: Vec<Vec<f64>> = (0..64)
            .map(|i| vec![if i % 2 == 0 { 2.0 } else { 0.05 }, if i % 3 == 0 { 1.5 } else { 0.1 }])
            .collect();
        let labels: Vec<Vec<bool>> = features.iter().map(|f| f.iter().map(|&v| v > 1.0).collect()).collect();
        let hyper = MlpHyper {
            epochs: 150,
            batch_size: 16,
            learning_rate: 0.01,
            ..Default::default()
        };
        let (p, hist) = train_mlp(&features, &labels, &hyper).unwrap();
        assert!(hist.last().unwrap() < &hist[0]);
        let mut correct = 0;
        for (f, l) in features.iter().zip(&labels) {
            for (pr, &lab) in mlp_forward(f, &p).iter().zip(l) {
                if (*pr > 0.5) == lab {
                    correct += 1;
                }
            }
        }
        assert_eq!(correct, 128);
        let again = train_mlp(&features, &labels, &hyper).unwrap();
        assert_eq!(again.0, p);
    }
}
