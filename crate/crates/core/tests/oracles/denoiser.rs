use num_complex::Complex64 as Z;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use vqccs::solvers::{divergence_free, mmse_denoise, oamp_nle};

/// Posterior mean under the Bernoulli–Gaussian prior by midpoint quadrature over the
/// complex plane. The spike at zero contributes only to the normalizer.
pub fn quadrature_posterior_mean(l: Z, tau2: f64, rho: f64) -> Z {
    let sx2 = 1.0 / rho;
    let tau = tau2.sqrt();
    let half = 10.0 * tau;
    let n = 400;
    let step = 2.0 * half / n as f64;
    let lik = |x: Z| (-(l - x).norm_sqr() / tau2).exp() / (PI * tau2);
    let mut mass = 0.0;
    let mut first = Z::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            let x = l + Z::new(-half + (a as f64 + 0.5) * step, -half + (b as f64 + 0.5) * step);
            let w = (-x.norm_sqr() / sx2).exp() / (PI * sx2) * lik(x) * step * step;
            mass += w;
            first += x * w;
        }
    }
    let spike = (1.0 - rho) * lik(Z::new(0.0, 0.0));
    first * rho / (spike + rho * mass)
}

pub fn posterior_mean_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let rho = rng.random_range(0.05..0.6);
        let tau2 = rng.random_range(0.02..1.0);
        let r = rng.random_range(0.0..3.0);
        let phase = rng.random_range(0.0..2.0 * PI);
        let l = Z::from_polar(r, phase);
        let (x, _) = mmse_denoise(&[l], tau2, rho).unwrap();
        let q = quadrature_posterior_mean(l, tau2, rho);
        let rel = (x[0] - q).norm() / q.norm().max(1e-300);
        assert!(rel < 1e-6, "l={l} tau2={tau2} rho={rho}: {} vs {q} (rel {rel:e})", x[0]);
    }
}

pub fn random_input(rng: &mut ChaCha8Rng, n: usize, rho: f64, tau2: f64) -> Vec<Z> {
    (0..n)
        .map(|_| {
            let g = |rng: &mut ChaCha8Rng| {
                let u: f64 = rng.random_range(1e-12..1.0);
                let v: f64 = rng.random_range(0.0..2.0 * PI);
                Z::from_polar((-u.ln()).sqrt(), v)
            };
            let x = if rng.random_bool(rho) { g(rng) * (1.0 / rho).sqrt() } else { Z::new(0.0, 0.0) };
            x + g(rng) * tau2.sqrt()
        })
        .collect()
}

/// `(1/N) Σ ½(∂Re f_i/∂Re l_i + ∂Im f_i/∂Im l_i)` by central differences.
pub fn empirical_divergence(l: &[Z], f: impl Fn(&[Z]) -> Vec<Z>) -> f64 {
    let h = 1e-6;
    let mut total = 0.0;
    let mut work = l.to_vec();
    for i in 0..l.len() {
        for dir in [Z::new(h, 0.0), Z::new(0.0, h)] {
            work[i] = l[i] + dir;
            let up = f(&work)[i];
            work[i] = l[i] - dir;
            let down = f(&work)[i];
            work[i] = l[i];
            let d = (up - down) / (2.0 * h);
            total += if dir.re != 0.0 { d.re } else { d.im };
        }
    }
    total / (2.0 * l.len() as f64)
}

pub fn corrected_output_has_zero_divergence_at_frozen_average() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let rho = rng.random_range(0.1..0.4);
        let tau2 = rng.random_range(0.05..0.8);
        let l = random_input(&mut rng, 10, rho, tau2);
        let (_, div) = mmse_denoise(&l, tau2, rho).unwrap();
        let f = |v: &[Z]| {
            let (eta, _) = mmse_denoise(v, tau2, rho).unwrap();
            divergence_free(v, &eta, div).unwrap()
        };
        let d = empirical_divergence(&l, f);
        assert!(d.abs() < 1e-3, "divergence {d}");
    }
}

pub fn nle_divergence_vanishes_for_large_dimension() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let rho = rng.random_range(0.1..0.4);
        let tau2 = rng.random_range(0.05..0.8);
        let l = random_input(&mut rng, 1000, rho, tau2);
        let d = empirical_divergence(&l, |v| oamp_nle(v, tau2, rho).unwrap());
        assert!(d.abs() < 1e-3, "divergence {d}");
    }
}
