//! Bernoulli–Gaussian posterior-mean denoiser and its divergence-free correction.
//!
//! Prior: `x = 0` w.p. `1 − ρ`, `x ~ CN(0, 1/ρ)` w.p. `ρ`; observation `l = x + CN(0, τ²)`.

use crate::error::{param_err, Error, Result};
use crate::scalar::{Scalar, C};

/// Posterior mean and its per-element divergence `(∂Re x̂/∂Re l + ∂Im x̂/∂Im l)/2`.
#[inline]
pub fn posterior_mean<T: Scalar>(l: C<T>, tau2: T, rho: T) -> (C<T>, T) {
    let one = T::one();
    let sx2 = one / rho;
    let total = sx2 + tau2;
    let gain = sx2 / total;
    let u = l.norm_sqr();
    // log-odds of the active component: ln(ρ/(1−ρ)) − ln(total/τ²) + c·u
    let c = one / tau2 - one / total;
    let logit = (rho / (one - rho)).ln() - (total / tau2).ln() + c * u;
    let pi = one / (one + (-logit).exp());
    let f = pi * gain;
    let div = f * (one + (one - pi) * c * u);
    (l * f, div)
}

/// Elementwise posterior mean and the averaged divergence.
pub fn mmse_denoise<T: Scalar>(l: &[C<T>], tau2: T, rho: T) -> Result<(Vec<C<T>>, T)> {
    if !(tau2 > T::zero()) {
        return Err(param_err("tau2", "MMSE denoiser requires tau2 > 0"));
    }
    if !(rho > T::zero() && rho <= T::one()) {
        return Err(param_err("activity_rate", "need 0 < rho <= 1"));
    }
    if rho == T::one() {
        let gain = T::one() / (T::one() + tau2);
        return Ok((l.iter().map(|z| z * gain).collect(), gain));
    }
    let mut out = Vec::with_capacity(l.len());
    let mut div = T::zero();
    for &z in l {
        let (x, d) = posterior_mean(z, tau2, rho);
        out.push(x);
        div += d;
    }
    Ok((out, div / T::from_usize_lossy(l.len().max(1))))
}

/// `(η(l) − div·l) / (1 − div)` for an arbitrary denoiser returning `(η(l), div)`.
pub fn divergence_free<T: Scalar>(l: &[C<T>], eta: &[C<T>], div: T) -> Result<Vec<C<T>>> {
    let denom = T::one() - div;
    if !(denom.abs() > T::lit(1e-12)) {
        return Err(Error::DegenerateDenoiser(div.to_f64_lossy()));
    }
    let p = T::one() / denom;
    Ok(eta.iter().zip(l).map(|(e, z)| (e - z * div) * p).collect())
}

/// Divergence-free NLE built on the posterior-mean denoiser.
pub fn oamp_nle<T: Scalar>(l: &[C<T>], tau2: T, rho: T) -> Result<Vec<C<T>>> {
    let (eta, div) = mmse_denoise(l, tau2, rho)?;
    divergence_free(l, &eta, div)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    #[test]
    fn zero_input_maps_to_zero() {
        let (x, _) = mmse_denoise(&[Complex::new(0.0, 0.0)], 0.3, 0.2).unwrap();
        assert_eq!(x[0], Complex::new(0.0, 0.0));
    }

    #[test]
    fn dense_prior_is_wiener() {
        let l = [Complex::new(1.5, -0.5), Complex::new(-0.2, 0.1)];
        let (x, div) = mmse_denoise(&l, 0.25, 1.0).unwrap();
        let g: f64 = 1.0 / 1.25;
        assert!((x[0] - l[0] * g).norm() < 1e-15);
        assert!((div - g).abs() < 1e-15);
    }

    #[test]
    fn bad_tau2() {
        assert!(mmse_denoise(&[Complex::new(1.0, 0.0)], 0.0, 0.2).is_err());
        assert!(oamp_nle(&[Complex::new(1.0, 0.0)], -1.0, 0.2).is_err());
    }

    #[test]
    fn identity_denoiser_is_degenerate() {
        let l = [Complex::new(1.0, 2.0), Complex::new(0.3, 0.0)];
        let err = divergence_free(&l, &l, 1.0);
        assert!(matches!(err, Err(Error::DegenerateDenoiser(_))));
    }

    #[test]
    fn zero_divergence_denoiser_passes_through() {
        let l = [Complex::new(1.0, 2.0), Complex::new(0.3, 0.0)];
        let eta = [Complex::new(0.5, 0.5), Complex::new(-1.0, 0.0)];
        assert_eq!(divergence_free(&l, &eta, 0.0).unwrap(), eta.to_vec());
    }

    #[test]
    fn divergence_matches_finite_difference() {
        let h = 1e-6;
        for &(re, im, tau2, rho) in &[(0.3f64, -0.7f64, 0.2f64, 0.2f64), (2.0, 1.0, 0.05, 0.1), (0.0, 0.1, 1.5, 0.6)] {
            let l = Complex::new(re, im);
            let (_, d) = posterior_mean(l, tau2, rho);
            let dre = (posterior_mean(l + Complex::new(h, 0.0), tau2, rho).0.re
                - posterior_mean(l - Complex::new(h, 0.0), tau2, rho).0.re)
                / (2.0 * h);
            let dim = (posterior_mean(l + Complex::new(0.0, h), tau2, rho).0.im
                - posterior_mean(l - Complex::new(0.0, h), tau2, rho).0.im)
                / (2.0 * h);
            assert!((d - 0.5 * (dre + dim)).abs() < 1e-7);
        }
    }
}
