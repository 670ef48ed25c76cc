//! Decorrelated linear estimation `l = x̂ + D (y − A x̂)` with `D = N / tr(D̂A) · D̂`.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, param_err, Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{Scalar, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeVariant {
    /// `D̂ = Aᴴ`
    MatchedFilter,
    /// `D̂ = Aᴴ (A Aᴴ)⁻¹`
    #[default]
    #[serde(alias = "pinv")]
    PseudoInverse,
    /// `D̂ = τ² Aᴴ (τ² A Aᴴ + σ² I)⁻¹`
    Lmmse,
}

impl LeVariant {
    pub fn depends_on_tau2(self) -> bool {
        matches!(self, LeVariant::Lmmse)
    }
}

/// Scales `d_hat` so that `tr(D A) = N`.
fn normalize<T: Scalar>(d_hat: CMatrix<T>, pilot: &CMatrix<T>) -> Result<CMatrix<T>> {
    let tr = d_hat.matmul(pilot).trace().re;
    if !(tr > T::zero()) || !tr.is_finite() {
        return Err(Error::Singular("decorrelation matrix normalization"));
    }
    Ok(d_hat.scale(T::from_usize_lossy(pilot.cols()) / tr))
}

/// Normalized decorrelation matrix `D` (N×M).
pub fn decorrelation_matrix<T: Scalar>(
    pilot: &CMatrix<T>,
    variant: LeVariant,
    tau2: T,
    sigma2: T,
) -> Result<CMatrix<T>> {
    let d_hat = match variant {
        LeVariant::MatchedFilter => pilot.adjoint(),
        LeVariant::PseudoInverse => {
            let gram = pilot.matmul(&pilot.adjoint());
            gram.solve(pilot)?.adjoint()
        }
        LeVariant::Lmmse => {
            if !(tau2 > T::zero()) {
                return Err(param_err("tau2", "LMMSE estimator requires tau2 > 0"));
            }
            let gram = pilot.matmul(&pilot.adjoint()).scale(tau2).add_diag(sigma2);
            gram.solve(pilot)?.adjoint().scale(tau2)
        }
    };
    normalize(d_hat, pilot)
}

/// `x̂ + D (y − A x̂)`
pub fn apply_le<T: Scalar>(d: &CMatrix<T>, y: &[C<T>], pilot: &CMatrix<T>, x_hat: &[C<T>]) -> Vec<C<T>> {
    let resid: Vec<C<T>> = pilot
        .matvec(x_hat)
        .into_iter()
        .zip(y)
        .map(|(ax, yi)| yi - ax)
        .collect();
    d.matvec(&resid)
        .into_iter()
        .zip(x_hat)
        .map(|(c, x)| x + c)
        .collect()
}

pub fn le_step<T: Scalar>(
    y: &[C<T>],
    pilot: &CMatrix<T>,
    x_hat: &[C<T>],
    variant: LeVariant,
    tau2: T,
    sigma2: T,
) -> Result<Vec<C<T>>> {
    if y.len() != pilot.rows() {
        return Err(dim_err("le_step (y)", pilot.rows(), y.len()));
    }
    if x_hat.len() != pilot.cols() {
        return Err(dim_err("le_step (x_hat)", pilot.cols(), x_hat.len()));
    }
    let d = decorrelation_matrix(pilot, variant, tau2, sigma2)?;
    Ok(apply_le(&d, y, pilot, x_hat))
}

/// `(D, B)`, borrowed when the estimator holds them fixed.
pub type LePair<'a, T> = (Cow<'a, CMatrix<T>>, Cow<'a, CMatrix<T>>);

/// Per-problem cache of `D` and `B = I − D A` for variants that do not depend on `τ²`.
#[derive(Debug, Clone)]
pub struct LinearEstimator<T> {
    pub variant: LeVariant,
    pub sigma2: T,
    fixed: Option<(CMatrix<T>, CMatrix<T>)>,
}

impl<T: Scalar> LinearEstimator<T> {
    pub fn new(pilot: &CMatrix<T>, variant: LeVariant, sigma2: T) -> Result<Self> {
        let fixed = if variant.depends_on_tau2() {
            None
        } else {
            let d = decorrelation_matrix(pilot, variant, T::one(), sigma2)?;
            let b = CMatrix::identity(pilot.cols()).sub(&d.matmul(pilot));
            Some((d, b))
        };
        Ok(Self {
            variant,
            sigma2,
            fixed,
        })
    }

    /// `D` and `B = I − D A` for the given NLE error variance.
    pub fn matrices(&self, pilot: &CMatrix<T>, tau2: T) -> Result<LePair<'_, T>> {
        match &self.fixed {
            Some((d, b)) => Ok((Cow::Borrowed(d), Cow::Borrowed(b))),
            None => {
                let d = decorrelation_matrix(pilot, self.variant, tau2, self.sigma2)?;
                let b = CMatrix::identity(pilot.cols()).sub(&d.matmul(pilot));
                Ok((Cow::Owned(d), Cow::Owned(b)))
            }
        }
    }

    /// Fixed `D` when the variant does not depend on `τ²`.
    pub fn fixed_matrix(&self) -> Option<&CMatrix<T>> {
        self.fixed.as_ref().map(|(d, _)| d)
    }
}

/// Error variance of the LE output given NLE error variance `v2`:
/// `(tr(B Bᴴ) v² + tr(D Dᴴ) σ²) / N`.
pub fn le_output_variance<T: Scalar>(d: &CMatrix<T>, b: &CMatrix<T>, v2: T, sigma2: T) -> T {
    let n = T::from_usize_lossy(b.rows());
    (b.frobenius_sqr() * v2 + d.frobenius_sqr() * sigma2) / n
}

/// `τ̂² = max((‖y − A x̂‖² − M σ²) / tr(Aᴴ A), 1e-9)`
pub fn estimate_tau2<T: Scalar>(y: &[C<T>], pilot: &CMatrix<T>, x_hat: &[C<T>], sigma2: T) -> T {
    let r2 = crate::scalar::norm_sqr(&crate::vqc::residual(y, pilot, x_hat));
    let m = T::from_usize_lossy(pilot.rows());
    let v = (r2 - m * sigma2) / pilot.frobenius_sqr();
    v.max(T::lit(TAU2_FLOOR))
}

pub const TAU2_FLOOR: f64 = 1e-9;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system_model::build_pilot;
    use num_complex::Complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pilot(n: usize, m: usize, kappa: f64) -> CMatrix<f64> {
        build_pilot(n, m, kappa, &mut ChaCha8Rng::seed_from_u64(5)).unwrap().0
    }

    fn x(n: usize) -> Vec<C<f64>> {
        (0..n).map(|i| Complex::new((i as f64 * 0.7).sin(), (i as f64).cos())).collect()
    }

    #[test]
    fn trace_normalization_all_variants() {
        let a = pilot(10, 7, 3.0);
        for v in [LeVariant::MatchedFilter, LeVariant::PseudoInverse, LeVariant::Lmmse] {
            let d = decorrelation_matrix(&a, v, 0.4, 0.01).unwrap();
            let tr = d.matmul(&a).trace();
            assert!((tr.re - 10.0).abs() < 1e-10 && tr.im.abs() < 1e-10, "{v:?}");
        }
    }

    #[test]
    fn exact_estimate_is_fixed_point() {
        let a = pilot(8, 5, 2.0);
        let xs = x(8);
        let y = a.matvec(&xs);
        for v in [LeVariant::MatchedFilter, LeVariant::PseudoInverse, LeVariant::Lmmse] {
            let l = le_step(&y, &a, &xs, v, 0.3, 0.0).unwrap();
            for (li, xi) in l.iter().zip(&xs) {
                assert!((li - xi).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lmmse_requires_positive_tau2() {
        let a = pilot(6, 4, 1.0);
        let y = vec![Complex::new(0.0, 0.0); 4];
        let err = le_step(&y, &a, &x(6), LeVariant::Lmmse, 0.0, 0.1);
        assert!(matches!(err, Err(Error::Parameter { .. })));
    }

    #[test]
    fn pinv_rank_deficient() {
        let mut a = CMatrix::<f64>::zeros(2, 4);
        for k in 0..4 {
            a[(0, k)] = Complex::new(1.0, 0.0);
            a[(1, k)] = Complex::new(2.0, 0.0);
        }
        assert!(matches!(
            decorrelation_matrix(&a, LeVariant::PseudoInverse, 1.0, 0.0),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn tau2_estimator() {
        let a = pilot(10, 7, 1.0);
        let xs = x(10);
        let y = a.matvec(&xs);
        assert_eq!(estimate_tau2(&y, &a, &xs, 0.0), TAU2_FLOOR);
        let mut worse = xs.clone();
        let mut last = 0.0;
        for k in 1..5 {
            worse[0] = xs[0] + Complex::new(0.5 * k as f64, 0.0);
            let t = estimate_tau2(&y, &a, &worse, 0.0);
            assert!(t > last);
            last = t;
        }
    }

    #[test]
    fn cached_matches_direct() {
        let a = pilot(10, 6, 1.0);
        let est = LinearEstimator::new(&a, LeVariant::PseudoInverse, 0.01).unwrap();
        let (d, b) = est.matrices(&a, 0.5).unwrap();
        let direct = decorrelation_matrix(&a, LeVariant::PseudoInverse, 0.5, 0.01).unwrap();
        assert!(d.max_abs_diff(&direct) < 1e-15);
        let want_b = CMatrix::identity(10).sub(&direct.matmul(&a));
        assert!(b.max_abs_diff(&want_b) < 1e-15);
    }
}
