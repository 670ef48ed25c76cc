//! Channel-estimation and detection metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Scalar, C};

/// `(1/N)‖x̂ − x‖²`
pub fn mse<T: Scalar>(x_hat: &[C<T>], x: &[C<T>]) -> T {
    debug_assert_eq!(x_hat.len(), x.len());
    let n = T::from_usize_lossy(x.len().max(1));
    x_hat.iter().zip(x).map(|(a, b)| (a - b).norm_sqr()).sum::<T>() / n
}

pub fn to_db<T: Scalar>(v: T) -> T {
    T::lit(10.0) * v.log10()
}

/// Running mean of per-iteration curves, summed in insertion order.
#[derive(Debug, Clone, Default)]
pub struct CurveMean {
    sum: Vec<f64>,
    count: usize,
}

impl CurveMean {
    pub fn add<T: Scalar>(&mut self, curve: &[T]) {
        if self.sum.len() < curve.len() {
            self.sum.resize(curve.len(), 0.0);
        }
        for (s, v) in self.sum.iter_mut().zip(curve) {
            *s += v.to_f64_lossy();
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> Vec<f64> {
        let c = self.count.max(1) as f64;
        self.sum.iter().map(|s| s / c).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// `+∞` for the point where nothing is classified active.
    #[serde(with = "crate::scalar::extended_f64")]
    pub threshold: f64,
}

/// ROC over all distinct thresholds (ties form a single step) and its trapezoidal area.
pub fn roc_auc<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<(Vec<RocPoint>, f64)> {
    if scores.len() != labels.len() {
        return Err(crate::error::dim_err("roc_auc", scores.len(), labels.len()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric("ROC needs both positive and negative labels"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].to_f64_lossy().total_cmp(&scores[a].to_f64_lossy()));
    let (p, n) = (pos as f64, neg as f64);
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut k = 0;
    while k < order.len() {
        let thr = scores[order[k]].to_f64_lossy();
        while k < order.len() && scores[order[k]].to_f64_lossy() == thr {
            if labels[order[k]] {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let prev = *points.last().expect("non-empty");
        let cur = RocPoint {
            fpr: fp as f64 / n,
            tpr: tp as f64 / p,
            threshold: thr,
        };
        auc += (cur.fpr - prev.fpr) * (cur.tpr + prev.tpr) / 2.0;
        points.push(cur);
    }
    Ok((points, auc))
}

/// Persisted result of one evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Solver name → mean MSE for iterations `0..=T`.
    pub mse: Vec<(String, Vec<f64>)>,
    /// Solver name → (ROC points, AUC).
    pub roc: Vec<(String, Vec<RocPoint>, f64)>,
    pub samples: usize,
    pub config_hash: String,
    pub tool_version: String,
}

impl MetricsReport {
    pub fn auc(&self, solver: &str) -> Option<f64> {
        self.roc.iter().find(|(s, _, _)| s == solver).map(|r| r.2)
    }

    pub fn mse_curve(&self, solver: &str) -> Option<&[f64]> {
        self.mse.iter().find(|(s, _)| s == solver).map(|(_, c)| c.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    #[test]
    fn roc_points_round_trip_through_json() {
        let (points, _) = roc_auc(&[0.9, 0.1, 0.5], &[true, false, true]).unwrap();
        assert_eq!(points[0].threshold, f64::INFINITY);
        let json = serde_json::to_string(&points).unwrap();
        assert_eq!(serde_json::from_str::<Vec<RocPoint>>(&json).unwrap(), points);
    }

    #[test]
    fn mse_cases() {
        let x = vec![Complex::new(1.0, 2.0), Complex::new(0.0, 0.0)];
        assert_eq!(mse(&x, &x), 0.0);
        let xh = vec![Complex::new(2.0, 2.0), Complex::new(0.0, 1.0)];
        assert_eq!(mse(&xh, &x), 1.0);
        assert_eq!(to_db(0.1_f64), -10.0);
    }

    #[test]
    fn auc_cases() {
        let (_, a) = roc_auc(&[0.9, 0.4, 0.6, 0.1], &[true, false, true, false]).unwrap();
        assert_eq!(a, 1.0);
        let (_, a) = roc_auc(&[0.9, 0.6, 0.4, 0.1], &[true, false, true, false]).unwrap();
        assert!((a - 0.75).abs() < 1e-15);
        let (pts, a) = roc_auc(&[0.3; 6], &[true, false, true, false, false, true]).unwrap();
        assert_eq!(a, 0.5);
        assert_eq!(pts.len(), 2);
    }

    #[test]
    fn single_class_is_undefined() {
        assert!(matches!(roc_auc(&[0.1, 0.2], &[true, true]), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn curve_mean() {
        let mut m = CurveMean::default();
        m.add(&[1.0, 2.0]);
        m.add(&[3.0, 4.0]);
        assert_eq!(m.mean(), vec![2.0, 3.0]);
    }
}
