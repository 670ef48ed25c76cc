use nalgebra::DMatrix;
use num_complex::Complex64 as Z;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqccs::linalg::CMatrix;
use vqccs::metrics::mse;
use vqccs::solvers::{
    decorrelation_matrix, fista, ista, le_step, oamp, vqc_cs, LeVariant, OampReadout,
};
use vqccs::system_model::{dft_entry, gen_dataset, ScenarioConfig};
use vqccs::vqc::DenoiserParams;

fn to_na(a: &CMatrix<f64>) -> DMatrix<nalgebra::Complex<f64>> {
    DMatrix::from_fn(a.rows(), a.cols(), |r, c| nalgebra::Complex::new(a[(r, c)].re, a[(r, c)].im))
}

#[test]
fn pseudo_inverse_step_is_scaled_least_squares() {
    let cfg = ScenarioConfig {
        snr_db: f64::INFINITY,
        ..Default::default()
    };
    for inst in gen_dataset::<f64>(&cfg, 20).unwrap() {
        let zero = vec![Z::new(0.0, 0.0); 10];
        let l = le_step(&inst.observation, &inst.pilot, &zero, LeVariant::PseudoInverse, 1.0, 0.0).unwrap();
        let pinv = to_na(&inst.pilot).pseudo_inverse(1e-12).unwrap();
        let y = nalgebra::DVector::from_iterator(7, inst.observation.iter().map(|z| nalgebra::Complex::new(z.re, z.im)));
        let ls = pinv * y;
        let scale = 10.0 / 7.0;
        for (a, b) in l.iter().zip(ls.iter()) {
            assert!((a - Z::new(b.re, b.im) * scale).norm() < 1e-10);
        }
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> CMatrix<f64> {
    CMatrix::from_fn(m, n, |_, _| Z::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

proptest! {
    #[test]
    fn trace_normalization_holds(seed in any::<u64>(), m in 2usize..8, extra in 1usize..6, tau2 in 1e-3f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, m, m + extra);
        for v in [LeVariant::MatchedFilter, LeVariant::PseudoInverse, LeVariant::Lmmse] {
            let d = decorrelation_matrix(&a, v, tau2, 0.01).unwrap();
            let tr = d.matmul(&a).trace();
            prop_assert!((tr.re - (m + extra) as f64).abs() < 1e-10 && tr.im.abs() < 1e-10);
        }
    }

    #[test]
    fn vqc_estimate_never_exceeds_linear_estimate(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = ScenarioConfig { seed, ..Default::default() };
        let inst = gen_dataset::<f64>(&cfg, 1).unwrap().remove(0);
        let params: Vec<_> = (0..4).map(|_| {
            let mut p = DenoiserParams::<f64>::random(10, 2, &mut rng);
            for v in p.vqc_s1.iter_mut() { *v += rng.random_range(-2.0..2.0); }
            p
        }).collect();
        let t = vqc_cs(&inst.observation, &inst.pilot, inst.noise_var, &params, 4, LeVariant::PseudoInverse).unwrap();
        for k in 0..4 {
            for (x, l) in t.nle_estimates[k + 1].iter().zip(&t.le_estimates[k]) {
                prop_assert!(x.norm() <= l.norm() * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn oamp_solves_square_noiseless_systems() {
    let n = 10;
    let a = CMatrix::from_fn(n, n, |r, c| dft_entry::<f64>(r, c, n));
    let cfg = ScenarioConfig::default();
    for inst in gen_dataset::<f64>(&cfg, 50).unwrap() {
        let y = a.matvec(&inst.signal);
        let t = oamp(&y, &a, 0.2, 0.0, 10, LeVariant::PseudoInverse, OampReadout::Posterior).unwrap();
        assert!(mse(t.final_estimate(), &inst.signal) < 1e-4);
    }
}

/// Instances without active devices start at zero error and are excluded; a step may rise
/// by at most 5% of the initial error.
#[test]
fn oamp_improves_early_on_most_instances() {
    let cfg = ScenarioConfig::default();
    let data = gen_dataset::<f64>(&cfg, 2000).unwrap();
    let active: Vec<_> = data.iter().filter(|i| i.activity.iter().any(|&a| a)).collect();
    let monotone = active
        .iter()
        .filter(|inst| {
            let t = oamp(&inst.observation, &inst.pilot, 0.2, inst.noise_var, 3, LeVariant::PseudoInverse, OampReadout::Posterior)
                .unwrap();
            let c = t.mse_curve(&inst.signal);
            c.windows(2).all(|w| w[1] <= w[0] + 0.05 * c[0])
        })
        .count();
    let frac = monotone as f64 / active.len() as f64;
    assert!(frac >= 0.9, "{frac}");
}

#[test]
fn solvers_are_pure() {
    let cfg = ScenarioConfig::default();
    let inst = gen_dataset::<f64>(&cfg, 1).unwrap().remove(0);
    let run_all = || {
        (
            ista(&inst.observation, &inst.pilot, 0.01, 10).unwrap(),
            fista(&inst.observation, &inst.pilot, 0.01, 10).unwrap(),
            oamp(&inst.observation, &inst.pilot, 0.2, inst.noise_var, 10, LeVariant::PseudoInverse, OampReadout::Posterior).unwrap(),
        )
    };
    assert_eq!(run_all(), run_all());
}

#[test]
fn trajectories_hold_initial_estimate_plus_one_per_iteration() {
    let cfg = ScenarioConfig::default();
    let inst = gen_dataset::<f64>(&cfg, 1).unwrap().remove(0);
    let t = fista(&inst.observation, &inst.pilot, 0.01, 7).unwrap();
    assert_eq!(t.nle_estimates.len(), 8);
    assert_eq!(t.le_estimates.len(), 7);
    assert_eq!(t.mse_curve(&inst.signal).len(), 8);
    assert_eq!(t.iterations, 7);
}
