use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use vqccs::quantum::GradientMethod;
use vqccs::solvers::LeVariant;
use vqccs::system_model::{gen_dataset, ScenarioConfig};
use vqccs::training::{decay_weights, flatten, instance_gradient, instance_loss, unflatten_into, Prepared};
use vqccs::vqc::{DenoiserParams, VqcParams};
use vqccs::Instance64;

pub const N: usize = 4;
pub const M: usize = 3;
pub const L: usize = 2;
pub const T: usize = 3;
pub const ZETA: f64 = 0.85;

pub fn toy_instance(seed: u64) -> Instance64 {
    let cfg = ScenarioConfig {
        n_devices: N,
        n_measurements: M,
        activity_rate: 0.5,
        seed,
        ..Default::default()
    };
    gen_dataset(&cfg, 1).unwrap().remove(0)
}

/// Random parameters spread wide enough that no gradient entry is trivially small.
pub fn toy_params(rng: &mut ChaCha8Rng) -> Vec<DenoiserParams<f64>> {
    (0..T)
        .map(|_| {
            let mut p = DenoiserParams::<f64>::random(N, L, rng);
            for v in p.vqc_s1.iter_mut().chain(p.vqc_s2.iter_mut()) {
                *v += rng.random_range(-1.0..1.0);
            }
            p
        })
        .collect()
}

pub fn every_gradient_entry_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..3 {
        let inst = toy_instance(100 + trial);
        let prep = Prepared::new(&inst, LeVariant::PseudoInverse).unwrap();
        let params = toy_params(&mut rng);
        let weights = decay_weights(ZETA, T);
        let (loss, grads) = instance_gradient(&prep, &params, &weights, GradientMethod::Adjoint).unwrap();
        let direct = instance_loss(&inst, &params, LeVariant::PseudoInverse, ZETA).unwrap();
        assert!((loss - direct).abs() < 1e-12 * (1.0 + direct));

        let flat = flatten(&params);
        let g = flatten(&grads);
        let h = 1e-5;
        let mut work = params.clone();
        for k in 0..flat.len() {
            let mut f = flat.clone();
            f[k] = flat[k] + h;
            unflatten_into(&mut work, &f);
            let up = instance_loss(&inst, &work, LeVariant::PseudoInverse, ZETA).unwrap();
            f[k] = flat[k] - h;
            unflatten_into(&mut work, &f);
            let down = instance_loss(&inst, &work, LeVariant::PseudoInverse, ZETA).unwrap();
            let fd = (up - down) / (2.0 * h);
            let rel = (g[k] - fd).abs() / fd.abs().max(1e-6);
            assert!(rel < 1e-4, "entry {k}: analytic {} vs fd {fd}", g[k]);
        }
    }
}

pub fn adjoint_and_parameter_shift_backprop_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inst = toy_instance(7);
    let prep = Prepared::new(&inst, LeVariant::MatchedFilter).unwrap();
    let params = toy_params(&mut rng);
    let weights = decay_weights(ZETA, T);
    let (la, ga) = instance_gradient(&prep, &params, &weights, GradientMethod::Adjoint).unwrap();
    let (ls, gs) = instance_gradient(&prep, &params, &weights, GradientMethod::ParameterShift).unwrap();
    assert!((la - ls).abs() < 1e-12);
    for (a, s) in flatten(&ga).iter().zip(flatten(&gs)) {
        assert!((a - s).abs() < 1e-10);
    }
}

pub fn later_parameters_ignore_earlier_loss_terms() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let inst = toy_instance(3);
    let prep = Prepared::new(&inst, LeVariant::PseudoInverse).unwrap();
    let params = toy_params(&mut rng);
    for cut in 1..T {
        // only loss terms x̂¹..x̂^cut contribute; params[cut..] act after them
        let weights: Vec<f64> = (1..=T).map(|s| if s <= cut { 1.0 } else { 0.0 }).collect();
        let (_, grads) = instance_gradient(&prep, &params, &weights, GradientMethod::Adjoint).unwrap();
        for g in &grads[cut..] {
            assert!(g.vqc_s1.iter().chain(g.vqc_s2.iter()).all(|&v| v == 0.0));
        }
        assert!(grads[cut - 1].vqc_s1.iter().any(|&v| v != 0.0));
    }
}

pub fn pinned_bank(flip: bool) -> VqcParams<f64> {
    let mut p = VqcParams::zeros(N, 2);
    for i in 0..N {
        p.angles_a[i * 2] = PI;
        if flip {
            p.angles_b[i * 2 + 1] = PI;
        }
    }
    p
}

pub fn exact_estimates_give_zero_gradient() {
    let cfg = ScenarioConfig {
        n_devices: N,
        n_measurements: M,
        activity_rate: 0.01,
        seed: 4,
        ..Default::default()
    };
    let inst = gen_dataset::<f64>(&cfg, 64)
        .unwrap()
        .into_iter()
        .find(|i| i.activity.iter().all(|a| !a))
        .expect("an all-inactive instance");
    let prep = Prepared::new(&inst, LeVariant::PseudoInverse).unwrap();
    // s1 = 0 pins every estimate to zero, which is the true signal
    let p = DenoiserParams {
        vqc_s1: pinned_bank(true),
        vqc_s2: pinned_bank(false),
    };
    let params = vec![p; T];
    let (loss, grads) = instance_gradient(&prep, &params, &decay_weights(ZETA, T), GradientMethod::Adjoint).unwrap();
    assert!(loss < 1e-28);
    assert!(flatten(&grads).iter().all(|g| g.abs() < 1e-12));
}
