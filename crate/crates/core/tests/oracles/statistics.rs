use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vqccs::solvers::estimate_tau2;
use vqccs::system_model::{build_pilot, gen_activity, gen_channel, gen_dataset, singular_profile, ScenarioConfig};
use vqccs::{metrics, C};

pub fn activity_autocorrelation_is_geometric() {
    let (rho, gamma) = (0.2, 0.6);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a: Vec<f64> = gen_activity(1_000_000, rho, gamma, &mut rng)
        .unwrap()
        .into_iter()
        .map(|b| b as u8 as f64)
        .collect();
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    assert!((mean - rho).abs() < 0.005);
    let var = a.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / a.len() as f64;
    for d in 1..=5 {
        let cov = a.iter().zip(&a[d..]).map(|(x, y)| (x - mean) * (y - mean)).sum::<f64>() / (a.len() - d) as f64;
        let corr = cov / var;
        assert!((corr - gamma.powi(d as i32)).abs() < 0.01, "lag {d}: {corr}");
    }
}

pub fn channel_variance_is_inverse_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h: Vec<C<f64>> = gen_channel(1_000_000, 0.2, &mut rng).unwrap();
    let p = h.iter().map(|z| z.norm_sqr()).sum::<f64>() / h.len() as f64;
    assert!((p - 5.0).abs() < 0.05, "{p}");
}

pub fn measured_snr_matches_configuration() {
    let cfg = ScenarioConfig::default();
    let data = gen_dataset::<f64>(&cfg, 50_000).unwrap();
    let (mut sig, mut noise) = (0.0, 0.0);
    for inst in &data {
        let clean = inst.pilot.matvec(&inst.signal);
        sig += clean.iter().map(|z| z.norm_sqr()).sum::<f64>();
        noise += clean.iter().zip(&inst.observation).map(|(c, y)| (y - c).norm_sqr()).sum::<f64>();
    }
    let snr_db = 10.0 * (sig / noise).log10();
    assert!((snr_db - cfg.snr_db).abs() < 0.1, "{snr_db}");
}

pub fn signal_covariance_is_identity() {
    let cfg = ScenarioConfig::default();
    let data = gen_dataset::<f64>(&cfg, 50_000).unwrap();
    let n = cfg.n_devices;
    let mut cov = vec![C::new(0.0, 0.0); n * n];
    for inst in &data {
        for i in 0..n {
            for j in 0..n {
                cov[i * n + j] += inst.signal[i] * inst.signal[j].conj();
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let v = cov[i * n + j] / data.len() as f64;
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((v - C::new(want, 0.0)).norm() < 0.05, "({i},{j}) {v}");
        }
    }
}

pub fn zero_estimate_statistics() {
    let cfg = ScenarioConfig::default();
    let data = gen_dataset::<f64>(&cfg, 10_000).unwrap();
    let zero = vec![C::new(0.0, 0.0); cfg.n_devices];
    let mut tau2 = 0.0;
    let mut mse = 0.0;
    for inst in &data {
        tau2 += estimate_tau2(&inst.observation, &inst.pilot, &zero, inst.noise_var);
        mse += metrics::mse(&zero, &inst.signal);
    }
    let n = data.len() as f64;
    assert!((tau2 / n - 1.0).abs() < 0.05);
    assert!((mse / n - 1.0).abs() < 0.05);
}

pub fn pilot_singular_values_are_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for &(n, m, kappa) in &[(10, 7, 1.0), (10, 6, 10.0), (16, 5, 100.0), (32, 20, 3.0)] {
        let (a, f) = build_pilot::<f64, _>(n, m, kappa, &mut rng).unwrap();
        let dense = DMatrix::from_fn(m, n, |r, c| {
            let z = a[(r, c)];
            nalgebra::Complex::new(z.re, z.im)
        });
        let mut sv: Vec<f64> = dense.svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let want = singular_profile(n, m, kappa);
        for (s, w) in sv.iter().zip(&want) {
            assert!((s - w).abs() < 1e-9, "{s} vs {w}");
        }
        assert!((want.iter().sum::<f64>() - n as f64).abs() < 1e-9);
        assert!((want[0] / want[m - 1] - kappa.powf((m - 1) as f64 / m as f64)).abs() < 1e-9);
        assert_eq!(f.singular_values, want);
    }
}
