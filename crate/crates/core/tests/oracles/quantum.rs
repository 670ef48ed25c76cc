use num_complex::Complex64 as Z;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqccs::quantum::{
    apply, evolve, expect_z, expectation_with_angle_grads, expectation_with_shift_grads, param_shift_grad,
    rotation_matrix, run_circuit, Axis, Binding, QubitCircuit, QubitState, RotationGate,
};

pub const AXES: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

/// exp(−iθσ/2) built from the Pauli matrices directly.
pub fn oracle_gate(axis: Axis, theta: f64) -> [[Z; 2]; 2] {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let pauli = match axis {
        Axis::X => [[Z::new(0.0, 0.0), Z::new(1.0, 0.0)], [Z::new(1.0, 0.0), Z::new(0.0, 0.0)]],
        Axis::Y => [[Z::new(0.0, 0.0), Z::new(0.0, -1.0)], [Z::new(0.0, 1.0), Z::new(0.0, 0.0)]],
        Axis::Z => [[Z::new(1.0, 0.0), Z::new(0.0, 0.0)], [Z::new(0.0, 0.0), Z::new(-1.0, 0.0)]],
    };
    let mut m = [[Z::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for k in 0..2 {
            let id = if r == k { c } else { 0.0 };
            m[r][k] = Z::new(id, 0.0) - Z::new(0.0, s) * pauli[r][k];
        }
    }
    m
}

/// Applies a one-qubit gate to `qubit` of a dense 2^n statevector.
pub fn apply_dense(psi: &mut [Z], n: usize, qubit: usize, g: &[[Z; 2]; 2]) {
    let bit = 1 << (n - 1 - qubit);
    for idx in 0..psi.len() {
        if idx & bit == 0 {
            let (a, b) = (psi[idx], psi[idx | bit]);
            psi[idx] = g[0][0] * a + g[0][1] * b;
            psi[idx | bit] = g[1][0] * a + g[1][1] * b;
        }
    }
}

pub fn dense_expect_z(psi: &[Z], n: usize, qubit: usize) -> f64 {
    let bit = 1 << (n - 1 - qubit);
    psi.iter()
        .enumerate()
        .map(|(idx, a)| if idx & bit == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}

pub fn random_gates(rng: &mut ChaCha8Rng, len: usize) -> Vec<RotationGate<f64>> {
    (0..len)
        .map(|_| RotationGate::new(AXES[rng.random_range(0..3)], rng.random_range(-2.0 * std::f64::consts::PI..2.0 * std::f64::consts::PI)))
        .collect()
}

pub fn product_simulation_matches_dense_statevector() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 3;
    for _ in 0..20 {
        let per_qubit: Vec<Vec<RotationGate<f64>>> = (0..n).map(|_| {
            let len = rng.random_range(1..15);
            random_gates(&mut rng, len)
        }).collect();
        let mut psi = vec![Z::new(0.0, 0.0); 1 << n];
        psi[0] = Z::new(1.0, 0.0);
        // interleave qubits gate by gate; local gates commute across qubits
        let longest = per_qubit.iter().map(Vec::len).max().unwrap();
        for k in 0..longest {
            for (q, gates) in per_qubit.iter().enumerate() {
                if let Some(g) = gates.get(k) {
                    apply_dense(&mut psi, n, q, &oracle_gate(g.axis, g.angle));
                }
            }
        }
        for (q, gates) in per_qubit.iter().enumerate() {
            let got = expect_z(&evolve(gates));
            assert!((got - dense_expect_z(&psi, n, q)).abs() < 1e-12);
        }
    }
}

pub fn gate_matrices_match_pauli_exponential_and_are_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let axis = AXES[rng.random_range(0..3)];
        let theta: f64 = rng.random_range(-10.0..10.0);
        let m = rotation_matrix(axis, theta);
        let o = oracle_gate(axis, theta);
        for r in 0..2 {
            for c in 0..2 {
                assert!((m[r][c] - o[r][c]).norm() < 1e-12);
                let uu: Z = (0..2).map(|k| m[k][r].conj() * m[k][c]).sum();
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((uu - Z::new(want, 0.0)).norm() < 1e-12);
            }
        }
    }
}

pub fn long_circuits_preserve_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let mut s = QubitState::<f64>::zero();
        for g in random_gates(&mut rng, 50) {
            s = apply(s, g);
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }
}

pub fn adjoint_and_shift_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-6;
    for _ in 0..100 {
        let len = rng.random_range(1..12);
        let gates = random_gates(&mut rng, len);
        let (m_adj, g_adj) = expectation_with_angle_grads(&gates);
        let (m_sh, g_sh) = expectation_with_shift_grads(&gates);
        assert!((m_adj - m_sh).abs() < 1e-12);
        for k in 0..gates.len() {
            let mut plus = gates.clone();
            plus[k].angle += h;
            let mut minus = gates.clone();
            minus[k].angle -= h;
            let fd = (expect_z(&evolve(&plus)) - expect_z(&evolve(&minus))) / (2.0 * h);
            assert!((g_sh[k] - fd).abs() < 1e-6, "shift {k}: {} vs {fd}", g_sh[k]);
            assert!((g_adj[k] - g_sh[k]).abs() < 1e-12);
        }
    }
}

pub fn bound_circuit_shift_rule_handles_shared_and_weighted_parameters() {
    let mut c = QubitCircuit::<f64>::new();
    c.push(Axis::X, Binding::Input(0))
        .push(Axis::Y, Binding::WeightedInput { input: 1, param: 0 })
        .push(Axis::Z, Binding::Param(1))
        .push(Axis::Y, Binding::Param(0))
        .push(Axis::X, Binding::Fixed(0.3));
    let params = [0.7, -1.1];
    let data = [0.4, 1.9];
    let (_, grads, _) = c.gradients(&params, &data).unwrap();
    let h = 1e-6;
    for k in 0..params.len() {
        let mut p = params;
        p[k] += h;
        let up = run_circuit(&c, &p, &data).unwrap();
        p[k] -= 2.0 * h;
        let down = run_circuit(&c, &p, &data).unwrap();
        let fd = (up - down) / (2.0 * h);
        let shift = param_shift_grad(&c, &params, &data, k).unwrap();
        assert!((shift - fd).abs() < 1e-6);
        assert!((grads[k] - fd).abs() < 1e-6);
    }
}

/// Z expectations stay in [−1, 1] on random circuits of up to 24 gates.
pub fn expectation_bounded_on_random_circuits(count: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..count {
        let len = rng.random_range(0..25);
        let m = expect_z(&evolve(&random_gates(&mut rng, len)));
        assert!((-1.0..=1.0).contains(&m), "{m}");
    }
}
