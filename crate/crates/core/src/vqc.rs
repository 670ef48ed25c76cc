//! Variational-circuit denoiser: embeds the linear estimate into rotation angles, runs one
//! data re-uploading circuit per device and turns the Z expectations into shrinkage gains.
//!
//! Layer template for qubit `i` (application order):
//! `R_X(v²)`, `R_Y(r_1·w_i1) … R_Y(r_N·w_iN)`, `R_Z(a_iℓ)`, `R_Y(b_iℓ)`, `R_Z(c_iℓ)`.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, param_err, Result};
use crate::linalg::CMatrix;
use crate::quantum::{self, Axis, Binding, GradientMethod, QubitCircuit, RotationGate};
use crate::scalar::{Scalar, C};

/// Placement of the residual-energy `R_X` gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatePrep {
    /// Re-uploaded at the start of every layer.
    #[default]
    EveryLayer,
    /// Only at the start of the first layer.
    FirstLayer,
}

/// Trainable quantities of one circuit bank (one gain producer at one solver iteration).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqcParams<T> {
    pub n_qubits: usize,
    pub n_layers: usize,
    /// Row-major N×N; entry `(i, j)` scales input `r_j` on qubit `i`.
    pub input_weights: Vec<T>,
    /// Row-major N×L banks of the trailing Z, Y, Z rotations.
    pub angles_a: Vec<T>,
    pub angles_b: Vec<T>,
    pub angles_c: Vec<T>,
    #[serde(default)]
    pub state_prep: StatePrep,
}

/// Position of a gate inside one qubit's circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Prep,
    Data(usize),
    A(usize),
    B(usize),
    C(usize),
}

impl<T: Scalar> VqcParams<T> {
    pub fn zeros(n_qubits: usize, n_layers: usize) -> Self {
        Self {
            n_qubits,
            n_layers,
            input_weights: vec![T::zero(); n_qubits * n_qubits],
            angles_a: vec![T::zero(); n_qubits * n_layers],
            angles_b: vec![T::zero(); n_qubits * n_layers],
            angles_c: vec![T::zero(); n_qubits * n_layers],
            state_prep: StatePrep::EveryLayer,
        }
    }

    /// Weights `~ N(0, (π/2N)²)`, angles `~ U(−0.1, 0.1)`.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, n_layers: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(n_qubits, n_layers);
        let sd = std::f64::consts::PI / (2.0 * n_qubits as f64);
        let normal = Normal::new(0.0, sd).expect("positive sd");
        let uni = Uniform::new(-0.1, 0.1).expect("non-empty range");
        for w in p.input_weights.iter_mut() {
            *w = T::lit(normal.sample(rng));
        }
        for bank in [&mut p.angles_a, &mut p.angles_b, &mut p.angles_c] {
            for v in bank.iter_mut() {
                *v = T::lit(uni.sample(rng));
            }
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let (n, l) = (self.n_qubits, self.n_layers);
        if self.input_weights.len() != n * n {
            return Err(dim_err("VqcParams.input_weights", n * n, self.input_weights.len()));
        }
        for (name, bank) in [
            ("VqcParams.angles_a", &self.angles_a),
            ("VqcParams.angles_b", &self.angles_b),
            ("VqcParams.angles_c", &self.angles_c),
        ] {
            if bank.len() != n * l {
                return Err(dim_err(name, n * l, bank.len()));
            }
        }
        if self.iter().any(|v| !v.is_finite()) {
            return Err(param_err("vqc_params", "non-finite entry"));
        }
        Ok(())
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> T {
        self.input_weights[i * self.n_qubits + j]
    }

    pub fn n_params(&self) -> usize {
        self.n_qubits * self.n_qubits + 3 * self.n_qubits * self.n_layers
    }

    /// Flat view ordered `[w, a, b, c]`.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.input_weights
            .iter()
            .chain(&self.angles_a)
            .chain(&self.angles_b)
            .chain(&self.angles_c)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.input_weights
            .iter_mut()
            .chain(self.angles_a.iter_mut())
            .chain(self.angles_b.iter_mut())
            .chain(self.angles_c.iter_mut())
    }

    pub fn to_flat(&self) -> Vec<T> {
        self.iter().copied().collect()
    }

    /// Flat index of a slot's trainable parameter on qubit `i`, if it has one.
    fn flat_index(&self, i: usize, slot: Slot) -> Option<usize> {
        let (n, l) = (self.n_qubits, self.n_layers);
        match slot {
            Slot::Prep => None,
            Slot::Data(j) => Some(i * n + j),
            Slot::A(k) => Some(n * n + i * l + k),
            Slot::B(k) => Some(n * n + n * l + i * l + k),
            Slot::C(k) => Some(n * n + 2 * n * l + i * l + k),
        }
    }

    /// Gate slots of any qubit, in application order.
    pub fn layout(&self) -> Vec<Slot> {
        let mut slots = Vec::with_capacity(self.n_layers * (self.n_qubits + 4));
        for layer in 0..self.n_layers {
            if layer == 0 || self.state_prep == StatePrep::EveryLayer {
                slots.push(Slot::Prep);
            }
            slots.extend((0..self.n_qubits).map(Slot::Data));
            slots.extend([Slot::A(layer), Slot::B(layer), Slot::C(layer)]);
        }
        slots
    }

    fn slot_gate(&self, i: usize, slot: Slot, r: &[T], v2: T) -> RotationGate<T> {
        let l = self.n_layers;
        match slot {
            Slot::Prep => RotationGate::new(Axis::X, v2),
            Slot::Data(j) => RotationGate::new(Axis::Y, r[j] * self.weight(i, j)),
            Slot::A(k) => RotationGate::new(Axis::Z, self.angles_a[i * l + k]),
            Slot::B(k) => RotationGate::new(Axis::Y, self.angles_b[i * l + k]),
            Slot::C(k) => RotationGate::new(Axis::Z, self.angles_c[i * l + k]),
        }
    }

    /// Resolved gates of qubit `i` for inputs `r` and preparation angle `v2`.
    pub fn qubit_gates(&self, i: usize, layout: &[Slot], r: &[T], v2: T) -> Vec<RotationGate<T>> {
        layout.iter().map(|&s| self.slot_gate(i, s, r, v2)).collect()
    }
}

/// The pair of circuit banks producing `s1` and `s2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiserParams<T> {
    pub vqc_s1: VqcParams<T>,
    pub vqc_s2: VqcParams<T>,
}

impl<T: Scalar> DenoiserParams<T> {
    pub fn random<R: Rng + ?Sized>(n: usize, n_layers: usize, rng: &mut R) -> Self {
        Self {
            vqc_s1: VqcParams::random(n, n_layers, rng),
            vqc_s2: VqcParams::random(n, n_layers, rng),
        }
    }

    pub fn zeros(n: usize, n_layers: usize) -> Self {
        Self {
            vqc_s1: VqcParams::zeros(n, n_layers),
            vqc_s2: VqcParams::zeros(n, n_layers),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.vqc_s1.validate()?;
        self.vqc_s2.validate()?;
        if (self.vqc_s1.n_qubits, self.vqc_s1.n_layers) != (self.vqc_s2.n_qubits, self.vqc_s2.n_layers) {
            return Err(dim_err(
                "DenoiserParams",
                format!("{}x{}", self.vqc_s1.n_qubits, self.vqc_s1.n_layers),
                format!("{}x{}", self.vqc_s2.n_qubits, self.vqc_s2.n_layers),
            ));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.vqc_s1.n_qubits
    }

    pub fn n_layers(&self) -> usize {
        self.vqc_s1.n_layers
    }
}

/// `r_i = π·tanh(|l_i|²)`
pub fn embed<T: Scalar>(l: &[C<T>]) -> Vec<T> {
    l.iter().map(|z| T::PI() * z.norm_sqr().tanh()).collect()
}

/// Residual energy `‖y − A x̂‖²` of an estimate.
pub fn residual<T: Scalar>(y: &[C<T>], pilot: &CMatrix<T>, x_hat: &[C<T>]) -> Vec<C<T>> {
    pilot
        .matvec(x_hat)
        .into_iter()
        .zip(y)
        .map(|(ax, yi)| yi - ax)
        .collect()
}

/// `ṽ² = π·tanh(‖y − A x̂‖² / N)`
pub fn prep_angle<T: Scalar>(y: &[C<T>], pilot: &CMatrix<T>, x_hat: &[C<T>]) -> T {
    let e2 = crate::scalar::norm_sqr(&residual(y, pilot, x_hat));
    T::PI() * (e2 / T::from_usize_lossy(pilot.cols())).tanh()
}

/// Circuit for qubit `i`, bound to the flat `[w, a, b, c]` parameter vector of `params`
/// and to the data vector `[r_1, …, r_N, ṽ²]`.
pub fn build_qubit_circuit<T: Scalar>(i: usize, params: &VqcParams<T>) -> Result<QubitCircuit<T>> {
    let n = params.n_qubits;
    if i >= n {
        return Err(param_err("qubit", format!("index {i} out of range for {n} qubits")));
    }
    let mut circuit = QubitCircuit::new();
    for slot in params.layout() {
        let gate = params.slot_gate(i, slot, &vec![T::zero(); n], T::zero());
        let binding = match slot {
            Slot::Prep => Binding::Input(n),
            Slot::Data(j) => Binding::WeightedInput {
                input: j,
                param: params.flat_index(i, slot).expect("data slot has weight"),
            },
            _ => Binding::Param(params.flat_index(i, slot).expect("angle slot has param")),
        };
        circuit.push(gate.axis, binding);
    }
    Ok(circuit)
}

/// `s_i = (m_i + 1)/2` with `m_i` the exact Z expectation of qubit `i`.
pub fn scaling_factors<T: Scalar>(r: &[T], v2: T, params: &VqcParams<T>) -> Vec<T> {
    let layout = params.layout();
    let half = T::lit(0.5);
    (0..params.n_qubits)
        .map(|i| {
            let state = quantum::evolve(&params.qubit_gates(i, &layout, r, v2));
            (quantum::expect_z(&state) + T::one()) * half
        })
        .collect()
}

/// As [`scaling_factors`] but each expectation estimated from `shots` samples.
pub fn scaling_factors_sampled<T: Scalar, R: Rng + ?Sized>(
    r: &[T],
    v2: T,
    params: &VqcParams<T>,
    shots: u32,
    rng: &mut R,
) -> Vec<T> {
    let layout = params.layout();
    let half = T::lit(0.5);
    (0..params.n_qubits)
        .map(|i| {
            let state = quantum::evolve(&params.qubit_gates(i, &layout, r, v2));
            (quantum::sample_expect_z(&state, shots, rng) + T::one()) * half
        })
        .collect()
}

/// Forward values plus `∂m_i/∂angle` for every gate of every qubit; consumed by backprop.
#[derive(Debug, Clone)]
pub struct VqcJacobian<T> {
    pub scaling: Vec<T>,
    /// Row-major N × (gates per qubit).
    pub angle_grads: Vec<T>,
    pub gates_per_qubit: usize,
}

pub fn scaling_factors_with_jacobian<T: Scalar>(
    r: &[T],
    v2: T,
    params: &VqcParams<T>,
    layout: &[Slot],
    method: GradientMethod,
) -> VqcJacobian<T> {
    let n = params.n_qubits;
    let g = layout.len();
    let half = T::lit(0.5);
    let mut scaling = Vec::with_capacity(n);
    let mut angle_grads = Vec::with_capacity(n * g);
    for i in 0..n {
        let (m, dm) = method.expectation_and_grads(&params.qubit_gates(i, layout, r, v2));
        scaling.push((m + T::one()) * half);
        angle_grads.extend(dm);
    }
    VqcJacobian {
        scaling,
        angle_grads,
        gates_per_qubit: g,
    }
}

/// Pulls `∂C/∂s` back to the flat parameters (accumulated into `grad_params`), the
/// embedded inputs `r` (accumulated into `grad_r`), and returns `∂C/∂ṽ²`.
#[allow(clippy::too_many_arguments)]
pub fn backprop_scaling<T: Scalar>(
    jac: &VqcJacobian<T>,
    grad_s: &[T],
    r: &[T],
    params: &VqcParams<T>,
    layout: &[Slot],
    grad_params: &mut [T],
    grad_r: &mut [T],
) -> T {
    let half = T::lit(0.5);
    let mut grad_v2 = T::zero();
    for (i, &gs) in grad_s.iter().enumerate() {
        let gm = gs * half;
        if gm == T::zero() {
            continue;
        }
        let row = &jac.angle_grads[i * jac.gates_per_qubit..(i + 1) * jac.gates_per_qubit];
        for (&slot, &dm) in layout.iter().zip(row) {
            let g = gm * dm;
            match slot {
                Slot::Prep => grad_v2 += g,
                Slot::Data(j) => {
                    grad_params[i * params.n_qubits + j] += g * r[j];
                    grad_r[j] += g * params.weight(i, j);
                }
                other => {
                    let k = params.flat_index(i, other).expect("angle slot");
                    grad_params[k] += g;
                }
            }
        }
    }
    grad_v2
}

/// `x̂_i = s1_i / (1 + s2_i) · l_i`
pub fn denoise<T: Scalar>(l: &[C<T>], s1: &[T], s2: &[T]) -> Vec<C<T>> {
    l.iter()
        .zip(s1.iter().zip(s2))
        .map(|(li, (&a, &b))| {
            let gain = a / (T::one() + b);
            if gain == T::zero() {
                Complex::zero()
            } else {
                li * gain
            }
        })
        .collect()
}
