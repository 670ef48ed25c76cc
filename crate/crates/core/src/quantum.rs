//! Single-qubit rotation-circuit simulator.
//!
//! The ansatz used by the denoiser has no entangling gates, so each qubit evolves
//! independently and a circuit is just a chain of 2×2 unitaries acting on `|0⟩`.
//! Gates are listed in application order: `gates[0]` acts first.

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cplx, Scalar, C};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `q0|0⟩ + q1|1⟩`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState<T> {
    pub amp0: C<T>,
    pub amp1: C<T>,
}

impl<T: Scalar> QubitState<T> {
    pub fn zero() -> Self {
        Self {
            amp0: Complex::one(),
            amp1: Complex::zero(),
        }
    }

    pub fn one() -> Self {
        Self {
            amp0: Complex::zero(),
            amp1: Complex::one(),
        }
    }

    /// Bloch-sphere state `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    pub fn from_bloch(theta: T, phi: T) -> Self {
        let half = theta / T::lit(2.0);
        Self {
            amp0: cplx(half.cos(), T::zero()),
            amp1: Complex::from_polar(half.sin(), phi),
        }
    }

    /// Polar and azimuthal Bloch angles, discarding global phase.
    pub fn to_bloch(&self) -> (T, T) {
        let theta = T::lit(2.0) * self.amp1.norm().atan2(self.amp0.norm());
        let phi = self.amp1.arg() - self.amp0.arg();
        let two_pi = T::lit(2.0) * T::PI();
        let phi = ((phi % two_pi) + two_pi) % two_pi;
        (theta, phi)
    }

    pub fn norm_sqr(&self) -> T {
        self.amp0.norm_sqr() + self.amp1.norm_sqr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationGate<T> {
    pub axis: Axis,
    pub angle: T,
}

impl<T: Scalar> RotationGate<T> {
    pub fn new(axis: Axis, angle: T) -> Self {
        Self { axis, angle }
    }

    pub fn matrix(&self) -> [[C<T>; 2]; 2] {
        rotation_matrix(self.axis, self.angle)
    }
}

/// Half-angle rotation matrices `R_X`, `R_Y`, `R_Z`.
pub fn rotation_matrix<T: Scalar>(axis: Axis, angle: T) -> [[C<T>; 2]; 2] {
    let half = angle / T::lit(2.0);
    let (s, c) = half.sin_cos();
    let z = T::zero();
    match axis {
        Axis::X => [[cplx(c, z), cplx(z, -s)], [cplx(z, -s), cplx(c, z)]],
        Axis::Y => [[cplx(c, z), cplx(-s, z)], [cplx(s, z), cplx(c, z)]],
        Axis::Z => [[cplx(c, -s), cplx(z, z)], [cplx(z, z), cplx(c, s)]],
    }
}

#[inline]
fn rotate<T: Scalar>(state: QubitState<T>, axis: Axis, angle: T) -> QubitState<T> {
    let half = angle / T::lit(2.0);
    let (s, c) = half.sin_cos();
    let QubitState { amp0: a0, amp1: a1 } = state;
    match axis {
        Axis::X => {
            let mis = cplx(T::zero(), -s);
            QubitState {
                amp0: a0 * c + a1 * mis,
                amp1: a0 * mis + a1 * c,
            }
        }
        Axis::Y => QubitState {
            amp0: a0 * c - a1 * s,
            amp1: a0 * s + a1 * c,
        },
        Axis::Z => QubitState {
            amp0: a0 * cplx(c, -s),
            amp1: a1 * cplx(c, s),
        },
    }
}

/// `G|ψ⟩` for the Pauli generator of `axis`.
#[inline]
fn pauli<T: Scalar>(state: QubitState<T>, axis: Axis) -> QubitState<T> {
    let QubitState { amp0: a0, amp1: a1 } = state;
    let i = cplx(T::zero(), T::one());
    match axis {
        Axis::X => QubitState { amp0: a1, amp1: a0 },
        Axis::Y => QubitState {
            amp0: -(i * a1),
            amp1: i * a0,
        },
        Axis::Z => QubitState { amp0: a0, amp1: -a1 },
    }
}

#[inline]
fn inner<T: Scalar>(bra: &QubitState<T>, ket: &QubitState<T>) -> C<T> {
    bra.amp0.conj() * ket.amp0 + bra.amp1.conj() * ket.amp1
}

pub fn apply<T: Scalar>(state: QubitState<T>, gate: RotationGate<T>) -> QubitState<T> {
    rotate(state, gate.axis, gate.angle)
}

/// Pauli-Z expectation `|q0|² − |q1|²`, clamped to `[−1, 1]`.
pub fn expect_z<T: Scalar>(state: &QubitState<T>) -> T {
    let m = state.amp0.norm_sqr() - state.amp1.norm_sqr();
    m.max(-T::one()).min(T::one())
}

/// Finite-shot estimate of the Z expectation from `shots` computational-basis samples.
pub fn sample_expect_z<T: Scalar, R: Rng + ?Sized>(state: &QubitState<T>, shots: u32, rng: &mut R) -> T {
    if shots == 0 {
        return expect_z(state);
    }
    let p0 = state.amp0.norm_sqr().to_f64_lossy() / state.norm_sqr().to_f64_lossy();
    let zeros = (0..shots).filter(|_| rng.random::<f64>() < p0).count() as f64;
    let shots = shots as f64;
    T::lit((2.0 * zeros - shots) / shots)
}

/// Runs resolved gates from `|0⟩`.
pub fn evolve<T: Scalar>(gates: &[RotationGate<T>]) -> QubitState<T> {
    gates.iter().fold(QubitState::zero(), |s, g| apply(s, *g))
}

/// Expectation and its derivative w.r.t. every gate angle, by one forward and one adjoint sweep.
pub fn expectation_with_angle_grads<T: Scalar>(gates: &[RotationGate<T>]) -> (T, Vec<T>) {
    let mut psi = evolve(gates);
    let m = expect_z(&psi);
    let mut lambda = pauli(psi, Axis::Z);
    let mut grads = vec![T::zero(); gates.len()];
    for (k, g) in gates.iter().enumerate().rev() {
        grads[k] = inner(&lambda, &pauli(psi, g.axis)).im;
        psi = rotate(psi, g.axis, -g.angle);
        lambda = rotate(lambda, g.axis, -g.angle);
    }
    (m, grads)
}

/// Same quantities as [`expectation_with_angle_grads`], each angle derivative taken by the
/// two-term shift rule `(E(θ+π/2) − E(θ−π/2))/2`.
pub fn expectation_with_shift_grads<T: Scalar>(gates: &[RotationGate<T>]) -> (T, Vec<T>) {
    let m = expect_z(&evolve(gates));
    let shift = T::FRAC_PI_2();
    let half = T::lit(0.5);
    let mut work = gates.to_vec();
    let grads = (0..gates.len())
        .map(|k| {
            let base = gates[k].angle;
            work[k].angle = base + shift;
            let plus = expect_z(&evolve(&work));
            work[k].angle = base - shift;
            let minus = expect_z(&evolve(&work));
            work[k].angle = base;
            half * (plus - minus)
        })
        .collect();
    (m, grads)
}

/// How per-gate angle derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMethod {
    #[default]
    Adjoint,
    ParameterShift,
}

impl GradientMethod {
    pub fn expectation_and_grads<T: Scalar>(self, gates: &[RotationGate<T>]) -> (T, Vec<T>) {
        match self {
            GradientMethod::Adjoint => expectation_with_angle_grads(gates),
            GradientMethod::ParameterShift => expectation_with_shift_grads(gates),
        }
    }
}

/// Where a gate's rotation angle comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding<T> {
    Fixed(T),
    /// `params[i]`
    Param(usize),
    /// `data[i]`
    Input(usize),
    /// `data[input] · params[param]`
    WeightedInput { input: usize, param: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundGate<T> {
    pub axis: Axis,
    pub binding: Binding<T>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct QubitCircuit<T> {
    pub gates: Vec<BoundGate<T>>,
}

impl<T: Scalar> QubitCircuit<T> {
    pub fn new() -> Self {
        Self { gates: Vec::new() }
    }

    pub fn push(&mut self, axis: Axis, binding: Binding<T>) -> &mut Self {
        self.gates.push(BoundGate { axis, binding });
        self
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Binds parameters and data, yielding concrete gates.
    pub fn resolve(&self, params: &[T], data: &[T]) -> Result<Vec<RotationGate<T>>> {
        let p = |i: usize| {
            params
                .get(i)
                .copied()
                .ok_or_else(|| Error::UnresolvedBinding(format!("param {i} (have {})", params.len())))
        };
        let d = |i: usize| {
            data.get(i)
                .copied()
                .ok_or_else(|| Error::UnresolvedBinding(format!("data {i} (have {})", data.len())))
        };
        self.gates
            .iter()
            .map(|g| {
                let angle = match g.binding {
                    Binding::Fixed(a) => a,
                    Binding::Param(i) => p(i)?,
                    Binding::Input(i) => d(i)?,
                    Binding::WeightedInput { input, param } => d(input)? * p(param)?,
                };
                Ok(RotationGate::new(g.axis, angle))
            })
            .collect()
    }

    /// `∂angle_k/∂params[index]` for every gate, or zero when the gate does not use it.
    fn angle_factor(&self, k: usize, index: usize, data: &[T]) -> T {
        match self.gates[k].binding {
            Binding::Param(i) if i == index => T::one(),
            Binding::WeightedInput { input, param } if param == index => data[input],
            _ => T::zero(),
        }
    }

    /// Gradients of the expectation w.r.t. all parameters and all data inputs (adjoint method).
    pub fn gradients(&self, params: &[T], data: &[T]) -> Result<(T, Vec<T>, Vec<T>)> {
        let gates = self.resolve(params, data)?;
        let (m, angle_grads) = expectation_with_angle_grads(&gates);
        let mut gp = vec![T::zero(); params.len()];
        let mut gd = vec![T::zero(); data.len()];
        for (g, dg) in self.gates.iter().zip(angle_grads) {
            match g.binding {
                Binding::Fixed(_) => {}
                Binding::Param(i) => gp[i] += dg,
                Binding::Input(i) => gd[i] += dg,
                Binding::WeightedInput { input, param } => {
                    gp[param] += dg * data[input];
                    gd[input] += dg * params[param];
                }
            }
        }
        Ok((m, gp, gd))
    }
}

/// Evaluates the circuit from `|0⟩` and returns the Pauli-Z expectation.
pub fn run_circuit<T: Scalar>(circuit: &QubitCircuit<T>, params: &[T], data: &[T]) -> Result<T> {
    Ok(expect_z(&evolve(&circuit.resolve(params, data)?)))
}

/// Parameter-shift derivative w.r.t. `params[index]`.
///
/// Each gate occurrence of the parameter is shifted by `±π/2` separately and the shifted
/// differences are summed, weighted by the data factor for data-scaled bindings.
pub fn param_shift_grad<T: Scalar>(
    circuit: &QubitCircuit<T>,
    params: &[T],
    data: &[T],
    index: usize,
) -> Result<T> {
    if index >= params.len() {
        return Err(Error::UnresolvedBinding(format!(
            "param {index} (have {})",
            params.len()
        )));
    }
    let base = circuit.resolve(params, data)?;
    let shift = T::FRAC_PI_2();
    let half = T::lit(0.5);
    let mut grad = T::zero();
    let mut shifted = base.clone();
    for k in 0..base.len() {
        let factor = circuit.angle_factor(k, index, data);
        if factor == T::zero() {
            continue;
        }
        shifted[k].angle = base[k].angle + shift;
        let plus = expect_z(&evolve(&shifted));
        shifted[k].angle = base[k].angle - shift;
        let minus = expect_z(&evolve(&shifted));
        shifted[k].angle = base[k].angle;
        grad += factor * half * (plus - minus);
    }
    Ok(grad)
}
