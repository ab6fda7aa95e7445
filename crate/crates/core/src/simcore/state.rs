use num_complex::Complex64;

use crate::circuits::{GateKind, GateOp};
use crate::error::{check_len, input_err, Error, Result};

use super::pauli::Pauli;

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense statevector over `2^num_qubits` basis states.
///
/// Qubit 0 is the most significant bit of the basis index, so `|q0 q1 ... q(n-1)>`
/// reads left to right as a binary number.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`
    pub fn zero(num_qubits: usize) -> Result<StateVector> {
        check_register(num_qubits)?;
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[0] = ONE;
        Ok(StateVector { num_qubits, amps })
    }

    /// Computational basis state; `bits[q]` is the value of qubit `q`.
    pub fn basis(num_qubits: usize, bits: &[u8]) -> Result<StateVector> {
        check_register(num_qubits)?;
        check_len("bitstring length", num_qubits, bits.len())?;
        let mut index = 0usize;
        for &b in bits {
            if b > 1 {
                return input_err(format!("bit value {b} is not 0 or 1"));
            }
            index = (index << 1) | b as usize;
        }
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[index] = ONE;
        Ok(StateVector { num_qubits, amps })
    }

    /// Wraps raw amplitudes. The caller is responsible for normalization.
    pub fn from_amplitudes(num_qubits: usize, amps: Vec<Complex64>) -> Result<StateVector> {
        check_register(num_qubits)?;
        check_len("amplitude count", 1 << num_qubits, amps.len())?;
        Ok(StateVector { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    #[inline]
    pub(crate) fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    /// Applies `gate` with rotation angle `theta` (required iff the kind is parameterized).
    pub fn apply_gate(&mut self, gate: &GateOp, theta: Option<f64>) -> Result<()> {
        self.validate(gate, theta)?;
        self.apply_unchecked(gate.kind, &gate.targets, theta.unwrap_or(0.0));
        Ok(())
    }

    /// Applies the inverse of `gate`.
    pub fn apply_gate_inverse(&mut self, gate: &GateOp, theta: Option<f64>) -> Result<()> {
        self.validate(gate, theta)?;
        self.apply_unchecked(gate.kind, &gate.targets, -theta.unwrap_or(0.0));
        Ok(())
    }

    pub(crate) fn validate(&self, gate: &GateOp, theta: Option<f64>) -> Result<()> {
        let kind = gate.kind;
        check_len("gate target count", kind.arity(), gate.targets.len())?;
        for (k, &q) in gate.targets.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits: self.num_qubits,
                });
            }
            if gate.targets[..k].contains(&q) {
                return input_err(format!("{kind} applied to repeated qubit {q}"));
            }
        }
        match (kind.is_parameterized(), theta) {
            (true, None) => input_err(format!("{kind} requires an angle")),
            (false, Some(_)) => input_err(format!("{kind} takes no angle")),
            (true, Some(t)) if !t.is_finite() => input_err(format!("non-finite angle for {kind}")),
            _ => Ok(()),
        }
    }

    /// Self-inverse gates are their own inverse and every rotation satisfies
    /// `U(θ)^-1 = U(-θ)`, so `apply_gate_inverse` only negates the angle.
    pub(crate) fn apply_unchecked(&mut self, kind: GateKind, t: &[usize], theta: f64) {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        match kind {
            GateKind::H => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                self.apply_1q(t[0], [[h, h], [h, -h]]);
            }
            GateKind::X => self.apply_pauli(t[0], Pauli::X),
            GateKind::Rx => self.apply_1q(t[0], rx(c, s)),
            GateKind::Ry => self.apply_1q(t[0], ry(c, s)),
            GateKind::Rz => self.apply_1q_diag(t[0], Complex64::new(c, -s), Complex64::new(c, s)),
            GateKind::Cnot => self.apply_controlled(t[0], t[1], [[ZERO, ONE], [ONE, ZERO]]),
            GateKind::Cz => {
                let m = self.mask(t[0]) | self.mask(t[1]);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m == m {
                        *a = -*a;
                    }
                }
            }
            GateKind::Crx => self.apply_controlled(t[0], t[1], rx(c, s)),
            GateKind::Crz => self.apply_controlled(
                t[0],
                t[1],
                [[Complex64::new(c, -s), ZERO], [ZERO, Complex64::new(c, s)]],
            ),
            GateKind::Rzz => {
                let (ma, mb) = (self.mask(t[0]), self.mask(t[1]));
                let (even, odd) = (Complex64::new(c, -s), Complex64::new(c, s));
                for (i, a) in self.amps.iter_mut().enumerate() {
                    let parity = ((i & ma) != 0) ^ ((i & mb) != 0);
                    *a *= if parity { odd } else { even };
                }
            }
            GateKind::SingleExcitation | GateKind::DoubleExcitation => {
                let (from, to) = self.excitation_masks(kind, t);
                let flip = from ^ to;
                let support = from | to;
                for i in 0..self.amps.len() {
                    if i & support == from {
                        let j = i ^ flip;
                        let (x, y) = (self.amps[i], self.amps[j]);
                        self.amps[i] = x * c - y * s;
                        self.amps[j] = x * s + y * c;
                    }
                }
            }
        }
    }

    /// Bit patterns (restricted to the gate's support) of the two states an
    /// excitation gate mixes: `|01>`/`|10>` or `|0011>`/`|1100>`.
    fn excitation_masks(&self, kind: GateKind, t: &[usize]) -> (usize, usize) {
        match kind {
            GateKind::SingleExcitation => (self.mask(t[1]), self.mask(t[0])),
            _ => (self.mask(t[2]) | self.mask(t[3]), self.mask(t[0]) | self.mask(t[1])),
        }
    }

    /// Applies the Hermitian generator `G` of a rotation `exp(-i θ G / 2)`.
    pub(crate) fn apply_generator(&mut self, kind: GateKind, t: &[usize]) {
        match kind {
            GateKind::Rx => self.apply_pauli(t[0], Pauli::X),
            GateKind::Ry => self.apply_pauli(t[0], Pauli::Y),
            GateKind::Rz => self.apply_pauli(t[0], Pauli::Z),
            GateKind::Rzz => {
                self.apply_pauli(t[0], Pauli::Z);
                self.apply_pauli(t[1], Pauli::Z);
            }
            GateKind::Crx | GateKind::Crz => {
                let mc = self.mask(t[0]);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & mc == 0 {
                        *a = ZERO;
                    }
                }
                let p = if kind == GateKind::Crx { Pauli::X } else { Pauli::Z };
                self.apply_pauli(t[1], p);
            }
            GateKind::SingleExcitation | GateKind::DoubleExcitation => {
                let (from, to) = self.excitation_masks(kind, t);
                let flip = from ^ to;
                let support = from | to;
                let old = std::mem::replace(&mut self.amps, vec![ZERO; 1 << self.num_qubits]);
                for i in 0..old.len() {
                    if i & support == from {
                        let j = i ^ flip;
                        self.amps[i] = -I * old[j];
                        self.amps[j] = I * old[i];
                    }
                }
            }
            GateKind::H | GateKind::X | GateKind::Cnot | GateKind::Cz => {
                unreachable!("{kind} has no generator")
            }
        }
    }

    pub fn apply_pauli(&mut self, qubit: usize, p: Pauli) {
        let m = self.mask(qubit);
        match p {
            Pauli::I => {}
            Pauli::Z => {
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m != 0 {
                        *a = -*a;
                    }
                }
            }
            Pauli::X => {
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        self.amps.swap(i, i | m);
                    }
                }
            }
            Pauli::Y => self.apply_1q(qubit, [[ZERO, -I], [I, ZERO]]),
        }
    }

    /// Rotates `qubit` so that measuring Z afterwards measures `p` before.
    pub(crate) fn rotate_to_z_basis(&mut self, qubit: usize, p: Pauli) {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match p {
            Pauli::I | Pauli::Z => {}
            Pauli::X => self.apply_1q(qubit, [[h, h], [h, -h]]),
            Pauli::Y => {
                self.apply_1q_diag(qubit, ONE, -I);
                self.apply_1q(qubit, [[h, h], [h, -h]]);
            }
        }
    }

    fn apply_1q(&mut self, qubit: usize, u: [[Complex64; 2]; 2]) {
        let m = self.mask(qubit);
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let j = i | m;
                let (x, y) = (self.amps[i], self.amps[j]);
                self.amps[i] = u[0][0] * x + u[0][1] * y;
                self.amps[j] = u[1][0] * x + u[1][1] * y;
            }
        }
    }

    fn apply_1q_diag(&mut self, qubit: usize, d0: Complex64, d1: Complex64) {
        let m = self.mask(qubit);
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & m == 0 { d0 } else { d1 };
        }
    }

    fn apply_controlled(&mut self, control: usize, target: usize, u: [[Complex64; 2]; 2]) {
        let (mc, mt) = (self.mask(control), self.mask(target));
        for i in 0..self.amps.len() {
            if i & mc != 0 && i & mt == 0 {
                let j = i | mt;
                let (x, y) = (self.amps[i], self.amps[j]);
                self.amps[i] = u[0][0] * x + u[0][1] * y;
                self.amps[j] = u[1][0] * x + u[1][1] * y;
            }
        }
    }
}

fn rx(c: f64, s: f64) -> [[Complex64; 2]; 2] {
    [
        [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
        [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
    ]
}

fn ry(c: f64, s: f64) -> [[Complex64; 2]; 2] {
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

fn check_register(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 {
        return input_err("register must have at least one qubit");
    }
    if num_qubits > MAX_QUBITS {
        return Err(Error::TooLarge {
            what: "qubit count",
            limit: MAX_QUBITS,
            actual: num_qubits,
        });
    }
    Ok(())
}

/// Basis state with amplitude 1 at the index encoded by `bitstring`.
pub fn init_basis_state(num_qubits: usize, bitstring: &[u8]) -> Result<StateVector> {
    StateVector::basis(num_qubits, bitstring)
}

/// Functional form of [`StateVector::apply_gate`].
pub fn apply_gate(mut state: StateVector, gate: &GateOp, theta: Option<f64>) -> Result<StateVector> {
    state.apply_gate(gate, theta)?;
    Ok(state)
}
