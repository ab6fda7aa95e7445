use serde::{Deserialize, Serialize};

use crate::error::{check_len, input_err, Error, Result};
use crate::rng::Rng;
use crate::simcore::noise::{inject_errors, NoiseSpec};
use crate::simcore::{Observable, StateVector};

use super::gate::{Angle, GateOp, ShiftRule};

/// One trainable gate occurrence: the gate's angle is `scale * params[param]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitSlot {
    /// Index into [`ParameterizedCircuit::gates`].
    pub gate: usize,
    pub param: usize,
    pub scale: f64,
    pub rule: ShiftRule,
}

/// Gate list with trainable parameter slots and per-sample feature slots.
///
/// Execution starts from `|0...0>`, runs the `prelude` (state preparation,
/// feature encoding) and then the trainable `ops`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterizedCircuit {
    num_qubits: usize,
    prelude: Vec<GateOp>,
    ops: Vec<GateOp>,
    num_params: usize,
    num_features: usize,
}

impl ParameterizedCircuit {
    pub fn new(
        num_qubits: usize,
        prelude: Vec<GateOp>,
        ops: Vec<GateOp>,
        num_params: usize,
    ) -> Result<ParameterizedCircuit> {
        let mut used = vec![false; num_params];
        let mut num_features = 0;
        for g in prelude.iter().chain(&ops) {
            check_len("gate target count", g.kind.arity(), g.targets.len())?;
            for (k, &q) in g.targets.iter().enumerate() {
                if q >= num_qubits {
                    return Err(Error::QubitOutOfRange { index: q, num_qubits });
                }
                if g.targets[..k].contains(&q) {
                    return input_err(format!("{} applied to repeated qubit {q}", g.kind));
                }
            }
            match (g.kind.is_parameterized(), g.angle) {
                (false, None) => {}
                (false, Some(_)) => return input_err(format!("{} takes no angle", g.kind)),
                (true, None) => return input_err(format!("{} requires an angle source", g.kind)),
                (true, Some(Angle::Param { index, scale })) => {
                    if index >= num_params {
                        return input_err(format!("parameter index {index} >= {num_params}"));
                    }
                    if !scale.is_finite() || scale == 0.0 {
                        return input_err("parameter scale must be finite and non-zero");
                    }
                    used[index] = true;
                }
                (true, Some(Angle::Fixed(t))) if !t.is_finite() => return input_err("non-finite fixed angle"),
                (true, Some(Angle::Fixed(_))) => {}
                (true, Some(Angle::Feature { index })) => num_features = num_features.max(index + 1),
            }
        }
        if let Some(unused) = used.iter().position(|u| !u) {
            return input_err(format!("parameter {unused} is never referenced"));
        }
        if num_qubits == 0 || num_qubits > crate::simcore::MAX_QUBITS {
            return input_err(format!("unsupported qubit count {num_qubits}"));
        }
        Ok(ParameterizedCircuit {
            num_qubits,
            prelude,
            ops,
            num_params,
            num_features,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn prelude(&self) -> &[GateOp] {
        &self.prelude
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    /// Prelude followed by ops.
    pub fn gates(&self) -> impl Iterator<Item = &GateOp> {
        self.prelude.iter().chain(&self.ops)
    }

    pub fn num_gates(&self) -> usize {
        self.prelude.len() + self.ops.len()
    }

    fn gate(&self, k: usize) -> &GateOp {
        if k < self.prelude.len() {
            &self.prelude[k]
        } else {
            &self.ops[k - self.prelude.len()]
        }
    }

    /// Resolves every gate's angle for the given parameters and features.
    pub fn resolve_angles(&self, params: &[f64], features: &[f64]) -> Result<Vec<Option<f64>>> {
        check_len("parameter vector", self.num_params, params.len())?;
        check_len("feature vector", self.num_features, features.len())?;
        Ok(self
            .gates()
            .map(|g| {
                g.angle.map(|a| match a {
                    Angle::Param { index, scale } => scale * params[index],
                    Angle::Fixed(t) => t,
                    Angle::Feature { index } => features[index],
                })
            })
            .collect())
    }

    /// Every trainable gate occurrence, in gate order.
    pub fn slots(&self) -> Vec<CircuitSlot> {
        self.gates()
            .enumerate()
            .filter_map(|(k, g)| match g.angle {
                Some(Angle::Param { index, scale }) => Some(CircuitSlot {
                    gate: k,
                    param: index,
                    scale,
                    rule: g.kind.shift_rule().expect("parameterized gate has a rule"),
                }),
                _ => None,
            })
            .collect()
    }

    /// True if every parameter drives exactly one gate.
    pub fn has_unshared_params(&self) -> bool {
        self.slots().len() == self.num_params
    }

    pub fn simulate(&self, params: &[f64], features: &[f64]) -> Result<StateVector> {
        let angles = self.resolve_angles(params, features)?;
        self.simulate_angles(&angles)
    }

    /// Runs the circuit with explicit per-gate angles (see [`Self::resolve_angles`]).
    pub fn simulate_angles(&self, angles: &[Option<f64>]) -> Result<StateVector> {
        check_len("angle vector", self.num_gates(), angles.len())?;
        let mut state = StateVector::zero(self.num_qubits)?;
        for (g, a) in self.gates().zip(angles) {
            state.apply_unchecked(g.kind, &g.targets, a.unwrap_or(0.0));
        }
        Ok(state)
    }

    /// One stochastic trajectory under `noise`.
    pub fn simulate_noisy(&self, angles: &[Option<f64>], noise: &NoiseSpec, rng: &mut Rng) -> Result<StateVector> {
        check_len("angle vector", self.num_gates(), angles.len())?;
        let mut state = StateVector::zero(self.num_qubits)?;
        for (g, a) in self.gates().zip(angles) {
            state.apply_unchecked(g.kind, &g.targets, a.unwrap_or(0.0));
            inject_errors(&mut state, &g.targets, noise, rng);
        }
        Ok(state)
    }

    /// Adjoint-method gradient of `<obs>` with respect to each parameter.
    ///
    /// One forward pass and one backward pass; exact for every gate kind and
    /// for parameters shared between several gates.
    pub fn adjoint_gradient(&self, angles: &[Option<f64>], obs: &Observable) -> Result<Vec<f64>> {
        check_len("observable qubit count", self.num_qubits, obs.num_qubits())?;
        let mut phi = self.simulate_angles(angles)?;
        let mut lambda = obs.apply(&phi)?;
        let mut grad = vec![0.0; self.num_params];
        for k in (0..self.num_gates()).rev() {
            let g = self.gate(k);
            let theta = angles[k].unwrap_or(0.0);
            if let Some(Angle::Param { index, scale }) = g.angle {
                // d<O>/dθ = 2 Re <λ| (-i/2) G |φ> = Im <λ|G|φ>
                let mut mu = phi.clone();
                mu.apply_generator(g.kind, &g.targets);
                grad[index] += scale * lambda.inner(&mu).im;
            }
            phi.apply_unchecked(g.kind, &g.targets, -theta);
            lambda.apply_unchecked(g.kind, &g.targets, -theta);
        }
        Ok(grad)
    }
}
