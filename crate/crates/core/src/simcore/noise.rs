use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::circuits::GateOp;
use crate::error::{input_err, Result};
use crate::rng::{rng_from_seed, Rng};

use super::pauli::Pauli;
use super::state::StateVector;

/// Stochastic Pauli-error model: after each gate, each target qubit suffers a
/// uniformly chosen X, Y or Z with probability `depolarizing_prob`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub enabled: bool,
    pub depolarizing_prob: f64,
}

impl NoiseSpec {
    pub fn none() -> NoiseSpec {
        NoiseSpec {
            enabled: false,
            depolarizing_prob: 0.0,
        }
    }

    pub fn depolarizing(prob: f64) -> NoiseSpec {
        NoiseSpec {
            enabled: true,
            depolarizing_prob: prob,
        }
    }

    pub fn is_active(&self) -> bool {
        self.enabled && self.depolarizing_prob > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.depolarizing_prob) {
            return input_err(format!(
                "depolarizing probability {} outside [0, 1]",
                self.depolarizing_prob
            ));
        }
        Ok(())
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::none()
    }
}

/// Draws the Pauli errors following one gate of a trajectory.
pub(crate) fn inject_errors(state: &mut StateVector, targets: &[usize], noise: &NoiseSpec, rng: &mut Rng) {
    if !noise.is_active() {
        return;
    }
    for &q in targets {
        if rng.random::<f64>() < noise.depolarizing_prob {
            let p = match rng.random_range(0..3) {
                0 => Pauli::X,
                1 => Pauli::Y,
                _ => Pauli::Z,
            };
            state.apply_pauli(q, p);
        }
    }
}

/// Applies `gate` followed by one stochastic draw of the error channel.
pub fn apply_noisy_gate(
    mut state: StateVector,
    gate: &GateOp,
    theta: Option<f64>,
    noise: &NoiseSpec,
    seed: u64,
) -> Result<StateVector> {
    noise.validate()?;
    state.apply_gate(gate, theta)?;
    let mut rng = rng_from_seed(seed);
    inject_errors(&mut state, &gate.targets, noise, &mut rng);
    Ok(state)
}
