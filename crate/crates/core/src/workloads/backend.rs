use serde::{Deserialize, Serialize};

use crate::circuits::{CircuitSlot, ParameterizedCircuit};
use crate::error::{check_len, Result};
use crate::gradopt::{EvalCost, LossEvaluator, ParamSlot};
use crate::rng::{rng_from_seed, Rng};
use crate::simcore::{expectation, MeasurementPlan, NoiseSpec, Observable, ShotConfig, StateVector};

/// Execution model shared by every workload evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Backend {
    pub shots: ShotConfig,
    pub noise: NoiseSpec,
}

impl Backend {
    pub fn exact() -> Backend {
        Backend {
            shots: ShotConfig::exact(),
            noise: NoiseSpec::none(),
        }
    }

    pub fn sampled(shots: u64) -> Backend {
        Backend {
            shots: ShotConfig::sampled(shots),
            noise: NoiseSpec::none(),
        }
    }

    pub fn with_noise(mut self, noise: NoiseSpec) -> Backend {
        self.noise = noise;
        self
    }

    /// Noiseless statevector expectations.
    pub fn is_ideal(&self) -> bool {
        !self.shots.is_sampled() && !self.noise.is_active()
    }

    pub fn validate(&self) -> Result<()> {
        self.shots.validate()?;
        self.noise.validate()
    }
}

/// Expectations of a fixed set of observables on a circuit's output.
///
/// Sampled mode spends one execution of `shots` repetitions per measurement
/// pass; with noise, every execution runs its own trajectory. Exact mode
/// counts one execution and no shots per evaluation.
pub struct CircuitEvaluator<'a> {
    circuit: &'a ParameterizedCircuit,
    observables: &'a [Observable],
    plan: Option<MeasurementPlan>,
    features: &'a [f64],
    backend: Backend,
    slots: Vec<CircuitSlot>,
    rng: Rng,
}

impl<'a> CircuitEvaluator<'a> {
    pub fn new(
        circuit: &'a ParameterizedCircuit,
        observables: &'a [Observable],
        features: &'a [f64],
        backend: Backend,
        seed: u64,
    ) -> Result<CircuitEvaluator<'a>> {
        backend.validate()?;
        check_len("feature vector", circuit.num_features(), features.len())?;
        for o in observables {
            check_len("observable qubit count", circuit.num_qubits(), o.num_qubits())?;
        }
        let plan = if backend.shots.is_sampled() {
            Some(MeasurementPlan::new(observables)?)
        } else {
            None
        };
        Ok(CircuitEvaluator {
            circuit,
            observables,
            plan,
            features,
            backend,
            slots: circuit.slots(),
            rng: rng_from_seed(seed),
        })
    }

    fn run(&mut self, angles: &[Option<f64>]) -> Result<Vec<f64>> {
        let Some(plan) = &self.plan else {
            let state = self.prepare(angles)?;
            return self.observables.iter().map(|o| expectation(&state, o)).collect();
        };
        let mut acc = plan.start();
        let mut clean: Option<StateVector> = None;
        for g in 0..plan.num_passes() {
            let state = if self.backend.noise.is_active() {
                self.circuit
                    .simulate_noisy(angles, &self.backend.noise, &mut self.rng)?
            } else {
                match &clean {
                    Some(s) => s.clone(),
                    None => {
                        let s = self.circuit.simulate_angles(angles)?;
                        clean = Some(s.clone());
                        s
                    }
                }
            };
            plan.measure_group(g, &state, self.backend.shots.shots, &mut self.rng, &mut acc)?;
        }
        Ok(acc)
    }

    fn prepare(&mut self, angles: &[Option<f64>]) -> Result<StateVector> {
        if self.backend.noise.is_active() {
            self.circuit.simulate_noisy(angles, &self.backend.noise, &mut self.rng)
        } else {
            self.circuit.simulate_angles(angles)
        }
    }
}

impl LossEvaluator for CircuitEvaluator<'_> {
    fn num_params(&self) -> usize {
        self.circuit.num_params()
    }

    fn num_outputs(&self) -> usize {
        self.observables.len()
    }

    fn evaluate(&mut self, params: &[f64]) -> Result<Vec<f64>> {
        let angles = self.circuit.resolve_angles(params, self.features)?;
        self.run(&angles)
    }

    fn cost_per_eval(&self) -> EvalCost {
        match &self.plan {
            Some(plan) => {
                let passes = plan.num_passes() as u64;
                EvalCost {
                    executions: passes,
                    shots: passes * self.backend.shots.shots,
                }
            }
            None => EvalCost {
                executions: 1,
                shots: 0,
            },
        }
    }

    fn slots(&self) -> Vec<ParamSlot> {
        self.slots
            .iter()
            .map(|s| ParamSlot {
                param: s.param,
                scale: s.scale,
                rule: s.rule,
            })
            .collect()
    }

    fn evaluate_shifted(&mut self, params: &[f64], slot: usize, shift: f64) -> Result<Vec<f64>> {
        let mut angles = self.circuit.resolve_angles(params, self.features)?;
        let gate = self.slots[slot].gate;
        angles[gate] = angles[gate].map(|a| a + shift);
        self.run(&angles)
    }

    fn analytic_vjp(&mut self, params: &[f64], weights: &[f64]) -> Option<Result<Vec<f64>>> {
        if !self.backend.is_ideal() {
            return None;
        }
        Some((|| {
            check_len("output weights", self.observables.len(), weights.len())?;
            let parts: Vec<(f64, &Observable)> = weights.iter().copied().zip(self.observables).collect();
            let combined = Observable::weighted_sum(&parts)?;
            let angles = self.circuit.resolve_angles(params, self.features)?;
            self.circuit.adjoint_gradient(&angles, &combined)
        })())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::build_hea;
    use crate::gradopt::{param_shift_gradient, vjp, CountingEvaluator, GradientMethod};

    #[test]
    fn adjoint_agrees_with_shift_rules() {
        let c = build_hea(3, 1).unwrap();
        let obs = vec![Observable::parse("0.5 ZXI\n-1.0 IYY\n0.3 ZZZ").unwrap()];
        let params: Vec<f64> = (0..c.num_params()).map(|j| 0.1 * j as f64 - 0.7).collect();
        let mut e = CircuitEvaluator::new(&c, &obs, &[], Backend::exact(), 0).unwrap();
        let shift = param_shift_gradient(&mut e, &params).unwrap();
        let adj = vjp(&mut e, &params, &[1.0], GradientMethod::Exact, &mut rng_from_seed(0)).unwrap();
        assert_eq!(adj.evaluations, 1);
        for (a, b) in shift.values.iter().zip(&adj.values) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn sampled_costs_and_reproducibility() {
        let c = build_hea(2, 1).unwrap();
        let obs = vec![Observable::parse("1 ZI\n1 XX\n0.5 IZ").unwrap()];
        let params = vec![0.3; c.num_params()];
        let mut e = CircuitEvaluator::new(&c, &obs, &[], Backend::sampled(200), 5).unwrap();
        assert_eq!(
            e.cost_per_eval(),
            EvalCost {
                executions: 2,
                shots: 400
            }
        );
        let a = e.evaluate(&params).unwrap();
        let mut e2 = CircuitEvaluator::new(&c, &obs, &[], Backend::sampled(200), 5).unwrap();
        assert_eq!(a, e2.evaluate(&params).unwrap());
        assert!(e.analytic_vjp(&params, &[1.0]).is_none());
        let mut counted = CountingEvaluator::new(e);
        vjp(
            &mut counted,
            &params,
            &[1.0],
            GradientMethod::Exact,
            &mut rng_from_seed(1),
        )
        .unwrap();
        // falls back to shift rules: CRX slots are finite-difference pairs, all two-point
        assert_eq!(counted.calls, 2 * c.num_params() as u64);
    }

    #[test]
    fn noisy_exact_mode_differs_from_ideal() {
        let c = build_hea(2, 2).unwrap();
        let obs = vec![Observable::z(2, 0)];
        let params = vec![0.4; c.num_params()];
        let ideal = CircuitEvaluator::new(&c, &obs, &[], Backend::exact(), 0)
            .unwrap()
            .evaluate(&params)
            .unwrap()[0];
        let noisy = Backend::exact().with_noise(NoiseSpec::depolarizing(0.3));
        let mut e = CircuitEvaluator::new(&c, &obs, &[], noisy, 3).unwrap();
        let vals: Vec<f64> = (0..20).map(|_| e.evaluate(&params).unwrap()[0]).collect();
        assert!(vals.iter().any(|v| (v - ideal).abs() > 1e-6));
    }
}
