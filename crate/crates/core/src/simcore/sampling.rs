//! Shot-sampled expectation estimates.
//!
//! Diagonal (I/Z) terms of every observable share one measurement pass in the
//! computational basis. Every distinct non-diagonal Pauli string gets its own
//! pass with a basis rotation. One pass is one circuit execution of `shots`
//! repetitions.

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, input_err, Result};
use crate::rng::{rng_from_seed, Rng};

use super::pauli::{Observable, Pauli, PauliTerm};
use super::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShotMode {
    /// Analytic expectations on the statevector.
    Exact,
    /// Finite-shot estimates.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotConfig {
    pub shots: u64,
    pub mode: ShotMode,
}

impl ShotConfig {
    pub fn exact() -> ShotConfig {
        ShotConfig {
            shots: 0,
            mode: ShotMode::Exact,
        }
    }

    pub fn sampled(shots: u64) -> ShotConfig {
        ShotConfig {
            shots,
            mode: ShotMode::Sampled,
        }
    }

    pub fn is_sampled(&self) -> bool {
        self.mode == ShotMode::Sampled
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_sampled() && self.shots == 0 {
            return input_err("sampled mode needs at least one shot");
        }
        Ok(())
    }
}

/// One measurement pass: a basis per qubit and the terms it estimates.
#[derive(Debug, Clone)]
pub struct MeasurementGroup {
    /// Basis letter per qubit; `I` and `Z` both mean computational basis.
    pub bases: Vec<Pauli>,
    /// `(observable index, term index)` of each term read from this pass.
    members: Vec<(usize, usize)>,
}

/// Grouping of all terms of a set of observables into measurement passes.
#[derive(Debug, Clone)]
pub struct MeasurementPlan {
    num_qubits: usize,
    groups: Vec<MeasurementGroup>,
    /// Identity contributions per observable; these need no measurement.
    constants: Vec<f64>,
    observables: Vec<Observable>,
}

impl MeasurementPlan {
    pub fn new(observables: &[Observable]) -> Result<MeasurementPlan> {
        let Some(first) = observables.first() else {
            return input_err("no observables to measure");
        };
        let n = first.num_qubits();
        let mut constants = vec![0.0; observables.len()];
        let mut diagonal = Vec::new();
        let mut rotated: Vec<MeasurementGroup> = Vec::new();
        for (oi, obs) in observables.iter().enumerate() {
            check_len("observable qubit count", n, obs.num_qubits())?;
            for (ti, term) in obs.terms().iter().enumerate() {
                if term.is_identity() {
                    constants[oi] += term.coefficient;
                } else if term.is_diagonal() {
                    diagonal.push((oi, ti));
                } else if let Some(g) = rotated.iter_mut().find(|g| g.bases == term.letters) {
                    g.members.push((oi, ti));
                } else {
                    rotated.push(MeasurementGroup {
                        bases: term.letters.clone(),
                        members: vec![(oi, ti)],
                    });
                }
            }
        }
        let mut groups = Vec::with_capacity(rotated.len() + 1);
        if !diagonal.is_empty() {
            groups.push(MeasurementGroup {
                bases: vec![Pauli::Z; n],
                members: diagonal,
            });
        }
        groups.extend(rotated);
        Ok(MeasurementPlan {
            num_qubits: n,
            groups,
            constants,
            observables: observables.to_vec(),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Number of circuit executions one full estimate costs.
    pub fn num_passes(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[MeasurementGroup] {
        &self.groups
    }

    pub fn num_observables(&self) -> usize {
        self.observables.len()
    }

    /// Starts an estimate with the identity contributions filled in.
    pub fn start(&self) -> Vec<f64> {
        self.constants.clone()
    }

    /// Measures pass `group` on `state` with `shots` repetitions and adds the
    /// resulting term estimates into `acc`.
    pub fn measure_group(
        &self,
        group: usize,
        state: &StateVector,
        shots: u64,
        rng: &mut Rng,
        acc: &mut [f64],
    ) -> Result<()> {
        check_len("state qubit count", self.num_qubits, state.num_qubits())?;
        let g = &self.groups[group];
        let mut rotated = state.clone();
        for (q, &b) in g.bases.iter().enumerate() {
            rotated.rotate_to_z_basis(q, b);
        }
        let counts = sample_counts(&rotated, shots, rng);
        for &(oi, ti) in &g.members {
            let term = &self.observables[oi].terms()[ti];
            acc[oi] += term.coefficient * parity_mean(term, &counts, shots, self.num_qubits);
        }
        Ok(())
    }

    /// Estimates every observable on a fixed state, one pass per group.
    pub fn estimate(&self, state: &StateVector, shots: u64, rng: &mut Rng) -> Result<Vec<f64>> {
        let mut acc = self.start();
        for g in 0..self.groups.len() {
            self.measure_group(g, state, shots, rng, &mut acc)?;
        }
        Ok(acc)
    }
}

/// Histogram of `shots` computational-basis outcomes, drawn as a multinomial
/// through a chain of conditional binomials.
fn sample_counts(state: &StateVector, shots: u64, rng: &mut Rng) -> Vec<u64> {
    let probs = state.probabilities();
    let mut remaining_mass: f64 = probs.iter().sum();
    let mut remaining = shots;
    let mut counts = vec![0u64; probs.len()];
    let last = counts.len() - 1;
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k == last {
            counts[k] = remaining;
            break;
        }
        let q = if remaining_mass > 0.0 {
            (p / remaining_mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let c = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q).expect("valid binomial").sample(rng)
        };
        counts[k] = c;
        remaining -= c;
        remaining_mass -= p;
    }
    counts
}

/// Mean of the ±1 eigenvalue of `term`'s string over the sampled outcomes.
fn parity_mean(term: &PauliTerm, counts: &[u64], shots: u64, n: usize) -> f64 {
    let support = term
        .letters
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != Pauli::I)
        .fold(0usize, |m, (q, _)| m | (1 << (n - 1 - q)));
    let signed: i64 = counts
        .iter()
        .enumerate()
        .map(|(x, &c)| {
            if (x & support).count_ones() % 2 == 0 {
                c as i64
            } else {
                -(c as i64)
            }
        })
        .sum();
    signed as f64 / shots as f64
}

/// Finite-shot estimate of `<ψ|obs|ψ>`, deterministic in `seed`.
pub fn sample_expectation(state: &StateVector, obs: &Observable, cfg: ShotConfig, seed: u64) -> Result<f64> {
    if !cfg.is_sampled() {
        return input_err("sample_expectation requires sampled mode");
    }
    cfg.validate()?;
    let plan = MeasurementPlan::new(std::slice::from_ref(obs))?;
    let mut rng = rng_from_seed(seed);
    Ok(plan.estimate(state, cfg.shots, &mut rng)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{GateKind, GateOp};
    use crate::simcore::expectation;

    fn plus() -> StateVector {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_gate(&GateOp::fixed(GateKind::H, &[0]), None).unwrap();
        s
    }

    fn z1() -> Observable {
        Observable::single(1.0, vec![Pauli::Z]).unwrap()
    }

    #[test]
    fn eigenstate_has_zero_variance() {
        let s = StateVector::zero(1).unwrap();
        for seed in 0..10 {
            assert_eq!(
                sample_expectation(&s, &z1(), ShotConfig::sampled(1000), seed).unwrap(),
                1.0
            );
        }
    }

    #[test]
    fn binomial_mean_over_seeds() {
        let m = 1000;
        let mean: f64 = (0..100)
            .map(|seed| sample_expectation(&plus(), &z1(), ShotConfig::sampled(m), seed).unwrap())
            .sum::<f64>()
            / 100.0;
        assert!(mean.abs() <= 3.0 / (m as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn deterministic_per_seed() {
        let a = sample_expectation(&plus(), &z1(), ShotConfig::sampled(1000), 42).unwrap();
        let b = sample_expectation(&plus(), &z1(), ShotConfig::sampled(1000), 42).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn zero_shots_rejected() {
        assert!(sample_expectation(&plus(), &z1(), ShotConfig::sampled(0), 0).is_err());
        assert!(sample_expectation(&plus(), &z1(), ShotConfig::exact(), 0).is_err());
    }

    #[test]
    fn grouping_counts_passes() {
        let obs = Observable::parse("1 ZZII\n0.5 IZZI\n0.2 IIII\n0.1 XXYY\n0.3 YYXX\n-0.1 XXYY").unwrap();
        let plan = MeasurementPlan::new(&[obs]).unwrap();
        // one diagonal pass + two distinct rotated strings
        assert_eq!(plan.num_passes(), 3);
        assert_eq!(plan.start(), vec![0.2]);
    }

    #[test]
    fn rotated_terms_are_unbiased() {
        let mut s = StateVector::zero(2).unwrap();
        for (q, t) in [(0, 0.9), (1, -0.4)] {
            s.apply_gate(&GateOp::param(GateKind::Ry, &[q], 0), Some(t)).unwrap();
            s.apply_gate(&GateOp::param(GateKind::Rz, &[q], 0), Some(1.3 * t))
                .unwrap();
        }
        s.apply_gate(&GateOp::fixed(GateKind::Cnot, &[0, 1]), None).unwrap();
        let obs = Observable::parse("0.7 XY\n-0.4 ZZ\n0.3 YI\n1.1 IX").unwrap();
        let exact = expectation(&s, &obs).unwrap();
        let seeds = 200;
        let shots = 500;
        let samples: Vec<f64> = (0..seeds)
            .map(|seed| sample_expectation(&s, &obs, ShotConfig::sampled(shots), seed).unwrap())
            .collect();
        let mean = samples.iter().sum::<f64>() / seeds as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (seeds as f64 - 1.0);
        let stderr = (var / seeds as f64).sqrt();
        assert!((mean - exact).abs() <= 4.0 * stderr, "{mean} vs {exact} (se {stderr})");
    }
}
