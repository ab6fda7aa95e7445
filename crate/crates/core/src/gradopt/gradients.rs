use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul};

use crate::circuits::ShiftRule;
use crate::error::{check_len, input_err, Result};
use crate::rng::{rng_from_seed, Rng};

/// Quantum resources consumed by evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCost {
    pub executions: u64,
    pub shots: u64,
}

impl Add for EvalCost {
    type Output = EvalCost;
    fn add(self, o: EvalCost) -> EvalCost {
        EvalCost {
            executions: self.executions + o.executions,
            shots: self.shots + o.shots,
        }
    }
}

impl AddAssign for EvalCost {
    fn add_assign(&mut self, o: EvalCost) {
        *self = *self + o;
    }
}

impl Mul<u64> for EvalCost {
    type Output = EvalCost;
    fn mul(self, k: u64) -> EvalCost {
        EvalCost {
            executions: self.executions * k,
            shots: self.shots * k,
        }
    }
}

/// A differentiable occurrence of a parameter: shifting the occurrence's
/// angle by `s` corresponds to shifting the parameter by `s / scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSlot {
    pub param: usize,
    pub scale: f64,
    pub rule: ShiftRule,
}

/// Objective evaluated on a parameter vector.
///
/// An evaluator may produce several outputs (e.g. one expectation per measured
/// qubit); scalar losses return a single output. Evaluations are deterministic
/// for fixed parameters and a fixed seed context.
pub trait LossEvaluator {
    fn num_params(&self) -> usize;

    fn num_outputs(&self) -> usize {
        1
    }

    fn evaluate(&mut self, params: &[f64]) -> Result<Vec<f64>>;

    /// Resources one call to `evaluate` consumes.
    fn cost_per_eval(&self) -> EvalCost;

    /// Differentiable occurrences; by default each parameter is one two-term slot.
    fn slots(&self) -> Vec<ParamSlot> {
        (0..self.num_params())
            .map(|param| ParamSlot {
                param,
                scale: 1.0,
                rule: ShiftRule::TwoTerm,
            })
            .collect()
    }

    /// Evaluates with only occurrence `slot` shifted by `shift` (in gate-angle units).
    fn evaluate_shifted(&mut self, params: &[f64], slot: usize, shift: f64) -> Result<Vec<f64>> {
        let s = self.slots()[slot];
        let mut p = params.to_vec();
        p[s.param] += shift / s.scale;
        self.evaluate(&p)
    }

    /// Exact `Σ_k w_k ∂out_k/∂θ` when the evaluator can compute it analytically.
    fn analytic_vjp(&mut self, _params: &[f64], _weights: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }
}

impl<E: LossEvaluator + ?Sized> LossEvaluator for &mut E {
    fn num_params(&self) -> usize {
        (**self).num_params()
    }
    fn num_outputs(&self) -> usize {
        (**self).num_outputs()
    }
    fn evaluate(&mut self, params: &[f64]) -> Result<Vec<f64>> {
        (**self).evaluate(params)
    }
    fn cost_per_eval(&self) -> EvalCost {
        (**self).cost_per_eval()
    }
    fn slots(&self) -> Vec<ParamSlot> {
        (**self).slots()
    }
    fn evaluate_shifted(&mut self, params: &[f64], slot: usize, shift: f64) -> Result<Vec<f64>> {
        (**self).evaluate_shifted(params, slot, shift)
    }
    fn analytic_vjp(&mut self, params: &[f64], weights: &[f64]) -> Option<Result<Vec<f64>>> {
        (**self).analytic_vjp(params, weights)
    }
}

/// Scalar loss from a closure; each call counts as one execution with no shots.
pub struct FnEvaluator<F> {
    num_params: usize,
    f: F,
}

impl<F: FnMut(&[f64]) -> f64> FnEvaluator<F> {
    pub fn new(num_params: usize, f: F) -> Self {
        FnEvaluator { num_params, f }
    }
}

impl<F: FnMut(&[f64]) -> f64> LossEvaluator for FnEvaluator<F> {
    fn num_params(&self) -> usize {
        self.num_params
    }
    fn evaluate(&mut self, params: &[f64]) -> Result<Vec<f64>> {
        check_len("parameter vector", self.num_params, params.len())?;
        Ok(vec![(self.f)(params)])
    }
    fn cost_per_eval(&self) -> EvalCost {
        EvalCost {
            executions: 1,
            shots: 0,
        }
    }
}

/// Wraps an evaluator and counts every call.
pub struct CountingEvaluator<E> {
    pub inner: E,
    pub calls: u64,
}

impl<E> CountingEvaluator<E> {
    pub fn new(inner: E) -> Self {
        CountingEvaluator { inner, calls: 0 }
    }
}

impl<E: LossEvaluator> LossEvaluator for CountingEvaluator<E> {
    fn num_params(&self) -> usize {
        self.inner.num_params()
    }
    fn num_outputs(&self) -> usize {
        self.inner.num_outputs()
    }
    fn evaluate(&mut self, params: &[f64]) -> Result<Vec<f64>> {
        self.calls += 1;
        self.inner.evaluate(params)
    }
    fn cost_per_eval(&self) -> EvalCost {
        self.inner.cost_per_eval()
    }
    fn slots(&self) -> Vec<ParamSlot> {
        self.inner.slots()
    }
    fn evaluate_shifted(&mut self, params: &[f64], slot: usize, shift: f64) -> Result<Vec<f64>> {
        self.calls += 1;
        self.inner.evaluate_shifted(params, slot, shift)
    }
    fn analytic_vjp(&mut self, params: &[f64], weights: &[f64]) -> Option<Result<Vec<f64>>> {
        let r = self.inner.analytic_vjp(params, weights);
        if r.is_some() {
            self.calls += 1;
        }
        r
    }
}

/// Output-by-parameter derivative estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    /// `rows[k][j] = ∂out_k / ∂θ_j`
    pub rows: Vec<Vec<f64>>,
    /// Evaluator calls spent.
    pub evaluations: u64,
}

impl Jacobian {
    /// `Σ_k w_k rows[k]`
    pub fn vjp(&self, weights: &[f64]) -> Vec<f64> {
        let n = self.rows.first().map_or(0, Vec::len);
        let mut out = vec![0.0; n];
        for (w, row) in weights.iter().zip(&self.rows) {
            for (o, r) in out.iter_mut().zip(row) {
                *o += w * r;
            }
        }
        out
    }
}

/// Gradient of a scalar (or weighted) objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub values: Vec<f64>,
    pub evaluations: u64,
}

fn check_params<E: LossEvaluator>(eval: &E, params: &[f64]) -> Result<()> {
    check_len("parameter vector", eval.num_params(), params.len())
}

/// Shift-rule Jacobian, one rule per differentiable occurrence.
///
/// With one two-term occurrence per parameter this spends exactly `2n` calls.
pub fn param_shift_jacobian<E: LossEvaluator>(eval: &mut E, params: &[f64]) -> Result<Jacobian> {
    check_params(eval, params)?;
    let m = eval.num_outputs();
    let mut rows = vec![vec![0.0; params.len()]; m];
    let mut evaluations = 0;
    for (k, slot) in eval.slots().into_iter().enumerate() {
        for (shift, coef) in slot.rule.terms() {
            let out = eval.evaluate_shifted(params, k, shift)?;
            evaluations += 1;
            for (row, v) in rows.iter_mut().zip(&out) {
                row[slot.param] += slot.scale * coef * v;
            }
        }
    }
    Ok(Jacobian { rows, evaluations })
}

pub fn param_shift_gradient<E: LossEvaluator>(eval: &mut E, params: &[f64]) -> Result<Gradient> {
    let j = param_shift_jacobian(eval, params)?;
    Ok(Gradient {
        values: j.rows[0].clone(),
        evaluations: j.evaluations,
    })
}

/// Simultaneous-perturbation Jacobian estimate from exactly two calls.
pub fn spsa_jacobian<E: LossEvaluator>(eval: &mut E, params: &[f64], c: f64, rng: &mut Rng) -> Result<Jacobian> {
    check_params(eval, params)?;
    if !(c > 0.0 && c.is_finite()) {
        return input_err(format!("SPSA perturbation scale must be positive, got {c}"));
    }
    let delta: Vec<f64> = (0..params.len())
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    let plus: Vec<f64> = params.iter().zip(&delta).map(|(p, d)| p + c * d).collect();
    let minus: Vec<f64> = params.iter().zip(&delta).map(|(p, d)| p - c * d).collect();
    let fp = eval.evaluate(&plus)?;
    let fm = eval.evaluate(&minus)?;
    let rows = fp
        .iter()
        .zip(&fm)
        .map(|(a, b)| delta.iter().map(|d| (a - b) / (2.0 * c * d)).collect())
        .collect();
    Ok(Jacobian { rows, evaluations: 2 })
}

pub fn spsa_gradient<E: LossEvaluator>(eval: &mut E, params: &[f64], c: f64, seed: u64) -> Result<Gradient> {
    let j = spsa_jacobian(eval, params, c, &mut rng_from_seed(seed))?;
    Ok(Gradient {
        values: j.rows[0].clone(),
        evaluations: j.evaluations,
    })
}

/// Central differences on the parameters; `2n` calls.
pub fn finite_diff_jacobian<E: LossEvaluator>(eval: &mut E, params: &[f64], h: f64) -> Result<Jacobian> {
    check_params(eval, params)?;
    if !(h > 0.0 && h.is_finite()) {
        return input_err(format!("finite-difference step must be positive, got {h}"));
    }
    let m = eval.num_outputs();
    let mut rows = vec![vec![0.0; params.len()]; m];
    let mut p = params.to_vec();
    for j in 0..params.len() {
        p[j] = params[j] + h;
        let fp = eval.evaluate(&p)?;
        p[j] = params[j] - h;
        let fm = eval.evaluate(&p)?;
        p[j] = params[j];
        for (row, (a, b)) in rows.iter_mut().zip(fp.iter().zip(&fm)) {
            row[j] = (a - b) / (2.0 * h);
        }
    }
    Ok(Jacobian {
        rows,
        evaluations: 2 * params.len() as u64,
    })
}

pub fn finite_diff_gradient<E: LossEvaluator>(eval: &mut E, params: &[f64], h: f64) -> Result<Gradient> {
    let j = finite_diff_jacobian(eval, params, h)?;
    Ok(Gradient {
        values: j.rows[0].clone(),
        evaluations: j.evaluations,
    })
}

/// Default SPSA perturbation scale. Not taken from any published setup.
pub const DEFAULT_SPSA_C: f64 = 0.1;
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// How gradients of circuit objectives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GradientMethod {
    /// Analytic gradient on the statevector (adjoint method where available,
    /// shift rules on exact expectations otherwise).
    Exact,
    /// Shift rules on whatever the evaluator measures (sampled in shot mode).
    ParamShift,
    Spsa {
        c: f64,
    },
    FiniteDiff {
        h: f64,
    },
}

impl GradientMethod {
    pub fn spsa() -> GradientMethod {
        GradientMethod::Spsa { c: DEFAULT_SPSA_C }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GradientMethod::Spsa { c } if !(c > 0.0 && c.is_finite()) => {
                input_err(format!("SPSA perturbation scale must be positive, got {c}"))
            }
            GradientMethod::FiniteDiff { h } if !(h > 0.0 && h.is_finite()) => {
                input_err(format!("finite-difference step must be positive, got {h}"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GradientMethod::Exact => "exact",
            GradientMethod::ParamShift => "param_shift",
            GradientMethod::Spsa { .. } => "spsa",
            GradientMethod::FiniteDiff { .. } => "finite_diff",
        }
    }
}

/// Jacobian with the configured method.
pub fn jacobian<E: LossEvaluator>(
    eval: &mut E,
    params: &[f64],
    method: GradientMethod,
    rng: &mut Rng,
) -> Result<Jacobian> {
    match method {
        GradientMethod::Exact | GradientMethod::ParamShift => param_shift_jacobian(eval, params),
        GradientMethod::Spsa { c } => spsa_jacobian(eval, params, c, rng),
        GradientMethod::FiniteDiff { h } => finite_diff_jacobian(eval, params, h),
    }
}

/// `Σ_k w_k ∂out_k/∂θ` with the configured method.
pub fn vjp<E: LossEvaluator>(
    eval: &mut E,
    params: &[f64],
    weights: &[f64],
    method: GradientMethod,
    rng: &mut Rng,
) -> Result<Gradient> {
    check_len("output weights", eval.num_outputs(), weights.len())?;
    if method == GradientMethod::Exact {
        if let Some(values) = eval.analytic_vjp(params, weights) {
            return Ok(Gradient {
                values: values?,
                evaluations: 1,
            });
        }
    }
    let j = jacobian(eval, params, method, rng)?;
    Ok(Gradient {
        values: j.vjp(weights),
        evaluations: j.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn cos_loss() -> FnEvaluator<impl FnMut(&[f64]) -> f64> {
        FnEvaluator::new(1, |t: &[f64]| t[0].cos())
    }

    #[test]
    fn shift_rule_on_cosine() {
        let g = param_shift_gradient(&mut cos_loss(), &[FRAC_PI_2]).unwrap();
        assert_abs_diff_eq!(g.values[0], -1.0, epsilon = 1e-15);
        let g = param_shift_gradient(&mut cos_loss(), &[0.0]).unwrap();
        assert_abs_diff_eq!(g.values[0], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn four_term_rule_exact_for_half_frequencies() {
        // f(θ) = a cos(θ/2) + b sin(θ) + c sin(θ/2)
        let f = |t: f64| 0.3 * (t / 2.0).cos() + 1.7 * t.sin() - 0.4 * (t / 2.0).sin();
        let df = |t: f64| -0.15 * (t / 2.0).sin() + 1.7 * t.cos() - 0.2 * (t / 2.0).cos();
        let t = 0.77;
        let est: f64 = ShiftRule::FourTerm.terms().iter().map(|(s, c)| c * f(t + s)).sum();
        assert_abs_diff_eq!(est, df(t), epsilon = 1e-13);
    }

    #[test]
    fn finite_difference_basics() {
        let mut sq = FnEvaluator::new(1, |t: &[f64]| t[0] * t[0]);
        let g = finite_diff_gradient(&mut sq, &[3.0], 1e-5).unwrap();
        assert_abs_diff_eq!(g.values[0], 6.0, epsilon = 1e-6);
        let mut constant = FnEvaluator::new(3, |_: &[f64]| 4.2);
        let g = finite_diff_gradient(&mut constant, &[0.1, 0.2, 0.3], 1e-5).unwrap();
        assert_eq!(g.values, vec![0.0; 3]);
        assert!(finite_diff_gradient(&mut constant, &[0.1, 0.2, 0.3], 0.0).is_err());
    }

    #[test]
    fn call_accounting() {
        let n = 7;
        let params = vec![0.2; n];
        let mut e = CountingEvaluator::new(FnEvaluator::new(n, |t: &[f64]| t.iter().map(|x| x.sin()).sum()));
        param_shift_gradient(&mut e, &params).unwrap();
        assert_eq!(e.calls, 2 * n as u64);
        e.calls = 0;
        spsa_gradient(&mut e, &params, 0.1, 3).unwrap();
        assert_eq!(e.calls, 2);
        e.calls = 0;
        finite_diff_gradient(&mut e, &params, 1e-4).unwrap();
        assert_eq!(e.calls, 2 * n as u64);
    }

    #[test]
    fn spsa_linear_is_exact() {
        let a = -2.5;
        for seed in 0..20 {
            for c in [0.01, 0.1, 1.0] {
                let mut lin = FnEvaluator::new(1, |t: &[f64]| a * t[0]);
                let g = spsa_gradient(&mut lin, &[0.7], c, seed).unwrap();
                assert_abs_diff_eq!(g.values[0], a, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn spsa_cross_component_noise_has_zero_mean() {
        // L = θ1: the estimate for θ2 is ±1 noise.
        let n = 1000;
        let comps: Vec<f64> = (0..n)
            .map(|seed| {
                let mut e = FnEvaluator::new(2, |t: &[f64]| t[0]);
                spsa_gradient(&mut e, &[0.3, -0.4], 0.1, seed).unwrap().values[1]
            })
            .collect();
        let mean = comps.iter().sum::<f64>() / n as f64;
        let sd = (comps.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
        assert!(mean.abs() <= 3.0 * sd / (n as f64).sqrt(), "mean {mean}, sd {sd}");
    }

    #[test]
    fn spsa_mean_approaches_true_gradient() {
        // quadratic with cross terms
        let loss = |t: &[f64]| 1.5 * t[0] * t[0] + 0.5 * t[0] * t[1] + 2.0 * t[1] * t[1] - t[1];
        let x = [0.8, -0.3];
        let truth = [3.0 * x[0] + 0.5 * x[1], 0.5 * x[0] + 4.0 * x[1] - 1.0];
        let n = 2000;
        let mut mean = [0.0; 2];
        for seed in 0..n {
            let mut e = FnEvaluator::new(2, loss);
            let g = spsa_gradient(&mut e, &x, 0.01, seed).unwrap();
            mean[0] += g.values[0] / n as f64;
            mean[1] += g.values[1] / n as f64;
        }
        for k in 0..2 {
            assert!(
                (mean[k] - truth[k]).abs() <= 0.05 * truth[k].abs(),
                "{mean:?} vs {truth:?}"
            );
        }
    }

    #[test]
    fn spsa_is_reproducible() {
        let mut e = FnEvaluator::new(3, |t: &[f64]| t[0] * t[1] + t[2].sin());
        let a = spsa_gradient(&mut e, &[0.1, 0.2, 0.3], 0.1, 99).unwrap();
        let b = spsa_gradient(&mut e, &[0.1, 0.2, 0.3], 0.1, 99).unwrap();
        assert_eq!(a, b);
        assert!(spsa_gradient(&mut e, &[0.1, 0.2, 0.3], 0.0, 1).is_err());
    }

    #[test]
    fn length_mismatch() {
        assert!(param_shift_gradient(&mut cos_loss(), &[0.1, 0.2]).is_err());
    }
}
