use serde::{Deserialize, Serialize};

use crate::error::{check_len, input_err, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
    Adagrad,
}

impl OptimizerKind {
    pub fn parse(name: &str) -> Result<OptimizerKind> {
        match name.to_ascii_lowercase().as_str() {
            "sgd" | "gd" => Ok(OptimizerKind::Sgd),
            "adam" => Ok(OptimizerKind::Adam),
            "adagrad" => Ok(OptimizerKind::Adagrad),
            _ => input_err(format!("unknown optimizer '{name}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
}

impl OptimizerSpec {
    pub fn new(kind: OptimizerKind, learning_rate: f64) -> OptimizerSpec {
        OptimizerSpec { kind, learning_rate }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return input_err(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        Ok(())
    }
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;
pub const ADAGRAD_EPS: f64 = 1e-8;

/// Optimizer with its running state.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimizer {
    spec: OptimizerSpec,
    /// Adam first moment.
    m: Vec<f64>,
    /// Adam second moment or Adagrad accumulator.
    v: Vec<f64>,
    t: u64,
}

impl Optimizer {
    pub fn new(spec: OptimizerSpec, num_params: usize) -> Result<Optimizer> {
        spec.validate()?;
        Ok(Optimizer {
            spec,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            t: 0,
        })
    }

    pub fn spec(&self) -> OptimizerSpec {
        self.spec
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    /// Updates `params` in place from `grad`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) -> Result<()> {
        check_len("parameter vector", self.m.len(), params.len())?;
        check_len("gradient", self.m.len(), grad.len())?;
        let lr = self.spec.learning_rate;
        self.t += 1;
        match self.spec.kind {
            OptimizerKind::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= lr * g;
                }
            }
            OptimizerKind::Adam => {
                let c1 = 1.0 - ADAM_BETA1.powi(self.t as i32);
                let c2 = 1.0 - ADAM_BETA2.powi(self.t as i32);
                for j in 0..params.len() {
                    self.m[j] = ADAM_BETA1 * self.m[j] + (1.0 - ADAM_BETA1) * grad[j];
                    self.v[j] = ADAM_BETA2 * self.v[j] + (1.0 - ADAM_BETA2) * grad[j] * grad[j];
                    let mh = self.m[j] / c1;
                    let vh = self.v[j] / c2;
                    params[j] -= lr * mh / (vh.sqrt() + ADAM_EPS);
                }
            }
            OptimizerKind::Adagrad => {
                for j in 0..params.len() {
                    self.v[j] += grad[j] * grad[j];
                    params[j] -= lr * grad[j] / (self.v[j] + ADAGRAD_EPS).sqrt();
                }
            }
        }
        Ok(())
    }
}

/// Functional form of [`Optimizer::step`].
pub fn optimizer_step(mut state: Optimizer, params: &[f64], grad: &[f64]) -> Result<(Vec<f64>, Optimizer)> {
    let mut p = params.to_vec();
    state.step(&mut p, grad)?;
    Ok((p, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sgd_step() {
        let opt = Optimizer::new(OptimizerSpec::new(OptimizerKind::Sgd, 0.1), 2).unwrap();
        let (p, _) = optimizer_step(opt, &[1.0, 1.0], &[1.0, -2.0]).unwrap();
        assert_abs_diff_eq!(p[0], 0.9, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 1.2, epsilon = 1e-15);
    }

    #[test]
    fn adam_first_step_is_lr_times_sign() {
        let opt = Optimizer::new(OptimizerSpec::new(OptimizerKind::Adam, 0.01), 3).unwrap();
        let (p, _) = optimizer_step(opt, &[0.0; 3], &[0.5, -3.0, 1e-3]).unwrap();
        assert_abs_diff_eq!(p[0], -0.01, epsilon = 1e-9);
        assert_abs_diff_eq!(p[1], 0.01, epsilon = 1e-9);
        assert_abs_diff_eq!(p[2], -0.01, epsilon = 1e-7);
    }

    #[test]
    fn adagrad_first_step_and_accumulation() {
        let mut opt = Optimizer::new(OptimizerSpec::new(OptimizerKind::Adagrad, 0.05), 1).unwrap();
        let mut p = [0.0];
        opt.step(&mut p, &[2.0]).unwrap();
        assert_abs_diff_eq!(p[0], -0.05, epsilon = 1e-9);
        opt.step(&mut p, &[2.0]).unwrap();
        assert_abs_diff_eq!(p[0], -0.05 - 0.05 * 2.0 / 8f64.sqrt(), epsilon = 1e-9);
        assert_eq!(opt.steps_taken(), 2);
    }

    #[test]
    fn sgd_descends_convex_quadratic() {
        let mut opt = Optimizer::new(OptimizerSpec::new(OptimizerKind::Sgd, 0.1), 2).unwrap();
        let loss = |p: &[f64]| 2.0 * p[0] * p[0] + 0.5 * p[1] * p[1];
        let mut p = [1.0, -2.0];
        let mut prev = loss(&p);
        for _ in 0..50 {
            let g = [4.0 * p[0], p[1]];
            opt.step(&mut p, &g).unwrap();
            let l = loss(&p);
            assert!(l <= prev);
            prev = l;
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Optimizer::new(OptimizerSpec::new(OptimizerKind::Sgd, 0.0), 1).is_err());
        assert!(Optimizer::new(OptimizerSpec::new(OptimizerKind::Adam, f64::NAN), 1).is_err());
        let mut opt = Optimizer::new(OptimizerSpec::new(OptimizerKind::Sgd, 0.1), 2).unwrap();
        assert!(opt.step(&mut [0.0, 0.0], &[1.0]).is_err());
        assert!(OptimizerKind::parse("rmsprop").is_err());
    }
}
