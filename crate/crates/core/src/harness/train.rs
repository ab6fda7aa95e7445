use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::dypp::{predict, Distance, Method, WeightWindow};
use crate::error::Result;
use crate::gradopt::{vjp, EvalCost, GradientMethod, Optimizer};
use crate::rng::{derive_seed, rng_from_seed, Rng, TAG_EPOCH, TAG_INIT};
use crate::simcore::{expectation, Observable};
use crate::workloads::{
    qnn_evaluate, qnn_loss_and_grad, Backend, CircuitEvaluator, MaxCutTask, PredictionScope, QnnTask, VqeTask,
};

use super::config::{RunConfig, TaskSpec};

/// One row of a training trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub epoch: usize,
    pub loss: f64,
    pub metric: f64,
    pub was_prediction: bool,
    #[serde(rename = "cum_executions")]
    pub cumulative_executions: u64,
    #[serde(rename = "cum_shots")]
    pub cumulative_shots: u64,
}

/// Trace plus run-level bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub records: Vec<RunRecord>,
    pub final_params: Vec<f64>,
    pub predictions: usize,
    /// Parameters whose prediction was discarded, summed over predictions.
    pub rejected_predictions: usize,
    pub optimizer_steps: usize,
    pub early_stopped: bool,
    /// Dataset samples charged per iteration in the lower-bound shot count.
    pub samples_per_iteration: u64,
}

/// A task as the training loop sees it.
pub(crate) trait Workload {
    fn num_params(&self) -> usize;
    fn initial_params(&self, rng: &mut Rng) -> Vec<f64>;
    /// One optimizer epoch; returns the quantum resources spent.
    fn train_epoch(&self, params: &mut [f64], opt: &mut Optimizer, seed: u64) -> Result<EvalCost>;
    /// Noiseless exact `(loss, metric)`; not charged.
    fn monitor(&self, params: &[f64]) -> Result<(f64, f64)>;
    /// Parameters the predictor extrapolates.
    fn predicted(&self) -> Range<usize> {
        0..self.num_params()
    }
    fn samples_per_iteration(&self) -> u64 {
        1
    }
    fn convergence_tol(&self) -> Option<f64> {
        None
    }
}

/// Gradient step on `<obs>` for VQE and QAOA.
fn expectation_step(
    circuit: &crate::circuits::ParameterizedCircuit,
    obs: &Observable,
    backend: Backend,
    method: GradientMethod,
    params: &mut [f64],
    opt: &mut Optimizer,
    seed: u64,
) -> Result<EvalCost> {
    let mut e = CircuitEvaluator::new(circuit, std::slice::from_ref(obs), &[], backend, seed)?;
    let mut rng = rng_from_seed(derive_seed(seed, &[1]));
    let g = vjp(&mut e, params, &[1.0], method, &mut rng)?;
    opt.step(params, &g.values)?;
    Ok(crate::gradopt::LossEvaluator::cost_per_eval(&e) * g.evaluations)
}

struct QaoaWorkload {
    task: MaxCutTask,
    backend: Backend,
    method: GradientMethod,
}

impl Workload for QaoaWorkload {
    fn num_params(&self) -> usize {
        self.task.num_params()
    }

    fn initial_params(&self, rng: &mut Rng) -> Vec<f64> {
        (0..self.num_params())
            .map(|_| rng.random_range(0.0..std::f64::consts::FRAC_PI_2))
            .collect()
    }

    fn train_epoch(&self, params: &mut [f64], opt: &mut Optimizer, seed: u64) -> Result<EvalCost> {
        expectation_step(
            &self.task.circuit,
            &self.task.cost,
            self.backend,
            self.method,
            params,
            opt,
            seed,
        )
    }

    fn monitor(&self, params: &[f64]) -> Result<(f64, f64)> {
        let loss = expectation(&self.task.circuit.simulate(params, &[])?, &self.task.cost)?;
        Ok((loss, self.task.approximation_ratio(-loss)))
    }
}

struct VqeWorkload {
    task: VqeTask,
    backend: Backend,
    method: GradientMethod,
}

impl Workload for VqeWorkload {
    fn num_params(&self) -> usize {
        self.task.num_params()
    }

    fn initial_params(&self, _rng: &mut Rng) -> Vec<f64> {
        vec![0.0; self.num_params()]
    }

    fn train_epoch(&self, params: &mut [f64], opt: &mut Optimizer, seed: u64) -> Result<EvalCost> {
        expectation_step(
            &self.task.ansatz,
            &self.task.hamiltonian,
            self.backend,
            self.method,
            params,
            opt,
            seed,
        )
    }

    fn monitor(&self, params: &[f64]) -> Result<(f64, f64)> {
        let e = expectation(&self.task.ansatz.simulate(params, &[])?, &self.task.hamiltonian)?;
        Ok((e, e))
    }

    fn convergence_tol(&self) -> Option<f64> {
        Some(self.task.convergence_tol)
    }
}

struct QnnWorkload {
    task: QnnTask,
    backend: Backend,
    method: GradientMethod,
    scope: PredictionScope,
}

impl Workload for QnnWorkload {
    fn num_params(&self) -> usize {
        self.task.num_params()
    }

    fn initial_params(&self, rng: &mut Rng) -> Vec<f64> {
        self.task.initial_params(rng)
    }

    /// One pass over the shuffled training split in mini-batches.
    fn train_epoch(&self, params: &mut [f64], opt: &mut Optimizer, seed: u64) -> Result<EvalCost> {
        let mut order = self.task.dataset.train.clone();
        order.shuffle(&mut rng_from_seed(seed));
        let mut cost = EvalCost::default();
        for (b, batch) in order.chunks(self.task.batch_size).enumerate() {
            let g = qnn_loss_and_grad(
                batch,
                params,
                &self.task,
                self.method,
                self.backend,
                derive_seed(seed, &[b as u64 + 1]),
            )?;
            opt.step(params, &g.grad)?;
            cost += g.cost;
        }
        Ok(cost)
    }

    fn monitor(&self, params: &[f64]) -> Result<(f64, f64)> {
        qnn_evaluate(&self.task.dataset.test, params, &self.task)
    }

    fn predicted(&self) -> Range<usize> {
        match self.scope {
            PredictionScope::All => 0..self.num_params(),
            PredictionScope::QuantumOnly => 0..self.task.num_quantum_params(),
        }
    }

    fn samples_per_iteration(&self) -> u64 {
        self.task.dataset.len() as u64
    }
}

pub(crate) fn build_workload(cfg: &RunConfig) -> Result<Box<dyn Workload>> {
    let backend = cfg.backend();
    let method = cfg.gradient;
    Ok(match &cfg.task {
        TaskSpec::Qaoa { depth, .. } => Box::new(QaoaWorkload {
            task: MaxCutTask::new(cfg.task.graph(cfg.seed)?, *depth)?,
            backend,
            method,
        }),
        TaskSpec::Vqe {
            hamiltonian,
            ansatz,
            convergence_tol,
        } => {
            let h = hamiltonian.load()?;
            let circuit = ansatz.build(h.num_qubits())?;
            Box::new(VqeWorkload {
                task: VqeTask::new(h, circuit, *convergence_tol)?,
                backend,
                method,
            })
        }
        TaskSpec::Qnn {
            qubits,
            layers,
            encoding,
            batch_size,
            scope,
            ..
        } => Box::new(QnnWorkload {
            task: QnnTask::new(cfg.task.dataset(cfg.seed)?, *qubits, *layers, *encoding, *batch_size)?,
            backend,
            method,
            scope: *scope,
        }),
    })
}

/// How predictions are scheduled, echoed into every summary.
pub const PREDICTION_SCHEDULE: &str =
    "p-epoch cycle: epoch i is a prediction when i % p == 0 and the window holds the p-1 optimizer epochs since the last prediction";

/// Runs the training loop.
///
/// Epoch `i` (1-based) is a prediction epoch when the method predicts,
/// `i % p == 0` and the window holds `p - 1` optimizer outputs gathered since
/// the previous prediction. Prediction epochs run no circuits. All other
/// epochs take one optimizer epoch and append its output to the window.
pub fn train(cfg: &RunConfig) -> Result<RunResult> {
    cfg.validate()?;
    let workload = build_workload(cfg)?;
    run_workload(cfg, workload.as_ref())
}

pub(crate) fn run_workload(cfg: &RunConfig, w: &dyn Workload) -> Result<RunResult> {
    let pcfg = cfg.predictor;
    let predicts = cfg.prediction_enabled && pcfg.method.predicts();
    let mut params = w.initial_params(&mut rng_from_seed(derive_seed(cfg.seed, &[TAG_INIT])));
    let mut opt = Optimizer::new(cfg.optimizer, params.len())?;
    let scope = w.predicted();
    let mut window = WeightWindow::for_config(&pcfg, scope.len())?;
    let mut records = Vec::with_capacity(cfg.epochs);
    let mut spent = EvalCost::default();
    let (mut predictions, mut rejected, mut steps) = (0, 0, 0);
    let mut early_stopped = false;
    let mut previous_loss: Option<f64> = None;

    for i in 1..=cfg.epochs {
        let was_prediction = predicts && i % pcfg.p == 0 && window.is_full();
        if was_prediction {
            let distance = match pcfg.method {
                Method::Nap => Distance::Nap { epoch: i as u64 },
                _ => Distance::Adap,
            };
            let pred = predict(&window, distance, &pcfg)?;
            params[scope.clone()].copy_from_slice(&pred.weights);
            rejected += pred.rejected;
            predictions += 1;
            window.clear();
        } else {
            let seed = derive_seed(cfg.seed, &[TAG_EPOCH, i as u64]);
            spent += w.train_epoch(&mut params, &mut opt, seed)?;
            steps += 1;
            window.push(&params[scope.clone()])?;
        }
        let (loss, metric) = w.monitor(&params)?;
        records.push(RunRecord {
            epoch: i,
            loss,
            metric,
            was_prediction,
            cumulative_executions: spent.executions,
            cumulative_shots: spent.shots,
        });
        if let (Some(tol), Some(prev)) = (w.convergence_tol(), previous_loss) {
            if (loss - prev).abs() < tol {
                early_stopped = true;
                break;
            }
        }
        previous_loss = Some(loss);
    }

    Ok(RunResult {
        records,
        final_params: params,
        predictions,
        rejected_predictions: rejected,
        optimizer_steps: steps,
        early_stopped,
        samples_per_iteration: w.samples_per_iteration(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dypp::PredictorConfig;
    use crate::gradopt::{OptimizerKind, OptimizerSpec};
    use crate::harness::config::TaskKind;

    /// Loss whose optimizer trajectory is an exact quadratic in the epoch:
    /// the "gradient" is chosen so that w_i = A i² + B i + C.
    struct QuadraticTrajectory {
        coef: [f64; 3],
    }

    impl QuadraticTrajectory {
        fn at(&self, x: f64) -> f64 {
            let [a, b, c] = self.coef;
            a * x * x + b * x + c
        }
    }

    impl Workload for QuadraticTrajectory {
        fn num_params(&self) -> usize {
            1
        }
        fn initial_params(&self, _rng: &mut Rng) -> Vec<f64> {
            vec![self.at(0.0)]
        }
        fn train_epoch(&self, params: &mut [f64], opt: &mut Optimizer, _seed: u64) -> Result<EvalCost> {
            // SGD with lr 1: the next weight follows the parabola from the current one
            let x = 1.0 + solve_x(self, params[0]);
            let target = self.at(x);
            opt.step(params, &[params[0] - target])?;
            Ok(EvalCost {
                executions: 2,
                shots: 10,
            })
        }
        fn monitor(&self, params: &[f64]) -> Result<(f64, f64)> {
            Ok((params[0], params[0]))
        }
    }

    // position along the increasing branch of the parabola
    fn solve_x(t: &QuadraticTrajectory, w: f64) -> f64 {
        let [a, b, c] = t.coef;
        (-b + (b * b - 4.0 * a * (c - w)).sqrt()) / (2.0 * a)
    }

    fn toy_cfg(method: Method, epochs: usize) -> RunConfig {
        let mut cfg = RunConfig::preset(TaskKind::Vqe);
        cfg.predictor = PredictorConfig::new(method, 5, 3.0, 0.01, 1.0);
        cfg.optimizer = OptimizerSpec::new(OptimizerKind::Sgd, 1.0);
        cfg.epochs = epochs;
        cfg
    }

    #[test]
    fn schedule_and_accounting() {
        let w = QuadraticTrajectory { coef: [0.01, 0.1, 0.0] };
        let r = run_workload(&toy_cfg(Method::Nap, 20), &w).unwrap();
        let pred_epochs: Vec<usize> = r.records.iter().filter(|x| x.was_prediction).map(|x| x.epoch).collect();
        assert_eq!(pred_epochs, vec![5, 10, 15, 20]);
        assert_eq!(r.optimizer_steps, 16);
        assert_eq!(r.records.last().unwrap().cumulative_shots, 160);
        for pair in r.records.windows(2) {
            if pair[1].was_prediction {
                assert_eq!(pair[1].cumulative_shots, pair[0].cumulative_shots);
            }
        }
        let v = run_workload(&toy_cfg(Method::Vanilla, 10), &w).unwrap();
        assert_eq!((v.predictions, v.optimizer_steps), (0, 10));
    }

    #[test]
    fn prediction_lands_on_true_trajectory() {
        let w = QuadraticTrajectory {
            coef: [0.02, 0.3, -1.0],
        };
        let cfg = toy_cfg(Method::Nap, 5);
        let r = run_workload(&cfg, &w).unwrap();
        // window holds x = 1..4; prediction fires at i = 5 with distance d in window coordinates
        let d = crate::dypp::nap_distance(5, &cfg.predictor);
        assert!((r.final_params[0] - w.at(d)).abs() < 1e-6);
        let cfg = toy_cfg(Method::Adap, 5);
        let r = run_workload(&cfg, &w).unwrap();
        let [a, b, c] = w.coef;
        let fit = crate::dypp::FitCoefficients { a, b, c };
        let d = crate::dypp::adap_distance(&fit, &cfg.predictor);
        assert!((r.final_params[0] - w.at(d)).abs() < 1e-6);
    }

    #[test]
    fn short_runs_never_predict() {
        let w = QuadraticTrajectory { coef: [0.01, 0.1, 0.0] };
        let r = run_workload(&toy_cfg(Method::Adap, 4), &w).unwrap();
        assert_eq!(r.predictions, 0);
    }

    #[test]
    fn disabled_prediction_matches_vanilla() {
        for kind in [TaskKind::Qaoa, TaskKind::Vqe] {
            let mut base = RunConfig::preset(kind).with_seed(3);
            base.epochs = 12;
            let vanilla = train(&base.clone().with_method(Method::Vanilla)).unwrap();
            for m in [Method::Nap, Method::Adap] {
                let mut c = base.clone().with_method(m);
                c.prediction_enabled = false;
                assert_eq!(train(&c).unwrap().records, vanilla.records);
            }
        }
    }
}
