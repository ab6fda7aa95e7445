use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::circuits::{EncodingSpec, GraphSpec};
use crate::dypp::{Method, PredictorConfig};
use crate::error::{input_err, Result};
use crate::gradopt::{GradientMethod, OptimizerKind, OptimizerSpec};
use crate::rng::{derive_seed, TAG_DATA, TAG_GRAPH};
use crate::simcore::{NoiseSpec, Observable, ShotConfig, ShotMode};
use crate::workloads::{
    bundled_hamiltonian, generate_erdos_renyi, load_dataset_csv, synth_blobs, tfim_hamiltonian, AnsatzKind, Backend,
    Dataset, PredictionScope, DEFAULT_CONVERGENCE_TOL,
};

/// Default depolarizing rate in noisy mode. Not taken from any published setup.
pub const DEFAULT_NOISE_PROB: f64 = 1e-3;
pub const DEFAULT_SHOTS: u64 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphSource {
    /// Erdos-Renyi graph drawn from the run seed.
    Random {
        nodes: usize,
        edge_prob: f64,
    },
    File {
        path: PathBuf,
    },
    Given {
        graph: GraphSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HamiltonianSource {
    Bundled { name: String },
    File { path: PathBuf },
    Tfim { sites: usize, j: f64, h: f64 },
}

impl HamiltonianSource {
    pub fn load(&self) -> Result<Observable> {
        match self {
            HamiltonianSource::Bundled { name } => match bundled_hamiltonian(name) {
                Some(h) => Ok(h),
                None => input_err(format!("no bundled Hamiltonian named '{name}'")),
            },
            HamiltonianSource::File { path } => Observable::from_file(path),
            HamiltonianSource::Tfim { sites, j, h } => tfim_hamiltonian(*sites, *j, *h),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    /// Gaussian blobs drawn from the run seed.
    Blobs {
        classes: usize,
        dim: usize,
        samples: usize,
        spread: f64,
    },
    Csv {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskSpec {
    Qaoa {
        graph: GraphSource,
        depth: usize,
    },
    Vqe {
        hamiltonian: HamiltonianSource,
        ansatz: AnsatzKind,
        convergence_tol: f64,
    },
    Qnn {
        data: DataSource,
        qubits: usize,
        layers: usize,
        encoding: EncodingSpec,
        batch_size: usize,
        scope: PredictionScope,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Qaoa,
    Vqe,
    Qnn,
}

impl TaskKind {
    pub fn parse(s: &str) -> Result<TaskKind> {
        match s.to_ascii_lowercase().as_str() {
            "qaoa" => Ok(TaskKind::Qaoa),
            "vqe" => Ok(TaskKind::Vqe),
            "qnn" => Ok(TaskKind::Qnn),
            _ => input_err(format!("unknown task '{s}' (expected qaoa, vqe or qnn)")),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Qaoa => "qaoa",
            TaskKind::Vqe => "vqe",
            TaskKind::Qnn => "qnn",
        }
    }
}

impl TaskSpec {
    pub fn kind(&self) -> TaskKind {
        match self {
            TaskSpec::Qaoa { .. } => TaskKind::Qaoa,
            TaskSpec::Vqe { .. } => TaskKind::Vqe,
            TaskSpec::Qnn { .. } => TaskKind::Qnn,
        }
    }

    pub fn default_for(kind: TaskKind) -> TaskSpec {
        match kind {
            TaskKind::Qaoa => TaskSpec::Qaoa {
                graph: GraphSource::Random {
                    nodes: 4,
                    edge_prob: 0.6,
                },
                depth: 1,
            },
            TaskKind::Vqe => TaskSpec::Vqe {
                hamiltonian: HamiltonianSource::Bundled { name: "h2".into() },
                ansatz: AnsatzKind::Uccsd { electrons: 2 },
                convergence_tol: DEFAULT_CONVERGENCE_TOL,
            },
            TaskKind::Qnn => TaskSpec::Qnn {
                data: DataSource::Blobs {
                    classes: 4,
                    dim: 8,
                    samples: 1000,
                    spread: 0.4,
                },
                qubits: 4,
                layers: 1,
                encoding: EncodingSpec::default(),
                batch_size: 32,
                scope: PredictionScope::All,
            },
        }
    }

    pub(crate) fn graph(&self, seed: u64) -> Result<GraphSpec> {
        match self {
            TaskSpec::Qaoa { graph, .. } => match graph {
                GraphSource::Random { nodes, edge_prob } => {
                    generate_erdos_renyi(*nodes, *edge_prob, derive_seed(seed, &[TAG_GRAPH]))
                }
                GraphSource::File { path } => GraphSpec::from_file(path),
                GraphSource::Given { graph } => Ok(graph.clone()),
            },
            _ => input_err("not a QAOA task"),
        }
    }

    pub(crate) fn dataset(&self, seed: u64) -> Result<Dataset> {
        let data_seed = derive_seed(seed, &[TAG_DATA]);
        match self {
            TaskSpec::Qnn { data, .. } => match data {
                DataSource::Blobs {
                    classes,
                    dim,
                    samples,
                    spread,
                } => synth_blobs(*classes, *dim, *samples, *spread, data_seed),
                DataSource::Csv { path } => load_dataset_csv(path, data_seed),
            },
            _ => input_err("not a QNN task"),
        }
    }
}

/// Everything needed to reproduce one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub task: TaskSpec,
    pub predictor: PredictorConfig,
    pub optimizer: OptimizerSpec,
    pub gradient: GradientMethod,
    pub epochs: usize,
    /// Shots per measured expectation; also the `m` of the lower-bound count.
    pub shots: u64,
    pub shot_mode: ShotMode,
    pub noise: NoiseSpec,
    pub seed: u64,
    /// When false, DyPP methods never predict and reduce to plain training.
    #[serde(default = "enabled")]
    pub prediction_enabled: bool,
}

fn enabled() -> bool {
    true
}

impl RunConfig {
    /// Noiseless defaults for a task.
    pub fn preset(kind: TaskKind) -> RunConfig {
        let (p, d0, k, alpha, opt, epochs) = match kind {
            TaskKind::Qnn => (5, 3.0, 1e-4, 0.002, OptimizerKind::Adam, 200),
            TaskKind::Vqe => (4, 5.0, 0.01, 0.1, OptimizerKind::Sgd, 200),
            TaskKind::Qaoa => (4, 3.0, 0.01, 0.05, OptimizerKind::Adagrad, 100),
        };
        RunConfig {
            task: TaskSpec::default_for(kind),
            predictor: PredictorConfig::new(Method::Adap, p, d0, k, alpha),
            optimizer: OptimizerSpec::new(opt, alpha),
            gradient: GradientMethod::Exact,
            epochs,
            shots: DEFAULT_SHOTS,
            shot_mode: ShotMode::Exact,
            noise: NoiseSpec::none(),
            seed: 0,
            prediction_enabled: true,
        }
    }

    /// Sampled, noisy variant of [`Self::preset`] with `p` raised by one.
    pub fn noisy_preset(kind: TaskKind) -> RunConfig {
        let mut cfg = RunConfig::preset(kind);
        cfg.predictor.p += 1;
        cfg.shot_mode = ShotMode::Sampled;
        cfg.noise = NoiseSpec::depolarizing(DEFAULT_NOISE_PROB);
        cfg.gradient = match kind {
            TaskKind::Qnn => GradientMethod::spsa(),
            TaskKind::Vqe | TaskKind::Qaoa => GradientMethod::ParamShift,
        };
        cfg
    }

    pub fn method(&self) -> Method {
        self.predictor.method
    }

    pub fn with_method(mut self, method: Method) -> RunConfig {
        self.predictor.method = method;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> RunConfig {
        self.seed = seed;
        self
    }

    /// Sets the optimizer learning rate and the α the predictor mirrors.
    pub fn with_learning_rate(mut self, alpha: f64) -> RunConfig {
        self.optimizer.learning_rate = alpha;
        self.predictor.alpha = alpha;
        self
    }

    pub fn backend(&self) -> Backend {
        let shots = match self.shot_mode {
            ShotMode::Exact => ShotConfig::exact(),
            ShotMode::Sampled => ShotConfig::sampled(self.shots),
        };
        Backend {
            shots,
            noise: self.noise,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return input_err("epochs must be at least 1");
        }
        if self.shots == 0 {
            return input_err("shots must be at least 1");
        }
        self.predictor.validate()?;
        self.optimizer.validate()?;
        self.gradient.validate()?;
        self.backend().validate()?;
        match &self.task {
            TaskSpec::Qaoa { depth, .. } if *depth == 0 => input_err("QAOA depth must be at least 1"),
            TaskSpec::Vqe { convergence_tol, .. } if convergence_tol.is_nan() || *convergence_tol < 0.0 => {
                input_err("convergence tolerance must be non-negative")
            }
            TaskSpec::Qnn { batch_size, .. } if *batch_size == 0 => input_err("batch size must be at least 1"),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_roundtrip() {
        for kind in [TaskKind::Qaoa, TaskKind::Vqe, TaskKind::Qnn] {
            for cfg in [RunConfig::preset(kind), RunConfig::noisy_preset(kind)] {
                cfg.validate().unwrap();
                let json = serde_json::to_string(&cfg).unwrap();
                let back: RunConfig = serde_json::from_str(&json).unwrap();
                assert_eq!(back, cfg);
            }
        }
        let q = RunConfig::preset(TaskKind::Qnn);
        assert_eq!((q.predictor.p, q.predictor.d0_init, q.predictor.k), (5, 3.0, 1e-4));
        assert_eq!((q.predictor.r, q.predictor.n_max), (0.95, 12.0));
        assert_eq!(RunConfig::noisy_preset(TaskKind::Vqe).predictor.p, 5);
    }

    #[test]
    fn invalid_configs() {
        let mut c = RunConfig::preset(TaskKind::Vqe);
        c.epochs = 0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::preset(TaskKind::Vqe);
        c.predictor.p = 3;
        assert!(c.validate().is_err());
        let mut c = RunConfig::preset(TaskKind::Qaoa);
        c.optimizer.learning_rate = -1.0;
        assert!(c.validate().is_err());
    }
}
