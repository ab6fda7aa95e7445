use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dypp_core::dypp::Method;
use dypp_core::gradopt::{GradientMethod, OptimizerKind, DEFAULT_FD_STEP, DEFAULT_SPSA_C};
use dypp_core::harness::{
    DataSource, GraphSource, HamiltonianSource, RunConfig, TaskKind, TaskSpec, DEFAULT_NOISE_PROB,
};
use dypp_core::simcore::{NoiseSpec, ShotMode};
use dypp_core::workloads::{AnsatzKind, PredictionScope, BUNDLED_HAMILTONIANS};

#[derive(Debug, Parser)]
#[command(
    name = "dypp",
    version,
    about = "Train variational quantum models with quadratic weight prediction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one task with one method and write its trace and summary.
    Run {
        #[command(subcommand)]
        task: RunTask,
    },
    /// Train several methods over several seeds and summarize against the first.
    Compare(CompareArgs),
    /// Print a reference value computed by brute force.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum RunTask {
    /// QAOA MaxCut on a random or given graph.
    Qaoa(RunArgs),
    /// VQE ground-state energy.
    Vqe(RunArgs),
    /// Hybrid quantum-classical classifier.
    Qnn(RunArgs),
}

impl RunTask {
    pub fn split(&self) -> (TaskKind, &RunArgs) {
        match self {
            RunTask::Qaoa(a) => (TaskKind::Qaoa, a),
            RunTask::Vqe(a) => (TaskKind::Vqe, a),
            RunTask::Qnn(a) => (TaskKind::Qnn, a),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Maximum cut of a graph file.
    Maxcut { file: PathBuf },
    /// Lowest eigenvalue of a Hamiltonian file.
    Eig { file: PathBuf },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// vanilla, nap or adap [default: adap, or the method in --config].
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub flags: ConfigFlags,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// qaoa, vqe or qnn.
    #[arg(long, value_parser = parse_task)]
    pub task: TaskKind,
    /// Comma-separated; speedups are measured against the first.
    #[arg(long, value_delimiter = ',', default_value = "vanilla,nap,adap")]
    pub methods: Vec<Method>,
    /// Number of seeds.
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub first_seed: u64,
    #[command(flatten)]
    pub flags: ConfigFlags,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        self != Format::Json
    }

    pub fn json(self) -> bool {
        self != Format::Csv
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Directory for CSV and JSON artifacts; created if missing.
    #[arg(long, default_value = "dypp-out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Synthetic {
    Blobs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnsatzArg {
    Uccsd,
    Hea,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GradientArg {
    Exact,
    ParamShift,
    Spsa,
    FiniteDiff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizerArg {
    Sgd,
    Adam,
    Adagrad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    All,
    QuantumOnly,
}

/// Overrides applied on top of the task preset (or `--config`).
#[derive(Debug, Default, Args)]
pub struct ConfigFlags {
    /// Start from the configuration in a JSON file (a config or any emitted summary).
    #[arg(long, conflicts_with = "noisy")]
    pub config: Option<PathBuf>,

    // QAOA
    #[arg(long, help_heading = "QAOA")]
    pub nodes: Option<usize>,
    #[arg(long, help_heading = "QAOA")]
    pub edge_prob: Option<f64>,
    /// Graph file instead of a random graph.
    #[arg(long, help_heading = "QAOA", conflicts_with_all = ["nodes", "edge_prob"])]
    pub graph: Option<PathBuf>,
    #[arg(long, help_heading = "QAOA")]
    pub depth: Option<usize>,

    // VQE
    /// Hamiltonian file, or a bundled name (h2, tfim4).
    #[arg(long, help_heading = "VQE")]
    pub hamiltonian: Option<String>,
    #[arg(long, value_enum, help_heading = "VQE")]
    pub ansatz: Option<AnsatzArg>,
    #[arg(long, help_heading = "VQE")]
    pub electrons: Option<usize>,
    /// Early-stop threshold on the energy change between epochs.
    #[arg(long, help_heading = "VQE")]
    pub tol: Option<f64>,

    // QNN
    #[arg(long, value_enum, help_heading = "QNN")]
    pub synthetic: Option<Synthetic>,
    /// Dataset CSV with header f1,...,fd,label.
    #[arg(long, help_heading = "QNN", conflicts_with = "synthetic")]
    pub data: Option<PathBuf>,
    #[arg(long, help_heading = "QNN")]
    pub classes: Option<usize>,
    #[arg(long, help_heading = "QNN")]
    pub dim: Option<usize>,
    #[arg(long, help_heading = "QNN")]
    pub samples: Option<usize>,
    #[arg(long, help_heading = "QNN")]
    pub spread: Option<f64>,
    #[arg(long, help_heading = "QNN")]
    pub qubits: Option<usize>,
    #[arg(long, help_heading = "QNN")]
    pub batch_size: Option<usize>,
    #[arg(long, value_enum, help_heading = "QNN")]
    pub scope: Option<ScopeArg>,
    /// Ansatz layers (QNN, or VQE with --ansatz hea).
    #[arg(long)]
    pub layers: Option<usize>,

    // predictor
    #[arg(long, help_heading = "Prediction")]
    pub p: Option<usize>,
    #[arg(long, help_heading = "Prediction")]
    pub d0: Option<f64>,
    #[arg(long, help_heading = "Prediction")]
    pub k: Option<f64>,
    #[arg(long, help_heading = "Prediction")]
    pub r: Option<f64>,
    #[arg(long, help_heading = "Prediction")]
    pub n: Option<f64>,
    /// Train without ever predicting.
    #[arg(long, help_heading = "Prediction")]
    pub no_prediction: bool,

    // training
    #[arg(long, help_heading = "Training")]
    pub epochs: Option<usize>,
    #[arg(long, help_heading = "Training")]
    pub lr: Option<f64>,
    #[arg(long, value_enum, help_heading = "Training")]
    pub optimizer: Option<OptimizerArg>,
    #[arg(long, value_enum, help_heading = "Training")]
    pub gradient: Option<GradientArg>,
    /// SPSA perturbation, or finite-difference step.
    #[arg(long, help_heading = "Training")]
    pub gradient_step: Option<f64>,

    // backend
    /// Shots per expectation (m).
    #[arg(long, help_heading = "Backend")]
    pub shots: Option<u64>,
    /// Estimate expectations from shots instead of the statevector.
    #[arg(long, help_heading = "Backend")]
    pub sampled: bool,
    /// Sampled mode with gate noise and the noisy-mode defaults.
    #[arg(long, help_heading = "Backend")]
    pub noisy: bool,
    #[arg(long, help_heading = "Backend")]
    pub noise_prob: Option<f64>,
}

fn read_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    serde_json::from_value(value).with_context(|| format!("{} holds no run configuration", path.display()))
}

fn hamiltonian_source(arg: &str) -> Result<HamiltonianSource> {
    let path = Path::new(arg);
    if path.is_file() {
        Ok(HamiltonianSource::File {
            path: path.to_path_buf(),
        })
    } else if BUNDLED_HAMILTONIANS.contains(&arg) {
        Ok(HamiltonianSource::Bundled { name: arg.to_string() })
    } else {
        bail!("Hamiltonian '{arg}' is neither a file nor one of {BUNDLED_HAMILTONIANS:?}")
    }
}

fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        bail!("input file {} does not exist", path.display());
    }
    Ok(())
}

impl ConfigFlags {
    fn reject(&self, kind: TaskKind, given: &[(&str, bool)]) -> Result<()> {
        match given.iter().find(|(_, set)| *set) {
            Some((name, _)) => bail!("--{name} does not apply to the {} task", kind.name()),
            None => Ok(()),
        }
    }

    fn check_applicable(&self, kind: TaskKind) -> Result<()> {
        let qaoa = [
            ("nodes", self.nodes.is_some()),
            ("edge-prob", self.edge_prob.is_some()),
            ("graph", self.graph.is_some()),
            ("depth", self.depth.is_some()),
        ];
        let vqe = [
            ("hamiltonian", self.hamiltonian.is_some()),
            ("ansatz", self.ansatz.is_some()),
            ("electrons", self.electrons.is_some()),
            ("tol", self.tol.is_some()),
        ];
        let qnn = [
            ("synthetic", self.synthetic.is_some()),
            ("data", self.data.is_some()),
            ("classes", self.classes.is_some()),
            ("dim", self.dim.is_some()),
            ("samples", self.samples.is_some()),
            ("spread", self.spread.is_some()),
            ("qubits", self.qubits.is_some()),
            ("batch-size", self.batch_size.is_some()),
            ("scope", self.scope.is_some()),
        ];
        match kind {
            TaskKind::Qaoa => {
                self.reject(kind, &vqe)?;
                self.reject(kind, &qnn)?;
                self.reject(kind, &[("layers", self.layers.is_some())])
            }
            TaskKind::Vqe => {
                self.reject(kind, &qaoa)?;
                self.reject(kind, &qnn)
            }
            TaskKind::Qnn => {
                self.reject(kind, &qaoa)?;
                self.reject(kind, &vqe)
            }
        }
    }

    /// Builds the run configuration for `kind`: preset or `--config`, then
    /// every flag that was given.
    pub fn resolve(&self, kind: TaskKind) -> Result<RunConfig> {
        self.check_applicable(kind)?;
        let mut cfg = match &self.config {
            Some(path) => {
                let cfg = read_config(path)?;
                if cfg.task.kind() != kind {
                    bail!(
                        "{} configures a {} task, not {}",
                        path.display(),
                        cfg.task.kind().name(),
                        kind.name()
                    );
                }
                cfg
            }
            None if self.noisy => RunConfig::noisy_preset(kind),
            None => RunConfig::preset(kind),
        };
        self.apply_task(&mut cfg.task)?;
        self.apply_training(&mut cfg);
        cfg.validate().map_err(|e| anyhow!(e))?;
        Ok(cfg)
    }

    fn apply_task(&self, task: &mut TaskSpec) -> Result<()> {
        match task {
            TaskSpec::Qaoa { graph, depth } => {
                if let Some(path) = &self.graph {
                    require_file(path)?;
                    *graph = GraphSource::File { path: path.clone() };
                } else if self.nodes.is_some() || self.edge_prob.is_some() {
                    let (n0, p0) = match graph {
                        GraphSource::Random { nodes, edge_prob } => (*nodes, *edge_prob),
                        _ => (4, 0.6),
                    };
                    *graph = GraphSource::Random {
                        nodes: self.nodes.unwrap_or(n0),
                        edge_prob: self.edge_prob.unwrap_or(p0),
                    };
                }
                if let Some(d) = self.depth {
                    *depth = d;
                }
            }
            TaskSpec::Vqe {
                hamiltonian,
                ansatz,
                convergence_tol,
            } => {
                if let Some(h) = &self.hamiltonian {
                    *hamiltonian = hamiltonian_source(h)?;
                }
                let electrons = match *ansatz {
                    AnsatzKind::Uccsd { electrons } => electrons,
                    AnsatzKind::Hea { .. } => 2,
                };
                let layers = match *ansatz {
                    AnsatzKind::Hea { layers } => layers,
                    AnsatzKind::Uccsd { .. } => 1,
                };
                let chosen = self.ansatz.unwrap_or(match ansatz {
                    AnsatzKind::Uccsd { .. } => AnsatzArg::Uccsd,
                    AnsatzKind::Hea { .. } => AnsatzArg::Hea,
                });
                *ansatz = match chosen {
                    AnsatzArg::Uccsd => {
                        if self.layers.is_some() {
                            bail!("--layers applies to the hea ansatz only");
                        }
                        AnsatzKind::Uccsd {
                            electrons: self.electrons.unwrap_or(electrons),
                        }
                    }
                    AnsatzArg::Hea => {
                        if self.electrons.is_some() {
                            bail!("--electrons applies to the uccsd ansatz only");
                        }
                        AnsatzKind::Hea {
                            layers: self.layers.unwrap_or(layers),
                        }
                    }
                };
                if let Some(t) = self.tol {
                    *convergence_tol = t;
                }
            }
            TaskSpec::Qnn {
                data,
                qubits,
                layers,
                encoding: _,
                batch_size,
                scope,
            } => {
                if let Some(path) = &self.data {
                    require_file(path)?;
                    *data = DataSource::Csv { path: path.clone() };
                } else if self.synthetic.is_some() && !matches!(data, DataSource::Blobs { .. }) {
                    *data = default_blobs();
                }
                let blob_flags =
                    self.classes.is_some() || self.dim.is_some() || self.samples.is_some() || self.spread.is_some();
                match data {
                    DataSource::Blobs {
                        classes,
                        dim,
                        samples,
                        spread,
                    } => {
                        *classes = self.classes.unwrap_or(*classes);
                        *dim = self.dim.unwrap_or(*dim);
                        *samples = self.samples.unwrap_or(*samples);
                        *spread = self.spread.unwrap_or(*spread);
                    }
                    DataSource::Csv { .. } if blob_flags => {
                        bail!("--classes, --dim, --samples and --spread apply to synthetic data only")
                    }
                    DataSource::Csv { .. } => {}
                }
                *qubits = self.qubits.unwrap_or(*qubits);
                *layers = self.layers.unwrap_or(*layers);
                *batch_size = self.batch_size.unwrap_or(*batch_size);
                if let Some(s) = self.scope {
                    *scope = match s {
                        ScopeArg::All => PredictionScope::All,
                        ScopeArg::QuantumOnly => PredictionScope::QuantumOnly,
                    };
                }
            }
        }
        Ok(())
    }

    fn apply_training(&self, cfg: &mut RunConfig) {
        let pr = &mut cfg.predictor;
        pr.p = self.p.unwrap_or(pr.p);
        pr.d0_init = self.d0.unwrap_or(pr.d0_init);
        pr.k = self.k.unwrap_or(pr.k);
        pr.r = self.r.unwrap_or(pr.r);
        pr.n_max = self.n.unwrap_or(pr.n_max);
        if self.no_prediction {
            cfg.prediction_enabled = false;
        }
        if let Some(e) = self.epochs {
            cfg.epochs = e;
        }
        if let Some(lr) = self.lr {
            *cfg = cfg.clone().with_learning_rate(lr);
        }
        if let Some(o) = self.optimizer {
            cfg.optimizer.kind = match o {
                OptimizerArg::Sgd => OptimizerKind::Sgd,
                OptimizerArg::Adam => OptimizerKind::Adam,
                OptimizerArg::Adagrad => OptimizerKind::Adagrad,
            };
        }
        let step = self.gradient_step;
        if let Some(g) = self.gradient {
            cfg.gradient = match g {
                GradientArg::Exact => GradientMethod::Exact,
                GradientArg::ParamShift => GradientMethod::ParamShift,
                GradientArg::Spsa => GradientMethod::Spsa {
                    c: step.unwrap_or(DEFAULT_SPSA_C),
                },
                GradientArg::FiniteDiff => GradientMethod::FiniteDiff {
                    h: step.unwrap_or(DEFAULT_FD_STEP),
                },
            };
        } else if let Some(s) = step {
            match &mut cfg.gradient {
                GradientMethod::Spsa { c } => *c = s,
                GradientMethod::FiniteDiff { h } => *h = s,
                _ => {}
            }
        }
        if let Some(m) = self.shots {
            cfg.shots = m;
        }
        if self.sampled {
            cfg.shot_mode = ShotMode::Sampled;
        }
        if let Some(q) = self.noise_prob {
            cfg.noise = NoiseSpec::depolarizing(q);
        } else if self.noisy && !cfg.noise.enabled {
            cfg.noise = NoiseSpec::depolarizing(DEFAULT_NOISE_PROB);
        }
    }
}

fn default_blobs() -> DataSource {
    match TaskSpec::default_for(TaskKind::Qnn) {
        TaskSpec::Qnn { data, .. } => data,
        _ => unreachable!("QNN preset"),
    }
}

fn parse_task(s: &str) -> Result<TaskKind> {
    TaskKind::parse(s).map_err(|e| anyhow!(e))
}
