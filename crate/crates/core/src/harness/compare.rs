use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::dypp::Method;
use crate::error::{input_err, Result};

use super::config::RunConfig;
use super::metrics::{
    convergence_rate, default_cr_window, median, objective_for, shot_accounting, ShotTotals, Speedup,
};
use super::train::{train, RunResult, PREDICTION_SCHEDULE};

/// Outcome of one (method, seed) run inside a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub method: Method,
    pub seed: u64,
    pub config: RunConfig,
    /// Present when the run failed; the other fields are then empty.
    pub error: Option<String>,
    pub num_params: Option<usize>,
    #[serde(skip)]
    pub result: Option<RunResult>,
    pub epochs_run: usize,
    pub final_loss: Option<f64>,
    pub final_metric: Option<f64>,
    pub convergence_rate: Option<f64>,
    pub shots: Option<ShotTotals>,
    /// Against the baseline method at the same seed.
    pub speedup: Option<Speedup>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    /// Per-seed speedups in seed order; 0 where the baseline was not surpassed.
    pub speedups: Vec<f64>,
    pub median_speedup: Option<f64>,
    pub mean_convergence_rate: Option<f64>,
    pub median_final_loss: Option<f64>,
    pub median_final_metric: Option<f64>,
    pub detailed_shots: u64,
    pub lower_bound_shots: u64,
    /// Baseline lower-bound shots over this method's, summed across seeds.
    pub shot_savings: Option<f64>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub task: String,
    /// The first method; speedups and savings are relative to it.
    pub baseline: Method,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    /// Shared configuration; per-run method and seed are in `runs`.
    pub config: RunConfig,
    pub prediction_schedule: String,
    pub summaries: Vec<MethodSummary>,
    pub runs: Vec<RunEntry>,
}

impl ComparisonSummary {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    pub fn run(&self, method: Method, seed: u64) -> Option<&RunEntry> {
        self.runs.iter().find(|r| r.method == method && r.seed == seed)
    }
}

fn entry(cfg: RunConfig, outcome: Result<RunResult>) -> RunEntry {
    let kind = cfg.task.kind();
    let mut e = RunEntry {
        method: cfg.method(),
        seed: cfg.seed,
        error: None,
        num_params: None,
        result: None,
        epochs_run: 0,
        final_loss: None,
        final_metric: None,
        convergence_rate: None,
        shots: None,
        speedup: None,
        config: cfg,
    };
    match outcome {
        Err(err) => e.error = Some(err.to_string()),
        Ok(r) => {
            let (series, _) = objective_for(kind);
            e.epochs_run = r.records.len();
            e.num_params = Some(r.final_params.len());
            e.final_loss = r.records.last().map(|x| x.loss);
            e.final_metric = r.records.last().map(|x| x.metric);
            e.convergence_rate = convergence_rate(&r.records, series, default_cr_window(kind, &r.records)).ok();
            e.shots = Some(shot_accounting(&r.records, e.config.shots, r.samples_per_iteration));
            e.result = Some(r);
        }
    }
    e
}

/// Runs every method at every seed from `base` and summarizes against the
/// first method. Runs at the same seed share initial weights and task data.
pub fn compare(base: &RunConfig, methods: &[Method], seeds: &[u64]) -> Result<ComparisonSummary> {
    if methods.is_empty() {
        return input_err("no methods to compare");
    }
    if seeds.is_empty() {
        return input_err("at least one seed is required");
    }
    let mut seen = HashSet::new();
    if let Some(dup) = methods.iter().find(|m| !seen.insert(**m)) {
        return input_err(format!("method '{dup}' listed more than once"));
    }
    base.validate()?;
    let kind = base.task.kind();
    let (series, lower) = objective_for(kind);

    let mut runs = Vec::with_capacity(methods.len() * seeds.len());
    for &seed in seeds {
        for &m in methods {
            let cfg = base.clone().with_method(m).with_seed(seed);
            let outcome = train(&cfg);
            runs.push(entry(cfg, outcome));
        }
    }
    let baseline = methods[0];
    for k in 0..runs.len() {
        let base_run = runs.iter().find(|r| r.method == baseline && r.seed == runs[k].seed);
        let s = match (base_run.and_then(|b| b.result.as_ref()), runs[k].result.as_ref()) {
            (Some(b), Some(c)) => super::metrics::speedup(&b.records, &c.records, series, lower).ok(),
            _ => None,
        };
        runs[k].speedup = s;
    }

    let totals = |m: Method| -> (u64, u64) {
        runs.iter()
            .filter(|r| r.method == m)
            .filter_map(|r| r.shots)
            .fold((0, 0), |(d, l), s| (d + s.detailed, l + s.lower_bound))
    };
    let (_, baseline_lb) = totals(baseline);
    let summaries = methods
        .iter()
        .map(|&m| {
            let mine: Vec<&RunEntry> = runs.iter().filter(|r| r.method == m).collect();
            let speedups: Vec<f64> = mine.iter().filter_map(|r| r.speedup.map(|s| s.value)).collect();
            let crs: Vec<f64> = mine.iter().filter_map(|r| r.convergence_rate).collect();
            let losses: Vec<f64> = mine.iter().filter_map(|r| r.final_loss).collect();
            let metrics: Vec<f64> = mine.iter().filter_map(|r| r.final_metric).collect();
            let (detailed, lb) = totals(m);
            MethodSummary {
                method: m,
                median_speedup: median(&speedups),
                speedups,
                mean_convergence_rate: (!crs.is_empty()).then(|| crs.iter().sum::<f64>() / crs.len() as f64),
                median_final_loss: median(&losses),
                median_final_metric: median(&metrics),
                detailed_shots: detailed,
                lower_bound_shots: lb,
                shot_savings: (lb > 0).then(|| baseline_lb as f64 / lb as f64),
                failures: mine.iter().filter(|r| r.error.is_some()).count(),
            }
        })
        .collect();

    Ok(ComparisonSummary {
        task: kind.name().to_string(),
        baseline,
        methods: methods.to_vec(),
        seeds: seeds.to_vec(),
        config: base.clone(),
        prediction_schedule: PREDICTION_SCHEDULE.to_string(),
        summaries,
        runs,
    })
}
