mod args;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::Parser;

use args::{Cli, Command, CompareArgs, OracleCommand, OutputArgs, RunTask};
use dypp_core::circuits::GraphSpec;
use dypp_core::harness::{compare, save_json, save_records_csv, train, RunConfig, RunResult, RunSummary};
use dypp_core::simcore::{exact_ground_energy, Observable};
use dypp_core::workloads::brute_force_maxcut;

/// Bad flags or malformed input: exit 2. Anything that fails while running: exit 1.
enum Failure {
    Usage(anyhow::Error),
    Run(anyhow::Error),
}

fn usage<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(Failure::Usage)
}

fn running<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(Failure::Run)
}

fn echo(cfg: &RunConfig) {
    let p = &cfg.predictor;
    println!(
        "{} {} seed={}: p={} d0={} k={} r={} n={} alpha={} optimizer={:?} gradient={} epochs={} shots={} mode={:?} noise={}{}",
        cfg.task.kind().name(),
        cfg.method(),
        cfg.seed,
        p.p,
        p.d0_init,
        p.k,
        p.r,
        p.n_max,
        cfg.optimizer.learning_rate,
        cfg.optimizer.kind,
        cfg.gradient.name(),
        cfg.epochs,
        cfg.shots,
        cfg.shot_mode,
        if cfg.noise.enabled { cfg.noise.depolarizing_prob } else { 0.0 },
        if cfg.prediction_enabled { "" } else { " (prediction disabled)" },
    );
}

fn stem(cfg: &RunConfig) -> String {
    format!("{}_{}_seed{}", cfg.task.kind().name(), cfg.method(), cfg.seed)
}

fn prepare_dir(out: &OutputArgs) -> Result<()> {
    std::fs::create_dir_all(&out.out).with_context(|| format!("creating {}", out.out.display()))
}

fn write_csv(out: &Path, cfg: &RunConfig, result: &RunResult) -> Result<PathBuf> {
    let path = out.join(format!("{}.csv", stem(cfg)));
    save_records_csv(&path, &result.records).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn run(task: &RunTask) -> std::result::Result<(), Failure> {
    let (kind, a) = task.split();
    let mut cfg = usage(a.flags.resolve(kind))?;
    if let Some(m) = a.method {
        cfg = cfg.with_method(m);
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    echo(&cfg);
    running(prepare_dir(&a.output))?;
    let result = running(train(&cfg).map_err(|e| anyhow!(e)))?;
    let summary = RunSummary::new(&cfg, &result);
    println!(
        "epochs {}{}, final loss {}, final metric {}, predictions {} ({} rejected), shots {} (lower bound {})",
        summary.epochs_run,
        if summary.early_stopped { " (early stop)" } else { "" },
        summary.final_loss,
        summary.final_metric,
        summary.predictions,
        summary.rejected_predictions,
        summary.shots.detailed,
        summary.shots.lower_bound,
    );
    let out = &a.output.out;
    if a.output.format.csv() {
        println!("wrote {}", running(write_csv(out, &cfg, &result))?.display());
    }
    if a.output.format.json() {
        let path = out.join(format!("{}.json", stem(&cfg)));
        running(save_json(&path, &summary).map_err(|e| anyhow!(e)))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_compare(a: &CompareArgs) -> std::result::Result<(), Failure> {
    if a.methods.len() < 2 {
        return Err(Failure::Usage(anyhow!("compare needs at least two methods")));
    }
    if a.seeds == 0 {
        return Err(Failure::Usage(anyhow!("--seeds must be at least 1")));
    }
    let base = usage(a.flags.resolve(a.task))?.with_method(a.methods[0]);
    let seeds: Vec<u64> = (a.first_seed..a.first_seed + a.seeds).collect();
    echo(&base.clone().with_seed(seeds[0]));
    running(prepare_dir(&a.output))?;
    // duplicate methods and similar input problems surface here, before any training
    let summary = compare(&base, &a.methods, &seeds).map_err(|e| Failure::Usage(anyhow!(e)))?;

    let out = &a.output.out;
    let mut written = 0;
    if a.output.format.csv() {
        for r in &summary.runs {
            if let Some(result) = &r.result {
                running(write_csv(out, &r.config, result))?;
                written += 1;
            }
        }
    }
    for s in &summary.summaries {
        println!(
            "{:<8} median speedup {:>7}  median final loss {:>10}  median final metric {:>10}  lower-bound shots {:>12}  savings {:>6}  failures {}",
            s.method.to_string(),
            fmt_opt(s.median_speedup, 3),
            fmt_opt(s.median_final_loss, 5),
            fmt_opt(s.median_final_metric, 5),
            s.lower_bound_shots,
            fmt_opt(s.shot_savings, 2),
            s.failures,
        );
    }
    if written > 0 {
        println!("wrote {written} CSV files to {}", out.display());
    }
    if a.output.format.json() {
        let path = out.join(format!("{}_comparison.json", a.task.name()));
        running(save_json(&path, &summary).map_err(|e| anyhow!(e)))?;
        println!("wrote {}", path.display());
    }
    let failed: Vec<String> = summary
        .runs
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("{} seed {}: {e}", r.method, r.seed)))
        .collect();
    if !failed.is_empty() {
        return Err(Failure::Run(anyhow!(
            "{} run(s) failed:\n  {}",
            failed.len(),
            failed.join("\n  ")
        )));
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.digits$}"))
}

fn oracle(which: &OracleCommand) -> Result<String> {
    match which {
        OracleCommand::Maxcut { file } => {
            let text = read(file)?;
            let graph = GraphSpec::parse(&text).map_err(|e| anyhow!(e))?;
            Ok(brute_force_maxcut(&graph).map_err(|e| anyhow!(e))?.to_string())
        }
        OracleCommand::Eig { file } => {
            let text = read(file)?;
            let h = Observable::parse(&text).map_err(|e| anyhow!(e))?;
            // Debug formatting is the shortest round-trip representation
            Ok(format!("{:?}", exact_ground_energy(&h).map_err(|e| anyhow!(e))?))
        }
    }
}

fn read(path: &Path) -> Result<String> {
    if !path.is_file() {
        bail!("{} is not a readable file", path.display());
    }
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { task } => run(task),
        Command::Compare(a) => run_compare(a),
        Command::Oracle { which } => oracle(which).map(|v| println!("{v}")).map_err(Failure::Usage),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
