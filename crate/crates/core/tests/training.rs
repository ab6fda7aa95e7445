use dypp_core::dypp::Method;
use dypp_core::harness::{
    compare, load_records_csv, median, save_records_csv, speedup, train, DataSource, RunConfig, Series, TaskKind,
    TaskSpec,
};

#[test]
fn compare_medians_recompute_from_traces() {
    let mut cfg = RunConfig::preset(TaskKind::Qaoa);
    cfg.epochs = 40;
    let seeds = [0, 1, 2];
    let summary = compare(&cfg, &[Method::Vanilla, Method::Nap, Method::Adap], &seeds).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for r in &summary.runs {
        let path = dir.path().join(format!("{}_{}.csv", r.method, r.seed));
        save_records_csv(&path, &r.result.as_ref().unwrap().records).unwrap();
    }
    for m in [Method::Nap, Method::Adap] {
        let values: Vec<f64> = seeds
            .iter()
            .map(|s| {
                let base = load_records_csv(dir.path().join(format!("vanilla_{s}.csv"))).unwrap();
                let cand = load_records_csv(dir.path().join(format!("{m}_{s}.csv"))).unwrap();
                // approximation ratio, higher is better: e_v / e_p
                let best = base.iter().map(|r| r.metric).fold(f64::NEG_INFINITY, f64::max);
                let e_v = base.iter().find(|r| r.metric == best).unwrap().epoch;
                cand.iter()
                    .find(|r| r.metric >= best)
                    .map_or(0.0, |r| e_v as f64 / r.epoch as f64)
            })
            .collect();
        let s = summary.summary(m).unwrap();
        assert_eq!(s.speedups, values);
        assert_eq!(s.median_speedup, median(&values));
    }
}

#[test]
fn seeds_are_reproducible_and_distinct() {
    let cfg = RunConfig::preset(TaskKind::Qaoa).with_seed(9);
    let a = train(&cfg).unwrap();
    let b = train(&cfg).unwrap();
    assert_eq!(a.records, b.records);
    let c = train(&cfg.clone().with_seed(10)).unwrap();
    assert_ne!(a.records, c.records);
}

#[test]
fn methods_share_initial_point_per_seed() {
    let mut cfg = RunConfig::preset(TaskKind::Qnn);
    cfg.epochs = 4;
    cfg.task = match cfg.task {
        TaskSpec::Qnn {
            layers,
            encoding,
            batch_size,
            scope,
            ..
        } => TaskSpec::Qnn {
            data: DataSource::Blobs {
                classes: 3,
                dim: 4,
                samples: 90,
                spread: 0.4,
            },
            qubits: 2,
            layers,
            encoding,
            batch_size,
            scope,
        },
        other => other,
    };
    let runs: Vec<_> = Method::ALL
        .iter()
        .map(|&m| train(&cfg.clone().with_method(m)).unwrap())
        .collect();
    // the first p - 1 epochs are plain optimizer steps for every method
    for r in &runs[1..] {
        assert_eq!(r.records[..3], runs[0].records[..3]);
    }
    let s = speedup(&runs[0].records, &runs[0].records, Series::Loss, true).unwrap();
    assert_eq!(s.value, 1.0);
}

#[test]
fn noisy_runs_charge_shots() {
    let mut cfg = RunConfig::noisy_preset(TaskKind::Qaoa);
    cfg.epochs = 12;
    let r = train(&cfg).unwrap();
    let last = r.records.last().unwrap();
    assert!(last.cumulative_shots > 0);
    assert_eq!(last.cumulative_shots % cfg.shots, 0);
    assert!(r
        .records
        .windows(2)
        .all(|w| w[1].cumulative_shots >= w[0].cumulative_shots));
}
