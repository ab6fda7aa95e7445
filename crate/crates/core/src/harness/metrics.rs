use serde::{Deserialize, Serialize};
use std::ops::RangeInclusive;

use crate::error::{input_err, Result};

use super::config::{RunConfig, TaskKind};
use super::train::RunRecord;

/// Which column of a trace a metric reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Series {
    Loss,
    Metric,
}

impl Series {
    pub fn get(&self, r: &RunRecord) -> f64 {
        match self {
            Series::Loss => r.loss,
            Series::Metric => r.metric,
        }
    }
}

/// Series and direction used to compare runs of a task: approximation ratio
/// (higher) for QAOA, energy (lower) for VQE, test loss (lower) for QNN.
pub fn objective_for(kind: TaskKind) -> (Series, bool) {
    match kind {
        TaskKind::Qaoa => (Series::Metric, false),
        TaskKind::Vqe => (Series::Metric, true),
        TaskKind::Qnn => (Series::Loss, true),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Speedup {
    /// `e_v / e_p`, or 0 when not surpassed.
    pub value: f64,
    pub surpassed: bool,
    /// Epoch of the baseline's best value.
    pub baseline_epoch: usize,
    /// First epoch the candidate matches it.
    pub candidate_epoch: Option<usize>,
}

/// `e_v / e_p`: the baseline's best-value epoch over the first epoch at which
/// the candidate is at least as good.
pub fn speedup(
    baseline: &[RunRecord],
    candidate: &[RunRecord],
    series: Series,
    better_is_lower: bool,
) -> Result<Speedup> {
    if baseline.is_empty() || candidate.is_empty() {
        return input_err("speedup needs non-empty record streams");
    }
    let better = |a: f64, b: f64| if better_is_lower { a < b } else { a > b };
    let best = baseline.iter().skip(1).fold(&baseline[0], |acc, r| {
        if better(series.get(r), series.get(acc)) {
            r
        } else {
            acc
        }
    });
    let target = series.get(best);
    let hit = candidate.iter().find(|r| !better(target, series.get(r)));
    Ok(match hit {
        Some(r) => Speedup {
            value: best.epoch as f64 / r.epoch as f64,
            surpassed: true,
            baseline_epoch: best.epoch,
            candidate_epoch: Some(r.epoch),
        },
        None => Speedup {
            value: 0.0,
            surpassed: false,
            baseline_epoch: best.epoch,
            candidate_epoch: None,
        },
    })
}

/// `|slope|` of the least-squares line through `(epoch, series)` over the
/// records whose epoch lies in `epochs`.
pub fn convergence_rate(records: &[RunRecord], series: Series, epochs: RangeInclusive<usize>) -> Result<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| epochs.contains(&r.epoch))
        .map(|r| (r.epoch as f64, series.get(r)))
        .collect();
    if pts.len() < 2 {
        return input_err(format!("convergence window {epochs:?} holds fewer than 2 records"));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    Ok((sxy / sxx).abs())
}

/// Default convergence window: the first 25 iterations for QAOA, the whole run otherwise.
pub fn default_cr_window(kind: TaskKind, records: &[RunRecord]) -> RangeInclusive<usize> {
    let last = records.last().map_or(1, |r| r.epoch);
    match kind {
        TaskKind::Qaoa => 1..=last.min(25),
        _ => 1..=last,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotTotals {
    /// Every simulated shot, gradient circuits included.
    pub detailed: u64,
    /// `iterations × samples × m` over optimizer (non-prediction) epochs.
    pub lower_bound: u64,
    pub iterations: u64,
}

/// Shot totals for a trace; `samples_per_iteration` is 1 for VQE and QAOA and
/// the dataset size for QNN.
pub fn shot_accounting(records: &[RunRecord], shots: u64, samples_per_iteration: u64) -> ShotTotals {
    let iterations = records.iter().filter(|r| !r.was_prediction).count() as u64;
    ShotTotals {
        detailed: records.last().map_or(0, |r| r.cumulative_shots),
        lower_bound: iterations * samples_per_iteration * shots,
        iterations,
    }
}

/// [`shot_accounting`] with `m` taken from the run configuration.
pub fn shot_accounting_for(records: &[RunRecord], cfg: &RunConfig, samples_per_iteration: u64) -> ShotTotals {
    shot_accounting(records, cfg.shots, samples_per_iteration)
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn trace(values: &[f64]) -> Vec<RunRecord> {
        values
            .iter()
            .enumerate()
            .map(|(k, &v)| RunRecord {
                epoch: k + 1,
                loss: v,
                metric: v,
                was_prediction: false,
                cumulative_executions: 0,
                cumulative_shots: 0,
            })
            .collect()
    }

    #[test]
    fn speedup_definition() {
        let v: Vec<f64> = (1..=200).map(|i| 1.0 / i as f64).collect();
        let d: Vec<f64> = (1..=200).map(|i| 1.0 / (2 * i) as f64).collect();
        let s = speedup(&trace(&v), &trace(&d), Series::Loss, true).unwrap();
        assert_eq!((s.baseline_epoch, s.candidate_epoch), (200, Some(100)));
        assert_abs_diff_eq!(s.value, 2.0);
        let same = speedup(&trace(&v), &trace(&v), Series::Loss, true).unwrap();
        assert_eq!(same.value, 1.0);
        let never = speedup(&trace(&v), &trace(&[5.0; 10]), Series::Loss, true).unwrap();
        assert!(!never.surpassed && never.value == 0.0);
        let up = speedup(
            &trace(&[0.1, 0.5, 0.9]),
            &trace(&[0.2, 0.95, 0.97]),
            Series::Metric,
            false,
        )
        .unwrap();
        assert_abs_diff_eq!(up.value, 1.5);
        assert!(speedup(&[], &trace(&v), Series::Loss, true).is_err());
    }

    #[test]
    fn convergence_rate_cases() {
        let line: Vec<f64> = (1..=50).map(|i| 1.0 - 0.002 * i as f64).collect();
        assert_abs_diff_eq!(
            convergence_rate(&trace(&line), Series::Loss, 1..=50).unwrap(),
            0.002,
            epsilon = 1e-12
        );
        assert_eq!(convergence_rate(&trace(&[3.0; 10]), Series::Loss, 1..=10).unwrap(), 0.0);
        assert!(convergence_rate(&trace(&line), Series::Loss, 60..=70).is_err());
    }

    #[test]
    fn convergence_rate_noise_bound() {
        use rand::Rng as _;
        let mut rng = crate::rng::rng_from_seed(9);
        let delta = 0.05;
        let n = 400;
        let vals: Vec<f64> = (1..=n)
            .map(|i| 2.0 - 0.01 * i as f64 + if rng.random::<bool>() { delta } else { -delta })
            .collect();
        let cr = convergence_rate(&trace(&vals), Series::Loss, 1..=n).unwrap();
        assert!((cr - 0.01).abs() <= 3.0 * delta / (n as f64).sqrt());
    }

    #[test]
    fn lower_bound_counts() {
        let mut t = trace(&[0.0; 50]);
        t.last_mut().unwrap().cumulative_shots = 1234;
        let s = shot_accounting(&t, 1000, 1);
        assert_eq!((s.lower_bound, s.detailed, s.iterations), (50_000, 1234, 50));
        t[4].was_prediction = true;
        assert_eq!(shot_accounting(&t, 1000, 1).lower_bound, 49_000);
        assert_eq!(
            shot_accounting(&trace(&[0.0; 200]), 1000, 1000).lower_bound,
            200_000_000
        );
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
