use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::config::RunConfig;
use super::metrics::{convergence_rate, default_cr_window, objective_for, shot_accounting, ShotTotals};
use super::train::{RunRecord, RunResult, PREDICTION_SCHEDULE};

pub const CSV_HEADER: &str = "epoch,loss,metric,was_prediction,cum_executions,cum_shots";

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line: 0,
            message: format!("{other:?}"),
        },
    }
}

/// Writes one CSV row per record under [`CSV_HEADER`].
pub fn write_records_csv<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    if records.is_empty() {
        w.write_record(CSV_HEADER.split(',')).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_records_csv(path: impl AsRef<Path>, records: &[RunRecord]) -> Result<()> {
    write_records_csv(std::fs::File::create(path)?, records)
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected header '{}'", header.join(",")),
        });
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn load_records_csv(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    read_records_csv(std::fs::File::open(path)?)
}

/// JSON summary of a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub num_params: usize,
    pub prediction_schedule: String,
    pub epochs_run: usize,
    pub predictions: usize,
    pub rejected_predictions: usize,
    pub early_stopped: bool,
    pub final_loss: f64,
    pub final_metric: f64,
    pub convergence_rate: Option<f64>,
    pub shots: ShotTotals,
    pub final_params: Vec<f64>,
}

impl RunSummary {
    pub fn new(config: &RunConfig, result: &RunResult) -> RunSummary {
        let kind = config.task.kind();
        let last = result.records.last().copied();
        let (series, _) = objective_for(kind);
        RunSummary {
            config: config.clone(),
            num_params: result.final_params.len(),
            prediction_schedule: PREDICTION_SCHEDULE.to_string(),
            epochs_run: result.records.len(),
            predictions: result.predictions,
            rejected_predictions: result.rejected_predictions,
            early_stopped: result.early_stopped,
            final_loss: last.map_or(f64::NAN, |r| r.loss),
            final_metric: last.map_or(f64::NAN, |r| r.metric),
            convergence_rate: convergence_rate(&result.records, series, default_cr_window(kind, &result.records)).ok(),
            shots: shot_accounting(&result.records, config.shots, result.samples_per_iteration),
            final_params: result.final_params.clone(),
        }
    }
}

pub fn save_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Input(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<RunRecord> {
        vec![
            RunRecord {
                epoch: 1,
                loss: -0.123456789012345,
                metric: 0.75,
                was_prediction: false,
                cumulative_executions: 6,
                cumulative_shots: 6000,
            },
            RunRecord {
                epoch: 2,
                loss: 1e-17,
                metric: 0.8,
                was_prediction: true,
                cumulative_executions: 6,
                cumulative_shots: 6000,
            },
        ]
    }

    #[test]
    fn csv_roundtrip_and_header() {
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &sample()).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(read_records_csv(buf.as_slice()).unwrap(), sample());
        let mut empty = Vec::new();
        write_records_csv(&mut empty, &[]).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().trim(), CSV_HEADER);
        assert!(read_records_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
