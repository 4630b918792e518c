//! One seeded training run and its on-disk record.
//!
//! A run directory holds:
//!
//! - `config.txt`: the canonical config (its hash names the directory)
//! - `trace.csv`: `iteration,loss,hv_estimate,log_hv_diff`, hv columns every `hv-stride` iterations
//! - `report.txt`: the final hypervolume report as `key=value` lines
//! - `model.ckpt`: the trained parameters
//! - `final_front.csv`: objectives of the model on the evaluation preferences
//! - `preferences.csv`: every sampled preference, when preference logging is on
//! - `FAILED`: present only if the run stopped on a numeric failure

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use psl_eps::eps::{run_training, BatchSource};
use psl_eps::indicators::{cached_reference_set, model_front};
use psl_eps::{HvReport64, ObjectiveVector64, ParetoSetModel64, Problem, RngStream};

use crate::config::RunConfig;
use crate::error::{HarnessError, Result};

pub const TRACE_HEADER: &str = "iteration,loss,hv_estimate,log_hv_diff";

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub loss: f64,
    pub hv: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceLogEntry {
    pub iteration: usize,
    pub source: BatchSource,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub config: RunConfig,
    pub trace: Vec<TraceRow>,
    pub report: Option<HvReport64>,
    pub final_front: Vec<ObjectiveVector64>,
    pub preferences: Vec<PreferenceLogEntry>,
    pub failure: Option<String>,
    pub wallclock_s: f64,
    pub dir: Option<PathBuf>,
}

impl RunRecord {
    pub fn final_log_hv_diff(&self) -> Option<f64> {
        self.report.as_ref().map(|r| r.log_hv_diff)
    }

    pub fn trace_csv(&self) -> String {
        trace_csv(&self.trace)
    }
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 24);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{}", r.iteration, r.loss);
        match r.hv {
            Some((hv, lhd)) => {
                let _ = writeln!(out, ",{hv},{lhd}");
            }
            None => out.push_str(",,\n"),
        }
    }
    out
}

pub fn report_text(r: &HvReport64) -> String {
    let reference: Vec<String> = r.reference_point.iter().map(|v| v.to_string()).collect();
    format!(
        "reference_point={}\nhv_true={}\nhv_estimate={}\nepsilon={}\nlog_hv_diff={}\nexceeded_reference={}\nfront_source={}\nn_points={}\n",
        reference.join(";"),
        r.hv_true,
        r.hv_estimate,
        r.epsilon,
        r.log_hv_diff,
        r.exceeded_reference,
        r.source,
        r.n_points
    )
}

pub fn objectives_csv(points: &[ObjectiveVector64]) -> String {
    let m = points.first().map_or(0, |p| p.len());
    let mut out = (1..=m).map(|k| format!("f{k}")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for p in points {
        let row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn preferences_csv(entries: &[PreferenceLogEntry]) -> String {
    let m = entries.first().map_or(0, |e| e.weights.len());
    let mut out = String::from("iteration,source");
    for k in 1..=m {
        let _ = write!(out, ",l{k}");
    }
    out.push('\n');
    for e in entries {
        let source = match e.source {
            BatchSource::Uniform => "uniform",
            BatchSource::Population => "population",
        };
        let _ = write!(out, "{},{source}", e.iteration);
        for w in &e.weights {
            let _ = write!(out, ",{w}");
        }
        out.push('\n');
    }
    out
}

/// Trains one model as configured. With `out_root`, writes the run directory under it.
///
/// A numeric failure does not return an error: the record carries the failure,
/// the partial trace is kept, and a `FAILED` marker is written.
pub fn run_single(config: &RunConfig, out_root: Option<&Path>) -> Result<RunRecord> {
    config.validate()?;
    let start = Instant::now();
    let problem = config.problem.problem::<f64>();
    let reference = cached_reference_set(config.problem)?;
    let base = RngStream::new(config.seed);
    let mut init = base.substream(0);
    let mut sampling = base.substream(1);
    let mut model = ParetoSetModel64::for_problem(problem.spec(), &config.hidden, &mut init)?;

    let max_iter = config.optimizer.max_iterations;
    let mut trace = Vec::with_capacity(max_iter);
    let mut preferences = Vec::new();
    let mut last_report = None;
    let outcome = run_training(
        &problem,
        &mut model,
        config.scalarization(),
        &config.optimizer,
        &config.sampler(),
        config.ideal_epsilon,
        &mut sampling,
        |model, record| {
            let t = record.iteration;
            let hv = if t % config.hv_eval_stride == 0 || t == max_iter {
                let report = reference.evaluate_model(model, &problem, config.log_hv_epsilon)?;
                let cols = (report.hv_estimate, report.log_hv_diff);
                last_report = Some(report);
                Some(cols)
            } else {
                None
            };
            trace.push(TraceRow {
                iteration: t,
                loss: record.loss,
                hv,
            });
            if config.log_preferences {
                preferences.extend(record.preferences.iter().map(|p| PreferenceLogEntry {
                    iteration: t,
                    source: record.source,
                    weights: p.to_vec(),
                }));
            }
            Ok(())
        },
    );

    let (report, failure) = match outcome {
        Ok(_) => (last_report, None),
        Err(e @ psl_eps::Error::NumericState(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let final_front = if failure.is_none() {
        model_front(&model, &problem)?
    } else {
        Vec::new()
    };
    let mut record = RunRecord {
        config: config.clone(),
        trace,
        report,
        final_front,
        preferences,
        failure,
        wallclock_s: start.elapsed().as_secs_f64(),
        dir: None,
    };
    if let Some(root) = out_root {
        record.dir = Some(write_run_dir(&record, &model, root)?);
    }
    Ok(record)
}

fn write_run_dir(record: &RunRecord, model: &ParetoSetModel64, root: &Path) -> Result<PathBuf> {
    let dir = root.join(record.config.dir_name());
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.txt"), record.config.canonical())?;
    fs::write(dir.join("trace.csv"), record.trace_csv())?;
    let marker = dir.join("FAILED");
    match &record.failure {
        Some(msg) => fs::write(&marker, format!("{msg}\n"))?,
        None => {
            if marker.exists() {
                fs::remove_file(&marker)?;
            }
            fs::write(dir.join("model.ckpt"), model.to_checkpoint())?;
            fs::write(dir.join("final_front.csv"), objectives_csv(&record.final_front))?;
        }
    }
    if let Some(r) = &record.report {
        fs::write(dir.join("report.txt"), report_text(r))?;
    }
    if !record.preferences.is_empty() {
        fs::write(dir.join("preferences.csv"), preferences_csv(&record.preferences))?;
    }
    Ok(dir)
}

/// Converts a failed record into the error that decides the exit code.
pub fn failure_error(records: &[RunRecord]) -> Option<HarnessError> {
    records
        .iter()
        .find_map(|r| r.failure.as_ref())
        .map(|msg| HarnessError::Numeric(msg.clone()))
}
