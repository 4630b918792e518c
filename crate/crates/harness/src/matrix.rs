//! The problem x scalarization x sampler x seed matrix, its aggregates, and sensitivity sweeps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use psl_eps::{Benchmark, ScalarizationKind};
use rayon::prelude::*;

use crate::config::{RunConfig, SamplerKind};
use crate::error::{HarnessError, Result};
use crate::run::{run_single, RunRecord};

pub const ROWS_HEADER: &str = "problem,scalarization,sampler,seed,final_log_hv_diff,wallclock_s";
pub const AGGREGATES_HEADER: &str = "problem,scalarization,mean_uniform,std_uniform,mean_eps,std_eps,improved";
pub const CURVES_HEADER: &str = "problem,scalarization,sampler,iteration,median_log_hv_diff,runs";

/// Seeds 0 to 10.
pub fn default_seeds() -> Vec<u64> {
    (0..11).collect()
}

#[derive(Debug, Clone)]
pub struct MatrixSpec {
    pub problems: Vec<Benchmark>,
    pub scalarizations: Vec<ScalarizationKind>,
    pub samplers: Vec<SamplerKind>,
    pub seeds: Vec<u64>,
    /// Every other setting comes from here.
    pub base: RunConfig,
    pub parallel: bool,
}

impl MatrixSpec {
    pub fn new(base: RunConfig) -> Self {
        Self {
            problems: Benchmark::ALL.to_vec(),
            scalarizations: ScalarizationKind::ALL_DEFAULT.to_vec(),
            samplers: SamplerKind::ALL.to_vec(),
            seeds: default_seeds(),
            base,
            parallel: true,
        }
    }

    /// Run configs in row order: problem, scalarization, sampler, seed.
    pub fn configs(&self) -> Result<Vec<RunConfig>> {
        if self.problems.is_empty()
            || self.scalarizations.is_empty()
            || self.samplers.is_empty()
            || self.seeds.is_empty()
        {
            return Err(HarnessError::Config("matrix axes must be non-empty".into()));
        }
        let mut out = Vec::new();
        for &problem in &self.problems {
            for &scalarization in &self.scalarizations {
                for &sampler in &self.samplers {
                    for &seed in &self.seeds {
                        let mut c = self.base.clone();
                        c.problem = problem;
                        c.scalarization = scalarization;
                        c.sampler = sampler;
                        c.seed = seed;
                        c.validate()?;
                        out.push(c);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Runs every config, in parallel or not, keeping input order.
pub fn run_all(configs: &[RunConfig], out_root: Option<&Path>, parallel: bool) -> Result<Vec<RunRecord>> {
    if parallel {
        configs.par_iter().map(|c| run_single(c, out_root)).collect()
    } else {
        configs.iter().map(|c| run_single(c, out_root)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixRow {
    pub problem: Benchmark,
    pub scalarization: ScalarizationKind,
    pub sampler: SamplerKind,
    pub seed: u64,
    /// NaN for a failed run.
    pub final_log_hv_diff: f64,
    pub wallclock_s: f64,
}

impl MatrixRow {
    pub fn from_record(r: &RunRecord) -> Self {
        Self {
            problem: r.config.problem,
            scalarization: r.config.scalarization,
            sampler: r.config.sampler,
            seed: r.config.seed,
            final_log_hv_diff: r.final_log_hv_diff().unwrap_or(f64::NAN),
            wallclock_s: r.wallclock_s,
        }
    }
}

pub fn rows_csv(rows: &[MatrixRow]) -> String {
    let mut out = format!("{ROWS_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.problem, r.scalarization, r.sampler, r.seed, r.final_log_hv_diff, r.wallclock_s
        );
    }
    out
}

/// Mean and population standard deviation of the non-NaN values.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let kept: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    if kept.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = kept.len() as f64;
    let mean = kept.iter().sum::<f64>() / n;
    if !mean.is_finite() {
        return (mean, f64::NAN);
    }
    let var = kept.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Median of the non-NaN values.
pub fn median(values: &[f64]) -> f64 {
    let mut kept: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    if kept.is_empty() {
        return f64::NAN;
    }
    kept.sort_by(f64::total_cmp);
    let n = kept.len();
    if n % 2 == 1 {
        kept[n / 2]
    } else {
        let (a, b) = (kept[n / 2 - 1], kept[n / 2]);
        if a == b {
            a
        } else {
            0.5 * (a + b)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub problem: Benchmark,
    pub scalarization: ScalarizationKind,
    pub mean_uniform: f64,
    pub std_uniform: f64,
    pub mean_eps: f64,
    pub std_eps: f64,
    /// EPS mean below the uniform mean; `None` when either side has no finished run.
    pub improved: Option<bool>,
}

pub fn aggregate(rows: &[MatrixRow]) -> Vec<AggregateRow> {
    let mut cells: Vec<(Benchmark, ScalarizationKind)> = Vec::new();
    for r in rows {
        if !cells.contains(&(r.problem, r.scalarization)) {
            cells.push((r.problem, r.scalarization));
        }
    }
    cells
        .into_iter()
        .map(|(problem, scalarization)| {
            let values = |s: SamplerKind| -> Vec<f64> {
                rows.iter()
                    .filter(|r| r.problem == problem && r.scalarization == scalarization && r.sampler == s)
                    .map(|r| r.final_log_hv_diff)
                    .collect()
            };
            let (mean_uniform, std_uniform) = mean_std(&values(SamplerKind::Uniform));
            let (mean_eps, std_eps) = mean_std(&values(SamplerKind::Eps));
            let improved = (!mean_uniform.is_nan() && !mean_eps.is_nan()).then(|| mean_eps < mean_uniform);
            AggregateRow {
                problem,
                scalarization,
                mean_uniform,
                std_uniform,
                mean_eps,
                std_eps,
                improved,
            }
        })
        .collect()
}

pub fn aggregates_csv(rows: &[AggregateRow]) -> String {
    let mut out = format!("{AGGREGATES_HEADER}\n");
    for a in rows {
        let improved = match a.improved {
            Some(true) => "better",
            Some(false) => "worse",
            None => "",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{improved}",
            a.problem, a.scalarization, a.mean_uniform, a.std_uniform, a.mean_eps, a.std_eps
        );
    }
    out
}

/// Per-iteration medians of `log_hv_diff` over the records sharing a key.
pub fn median_curves<K: Ord + Clone>(records: &[RunRecord], key: impl Fn(&RunRecord) -> K) -> BTreeMap<K, Vec<(usize, f64, usize)>> {
    let mut grouped: BTreeMap<K, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in records {
        let by_iter = grouped.entry(key(r)).or_default();
        for row in &r.trace {
            if let Some((_, lhd)) = row.hv {
                by_iter.entry(row.iteration).or_default().push(lhd);
            }
        }
    }
    grouped
        .into_iter()
        .map(|(k, by_iter)| {
            let curve = by_iter
                .into_iter()
                .map(|(t, vals)| (t, median(&vals), vals.len()))
                .collect();
            (k, curve)
        })
        .collect()
}

fn matrix_curves_csv(records: &[RunRecord]) -> String {
    let curves = median_curves(records, |r| {
        (r.config.problem, r.config.scalarization.name(), r.config.sampler)
    });
    let mut out = format!("{CURVES_HEADER}\n");
    for ((problem, scal, sampler), curve) in curves {
        for (t, med, n) in curve {
            let _ = writeln!(out, "{problem},{scal},{sampler},{t},{med},{n}");
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct MatrixOutcome {
    pub records: Vec<RunRecord>,
    pub rows: Vec<MatrixRow>,
    pub aggregates: Vec<AggregateRow>,
    pub curves_csv: String,
}

impl MatrixOutcome {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.failure.is_some()).count()
    }
}

/// Runs the matrix. With `out`, writes `rows.csv`, `aggregates.csv`, `curves.csv`
/// and one directory per run under `out/runs`.
///
/// Failed runs stay in the rows with a NaN result; they do not stop the matrix.
pub fn run_matrix(spec: &MatrixSpec, out: Option<&Path>) -> Result<MatrixOutcome> {
    let configs = spec.configs()?;
    let runs_dir = out.map(|o| o.join("runs"));
    let records = run_all(&configs, runs_dir.as_deref(), spec.parallel)?;
    let rows: Vec<MatrixRow> = records.iter().map(MatrixRow::from_record).collect();
    let aggregates = aggregate(&rows);
    let curves_csv = matrix_curves_csv(&records);
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("rows.csv"), rows_csv(&rows))?;
        fs::write(dir.join("aggregates.csv"), aggregates_csv(&aggregates))?;
        fs::write(dir.join("curves.csv"), &curves_csv)?;
    }
    Ok(MatrixOutcome {
        records,
        rows,
        aggregates,
        curves_csv,
    })
}

pub const SWEEP_SELECT_FRACTIONS: [f64; 4] = [0.05, 0.1, 0.2, 0.4];
pub const SWEEP_OPERATOR_PROBS: [f64; 3] = [0.5, 0.7, 0.9];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSetting {
    /// `sp` or `cp-mp`.
    pub axis: &'static str,
    pub sp: f64,
    pub cp: f64,
    pub mp: f64,
}

/// The `sp` axis at the base `cp`, `mp`, then the `(cp, mp)` grid at the base `sp`.
pub fn sweep_settings(base: &RunConfig) -> Vec<SweepSetting> {
    let mut out: Vec<SweepSetting> = SWEEP_SELECT_FRACTIONS
        .iter()
        .map(|&sp| SweepSetting {
            axis: "sp",
            sp,
            cp: base.eps.crossover_prob,
            mp: base.eps.mutation_prob,
        })
        .collect();
    for &cp in &SWEEP_OPERATOR_PROBS {
        for &mp in &SWEEP_OPERATOR_PROBS {
            out.push(SweepSetting {
                axis: "cp-mp",
                sp: base.eps.select_fraction,
                cp,
                mp,
            });
        }
    }
    out
}

pub const SWEEP_CURVES_HEADER: &str = "axis,sp,cp,mp,iteration,median_log_hv_diff,runs";
pub const SWEEP_FINAL_HEADER: &str = "axis,sp,cp,mp,mean,std,median";

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub settings: Vec<SweepSetting>,
    /// `records[i]` holds the seeds of `settings[i]`; the last entry is the uniform baseline.
    pub records: Vec<Vec<RunRecord>>,
    pub curves_csv: String,
    pub final_csv: String,
}

/// EPS sensitivity to `sp` and `(cp, mp)` on the base problem and scalarization,
/// with the uniform sampler as a baseline row.
pub fn run_sweep(base: &RunConfig, seeds: &[u64], parallel: bool, out: Option<&Path>) -> Result<SweepOutcome> {
    if seeds.is_empty() {
        return Err(HarnessError::Config("sweep needs at least one seed".into()));
    }
    let settings = sweep_settings(base);
    let mut configs = Vec::new();
    for s in &settings {
        for &seed in seeds {
            let mut c = base.clone();
            c.sampler = SamplerKind::Eps;
            c.eps.select_fraction = s.sp;
            c.eps.crossover_prob = s.cp;
            c.eps.mutation_prob = s.mp;
            c.seed = seed;
            c.validate()?;
            configs.push(c);
        }
    }
    for &seed in seeds {
        let mut c = base.clone();
        c.sampler = SamplerKind::Uniform;
        c.seed = seed;
        c.validate()?;
        configs.push(c);
    }
    let runs_dir = out.map(|o| o.join("runs"));
    let flat = run_all(&configs, runs_dir.as_deref(), parallel)?;
    let records: Vec<Vec<RunRecord>> = flat.chunks(seeds.len()).map(|c| c.to_vec()).collect();

    let mut curves_csv = format!("{SWEEP_CURVES_HEADER}\n");
    let mut final_csv = format!("{SWEEP_FINAL_HEADER}\n");
    let labels = settings
        .iter()
        .map(|s| (s.axis, s.sp.to_string(), s.cp.to_string(), s.mp.to_string()))
        .chain(std::iter::once(("uniform", String::new(), String::new(), String::new())));
    for ((axis, sp, cp, mp), group) in labels.zip(&records) {
        let curve = median_curves(group, |_| ());
        for (t, med, n) in curve.into_values().next().unwrap_or_default() {
            let _ = writeln!(curves_csv, "{axis},{sp},{cp},{mp},{t},{med},{n}");
        }
        let finals: Vec<f64> = group.iter().map(|r| r.final_log_hv_diff().unwrap_or(f64::NAN)).collect();
        let (mean, std) = mean_std(&finals);
        let _ = writeln!(final_csv, "{axis},{sp},{cp},{mp},{mean},{std},{}", median(&finals));
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("sweep_curves.csv"), &curves_csv)?;
        fs::write(dir.join("sweep_final.csv"), &final_csv)?;
    }
    Ok(SweepOutcome {
        settings,
        records,
        curves_csv,
        final_csv,
    })
}
