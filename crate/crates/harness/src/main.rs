use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use psl_eps::indicators::{FRONT_POINTS_2D, FRONT_POINTS_3D};
use psl_eps::{reference_front, Benchmark, ScalarizationKind};
use psl_harness::matrix::{run_matrix, run_sweep, MatrixSpec};
use psl_harness::plots::{emit_plots, PlotInput};
use psl_harness::run::{failure_error, run_single};
use psl_harness::{HarnessError, Result, RunConfig, SamplerKind};

#[derive(Parser)]
#[command(name = "psl", version, about = "Pareto set learning with uniform or evolutionary preference sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model and write its run directory.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write preference and front plots.
        #[arg(long)]
        plots: bool,
    },
    /// Run the problem x scalarization x sampler x seed matrix.
    Matrix {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        axes: Axes,
    },
    /// EPS sensitivity to sp and (cp, mp) on one problem and scalarization.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma list or half-open range such as `0..11`.
        #[arg(long, default_value = "0..11")]
        seeds: String,
        #[arg(long)]
        serial: bool,
    },
    /// Write a problem's reference front as CSV.
    Front {
        #[arg(long)]
        problem: String,
        /// Defaults to 2000 points for two objectives and 10000 for three.
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot existing run directories.
    Plot {
        runs: Vec<PathBuf>,
        #[arg(long, default_value = "psl-out/plots")]
        out: PathBuf,
    },
}

/// Settings shared by every training command. Flags override `--config`.
#[derive(Args)]
struct Common {
    /// Flat `key = value` file with any of the settings below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    scalarization: Option<String>,
    #[arg(long)]
    sampler: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    iters: Option<String>,
    #[arg(long)]
    batch: Option<String>,
    #[arg(long)]
    lr: Option<String>,
    #[arg(long)]
    period: Option<String>,
    #[arg(long)]
    sp: Option<String>,
    #[arg(long)]
    cp: Option<String>,
    #[arg(long)]
    mp: Option<String>,
    #[arg(long = "eta-c")]
    eta_c: Option<String>,
    #[arg(long = "eta-m")]
    eta_m: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    /// Ideal point offset in the Tchebycheff forms.
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long = "hv-stride")]
    hv_stride: Option<String>,
    #[arg(long = "log-preferences")]
    log_preferences: bool,
    #[arg(long, default_value = "psl-out")]
    out: PathBuf,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        if let Some(path) = &self.config {
            c.apply_file(path)?;
        }
        let flags = [
            ("problem", &self.problem),
            ("scalarization", &self.scalarization),
            ("sampler", &self.sampler),
            ("seed", &self.seed),
            ("iters", &self.iters),
            ("batch", &self.batch),
            ("lr", &self.lr),
            ("period", &self.period),
            ("sp", &self.sp),
            ("cp", &self.cp),
            ("mp", &self.mp),
            ("eta-c", &self.eta_c),
            ("eta-m", &self.eta_m),
            ("mu", &self.mu),
            ("epsilon", &self.epsilon),
            ("hv-stride", &self.hv_stride),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                c.set(key, v)?;
            }
        }
        if self.log_preferences {
            c.log_preferences = true;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct Axes {
    /// Comma list; all registered problems by default.
    #[arg(long)]
    problems: Option<String>,
    /// Comma list; LS, TCH, MTCH and COSMOS by default.
    #[arg(long)]
    scalarizations: Option<String>,
    #[arg(long)]
    samplers: Option<String>,
    #[arg(long, default_value = "0..11")]
    seeds: String,
    /// Run one config at a time instead of across a worker pool.
    #[arg(long)]
    serial: bool,
}

fn parse_list<T, E: std::fmt::Display>(text: &str, parse: impl Fn(&str) -> std::result::Result<T, E>) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(s).map_err(|e| HarnessError::Config(e.to_string())))
        .collect()
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = text.split_once("..") {
        let bad = |_| HarnessError::Config(format!("bad seed range `{text}`"));
        let (a, b): (u64, u64) = (a.trim().parse().map_err(bad)?, b.trim().parse().map_err(bad)?);
        return Ok((a..b).collect());
    }
    parse_list(text, |s| s.parse::<u64>())
}

fn report_failures(records: &[psl_harness::RunRecord]) -> Result<()> {
    for r in records {
        if let Some(msg) = &r.failure {
            eprintln!(
                "run failed: {} {} {} seed {}: {msg}",
                r.config.problem, r.config.scalarization, r.config.sampler, r.config.seed
            );
        }
    }
    match failure_error(records) {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { common, plots } => {
            let config = common.config()?;
            let record = run_single(&config, Some(&common.out))?;
            if let Some(dir) = &record.dir {
                println!("{}", dir.display());
            }
            if let Some(v) = record.final_log_hv_diff() {
                println!("final log_hv_diff = {v}");
            }
            if plots {
                let summary = emit_plots(&[PlotInput::from_record(&record)], &common.out.join("plots"))?;
                for n in summary.notices {
                    eprintln!("{n}");
                }
            }
            report_failures(std::slice::from_ref(&record))
        }
        Command::Matrix { common, axes } => {
            let mut spec = MatrixSpec::new(common.config()?);
            if let Some(p) = &axes.problems {
                spec.problems = parse_list(p, |s| s.parse::<Benchmark>())?;
            }
            if let Some(s) = &axes.scalarizations {
                spec.scalarizations = parse_list(s, |s| s.parse::<ScalarizationKind>())?;
            }
            if let Some(s) = &axes.samplers {
                spec.samplers = parse_list(s, |s| s.parse::<SamplerKind>())?;
            }
            spec.seeds = parse_seeds(&axes.seeds)?;
            spec.parallel = !axes.serial;
            let outcome = run_matrix(&spec, Some(&common.out))?;
            emit(&psl_harness::matrix::aggregates_csv(&outcome.aggregates))?;
            report_failures(&outcome.records)
        }
        Command::Sweep { common, seeds, serial } => {
            let base = common.config()?;
            let outcome = run_sweep(&base, &parse_seeds(&seeds)?, !serial, Some(&common.out))?;
            emit(&outcome.final_csv)?;
            let flat: Vec<_> = outcome.records.into_iter().flatten().collect();
            report_failures(&flat)
        }
        Command::Front { problem, points, out } => {
            let kind: Benchmark = problem.parse()?;
            let n = points.unwrap_or(if kind.dims().0 == 2 { FRONT_POINTS_2D } else { FRONT_POINTS_3D });
            let front = reference_front::<f64>(kind, n)?;
            match out {
                Some(path) => write_file(&path, &front.to_csv()),
                None => emit(&front.to_csv()),
            }
        }
        Command::Plot { runs, out } => {
            let inputs = runs.iter().map(|d| PlotInput::load(d)).collect::<Result<Vec<_>>>()?;
            let summary = emit_plots(&inputs, &out)?;
            for n in &summary.notices {
                eprintln!("{n}");
            }
            for p in &summary.written {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

/// Prints to stdout; a closed pipe ends the output quietly.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("psl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
