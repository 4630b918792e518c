//! Experiment harness: single runs, the comparison matrix, sweeps and plots.

pub mod analysis;
pub mod config;
pub mod error;
pub mod matrix;
pub mod plots;
pub mod run;

pub use config::{RunConfig, SamplerKind};
pub use error::{HarnessError, Result};
pub use matrix::{run_matrix, run_sweep, MatrixSpec};
pub use plots::{emit_plots, PlotInput};
pub use run::{run_single, RunRecord, TraceRow};
