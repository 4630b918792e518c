//! Pareto set learning with evolutionary preference sampling.
//!
//! A small network maps preference vectors on the simplex to decision vectors of
//! a box-constrained multi-objective problem. It is trained by minimizing a
//! scalarization of the objectives over sampled preferences. Preferences come
//! either from a uniform simplex sampler or from an evolutionary sampler that
//! periodically selects the best-performing preferences and breeds new ones.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64` or `f32`.

pub mod domain;
pub mod eps;
pub mod error;
pub mod indicators;
pub mod model;
pub mod problems;
pub mod rng;
pub mod scalar;
pub mod scalarize;

pub use domain::{
    dominates, nondominated_indices, simplex_project, DecisionVector, EvaluatedPreference,
    ObjectiveVector, PreferenceVector,
};
pub use eps::{run_eps_training, run_training, BatchSource, EpsConfig, IterationRecord, Sampler};
pub use error::{Error, Result};
pub use indicators::{hypervolume_exact, hypervolume_mc, log_hv_difference, HvReport, ReferenceSet};
pub use model::{OptimizerConfig, ParetoSetModel, DEFAULT_HIDDEN};
pub use problems::{reference_front, Benchmark, BenchmarkProblem, FrontSample, Jacobian, Problem, ProblemSpec};
pub use rng::RngStream;
pub use scalar::Scalar;
pub use scalarize::{IdealPoint, ScalarizationKind};

pub type PreferenceVector64 = PreferenceVector<f64>;
pub type PreferenceVector32 = PreferenceVector<f32>;
pub type ObjectiveVector64 = ObjectiveVector<f64>;
pub type ObjectiveVector32 = ObjectiveVector<f32>;
pub type ParetoSetModel64 = ParetoSetModel<f64>;
pub type ParetoSetModel32 = ParetoSetModel<f32>;
pub type IdealPoint64 = IdealPoint<f64>;
pub type IdealPoint32 = IdealPoint<f32>;
pub type HvReport64 = HvReport<f64>;
pub type ReferenceSet64 = ReferenceSet<f64>;
