//! Offline multi-objective policy optimization for contextual bandits.
//!
//! Logged data from a known logging policy feeds per-objective off-policy estimators
//! ([`estimators`]); sets of softmax policies are chosen to maximize the hypervolume of their
//! estimated values ([`hypervolume`], [`optimize`]). [`verification`] checks the estimation and
//! selection guarantees against brute-force oracles and [`experiment`] runs comparison sweeps.

pub mod benchmarks;
pub mod config;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod hypervolume;
pub mod logged_data;
pub mod optimize;
pub mod policy;
pub mod verification;

pub use benchmarks::{BenchmarkProblem, MultiObjective, ProblemSpec, TestFunction, TestFunctionKind};
pub use config::{ExperimentConfig, Method};
pub use error::{Error, Result};
pub use estimators::{ActionProbs, ConfidenceConfig, EstimatorKind, OffPolicyData};
pub use hypervolume::{Hypervolume, HypervolumeMethod};
pub use logged_data::LoggedDataset;
pub use optimize::{GradientConfig, HvObjective, ObjectiveKind};
pub use policy::{LoggingPolicy, PolicySet, SoftmaxPolicy};
