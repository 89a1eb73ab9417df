//! Experiment harness: configuration, parallel execution of methods x betas
//! x repetitions, plot-ready CSV curves, a JSON manifest sufficient for
//! replaying any run, adversarial evaluation and the math self-checks.

pub mod adversarial;
pub mod config;
pub mod run;
pub mod validate;

pub use adversarial::{evaluate_adversarial, MovePolicy, OraclePolicy, RandomPolicy, SearchPolicy};
pub use config::{Experiment, ExperimentConfig, Method, MethodOverride, OracleSpec, RunSettings};
pub use run::{
    execute_experiment, load_manifest, mean_std, pooled_se, replay_run, report_pixels, run_experiment, write_outputs,
    AggregateRecord, ExperimentResult, Manifest, ResultRecord, RunRecord, SelectedFeatures,
};
pub use validate::{validate_math, CheckOutcome};


use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("search: {0}")]
    Search(String),
    #[error(transparent)]
    Domain(#[from] crate::error::DomainError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
