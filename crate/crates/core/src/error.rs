use thiserror::Error;

use crate::dag::{NodeId, NodeKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MathError {
    #[error("invalid Gaussian belief: mean {mean}, variance {variance}")]
    InvalidBelief { mean: f64, variance: f64 },
    #[error("correlation {0} outside [-1, 1]")]
    InvalidCorrelation(f64),
    #[error("correlation matrix is not a valid symmetric PSD unit-diagonal matrix: {0}")]
    InvalidCorrelationMatrix(String),
    #[error("extremum of an empty set")]
    EmptySet,
    #[error("prior on the extremum must have positive variance")]
    DegeneratePrior,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DagError {
    #[error("state {key} already stored at level {existing_level} ({existing_kind:?}); requested level {level} ({kind:?})")]
    Inconsistent {
        key: String,
        existing_level: usize,
        existing_kind: NodeKind,
        level: usize,
        kind: NodeKind,
    },
    #[error("node {0} is not a boundary node")]
    NotBoundary(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} has no explored children")]
    NoChildren(NodeId),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PosteriorError {
    #[error(
        "Gram factorization broke down adding leaf {leaf} (most correlated with observed leaf {partner}); residual {residual:e}"
    )]
    Breakdown {
        leaf: String,
        partner: String,
        residual: f64,
    },
    #[error("observation noise must be strictly positive, got {0}")]
    NonPositiveNoise(f64),
    #[error("need at least two pilot rewards, got {0}")]
    TooFewPilotRewards(usize),
    #[error("{0}")]
    Batch(String),
}

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("reward requested for non-terminal state {0}")]
    NotTerminal(String),
    #[error("oracle failed on bag {bag:?}: {reason}")]
    Oracle { bag: Vec<u16>, reason: String },
    #[error("invalid domain parameters: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Math(#[from] MathError),
    #[error(transparent)]
    Dag(#[from] DagError),
    #[error(transparent)]
    Posterior(#[from] PosteriorError),
    #[error("iteration {iteration}: {source}")]
    Domain {
        iteration: usize,
        #[source]
        source: DomainError,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = SearchError> = std::result::Result<T, E>;
