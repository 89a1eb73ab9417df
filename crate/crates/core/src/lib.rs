//! Probabilistic search over DAG-structured state spaces.
//!
//! Generative scores of all states share one Gaussian-process prior defined
//! by a state kernel, so every rollout reward informs the whole explored
//! graph. Optimal values are tracked as Gaussian beliefs, obtained by
//! moment-matching maxima and minima of Gaussians, and a UCB rule over those
//! beliefs drives the descent. Count-based baselines (UCT, UCD, UCT-RAVE),
//! three domains and an experiment harness are included.

pub mod baselines;
pub mod dag;
pub mod delta;
pub mod domains;
pub mod engine;
pub mod error;
pub mod extremal;
pub mod gaussian;
pub mod harness;
pub mod oracles;
pub mod posterior;
pub mod value;

pub use dag::{NodeId, NodeKind, NodeStatus, Representation, SearchDag, StateKey};
pub use delta::{build_delta_table, DeltaConfig, DeltaTable};
pub use domains::{Domain, FeatureBag};
pub use engine::{ProbSearch, SearchConfig, Searcher};
pub use error::{Result, SearchError};
pub use extremal::{extremum_of_set, max_moments_pair, min_moments_pair, BivariatePair, ExtremalPrior, Extremum};
pub use gaussian::GaussianBelief;
pub use posterior::{GpConfig, Kernel, PosteriorState};
pub use value::{BackupConfig, BackupRule};
