use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::baselines::{CountConfig, CountMethod, RaveConfig};
use crate::dag::Representation;
use crate::engine::SearchConfig;
use crate::extremal::ExtremalPrior;
use crate::value::BackupRule;

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Synthetic,
    Tictactoe,
    Featsel,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Synthetic => "synthetic",
            Experiment::Tictactoe => "tictactoe",
            Experiment::Featsel => "featsel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ProbDag,
    ProbTree,
    ProbDagSimplified,
    Uct,
    Ucd,
    UctRave,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::ProbDag, Method::ProbTree, Method::ProbDagSimplified, Method::Uct, Method::Ucd, Method::UctRave];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::ProbDag => "prob-dag",
            Method::ProbTree => "prob-tree",
            Method::ProbDagSimplified => "prob-dag-simplified",
            Method::Uct => "uct",
            Method::Ucd => "ucd",
            Method::UctRave => "uct-rave",
        }
    }

    pub fn is_probabilistic(self) -> bool {
        matches!(self, Method::ProbDag | Method::ProbTree | Method::ProbDagSimplified)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| HarnessError::Config(format!("unknown method {s:?}")))
    }
}

/// Settings shared by the probabilistic methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbParams {
    pub lambda: f64,
    pub c: f64,
    pub pilot_rollouts: usize,
    pub jitter: f64,
    pub regularizer: ExtremalPrior,
    pub delta_prior: ExtremalPrior,
    pub summary: bool,
}

/// Settings shared by the count-based baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountParams {
    pub pilot_rollouts: usize,
    pub rave: RaveConfig,
}

/// Per-method replacements for the shared settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pilot_rollouts: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticParams {
    pub n_features: usize,
    pub bag_size: usize,
    /// Fixed across repetitions; only the search seed varies.
    pub ground_truth_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OracleSpec {
    /// Pixel grid with informativeness and pairwise redundancy.
    Redundancy { width: usize, height: usize },
    /// `|sum of (index + 1)|`, a toy with a known optimum.
    IndexSum,
    /// External program speaking the line protocol.
    Process {
        program: String,
        #[serde(default)]
        args: Vec<String>,
        #[serde(default)]
        deterministic: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatselParams {
    pub n_features: usize,
    pub subset_size: usize,
    pub oracle: OracleSpec,
    /// Enumerate all bags up front when there are at most this many.
    pub exhaustive_limit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub methods: Vec<Method>,
    /// Exploration constants swept for every method without an override.
    pub betas: Vec<f64>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub budget: usize,
    /// Iterations between recorded checkpoints (evaluations in adversarial
    /// experiments).
    pub checkpoint_every: usize,
    /// Evaluation games per checkpoint (adversarial only).
    pub eval_games: usize,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
    pub write_traces: bool,
    pub output: PathBuf,
    pub prob: ProbParams,
    pub count: CountParams,
    #[serde(default)]
    pub overrides: BTreeMap<Method, MethodOverride>,
    pub synthetic: SyntheticParams,
    pub featsel: FeatselParams,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            methods: vec![Method::ProbDag, Method::ProbTree, Method::ProbDagSimplified, Method::Uct, Method::Ucd],
            betas: vec![1.0],
            repetitions: 10,
            base_seed: 0,
            budget: 500,
            checkpoint_every: 10,
            eval_games: 20,
            threads: 0,
            write_traces: true,
            output: PathBuf::from(format!("results/{}", experiment.as_str())),
            prob: ProbParams {
                lambda: 1e-4,
                c: 1.0,
                pilot_rollouts: 0,
                jitter: 1e-6,
                regularizer: ExtremalPrior::standard_normal(),
                delta_prior: ExtremalPrior::standard_normal(),
                summary: true,
            },
            count: CountParams { pilot_rollouts: 0, rave: RaveConfig::default() },
            overrides: BTreeMap::new(),
            synthetic: SyntheticParams { n_features: 15, bag_size: 5, ground_truth_seed: 0 },
            featsel: FeatselParams {
                n_features: 30,
                subset_size: 5,
                oracle: OracleSpec::Redundancy { width: 6, height: 5 },
                exhaustive_limit: 200_000,
            },
        };
        match experiment {
            Experiment::Synthetic => Self {
                betas: vec![0.01, 0.1, 1.0, std::f64::consts::SQRT_2, 10.0],
                repetitions: 30,
                ..base
            },
            Experiment::Tictactoe => {
                let mut overrides = BTreeMap::new();
                overrides.insert(Method::ProbDagSimplified, MethodOverride { lambda: Some(1e-3), ..Default::default() });
                Self {
                    budget: 3000,
                    checkpoint_every: 50,
                    prob: ProbParams { lambda: 0.1, c: 0.5, ..base.prob },
                    overrides,
                    ..base
                }
            }
            Experiment::Featsel => Self {
                methods: vec![Method::ProbDag, Method::ProbDagSimplified, Method::Uct, Method::Ucd, Method::UctRave],
                betas: vec![0.5],
                budget: 1200,
                checkpoint_every: 50,
                // standardized rewards: c = 1 / depth
                prob: ProbParams { pilot_rollouts: 20, c: 1.0 / 5.0, ..base.prob },
                count: CountParams { pilot_rollouts: 20, ..base.count },
                ..base
            },
        }
    }

    /// Parses a TOML document. Missing keys take the defaults of the
    /// experiment named by the mandatory `experiment` key.
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let user: toml::Table = text.parse().map_err(|e| HarnessError::Config(format!("{e}")))?;
        let experiment: Experiment = user
            .get("experiment")
            .ok_or_else(|| HarnessError::Config("missing key `experiment`".into()))?
            .clone()
            .try_into()
            .map_err(|e| HarnessError::Config(format!("experiment: {e}")))?;
        let mut merged = toml::Table::try_from(Self::defaults(experiment)).map_err(|e| HarnessError::Config(e.to_string()))?;
        merge(&mut merged, user);
        let config: Self = toml::Value::Table(merged).try_into().map_err(|e| HarnessError::Config(format!("{e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |m: String| Err(HarnessError::Config(m));
        if self.methods.is_empty() {
            return fail("no methods selected".into());
        }
        if self.repetitions == 0 {
            return fail("repetitions must be positive".into());
        }
        if self.checkpoint_every == 0 {
            return fail("checkpoint_every must be positive".into());
        }
        for m in &self.methods {
            let betas = self.betas_for(*m);
            if betas.is_empty() || betas.iter().any(|b| !(*b >= 0.0) || !b.is_finite()) {
                return fail(format!("{m}: betas must be finite and >= 0, got {betas:?}"));
            }
            if *m == Method::UctRave && self.experiment != Experiment::Featsel {
                return fail("uct-rave needs feature-bag states (featsel only)".into());
            }
            if m.is_probabilistic() {
                let (lambda, c) = (self.lambda_for(*m), self.c_for(*m));
                if !(lambda > 0.0) || !(c > 0.0) {
                    return fail(format!("{m}: need lambda > 0 and c > 0, got {lambda} and {c}"));
                }
            }
        }
        if self.experiment == Experiment::Featsel {
            let f = &self.featsel;
            if f.subset_size > f.n_features {
                return fail(format!("subset size {} exceeds {} features", f.subset_size, f.n_features));
            }
            if let OracleSpec::Redundancy { width, height } = f.oracle {
                if width * height != f.n_features {
                    return fail(format!("{width} x {height} grid does not have {} pixels", f.n_features));
                }
            }
        }
        Ok(())
    }

    pub fn betas_for(&self, method: Method) -> &[f64] {
        self.overrides.get(&method).and_then(|o| o.betas.as_deref()).unwrap_or(&self.betas)
    }

    fn lambda_for(&self, method: Method) -> f64 {
        self.overrides.get(&method).and_then(|o| o.lambda).unwrap_or(self.prob.lambda)
    }

    fn c_for(&self, method: Method) -> f64 {
        self.overrides.get(&method).and_then(|o| o.c).unwrap_or(self.prob.c)
    }

    /// Fully resolved settings of one run.
    pub fn settings(&self, method: Method, beta: f64, seed: u64) -> RunSettings {
        let over = self.overrides.get(&method);
        if method.is_probabilistic() {
            RunSettings::Prob(SearchConfig {
                beta,
                lambda: self.lambda_for(method),
                c: self.c_for(method),
                rule: if method == Method::ProbDagSimplified { BackupRule::Softmax } else { BackupRule::Ep },
                representation: if method == Method::ProbTree { Representation::Tree } else { Representation::Dag },
                budget: self.budget,
                seed,
                pilot_rollouts: over.and_then(|o| o.pilot_rollouts).unwrap_or(self.prob.pilot_rollouts),
                regularizer: self.prob.regularizer,
                delta_prior: self.prob.delta_prior,
                jitter: self.prob.jitter,
                summary: self.prob.summary,
            })
        } else {
            let method = match method {
                Method::Uct => CountMethod::Uct,
                Method::Ucd => CountMethod::Ucd,
                _ => CountMethod::UctRave,
            };
            RunSettings::Count(CountConfig {
                method,
                beta,
                seed,
                pilot_rollouts: over.and_then(|o| o.pilot_rollouts).unwrap_or(self.count.pilot_rollouts),
                rave: self.count.rave,
            })
        }
    }

    /// Iterations at which the curve is recorded.
    pub fn checkpoints(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (1..=self.budget / self.checkpoint_every).map(|k| k * self.checkpoint_every).collect();
        if self.budget > 0 && out.last() != Some(&self.budget) {
            out.push(self.budget);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "engine", rename_all = "lowercase")]
pub enum RunSettings {
    Prob(SearchConfig),
    Count(CountConfig),
}

fn merge(base: &mut toml::Table, user: toml::Table) {
    for (k, v) in user {
        match (base.get_mut(&k), v) {
            // enum-valued tables are replaced whole so that variant fields do
            // not leak between variants
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) if !u.contains_key("kind") => merge(b, u),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        for e in [Experiment::Synthetic, Experiment::Tictactoe, Experiment::Featsel] {
            let c = ExperimentConfig::defaults(e);
            c.validate().unwrap();
            let back = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn partial_documents_fill_in_defaults() {
        let c = ExperimentConfig::from_toml_str(
            "experiment = \"tictactoe\"\nrepetitions = 2\n[prob]\nlambda = 0.5\n[overrides.uct]\nbetas = [2.0]\n",
        )
        .unwrap();
        assert_eq!(c.repetitions, 2);
        assert_eq!(c.prob.lambda, 0.5);
        assert_eq!(c.prob.c, 0.5);
        assert_eq!(c.betas_for(Method::Uct), &[2.0]);
        assert_eq!(c.betas_for(Method::ProbDag), &[1.0]);
        match c.settings(Method::ProbDagSimplified, 1.0, 3) {
            RunSettings::Prob(s) => {
                assert_eq!(s.lambda, 1e-3);
                assert_eq!(s.rule, BackupRule::Softmax);
                assert_eq!(s.seed, 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_documents_are_rejected() {
        assert!(ExperimentConfig::from_toml_str("repetitions = 2").is_err());
        assert!(ExperimentConfig::from_toml_str("experiment = \"chess\"").is_err());
        assert!(ExperimentConfig::from_toml_str("experiment = \"synthetic\"\nbogus = 1").is_err());
        assert!(ExperimentConfig::from_toml_str("experiment = \"synthetic\"\nmethods = [\"uct-rave\"]").is_err());
        assert!(ExperimentConfig::from_toml_str("experiment = \"featsel\"\n[featsel]\nn_features = 12").is_err());
    }

    #[test]
    fn oracle_variant_can_be_swapped() {
        let c = ExperimentConfig::from_toml_str(
            "experiment = \"featsel\"\n[featsel]\nn_features = 5\nsubset_size = 2\noracle = { kind = \"index-sum\" }\n",
        )
        .unwrap();
        assert_eq!(c.featsel.oracle, OracleSpec::IndexSum);
    }

    #[test]
    fn checkpoint_grid() {
        let mut c = ExperimentConfig::defaults(Experiment::Synthetic);
        c.budget = 25;
        assert_eq!(c.checkpoints(), vec![10, 20, 25]);
        c.budget = 0;
        assert!(c.checkpoints().is_empty());
        assert_eq!("ucd".parse::<Method>().unwrap(), Method::Ucd);
        assert!("mcts".parse::<Method>().is_err());
    }
}
