//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "experiment_id": "demo",
//!   "learner": "exp3",
//!   "environment": "price:0.1",
//!   "actions": 2,
//!   "types": [0.1, 0.3],
//!   "prior": [0.5, 0.5],
//!   "theta": 0.3,
//!   "horizon": 1000,
//!   "runs": 10,
//!   "seed": 42,
//!   "out_dir": "out",
//!   "workers": 4
//! }
//! ```
//!
//! `theta` is either a number from `types` or the string `"sweep"` (run
//! every type); `horizon` is a number or a list (a list is required by the
//! `sweep` command); `prior` defaults to uniform; `actions` defaults to 2.
//! The environment variable `ARENA_SEED` overrides `seed`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::engine::{default_workers, GameSetup};
use crate::environments::EnvSpec;
use crate::error::ArenaError;
use crate::game::{ActionSet, AgentType, Prior, TypeSpace};
use crate::learners::LearnerSpec;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ThetaField {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum HorizonField {
    One(u64),
    Many(Vec<u64>),
}

/// Raw JSON shape of an experiment configuration.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Identifier used in file names and CSV rows.
    #[serde(default = "default_id")]
    pub experiment_id: String,
    /// Learner spec token.
    pub learner: String,
    /// Environment spec token.
    pub environment: String,
    /// Action count (default 2).
    #[serde(default = "default_actions")]
    pub actions: usize,
    /// The type space, strictly increasing inside [0, 1/2).
    pub types: Vec<f64>,
    /// Belief over `types`; uniform when absent.
    #[serde(default)]
    pub prior: Option<Vec<f64>>,
    /// A type value, or `"sweep"` to run every type.
    theta: ThetaField,
    /// One horizon or a strictly increasing list.
    horizon: HorizonField,
    /// Monte-Carlo runs per `(θ, T)` cell.
    pub runs: u64,
    /// Root seed.
    pub seed: u64,
    /// Output directory (default `out`).
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads (default: machine parallelism, capped at 8).
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_id() -> String {
    "experiment".to_string()
}

fn default_actions() -> usize {
    2
}

/// A validated, ready-to-run experiment.
#[derive(Debug)]
pub struct Experiment {
    /// Identifier.
    pub id: String,
    /// Parsed learner.
    pub learner: LearnerSpec,
    /// Parsed environment.
    pub environment: EnvSpec,
    /// Game parameters.
    pub setup: GameSetup,
    /// Types to run (one, or the whole space for a sweep).
    pub thetas: Vec<AgentType>,
    /// Horizons to run.
    pub horizons: Vec<u64>,
    /// Runs per cell.
    pub runs: u64,
    /// Root seed after `ARENA_SEED` override.
    pub seed: u64,
    /// Output directory.
    pub out_dir: PathBuf,
    /// Worker threads.
    pub workers: usize,
}

/// Loads and validates a configuration file, applying the `ARENA_SEED`
/// override when present.
pub fn load_experiment(path: &Path) -> Result<Experiment, ArenaError> {
    let text = std::fs::read_to_string(path)?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)?;
    let learner = LearnerSpec::parse(&cfg.learner)?;
    let environment = EnvSpec::parse(&cfg.environment)?;
    let actions = ActionSet::new(cfg.actions)?;
    let types = TypeSpace::new(&cfg.types)?;
    let prior = match &cfg.prior {
        Some(w) => Prior::new(w, &types)?,
        None => Prior::uniform(&types),
    };
    let thetas = match &cfg.theta {
        ThetaField::Keyword(word) if word == "sweep" => types.values().to_vec(),
        ThetaField::Keyword(word) => {
            return Err(ArenaError::Config(format!(
                "theta must be a number or \"sweep\", got \"{word}\""
            )))
        }
        ThetaField::Value(v) => {
            let theta = AgentType::new(*v)?;
            if types.index_of(theta).is_none() {
                return Err(ArenaError::Config(format!(
                    "theta {v} is not a member of the configured type space"
                )));
            }
            vec![theta]
        }
    };
    let horizons = match &cfg.horizon {
        HorizonField::One(h) => vec![*h],
        HorizonField::Many(hs) => hs.clone(),
    };
    if horizons.is_empty() {
        return Err(ArenaError::Config("need at least one horizon".into()));
    }
    if horizons.iter().any(|h| *h < 2) {
        return Err(ArenaError::Config("horizons must be at least 2".into()));
    }
    if horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ArenaError::Config(
            "horizon lists must be strictly increasing".into(),
        ));
    }
    if cfg.runs == 0 {
        return Err(ArenaError::Config("runs must be at least 1".into()));
    }
    let seed = match std::env::var("ARENA_SEED") {
        Ok(v) => v.parse::<u64>().map_err(|_| {
            ArenaError::Config(format!("ARENA_SEED must be a 64-bit integer, got \"{v}\""))
        })?,
        Err(_) => cfg.seed,
    };
    Ok(Experiment {
        id: cfg.experiment_id,
        learner,
        environment,
        setup: GameSetup {
            actions,
            types,
            prior,
        },
        thetas,
        horizons,
        runs: cfg.runs,
        seed,
        out_dir: cfg.out_dir.unwrap_or_else(|| PathBuf::from("out")),
        workers: cfg.workers.unwrap_or_else(default_workers),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_cfg(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn minimal_config_loads() {
        let f = write_cfg(
            r#"{"learner": "exp3", "environment": "price:0.1", "types": [0.1, 0.3],
                "theta": 0.3, "horizon": 1000, "runs": 10, "seed": 42}"#,
        );
        let exp = load_experiment(f.path()).unwrap();
        assert_eq!(exp.thetas.len(), 1);
        assert_eq!(exp.horizons, vec![1000]);
        assert_eq!(exp.setup.actions.count(), 2);
    }

    #[test]
    fn sweep_and_validation() {
        let f = write_cfg(
            r#"{"learner": "ue", "environment": "price:0.1", "types": [0.1, 0.3],
                "theta": "sweep", "horizon": [256, 512, 1024], "runs": 5, "seed": 1}"#,
        );
        let exp = load_experiment(f.path()).unwrap();
        assert_eq!(exp.thetas.len(), 2);
        assert_eq!(exp.horizons.len(), 3);

        let bad = write_cfg(
            r#"{"learner": "ue", "environment": "price:0.1", "types": [0.1, 0.3],
                "theta": 0.2, "horizon": 100, "runs": 5, "seed": 1}"#,
        );
        assert!(load_experiment(bad.path()).is_err());

        let bad = write_cfg(
            r#"{"learner": "exp4", "environment": "price:0.1", "types": [0.1],
                "theta": 0.1, "horizon": 100, "runs": 5, "seed": 1}"#,
        );
        match load_experiment(bad.path()) {
            Err(ArenaError::Spec { token, .. }) => assert_eq!(token, "exp4"),
            other => panic!("expected spec error, got {other:?}"),
        }
    }
}
