//! Environment strategies: stationary baselines and the adaptive
//! constructions that exploit specific learner algorithms.
//!
//! Spec tokens accepted in configuration:
//!
//! | token | strategy |
//! |---|---|
//! | `stationary:<file>` | i.i.d. mixture loaded from a JSON file |
//! | `price:<p>` | posted price `p` on every non-opt-out action |
//! | `noer:<eps>` | descending price probes, then surplus extraction |
//! | `lockin`, `lockin:<pe>:<px>:<w>` | wait for an explore-then-commit learner to lock in, then raise the price |
//! | `ucbprobe:<eps0>` | per-arm price probes that read the type off an optimistic learner's replay order |
//! | `eepbr`, `eepbr:drift` | best response to the protected-exploitation learner |
//! | `esepbr:<eps_p>` | best response to the signaling learner |
//!
//! Adaptive strategies receive the learner's algorithm descriptor (never
//! its type) plus the commonly known type space and their own belief.

mod exploit;
pub mod fuzz;
mod response;

pub use exploit::{ExploiterSchedule, LockinExploiter, NoErExploiter, ProbePhase, UcbProbeExploiter};
pub use response::{
    optimal_drift, reduced_game_solve, EepBestResponse, EsepBestResponse, ReducedGame,
};

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::ArenaError;
use crate::game::{
    sample_mechanism, ActionSet, Mechanism, Prior, StationaryStrategy, TypeSpace,
};
use crate::learners::LearnerSpec;
use crate::protocol::Environment;
use crate::stats::RateBound;

/// Everything an environment may condition on at construction time: the
/// game parameters, its belief, and the learner's algorithm descriptor.
/// The learner's type is deliberately absent.
#[derive(Debug, Clone)]
pub struct EnvContext<'a> {
    /// Known horizon T.
    pub horizon: u64,
    /// The action set.
    pub actions: ActionSet,
    /// Commonly known type space.
    pub types: &'a TypeSpace,
    /// The adaptive environment's belief over types.
    pub prior: &'a Prior,
    /// The learner's chosen algorithm (observable; its type is not).
    pub learner: &'a LearnerSpec,
    /// Seed for any internal randomization.
    pub seed: u64,
}

/// Builds per-episode environment instances. Implemented by [`EnvSpec`]
/// and by ad-hoc families like the price-raising fuzzer.
pub trait EnvFactory: Sync {
    /// Token used in reports.
    fn label(&self) -> String;

    /// Instantiates the environment for one episode.
    fn build_env(&self, ctx: &EnvContext<'_>) -> Result<Box<dyn Environment>, ArenaError>;

    /// The stationary mixture this environment realizes, when it is
    /// stationary; used as the exact weak-regret benchmark.
    fn stationary_strategy(&self, _actions: ActionSet) -> Option<StationaryStrategy> {
        None
    }
}

/// Parsed environment specification.
#[derive(Debug, Clone)]
pub enum EnvSpec {
    /// Fixed mixture, sampled i.i.d. every period.
    Stationary {
        /// Report label (the file path for CLI-loaded mixtures).
        label: String,
        /// The mixture itself.
        strategy: StationaryStrategy,
    },
    /// Deterministic posted price on all non-opt-out actions.
    Price {
        /// The price.
        p: f64,
    },
    /// Descending price probes against a no-regret learner, then
    /// exploitation at the detected type's shaved price.
    NoEr {
        /// Extraction slack ε ∈ (0, 1).
        eps: f64,
        /// Probe/trade action (defaults to 1).
        abar: usize,
        /// Regret bound assumed for the learner; derived from the learner
        /// descriptor when absent.
        bound: Option<RateBound>,
    },
    /// Cheap exploration price until the learner locks onto action 1, then
    /// the exploitation price forever.
    Lockin {
        /// Price during the learner's exploration.
        p_explore: f64,
        /// Price after lock-in.
        p_exploit: f64,
        /// Consecutive plays of action 1 that confirm lock-in (used when
        /// the commit period cannot be computed from the descriptor).
        window: u64,
    },
    /// Two probe passes that identify the type from an optimistic
    /// learner's replay order, then near-full extraction.
    UcbProbe {
        /// Margin left to the learner during exploitation.
        eps0: f64,
    },
    /// Best response to the protected-exploitation learner: monopoly price
    /// during its exploration, held (optionally drifted) afterwards.
    EepBr {
        /// Add the largest undetectable price drift after exploration.
        drift: bool,
    },
    /// Best response to the signaling learner: reduced-game price, then
    /// either that price or `eps_p` depending on the decoded type.
    EsepBr {
        /// Price offered to types below the posted price.
        eps_p: f64,
    },
}

impl fmt::Display for EnvSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvSpec::Stationary { label, .. } => write!(f, "{label}"),
            EnvSpec::Price { p } => write!(f, "price:{p}"),
            EnvSpec::NoEr { eps, .. } => write!(f, "noer:{eps}"),
            EnvSpec::Lockin {
                p_explore,
                p_exploit,
                window,
            } => write!(f, "lockin:{p_explore}:{p_exploit}:{window}"),
            EnvSpec::UcbProbe { eps0 } => write!(f, "ucbprobe:{eps0}"),
            EnvSpec::EepBr { drift: false } => write!(f, "eepbr"),
            EnvSpec::EepBr { drift: true } => write!(f, "eepbr:drift"),
            EnvSpec::EsepBr { eps_p } => write!(f, "esepbr:{eps_p}"),
        }
    }
}

/// JSON schema of a stationary mixture file.
#[derive(Debug, Deserialize)]
struct MixtureFile {
    actions: usize,
    atoms: Vec<MixtureAtom>,
}

#[derive(Debug, Deserialize)]
struct MixtureAtom {
    prob: f64,
    #[serde(default)]
    price: Option<f64>,
    #[serde(default)]
    alloc: Option<Vec<bool>>,
    #[serde(default)]
    pay: Option<Vec<f64>>,
}

/// Loads a stationary mixture from a JSON file: `{"actions": K, "atoms":
/// [{"prob": w, "price": p} | {"prob": w, "alloc": [...], "pay": [...]}]}`.
pub fn load_mixture(path: &Path) -> Result<StationaryStrategy, ArenaError> {
    let text = std::fs::read_to_string(path)?;
    let file: MixtureFile = serde_json::from_str(&text)?;
    let actions = ActionSet::new(file.actions)?;
    let mut atoms = Vec::new();
    for atom in file.atoms {
        let mech = match (atom.price, atom.alloc, atom.pay) {
            (Some(p), None, None) => Mechanism::posted_price(actions, p)?,
            (None, Some(alloc), Some(pay)) => Mechanism::new(alloc, pay)?,
            _ => {
                return Err(ArenaError::Config(
                    "each atom needs either `price` or both `alloc` and `pay`".into(),
                ))
            }
        };
        if mech.action_count() != file.actions {
            return Err(ArenaError::Config(
                "atom vectors must match the declared action count".into(),
            ));
        }
        atoms.push((mech, atom.prob));
    }
    Ok(StationaryStrategy::new(atoms)?)
}

impl EnvSpec {
    /// Parses a spec token like `price:0.1` or `noer:0.2`. Stationary
    /// mixtures are loaded from disk immediately.
    pub fn parse(token: &str) -> Result<Self, ArenaError> {
        let bad = |reason: &str| ArenaError::spec(token, reason);
        let (head, rest) = match token.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (token, None),
        };
        match head {
            "stationary" => {
                let path = rest.ok_or_else(|| bad("stationary needs a mixture file path"))?;
                let strategy = load_mixture(Path::new(path))?;
                Ok(EnvSpec::Stationary {
                    label: token.to_string(),
                    strategy,
                })
            }
            "price" => {
                let p = rest
                    .ok_or_else(|| bad("price needs a value, e.g. price:0.1"))?
                    .parse::<f64>()
                    .map_err(|_| bad("price must be a number"))?;
                Ok(EnvSpec::Price { p })
            }
            "noer" => {
                let eps = rest
                    .ok_or_else(|| bad("noer needs an extraction slack, e.g. noer:0.2"))?
                    .parse::<f64>()
                    .map_err(|_| bad("noer slack must be a number"))?;
                Ok(EnvSpec::NoEr {
                    eps,
                    abar: 1,
                    bound: None,
                })
            }
            "lockin" => {
                let (mut p_explore, mut p_exploit, mut window) = (0.0, 0.5, 50u64);
                if let Some(r) = rest {
                    let parts: Vec<&str> = r.split(':').collect();
                    if parts.len() < 2 || parts.len() > 3 {
                        return Err(bad("lockin takes `lockin` or `lockin:<pe>:<px>[:<window>]`"));
                    }
                    p_explore = parts[0]
                        .parse()
                        .map_err(|_| bad("lockin exploration price must be a number"))?;
                    p_exploit = parts[1]
                        .parse()
                        .map_err(|_| bad("lockin exploitation price must be a number"))?;
                    if let Some(w) = parts.get(2) {
                        window = w
                            .parse()
                            .map_err(|_| bad("lockin window must be an integer"))?;
                    }
                }
                Ok(EnvSpec::Lockin {
                    p_explore,
                    p_exploit,
                    window,
                })
            }
            "ucbprobe" => {
                let eps0 = rest
                    .ok_or_else(|| bad("ucbprobe needs a margin, e.g. ucbprobe:0.02"))?
                    .parse::<f64>()
                    .map_err(|_| bad("ucbprobe margin must be a number"))?;
                Ok(EnvSpec::UcbProbe { eps0 })
            }
            "eepbr" => match rest {
                None => Ok(EnvSpec::EepBr { drift: false }),
                Some("drift") => Ok(EnvSpec::EepBr { drift: true }),
                Some(_) => Err(bad("eepbr takes no argument other than `drift`")),
            },
            "esepbr" => {
                let eps_p = rest
                    .ok_or_else(|| bad("esepbr needs a low-type price, e.g. esepbr:0.01"))?
                    .parse::<f64>()
                    .map_err(|_| bad("esepbr price must be a number"))?;
                Ok(EnvSpec::EsepBr { eps_p })
            }
            _ => Err(bad("not an environment; see `arena list`")),
        }
    }
}

impl EnvFactory for EnvSpec {
    fn label(&self) -> String {
        self.to_string()
    }

    fn build_env(&self, ctx: &EnvContext<'_>) -> Result<Box<dyn Environment>, ArenaError> {
        match self {
            EnvSpec::Stationary { strategy, .. } => {
                if strategy.action_count() != ctx.actions.count() {
                    return Err(ArenaError::Config(format!(
                        "mixture covers {} actions but the game has {}",
                        strategy.action_count(),
                        ctx.actions.count()
                    )));
                }
                Ok(Box::new(StationaryEnv {
                    strategy: strategy.clone(),
                    rng: ChaCha8Rng::seed_from_u64(ctx.seed),
                }))
            }
            EnvSpec::Price { p } => {
                let mech = Arc::new(Mechanism::posted_price(ctx.actions, *p)?);
                Ok(Box::new(PostedPriceEnv { mech }))
            }
            EnvSpec::NoEr { eps, abar, bound } => {
                let bound = bound
                    .unwrap_or_else(|| ctx.learner.assumed_rate_bound(ctx.actions.count()));
                Ok(Box::new(NoErExploiter::new(
                    *eps, *abar, &bound, ctx,
                )?))
            }
            EnvSpec::Lockin {
                p_explore,
                p_exploit,
                window,
            } => Ok(Box::new(LockinExploiter::new(
                *p_explore, *p_exploit, *window, ctx,
            )?)),
            EnvSpec::UcbProbe { eps0 } => Ok(Box::new(UcbProbeExploiter::new(*eps0, ctx)?)),
            EnvSpec::EepBr { drift } => Ok(Box::new(EepBestResponse::new(*drift, ctx)?)),
            EnvSpec::EsepBr { eps_p } => Ok(Box::new(EsepBestResponse::new(*eps_p, ctx)?)),
        }
    }

    fn stationary_strategy(&self, actions: ActionSet) -> Option<StationaryStrategy> {
        match self {
            EnvSpec::Stationary { strategy, .. } => Some(strategy.clone()),
            EnvSpec::Price { p } => Mechanism::posted_price(actions, *p)
                .ok()
                .map(StationaryStrategy::deterministic),
            _ => None,
        }
    }
}

/// Samples the mixture i.i.d.; ignores history entirely.
pub struct StationaryEnv {
    strategy: StationaryStrategy,
    rng: ChaCha8Rng,
}

impl Environment for StationaryEnv {
    fn post(&mut self, _t: u64) -> Arc<Mechanism> {
        sample_mechanism(&self.strategy, &mut self.rng)
    }

    fn observe(&mut self, _action: usize) {}
}

/// Posts one constant mechanism forever.
pub struct PostedPriceEnv {
    mech: Arc<Mechanism>,
}

impl Environment for PostedPriceEnv {
    fn post(&mut self, _t: u64) -> Arc<Mechanism> {
        Arc::clone(&self.mech)
    }

    fn observe(&mut self, _action: usize) {}
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::AgentType;
    use std::io::Write;

    fn ctx_fixture<'a>(
        types: &'a TypeSpace,
        prior: &'a Prior,
        learner: &'a LearnerSpec,
    ) -> EnvContext<'a> {
        EnvContext {
            horizon: 1000,
            actions: ActionSet::new(2).unwrap(),
            types,
            prior,
            learner,
            seed: 5,
        }
    }

    #[test]
    fn parse_tokens() {
        assert!(matches!(
            EnvSpec::parse("price:0.1").unwrap(),
            EnvSpec::Price { .. }
        ));
        assert!(matches!(
            EnvSpec::parse("noer:0.2").unwrap(),
            EnvSpec::NoEr { .. }
        ));
        assert!(matches!(
            EnvSpec::parse("lockin").unwrap(),
            EnvSpec::Lockin {
                window: 50,
                ..
            }
        ));
        assert!(matches!(
            EnvSpec::parse("eepbr:drift").unwrap(),
            EnvSpec::EepBr { drift: true }
        ));
        assert!(EnvSpec::parse("market").is_err());
        match EnvSpec::parse("market") {
            Err(ArenaError::Spec { token, .. }) => assert_eq!(token, "market"),
            other => panic!("expected spec error, got {other:?}"),
        }
    }

    #[test]
    fn mixture_file_round_trip() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(
            f,
            r#"{{"actions": 3, "atoms": [
                {{"prob": 0.75, "price": 0.1}},
                {{"prob": 0.25, "alloc": [false, true, true], "pay": [0.0, 0.25, 0.25]}}
            ]}}"#
        )
        .unwrap();
        let token = format!("stationary:{}", f.path().display());
        let spec = EnvSpec::parse(&token).unwrap();
        let s = spec.stationary_strategy(ActionSet::new(3).unwrap()).unwrap();
        assert_eq!(s.atoms().len(), 2);
        assert_eq!(s.action_count(), 3);
        // missing file → i/o error (exit 3 territory)
        match EnvSpec::parse("stationary:/nonexistent/mixture.json") {
            Err(e) => assert_eq!(e.exit_code(), 3),
            Ok(_) => panic!("expected error"),
        }
    }

    #[test]
    fn posted_price_is_constant_and_seeded_mixtures_are_deterministic() {
        let types = TypeSpace::new(&[0.1, 0.3]).unwrap();
        let prior = Prior::uniform(&types);
        let learner = LearnerSpec::parse("const:0").unwrap();
        let ctx = ctx_fixture(&types, &prior, &learner);

        let mut env = EnvSpec::Price { p: 0.2 }.build_env(&ctx).unwrap();
        for t in 1..=10 {
            let m = env.post(t);
            assert_eq!(m.pay(1), 0.2);
            assert_eq!(m.alloc(1), 1.0);
            env.observe(0);
        }
        assert!(EnvSpec::Price { p: 0.7 }.build_env(&ctx).is_err());

        let strategy = StationaryStrategy::new(vec![
            (Mechanism::posted_price(ctx.actions, 0.1).unwrap(), 0.5),
            (Mechanism::posted_price(ctx.actions, 0.3).unwrap(), 0.5),
        ])
        .unwrap();
        let spec = EnvSpec::Stationary {
            label: "stationary:test".into(),
            strategy,
        };
        let stream = |seed: u64| {
            let mut c = ctx_fixture(&types, &prior, &learner);
            c.seed = seed;
            let mut env = spec.build_env(&c).unwrap();
            (1..=50).map(|t| env.post(t).pay(1)).collect::<Vec<_>>()
        };
        assert_eq!(stream(7), stream(7));
        assert_ne!(stream(7), stream(8));
    }

    #[test]
    fn theta_neutrality_by_interface() {
        // Identical contexts except for which type will play produce
        // identical environments: the context carries no type at all, so
        // feeding the same action stream yields the same mechanism stream.
        let types = TypeSpace::new(&[0.1, 0.3]).unwrap();
        let prior = Prior::uniform(&types);
        let learner = LearnerSpec::parse("exp3").unwrap();
        let ctx = ctx_fixture(&types, &prior, &learner);
        let spec = EnvSpec::parse("noer:0.2").unwrap();
        let run = || {
            let mut env = spec.build_env(&ctx).unwrap();
            let mut prices = Vec::new();
            for t in 1..=200u64 {
                let m = env.post(t);
                prices.push(m.pay(1));
                env.observe((t % 2) as usize);
            }
            prices
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn theta_is_unrepresentable_in_env_context() {
        // Compile-time guarantee made explicit: EnvContext exposes game
        // parameters and the learner descriptor only. This test exists to
        // break loudly if someone adds type information to the context.
        let types = TypeSpace::new(&[0.1, 0.3]).unwrap();
        let prior = Prior::uniform(&types);
        let learner = LearnerSpec::parse("ucb").unwrap();
        let ctx = ctx_fixture(&types, &prior, &learner);
        let _: &TypeSpace = ctx.types;
        let _: &Prior = ctx.prior;
        let _: &LearnerSpec = ctx.learner;
        let theta = AgentType::new(0.1).unwrap();
        let _ = theta; // a θ exists in the test, but no EnvContext field holds one
    }
}
