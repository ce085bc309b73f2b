//! Learner algorithms.
//!
//! Everything here honors bandit feedback: state evolves only through
//! `record`, and replaying an outcome stream into a fresh instance
//! reproduces the action stream bit for bit.
//!
//! Spec tokens accepted in configuration:
//!
//! | token | algorithm |
//! |---|---|
//! | `exp3`, `exp3:<eta>` | exponential weights (auto rate `sqrt(ln K/(T·K))`) |
//! | `ue`, `ue:<t1>` | uniform exploration, then commit |
//! | `se` | successive elimination |
//! | `ucb` | optimism via upper confidence bounds |
//! | `eep`, `eep:<t1>` | explore / exploit-with-protection / punish |
//! | `esep`, `esep:<abar>`, `esep:<abar>:<eps_p>` | EEP plus a type-signaling phase |
//! | `const:<index>` | plays one action forever |
//! | `doubling:<inner>` | anytime wrapper over geometric epochs |
//!
//! Rescaling convention: the confidence-bound algorithms (exp3/ue/se/ucb)
//! work on rewards `u + 1/2 ∈ [0, 1]`; `eep`/`esep` track raw allocation
//! and payment samples separately.

mod eep;
mod exp3;
mod explore;
mod ucb;

pub use eep::{Eep, Esep};
pub use exp3::Exp3;
pub use explore::{SuccessiveElimination, UniformExploration};
pub use ucb::Ucb;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::mix_seed;
use crate::error::ArenaError;
use crate::game::{ActionSet, AgentType, Outcome, TypeSpace};
use crate::protocol::{Learner, PhaseTag};
use crate::stats::{doubling_constant, RateBound};

/// Everything a learner may condition on at construction time. The type
/// space is common knowledge; the environment's strategy is not in here.
#[derive(Debug, Clone)]
pub struct LearnerCtx<'a> {
    /// Private type θ.
    pub theta: AgentType,
    /// Known horizon T.
    pub horizon: u64,
    /// The action set.
    pub actions: ActionSet,
    /// Commonly known type space (used by the signaling phase).
    pub types: &'a TypeSpace,
    /// Seed for any internal randomization.
    pub seed: u64,
}

/// Parsed learner specification. The environment receives this descriptor
/// (it observes the learner's algorithm, never its type).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LearnerSpec {
    /// Exponential weights; `eta = None` → `sqrt(ln K / (T·K))`.
    Exp3 {
        /// Fixed learning rate, or auto when absent.
        eta: Option<f64>,
    },
    /// Round-robin for `K·T1` periods, then commit to the empirical best.
    UniformExploration {
        /// Per-arm exploration budget; auto = `floor(T^{2/3} (ln T)^{1/3})`.
        t1: Option<u64>,
    },
    /// Sweep the active set, dropping arms dominated at confidence level ρ.
    SuccessiveElimination,
    /// Play the arm with the highest upper confidence bound.
    Ucb,
    /// Explore round-robin, exploit the winner behind confidence-interval
    /// tripwires, opt out forever once a deviation is detected.
    Eep {
        /// Per-arm exploration budget; auto as for `ue`.
        t1: Option<u64>,
    },
    /// EEP plus a signaling phase that encodes θ, and a fallback trade arm
    /// for the case where exploration recommended opting out.
    Esep {
        /// Per-arm exploration budget; auto as for `ue`.
        t1: Option<u64>,
        /// Fallback trade action (≠ opt-out).
        abar: usize,
        /// Acceptable exploitation price when trading via `abar`;
        /// auto = `min(θ/2, 0.01)`.
        eps_p: Option<f64>,
    },
    /// Plays a fixed action every period.
    Constant {
        /// The action.
        action: usize,
    },
    /// Anytime wrapper: restarts the inner algorithm on horizons 1, 2, 4, …
    Doubling(Box<LearnerSpec>),
}

impl fmt::Display for LearnerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearnerSpec::Exp3 { eta: None } => write!(f, "exp3"),
            LearnerSpec::Exp3 { eta: Some(e) } => write!(f, "exp3:{e}"),
            LearnerSpec::UniformExploration { t1: None } => write!(f, "ue"),
            LearnerSpec::UniformExploration { t1: Some(t) } => write!(f, "ue:{t}"),
            LearnerSpec::SuccessiveElimination => write!(f, "se"),
            LearnerSpec::Ucb => write!(f, "ucb"),
            LearnerSpec::Eep { t1: None } => write!(f, "eep"),
            LearnerSpec::Eep { t1: Some(t) } => write!(f, "eep:{t}"),
            LearnerSpec::Esep { t1, abar, eps_p } => {
                write!(f, "esep:{abar}")?;
                if let Some(e) = eps_p {
                    write!(f, ":{e}")?;
                }
                if let Some(t) = t1 {
                    write!(f, ":t1={t}")?;
                }
                Ok(())
            }
            LearnerSpec::Constant { action } => write!(f, "const:{action}"),
            LearnerSpec::Doubling(inner) => write!(f, "doubling:{inner}"),
        }
    }
}

impl LearnerSpec {
    /// Parses a spec token like `exp3`, `const:1`, or `doubling:ue`.
    pub fn parse(token: &str) -> Result<Self, ArenaError> {
        let bad = |reason: &str| ArenaError::spec(token, reason);
        let (head, rest) = match token.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (token, None),
        };
        match head {
            "exp3" => {
                let eta = match rest {
                    None => None,
                    Some(r) => Some(
                        r.parse::<f64>()
                            .map_err(|_| bad("exp3 rate must be a number"))?,
                    ),
                };
                Ok(LearnerSpec::Exp3 { eta })
            }
            "ue" => {
                let t1 = match rest {
                    None => None,
                    Some(r) => Some(
                        r.parse::<u64>()
                            .map_err(|_| bad("ue exploration budget must be an integer"))?,
                    ),
                };
                Ok(LearnerSpec::UniformExploration { t1 })
            }
            "se" if rest.is_none() => Ok(LearnerSpec::SuccessiveElimination),
            "ucb" if rest.is_none() => Ok(LearnerSpec::Ucb),
            "eep" => {
                let t1 = match rest {
                    None => None,
                    Some(r) => Some(
                        r.parse::<u64>()
                            .map_err(|_| bad("eep exploration budget must be an integer"))?,
                    ),
                };
                Ok(LearnerSpec::Eep { t1 })
            }
            "esep" => {
                let mut abar = 1usize;
                let mut eps_p = None;
                if let Some(r) = rest {
                    let mut parts = r.split(':');
                    if let Some(a) = parts.next() {
                        abar = a
                            .parse::<usize>()
                            .map_err(|_| bad("esep fallback action must be an index"))?;
                    }
                    if let Some(e) = parts.next() {
                        eps_p = Some(
                            e.parse::<f64>()
                                .map_err(|_| bad("esep price threshold must be a number"))?,
                        );
                    }
                    if parts.next().is_some() {
                        return Err(bad("esep takes at most `esep:<abar>:<eps_p>`"));
                    }
                }
                Ok(LearnerSpec::Esep {
                    t1: None,
                    abar,
                    eps_p,
                })
            }
            "const" => {
                let action = rest
                    .ok_or_else(|| bad("const needs an action index, e.g. const:0"))?
                    .parse::<usize>()
                    .map_err(|_| bad("const action must be an index"))?;
                Ok(LearnerSpec::Constant { action })
            }
            "doubling" => {
                let inner = rest.ok_or_else(|| bad("doubling needs an inner spec"))?;
                Ok(LearnerSpec::Doubling(Box::new(LearnerSpec::parse(inner)?)))
            }
            _ => Err(bad("not a learner; see `arena list`")),
        }
    }

    /// Instantiates the learner for one episode.
    pub fn build(&self, ctx: &LearnerCtx<'_>) -> Result<Box<dyn Learner>, ArenaError> {
        match self {
            LearnerSpec::Exp3 { eta } => Ok(Box::new(Exp3::new(ctx, *eta)?)),
            LearnerSpec::UniformExploration { t1 } => {
                Ok(Box::new(UniformExploration::new(ctx, *t1)?))
            }
            LearnerSpec::SuccessiveElimination => Ok(Box::new(SuccessiveElimination::new(ctx))),
            LearnerSpec::Ucb => Ok(Box::new(Ucb::new(ctx))),
            LearnerSpec::Eep { t1 } => Ok(Box::new(Eep::new(ctx, *t1)?)),
            LearnerSpec::Esep { t1, abar, eps_p } => {
                Ok(Box::new(Esep::new(ctx, *t1, *abar, *eps_p)?))
            }
            LearnerSpec::Constant { action } => {
                ctx.actions.check(*action)?;
                Ok(Box::new(ConstantLearner { action: *action }))
            }
            LearnerSpec::Doubling(inner) => Ok(Box::new(DoublingLearner::new(inner, ctx)?)),
        }
    }

    /// The exploration budget an exploration-based learner will actually
    /// use at horizon `t` (explicit value, or the auto formula).
    pub fn resolved_t1(&self, horizon: u64) -> Option<u64> {
        match self {
            LearnerSpec::UniformExploration { t1 }
            | LearnerSpec::Eep { t1 }
            | LearnerSpec::Esep { t1, .. } => Some(t1.unwrap_or_else(|| auto_t1(horizon))),
            _ => None,
        }
    }

    /// The regret bound an adaptive opponent would assume for this
    /// algorithm when sizing its probing phases.
    pub fn assumed_rate_bound(&self, action_count: usize) -> RateBound {
        let k = action_count as f64;
        match self {
            LearnerSpec::Exp3 { .. } => {
                RateBound::new((2.0 * k * k.ln()).sqrt(), 0.0, 0.5).unwrap()
            }
            LearnerSpec::SuccessiveElimination | LearnerSpec::Ucb => {
                RateBound::new(5.0 * k.sqrt(), 0.5, 0.5).unwrap()
            }
            LearnerSpec::UniformExploration { .. } => {
                RateBound::new(1.0, 1.0 / 3.0, 2.0 / 3.0).unwrap()
            }
            LearnerSpec::Doubling(inner) => {
                let b = inner.assumed_rate_bound(action_count);
                RateBound::new(doubling_constant(&b), b.delta, b.gamma).unwrap()
            }
            // No better information: assume the exponential-weights rate.
            _ => RateBound::new((2.0 * k * k.ln()).sqrt(), 0.0, 0.5).unwrap(),
        }
    }
}

/// Auto exploration budget `floor(T^{2/3} (ln T)^{1/3})`, at least 1.
pub fn auto_t1(horizon: u64) -> u64 {
    let t = horizon as f64;
    let v = (t.powf(2.0 / 3.0) * t.ln().cbrt()).floor();
    (v as u64).max(1)
}

/// Rescales a learner payoff into [0, 1].
pub(crate) fn rescale(u: f64) -> f64 {
    u + 0.5
}

// ---------------------------------------------------------------------------
// Type signaling codewords
// ---------------------------------------------------------------------------

/// Number of periods needed to spell a type index in base `|actions|`:
/// the smallest `L` with `K^L ≥ |Θ|` (0 for a singleton space).
pub fn codeword_len(actions: ActionSet, type_count: usize) -> usize {
    let k = actions.count() as u128;
    let n = type_count as u128;
    let mut len = 0usize;
    let mut reach = 1u128;
    while reach < n {
        reach = reach.saturating_mul(k);
        len += 1;
    }
    len
}

/// Encodes θ's index in the type space as a big-endian base-`K` codeword,
/// left-padded with the opt-out digit 0.
pub fn encode_type(
    theta: AgentType,
    types: &TypeSpace,
    actions: ActionSet,
) -> Result<Vec<usize>, ArenaError> {
    let idx = types.index_of(theta).ok_or_else(|| {
        ArenaError::Config(format!(
            "type {} is not a member of the type space",
            theta.value()
        ))
    })?;
    let len = codeword_len(actions, types.len());
    let k = actions.count();
    let mut word = vec![0usize; len];
    let mut rem = idx;
    for slot in word.iter_mut().rev() {
        *slot = rem % k;
        rem /= k;
    }
    Ok(word)
}

/// Inverts [`encode_type`]. The word must have the canonical length and
/// decode to a valid type index.
pub fn decode_type(
    word: &[usize],
    types: &TypeSpace,
    actions: ActionSet,
) -> Result<AgentType, ArenaError> {
    let len = codeword_len(actions, types.len());
    if word.len() != len {
        return Err(ArenaError::Config(format!(
            "codeword length {} != expected {len}",
            word.len()
        )));
    }
    let k = actions.count();
    let mut idx = 0usize;
    for &d in word {
        if d >= k {
            return Err(ArenaError::Config(format!("codeword digit {d} out of range")));
        }
        idx = idx * k + d;
    }
    if idx >= types.len() {
        return Err(ArenaError::Config(format!(
            "codeword decodes to index {idx} outside the type space"
        )));
    }
    Ok(types.get(idx))
}

// ---------------------------------------------------------------------------
// Constant learner
// ---------------------------------------------------------------------------

/// Plays one fixed action forever.
#[derive(Debug, Clone)]
pub struct ConstantLearner {
    action: usize,
}

impl Learner for ConstantLearner {
    fn choose(&mut self, _t: u64) -> usize {
        self.action
    }

    fn record(&mut self, _outcome: &Outcome) {}
}

// ---------------------------------------------------------------------------
// Doubling wrapper
// ---------------------------------------------------------------------------

/// Anytime wrapper: runs the inner algorithm on epoch horizons 1, 2, 4, …,
/// with fresh state (and a fresh derived seed) each epoch. Never reads the
/// true horizon — construction ignores `ctx.horizon` entirely.
pub struct DoublingLearner {
    inner_spec: LearnerSpec,
    theta: AgentType,
    actions: ActionSet,
    types: TypeSpace,
    seed: u64,
    epoch: u32,
    used: u64,
    inner: Box<dyn Learner>,
}

impl DoublingLearner {
    fn build_inner(
        spec: &LearnerSpec,
        theta: AgentType,
        actions: ActionSet,
        types: &TypeSpace,
        seed: u64,
        epoch: u32,
    ) -> Result<Box<dyn Learner>, ArenaError> {
        let ctx = LearnerCtx {
            theta,
            horizon: 1u64 << epoch,
            actions,
            types,
            seed: mix_seed(seed, epoch as u64),
        };
        spec.build(&ctx)
    }

    /// Builds the wrapper and its epoch-0 inner instance.
    pub fn new(inner_spec: &LearnerSpec, ctx: &LearnerCtx<'_>) -> Result<Self, ArenaError> {
        let inner = Self::build_inner(inner_spec, ctx.theta, ctx.actions, ctx.types, ctx.seed, 0)?;
        Ok(Self {
            inner_spec: inner_spec.clone(),
            theta: ctx.theta,
            actions: ctx.actions,
            types: ctx.types.clone(),
            seed: ctx.seed,
            epoch: 0,
            used: 0,
            inner,
        })
    }

    fn epoch_len(&self) -> u64 {
        1u64 << self.epoch
    }
}

impl Learner for DoublingLearner {
    fn choose(&mut self, _t: u64) -> usize {
        self.inner.choose(self.used + 1)
    }

    fn record(&mut self, outcome: &Outcome) {
        self.inner.record(outcome);
        self.used += 1;
        if self.used == self.epoch_len() {
            self.epoch += 1;
            self.used = 0;
            self.inner = Self::build_inner(
                &self.inner_spec,
                self.theta,
                self.actions,
                &self.types,
                self.seed,
                self.epoch,
            )
            .expect("inner learner accepted earlier epochs");
        }
    }

    fn phase(&self) -> PhaseTag {
        self.inner.phase()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Mechanism;
    use proptest::prelude::*;

    fn ctx_parts() -> (TypeSpace, ActionSet) {
        (TypeSpace::new(&[0.1, 0.3]).unwrap(), ActionSet::new(2).unwrap())
    }

    #[test]
    fn parse_round_trips() {
        for tok in [
            "exp3", "exp3:0.05", "ue", "ue:100", "se", "ucb", "eep", "eep:50", "esep:1",
            "esep:2:0.01", "const:0", "const:3", "doubling:ue", "doubling:exp3:0.1",
        ] {
            let spec = LearnerSpec::parse(tok).unwrap();
            let spec2 = LearnerSpec::parse(&spec.to_string()).unwrap();
            assert_eq!(spec, spec2, "{tok}");
        }
        assert!(LearnerSpec::parse("exp4").is_err());
        assert!(LearnerSpec::parse("const").is_err());
        assert!(LearnerSpec::parse("doubling:").is_err());
        // the offending token is carried in the error
        match LearnerSpec::parse("exp4") {
            Err(ArenaError::Spec { token, .. }) => assert_eq!(token, "exp4"),
            other => panic!("expected spec error, got {other:?}"),
        }
    }

    #[test]
    fn auto_t1_values() {
        // floor(100 · (ln 1000)^{1/3}) = 190
        assert_eq!(auto_t1(1000), 190);
        // degenerate horizons clamp to 1
        assert_eq!(auto_t1(1), 1);
        assert_eq!(auto_t1(2), 1);
        // the formula value at T = 10⁶
        assert_eq!(auto_t1(1_000_000), 23_995);
    }

    #[test]
    fn codeword_shapes() {
        let a2 = ActionSet::new(2).unwrap();
        assert_eq!(codeword_len(a2, 3), 2);
        assert_eq!(codeword_len(a2, 1), 0);
        assert_eq!(codeword_len(a2, 2), 1);
        let a3 = ActionSet::new(3).unwrap();
        assert_eq!(codeword_len(a3, 9), 2);
        assert_eq!(codeword_len(a3, 10), 3);
    }

    #[test]
    fn encode_matches_canonical_table() {
        let ts = TypeSpace::new(&[0.1, 0.2, 0.3]).unwrap();
        let a2 = ActionSet::new(2).unwrap();
        assert_eq!(encode_type(ts.get(0), &ts, a2).unwrap(), vec![0, 0]);
        assert_eq!(encode_type(ts.get(1), &ts, a2).unwrap(), vec![0, 1]);
        assert_eq!(encode_type(ts.get(2), &ts, a2).unwrap(), vec![1, 0]);

        let single = TypeSpace::new(&[0.2]).unwrap();
        assert!(encode_type(single.get(0), &single, a2).unwrap().is_empty());

        let outsider = AgentType::new(0.25).unwrap();
        assert!(encode_type(outsider, &ts, a2).is_err());
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(k in 2usize..6, n in 1usize..12, pick in 0usize..12) {
            let vals: Vec<f64> = (0..n).map(|i| 0.01 + 0.48 * i as f64 / n as f64).collect();
            let ts = TypeSpace::new(&vals).unwrap();
            let actions = ActionSet::new(k).unwrap();
            let theta = ts.get(pick % n);
            let word = encode_type(theta, &ts, actions).unwrap();
            prop_assert_eq!(word.len(), codeword_len(actions, n));
            let back = decode_type(&word, &ts, actions).unwrap();
            prop_assert_eq!(back.value(), theta.value());
        }
    }

    #[test]
    fn constant_learner_plays_fixed_action() {
        let (ts, actions) = ctx_parts();
        let ctx = LearnerCtx {
            theta: AgentType::new(0.3).unwrap(),
            horizon: 10,
            actions,
            types: &ts,
            seed: 1,
        };
        let mut l = LearnerSpec::Constant { action: 1 }.build(&ctx).unwrap();
        let m = Mechanism::posted_price(actions, 0.1).unwrap();
        for t in 1..=10 {
            let a = l.choose(t);
            assert_eq!(a, 1);
            l.record(&Outcome::realize(&m, a).unwrap());
        }
        assert!(LearnerSpec::Constant { action: 9 }.build(&ctx).is_err());
    }

    #[test]
    fn doubling_epoch_lengths_are_geometric() {
        // Periods consumed by epochs 0..m sum to 2^{m+1} − 1: after 2^{m+1}−1
        // records the wrapper must be at the start of epoch m+1.
        let (ts, actions) = ctx_parts();
        let ctx = LearnerCtx {
            theta: AgentType::new(0.3).unwrap(),
            horizon: 1, // ignored by the wrapper
            actions,
            types: &ts,
            seed: 5,
        };
        let spec = LearnerSpec::parse("doubling:const:1").unwrap();
        let mut l = match spec {
            LearnerSpec::Doubling(inner) => DoublingLearner::new(&inner, &ctx).unwrap(),
            _ => unreachable!(),
        };
        let m = Mechanism::posted_price(actions, 0.1).unwrap();
        for t in 1..=127u64 {
            let a = l.choose(t);
            l.record(&Outcome::realize(&m, a).unwrap());
        }
        // 127 = 2^7 − 1 → exactly epochs 0..6 consumed
        assert_eq!(l.epoch, 7);
        assert_eq!(l.used, 0);
    }

    #[test]
    fn doubling_never_reads_the_true_horizon() {
        // Identical action streams under wildly different claimed horizons.
        let (ts, actions) = ctx_parts();
        let spec = LearnerSpec::parse("doubling:ue").unwrap();
        let m = Mechanism::posted_price(actions, 0.1).unwrap();
        let mut streams = Vec::new();
        for horizon in [100u64, 100_000] {
            let ctx = LearnerCtx {
                theta: AgentType::new(0.3).unwrap(),
                horizon,
                actions,
                types: &ts,
                seed: 9,
            };
            let mut l = spec.build(&ctx).unwrap();
            let mut actions_taken = Vec::new();
            for t in 1..=100u64 {
                let a = l.choose(t);
                actions_taken.push(a);
                l.record(&Outcome::realize(&m, a).unwrap());
            }
            streams.push(actions_taken);
        }
        assert_eq!(streams[0], streams[1]);
    }
}
