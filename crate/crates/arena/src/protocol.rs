//! The two behavioral contracts of the repeated game.
//!
//! Per period `t` the engine calls, in this order:
//!
//! 1. `Environment::post(t)` — the environment commits a mechanism,
//! 2. `Learner::choose(t)` — the learner picks an action (simultaneous
//!    moves: the environment has not seen it yet),
//! 3. `Environment::observe(a)` — the environment sees only the action,
//! 4. `Learner::record(outcome)` — the learner sees only its own bandit
//!    feedback `(a, x(a), p(a))`.
//!
//! A learner's choice may depend only on its type, the horizon, the action
//! set, its seed, and its past outcomes. An environment never sees the
//! learner's type or payoff — by construction it has no access to either.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::game::{Mechanism, Outcome};

/// Coarse phase label attached to trajectory records; `None` for algorithms
/// without phase structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseTag {
    /// No phase structure.
    None,
    /// Round-robin or forced exploration.
    Explore,
    /// Type-signaling periods.
    Signal,
    /// Committed exploitation.
    Exploit,
    /// Punishment (permanent opt-out / extraction).
    Punish,
}

impl fmt::Display for PhaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PhaseTag::None => "none",
            PhaseTag::Explore => "explore",
            PhaseTag::Signal => "signal",
            PhaseTag::Exploit => "exploit",
            PhaseTag::Punish => "punish",
        };
        f.write_str(s)
    }
}

/// An online learner: a state machine over its own bandit feedback.
pub trait Learner {
    /// Picks the action for period `t` (1-based). Called exactly once per
    /// period, before the outcome is known.
    fn choose(&mut self, t: u64) -> usize;

    /// Feeds back the realized outcome of the period.
    fn record(&mut self, outcome: &Outcome);

    /// Current phase label.
    fn phase(&self) -> PhaseTag {
        PhaseTag::None
    }
}

/// An environment strategy: posts mechanisms, observes only actions.
pub trait Environment {
    /// Commits the period-`t` mechanism before seeing the learner's action.
    fn post(&mut self, t: u64) -> Arc<Mechanism>;

    /// Observes the learner's period action (and nothing else).
    fn observe(&mut self, action: usize);

    /// Current phase label.
    fn phase(&self) -> PhaseTag {
        PhaseTag::None
    }
}
