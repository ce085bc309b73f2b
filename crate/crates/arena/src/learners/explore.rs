//! Explore-then-commit and elimination learners.

use super::{auto_t1, rescale, LearnerCtx};
use crate::error::ArenaError;
use crate::game::{AgentType, Outcome};
use crate::protocol::{Learner, PhaseTag};
use crate::stats::ConfidenceState;

/// Tries each arm `T1` times round-robin, then plays the arm with the
/// highest average reward for the rest of the horizon. Ties commit to the
/// lowest index (the opt-out arm wins exact ties).
pub struct UniformExploration {
    theta: AgentType,
    k: usize,
    t1: u64,
    seen: u64,
    sums: Vec<f64>,
    committed: Option<usize>,
}

impl UniformExploration {
    /// `t1 = None` → `floor(T^{2/3} (ln T)^{1/3})`, at least 1. An explicit
    /// budget with `K·T1 > T` leaves no commit phase; that is allowed but
    /// flagged on stderr.
    pub fn new(ctx: &LearnerCtx<'_>, t1: Option<u64>) -> Result<Self, ArenaError> {
        let k = ctx.actions.count();
        let resolved = match t1 {
            Some(v) => {
                if v == 0 {
                    return Err(ArenaError::Config(
                        "exploration budget must be at least 1".into(),
                    ));
                }
                if v.saturating_mul(k as u64) > ctx.horizon {
                    eprintln!(
                        "warning: ue exploration K·T1 = {} exceeds horizon {}; commit phase is empty",
                        v * k as u64,
                        ctx.horizon
                    );
                }
                v
            }
            None => auto_t1(ctx.horizon),
        };
        Ok(Self {
            theta: ctx.theta,
            k,
            t1: resolved,
            seen: 0,
            sums: vec![0.0; k],
            committed: None,
        })
    }

    /// The exploration budget in use.
    pub fn t1(&self) -> u64 {
        self.t1
    }

    fn commit_choice(&self) -> usize {
        let mut best = 0usize;
        for a in 1..self.k {
            if self.sums[a] > self.sums[best] {
                best = a;
            }
        }
        best
    }
}

impl Learner for UniformExploration {
    fn choose(&mut self, _t: u64) -> usize {
        if self.seen < self.t1 * self.k as u64 {
            (self.seen % self.k as u64) as usize
        } else {
            *self.committed.get_or_insert_with(|| {
                let mut best = 0usize;
                for a in 1..self.k {
                    if self.sums[a] > self.sums[best] {
                        best = a;
                    }
                }
                best
            })
        }
    }

    fn record(&mut self, outcome: &Outcome) {
        if self.seen < self.t1 * self.k as u64 {
            self.sums[outcome.action] += outcome.payoff_u(self.theta);
        }
        self.seen += 1;
        if self.seen == self.t1 * self.k as u64 && self.committed.is_none() {
            self.committed = Some(self.commit_choice());
        }
    }

    fn phase(&self) -> PhaseTag {
        if self.committed.is_none() {
            PhaseTag::Explore
        } else {
            PhaseTag::Exploit
        }
    }
}

/// Sweeps the active set round-robin; after each complete sweep removes
/// every arm whose upper confidence bound falls below some active arm's
/// lower confidence bound. Once one arm remains it is played forever.
pub struct SuccessiveElimination {
    theta: AgentType,
    active: Vec<usize>,
    pos: usize,
    conf: ConfidenceState,
}

impl SuccessiveElimination {
    /// Rewards are tracked rescaled to [0, 1] with the shared radius.
    pub fn new(ctx: &LearnerCtx<'_>) -> Self {
        let k = ctx.actions.count();
        Self {
            theta: ctx.theta,
            active: (0..k).collect(),
            pos: 0,
            conf: ConfidenceState::new(k, ctx.horizon),
        }
    }

    /// Arms still in play.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    fn eliminate(&mut self) {
        // Bounds snapshot before any removal this round.
        let lcbs: Vec<f64> = self
            .active
            .iter()
            .map(|&a| self.conf.lcb(a).unwrap())
            .collect();
        let ucbs: Vec<f64> = self
            .active
            .iter()
            .map(|&a| self.conf.ucb(a).unwrap())
            .collect();
        let best_lcb = lcbs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let survivors: Vec<usize> = self
            .active
            .iter()
            .zip(&ucbs)
            .filter(|(_, &ucb)| best_lcb <= ucb)
            .map(|(&a, _)| a)
            .collect();
        self.active = survivors;
    }
}

impl Learner for SuccessiveElimination {
    fn choose(&mut self, _t: u64) -> usize {
        self.active[self.pos.min(self.active.len() - 1)]
    }

    fn record(&mut self, outcome: &Outcome) {
        if self.active.len() == 1 {
            return;
        }
        self.conf
            .observe(outcome.action, rescale(outcome.payoff_u(self.theta)));
        self.pos += 1;
        if self.pos == self.active.len() {
            self.eliminate();
            self.pos = 0;
        }
    }

    fn phase(&self) -> PhaseTag {
        if self.active.len() == 1 {
            PhaseTag::Exploit
        } else {
            PhaseTag::Explore
        }
    }
}
