//! Optimism in the face of uncertainty.

use super::{rescale, LearnerCtx};
use crate::game::{AgentType, Outcome};
use crate::protocol::Learner;
use crate::stats::ConfidenceState;

/// Cold-starts each arm once in index order, then plays the arm with the
/// highest `mean + ρ`. Ties break to the higher empirical mean, then to the
/// lower index, which makes the "replay in descending order of past
/// performance" behavior after an all-zero stretch deterministic.
pub struct Ucb {
    theta: AgentType,
    k: usize,
    conf: ConfidenceState,
}

impl Ucb {
    /// Rewards are tracked rescaled to [0, 1].
    pub fn new(ctx: &LearnerCtx<'_>) -> Self {
        let k = ctx.actions.count();
        Self {
            theta: ctx.theta,
            k,
            conf: ConfidenceState::new(k, ctx.horizon),
        }
    }
}

impl Learner for Ucb {
    fn choose(&mut self, _t: u64) -> usize {
        // Cold start: first unsampled arm in index order.
        for a in 0..self.k {
            if self.conf.count(a) == 0 {
                return a;
            }
        }
        let mut best = 0usize;
        let mut best_ucb = self.conf.ucb(0).unwrap();
        let mut best_mean = self.conf.mean(0).unwrap();
        for a in 1..self.k {
            let ucb = self.conf.ucb(a).unwrap();
            let mean = self.conf.mean(a).unwrap();
            if ucb > best_ucb || (ucb == best_ucb && mean > best_mean) {
                best = a;
                best_ucb = ucb;
                best_mean = mean;
            }
        }
        best
    }

    fn record(&mut self, outcome: &Outcome) {
        self.conf
            .observe(outcome.action, rescale(outcome.payoff_u(self.theta)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{ActionSet, Mechanism, TypeSpace};

    fn ctx(ts: &TypeSpace, k: usize, horizon: u64) -> LearnerCtx<'_> {
        LearnerCtx {
            theta: AgentType::new(0.3).unwrap(),
            horizon,
            actions: ActionSet::new(k).unwrap(),
            types: ts,
            seed: 7,
        }
    }

    #[test]
    fn cold_start_in_index_order() {
        let ts = TypeSpace::new(&[0.3]).unwrap();
        let c = ctx(&ts, 3, 100);
        let mut u = Ucb::new(&c);
        let m = Mechanism::null(c.actions);
        for want in 0..3usize {
            let a = u.choose(want as u64 + 1);
            assert_eq!(a, want);
            u.record(&Outcome::realize(&m, a).unwrap());
        }
    }

    #[test]
    fn equal_counts_tie_break_on_mean_then_index() {
        let ts = TypeSpace::new(&[0.3]).unwrap();
        let c = ctx(&ts, 3, 100);
        let mut u = Ucb::new(&c);
        // Cold-start rewards: arm0 0.6, arm1 0.4, arm2 0.5 (rescaled scale).
        u.record(&Outcome {
            action: 0,
            got: true,
            paid: 0.2,
        }); // u = 0.1 → r = 0.6
        u.record(&Outcome {
            action: 1,
            got: false,
            paid: 0.1,
        }); // u = −0.1 → r = 0.4
        u.record(&Outcome {
            action: 2,
            got: true,
            paid: 0.3,
        }); // u = 0.0 → r = 0.5
        assert_eq!(u.choose(4), 0);
    }

    #[test]
    fn descending_replay_after_zero_stretch() {
        // After a cold start with distinct rewards followed by all-zero
        // mechanisms, the second pass visits arms in descending order of
        // cold-start performance, with 0.5-reward ties won by lower index.
        let ts = TypeSpace::new(&[0.3]).unwrap();
        let c = ctx(&ts, 5, 100_000);
        let mut u = Ucb::new(&c);
        // cold-start rewards by arm: a0 0.5, a1 0.75, a2 0.65, a3 0.55, a4 0.5
        for (a, paid, got) in [
            (0usize, 0.0, false),
            (1, 0.05, true),
            (2, 0.15, true),
            (3, 0.25, true),
            (4, 0.0, false),
        ] {
            let chosen = u.choose(a as u64 + 1);
            assert_eq!(chosen, a);
            u.record(&Outcome {
                action: a,
                got,
                paid,
            });
        }
        let mut replay = Vec::new();
        let null = Mechanism::null(c.actions);
        for t in 6..=10u64 {
            let a = u.choose(t);
            replay.push(a);
            u.record(&Outcome::realize(&null, a).unwrap());
        }
        assert_eq!(replay, vec![1, 2, 3, 0, 4]);
    }
}
