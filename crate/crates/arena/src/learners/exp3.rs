//! Exponential weights under bandit feedback.
//!
//! Weights live in log space. After playing `a` with probability `q` and
//! seeing rescaled reward `r ∈ [0, 1]`, the played arm's log-weight gains
//! `η·(1 − (1 − r)/q)` and every other arm's gains `η`. The common `η`
//! baseline keeps the implicit reward estimator unbiased (`E[r̂(a)] = E[r(a)]`
//! for all arms) while only the played arm carries the importance-weighted
//! correction.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{rescale, LearnerCtx};
use crate::error::ArenaError;
use crate::game::{AgentType, Outcome};
use crate::protocol::Learner;

/// Exponential-weights learner.
pub struct Exp3 {
    theta: AgentType,
    eta: f64,
    log_w: Vec<f64>,
    rng: ChaCha8Rng,
    pending_q: f64,
}

impl Exp3 {
    /// `eta = None` picks `sqrt(ln K / (T·K))`.
    pub fn new(ctx: &LearnerCtx<'_>, eta: Option<f64>) -> Result<Self, ArenaError> {
        let k = ctx.actions.count();
        let eta = match eta {
            Some(e) if e > 0.0 => e,
            Some(e) => {
                return Err(ArenaError::Config(format!(
                    "exp3 rate must be positive, got {e}"
                )))
            }
            None => ((k as f64).ln() / (ctx.horizon.max(1) as f64 * k as f64)).sqrt(),
        };
        Ok(Self {
            theta: ctx.theta,
            eta,
            log_w: vec![(1.0 / k as f64).ln(); k],
            rng: ChaCha8Rng::seed_from_u64(ctx.seed),
            pending_q: 1.0,
        })
    }

    /// Current sampling distribution.
    pub fn distribution(&self) -> Vec<f64> {
        let max = self.log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut q: Vec<f64> = self.log_w.iter().map(|w| (w - max).exp()).collect();
        let sum: f64 = q.iter().sum();
        for v in &mut q {
            *v /= sum;
        }
        q
    }

    /// Learning rate in use.
    pub fn eta(&self) -> f64 {
        self.eta
    }
}

impl Learner for Exp3 {
    fn choose(&mut self, _t: u64) -> usize {
        let q = self.distribution();
        let u: f64 = self.rng.gen();
        let mut acc = 0.0;
        let mut chosen = q.len() - 1;
        for (a, p) in q.iter().enumerate() {
            acc += p;
            if u < acc {
                chosen = a;
                break;
            }
        }
        self.pending_q = q[chosen];
        chosen
    }

    fn record(&mut self, outcome: &Outcome) {
        let r = rescale(outcome.payoff_u(self.theta));
        let a = outcome.action;
        for (i, w) in self.log_w.iter_mut().enumerate() {
            if i == a {
                *w += self.eta * (1.0 - (1.0 - r) / self.pending_q);
            } else {
                *w += self.eta;
            }
        }
        // Keep log-weights bounded; shifting all of them leaves q unchanged.
        let max = self.log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max > 200.0 || max < -200.0 {
            for w in &mut self.log_w {
                *w -= max;
            }
        }
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
            seed: 42,
        }
    }

    #[test]
    fn initial_distribution_is_uniform() {
        let ts = TypeSpace::new(&[0.3]).unwrap();
        let e = Exp3::new(&ctx(&ts, 2, 100), None).unwrap();
        let q = e.distribution();
        assert!((q[0] - 0.5).abs() < 1e-15);
        assert!((q[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn auto_rate_formula() {
        let ts = TypeSpace::new(&[0.3]).unwrap();
        let e = Exp3::new(&ctx(&ts, 2, 10_000), None).unwrap();
        let want = (2f64.ln() / 20_000.0).sqrt();
        assert!((e.eta() - want).abs() < 1e-15);
        assert!(Exp3::new(&ctx(&ts, 2, 100), Some(0.0)).is_err());
        assert!(Exp3::new(&ctx(&ts, 2, 100), Some(-0.1)).is_err());
    }

    #[test]
    fn played_arm_multiplier_matches_update_rule() {
        // q = 0.5, rescaled reward 1 → played multiplier exp(η(1 − 0)) = e^η;
        // q = 0.5, rescaled reward 0 → exp(η(1 − 2)) = e^{−η}.
        let ts = TypeSpace::new(&[0.3]).unwrap();
        let c = ctx(&ts, 2, 100);
        let eta = 0.1;
        let mut e = Exp3::new(&c, Some(eta)).unwrap();
        let before = e.log_w.clone();
        // force the pending probability and feed a synthetic outcome
        e.pending_q = 0.5;
        let outcome = Outcome {
            action: 0,
            got: true,
            paid: 0.1,
        }; // u = 0.2, r = 0.7
        e.record(&outcome);
        let played_gain = e.log_w[0] - before[0];
        let other_gain = e.log_w[1] - before[1];
        let r: f64 = 0.7;
        assert!((played_gain - eta * (1.0 - (1.0 - r) / 0.5)).abs() < 1e-12);
        assert!((other_gain - eta).abs() < 1e-12);
        // With r = 1 the played gain would be exactly η (multiplier e^{0.1});
        // with r = 0 it would be −η (multiplier e^{−0.1}).
        assert!((eta * (1.0 - (1.0 - 1.0) / 0.5) - eta).abs() < 1e-15);
        assert!((eta * (1.0 - (1.0 - 0.0) / 0.5) + eta).abs() < 1e-15);
    }

    #[test]
    fn weights_stay_positive_and_normalized() {
        let ts = TypeSpace::new(&[0.3]).unwrap();
        let c = ctx(&ts, 3, 1000);
        let mut e = Exp3::new(&c, None).unwrap();
        let cheap = Mechanism::posted_price(c.actions, 0.1).unwrap();
        for t in 1..=1000u64 {
            let a = e.choose(t);
            e.record(&Outcome::realize(&cheap, a).unwrap());
            let q = e.distribution();
            let sum: f64 = q.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(q.iter().all(|p| *p > 0.0));
        }
    }

    #[test]
    fn converges_to_the_better_arm() {
        let ts = TypeSpace::new(&[0.3]).unwrap();
        let c = ctx(&ts, 2, 20_000);
        let mut e = Exp3::new(&c, None).unwrap();
        let m = Mechanism::posted_price(c.actions, 0.1).unwrap(); // trade earns 0.2
        let mut last_half = 0u64;
        for t in 1..=20_000u64 {
            let a = e.choose(t);
            if t > 10_000 && a == 1 {
                last_half += 1;
            }
            e.record(&Outcome::realize(&m, a).unwrap());
        }
        assert!(last_half > 7_000, "played trade arm {last_half}/10000");
    }
}
