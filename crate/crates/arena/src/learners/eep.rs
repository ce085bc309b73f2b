//! Protected exploitation learners.
//!
//! Both algorithms explore round-robin for `K·T1` periods, pick the action
//! with the highest Phase-1 empirical payoff (ties go to the opt-out arm),
//! and then exploit it while watching two tripwires built from fresh
//! Phase-2 sample means of the allocation and the payment:
//!
//! - allocation worsened: `x̄₂(s) + ρ̄_s < LCB¹_x`,
//! - payment worsened: `p̄₂(s) − ρ̄_s > UCB¹_p`,
//!
//! where `LCB¹_x` / `UCB¹_p` are the Phase-1 bounds for the chosen arm and
//! `ρ̄_s = sqrt(2 ln T / s)`. Tripping either sends the learner to permanent
//! opt-out. Unlike the rescaled-reward algorithms, these track raw
//! allocation and payment samples.
//!
//! The signaling variant spends `⌈log_K |Θ|⌉` periods after exploration
//! spelling the type index in base K, and when exploration recommended
//! opting out (`a* = a0`) it instead trades via a pre-specified fallback
//! arm, protected by absolute tripwires: allocation UCB below 1, or payment
//! LCB above the acceptance threshold `ε_p`.

use super::{auto_t1, encode_type, LearnerCtx};
use crate::error::ArenaError;
use crate::game::{AgentType, Outcome};
use crate::protocol::{Learner, PhaseTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Explore,
    Signal,
    Exploit,
    Punish,
}

/// Shared core: Phase-1 accumulation, winner selection, Phase-2 tripwires.
struct ProtectedCore {
    theta: AgentType,
    k: usize,
    t1: u64,
    two_ln_t: f64,
    seen: u64,
    sum_u: Vec<f64>,
    sum_x: Vec<f64>,
    sum_p: Vec<f64>,
    astar: usize,
    lcb1_x: f64,
    ucb1_p: f64,
    pbar: f64,
    s: u64,
    sum_x2: f64,
    sum_p2: f64,
}

impl ProtectedCore {
    fn new(ctx: &LearnerCtx<'_>, t1: Option<u64>) -> Result<Self, ArenaError> {
        let k = ctx.actions.count();
        let t1 = match t1 {
            Some(v) if v == 0 => {
                return Err(ArenaError::Config(
                    "exploration budget must be at least 1".into(),
                ))
            }
            Some(v) => v,
            None => auto_t1(ctx.horizon),
        };
        if t1.saturating_mul(k as u64) > ctx.horizon {
            return Err(ArenaError::Config(format!(
                "exploration needs K·T1 = {} periods but the horizon is {}",
                t1 * k as u64,
                ctx.horizon
            )));
        }
        Ok(Self {
            theta: ctx.theta,
            k,
            t1,
            two_ln_t: 2.0 * (ctx.horizon.max(2) as f64).ln(),
            seen: 0,
            sum_u: vec![0.0; k],
            sum_x: vec![0.0; k],
            sum_p: vec![0.0; k],
            astar: 0,
            lcb1_x: 0.0,
            ucb1_p: 0.0,
            pbar: 0.0,
            s: 0,
            sum_x2: 0.0,
            sum_p2: 0.0,
        })
    }

    fn explore_len(&self) -> u64 {
        self.t1 * self.k as u64
    }

    fn explore_action(&self) -> usize {
        (self.seen % self.k as u64) as usize
    }

    fn rho(&self, s: u64) -> f64 {
        (self.two_ln_t / s as f64).sqrt()
    }

    fn record_exploration(&mut self, outcome: &Outcome) {
        let a = outcome.action;
        let x = if outcome.got { 1.0 } else { 0.0 };
        self.sum_u[a] += outcome.payoff_u(self.theta);
        self.sum_x[a] += x;
        self.sum_p[a] += outcome.paid;
        self.seen += 1;
    }

    /// Winner and Phase-1 bounds; ties break to the lowest index.
    fn finalize_exploration(&mut self) {
        let mut best = 0usize;
        for a in 1..self.k {
            if self.sum_u[a] > self.sum_u[best] {
                best = a;
            }
        }
        self.astar = best;
        let t1 = self.t1 as f64;
        let rho = self.rho(self.t1);
        self.lcb1_x = self.sum_x[best] / t1 - rho;
        self.ucb1_p = self.sum_p[best] / t1 + rho;
        self.pbar = self.sum_p[best] / t1;
    }

    /// Feeds one exploitation sample; true when a tripwire fired.
    fn record_exploitation(&mut self, outcome: &Outcome) -> bool {
        self.s += 1;
        self.sum_x2 += if outcome.got { 1.0 } else { 0.0 };
        self.sum_p2 += outcome.paid;
        let s = self.s as f64;
        let rho = self.rho(self.s);
        let ucb2_x = self.sum_x2 / s + rho;
        let lcb2_p = self.sum_p2 / s - rho;
        ucb2_x < self.lcb1_x || lcb2_p > self.ucb1_p
    }

    /// Absolute-threshold variant for fallback trading.
    fn record_exploitation_absolute(&mut self, outcome: &Outcome, eps_p: f64) -> bool {
        self.s += 1;
        self.sum_x2 += if outcome.got { 1.0 } else { 0.0 };
        self.sum_p2 += outcome.paid;
        let s = self.s as f64;
        let rho = self.rho(self.s);
        let ucb2_x = self.sum_x2 / s + rho;
        let lcb2_p = self.sum_p2 / s - rho;
        ucb2_x < 1.0 || lcb2_p > eps_p
    }
}

/// Explore, exploit behind confidence tripwires, punish by opting out.
pub struct Eep {
    core: ProtectedCore,
    stage: Stage,
}

impl Eep {
    /// `t1 = None` → the auto budget; `K·T1 > T` is a configuration error.
    pub fn new(ctx: &LearnerCtx<'_>, t1: Option<u64>) -> Result<Self, ArenaError> {
        Ok(Self {
            core: ProtectedCore::new(ctx, t1)?,
            stage: Stage::Explore,
        })
    }

    /// Exploration budget per arm.
    pub fn t1(&self) -> u64 {
        self.core.t1
    }

    /// The exploitation arm, once exploration finished.
    pub fn chosen(&self) -> Option<usize> {
        if self.stage == Stage::Explore {
            None
        } else {
            Some(self.core.astar)
        }
    }
}

impl Learner for Eep {
    fn choose(&mut self, _t: u64) -> usize {
        match self.stage {
            Stage::Explore => self.core.explore_action(),
            Stage::Exploit => self.core.astar,
            _ => 0,
        }
    }

    fn record(&mut self, outcome: &Outcome) {
        match self.stage {
            Stage::Explore => {
                self.core.record_exploration(outcome);
                if self.core.seen == self.core.explore_len() {
                    self.core.finalize_exploration();
                    self.stage = Stage::Exploit;
                }
            }
            Stage::Exploit => {
                if self.core.record_exploitation(outcome) {
                    self.stage = Stage::Punish;
                }
            }
            _ => {}
        }
    }

    fn phase(&self) -> PhaseTag {
        match self.stage {
            Stage::Explore => PhaseTag::Explore,
            Stage::Signal => PhaseTag::Signal,
            Stage::Exploit => PhaseTag::Exploit,
            Stage::Punish => PhaseTag::Punish,
        }
    }
}

/// EEP with a type-signaling phase and a fallback trade arm.
pub struct Esep {
    core: ProtectedCore,
    stage: Stage,
    codeword: Vec<usize>,
    sig_pos: usize,
    abar: usize,
    /// `None` when θ = 0: no profitable trade exists, so an opt-out
    /// recommendation is terminal.
    eps_p: Option<f64>,
}

impl Esep {
    /// `abar` must be a non-opt-out action; an explicit `eps_p` must lie in
    /// `(0, θ)` when θ > 0 and is ignored when θ = 0.
    pub fn new(
        ctx: &LearnerCtx<'_>,
        t1: Option<u64>,
        abar: usize,
        eps_p: Option<f64>,
    ) -> Result<Self, ArenaError> {
        ctx.actions.check(abar)?;
        if abar == ctx.actions.opt_out() {
            return Err(ArenaError::Config(
                "fallback trade action must differ from the opt-out action".into(),
            ));
        }
        let theta = ctx.theta.value();
        let eps_p = if theta == 0.0 {
            None
        } else {
            let resolved = match eps_p {
                Some(e) => {
                    if !(e > 0.0 && e < theta) {
                        return Err(ArenaError::Config(format!(
                            "price threshold must lie in (0, {theta}), got {e}"
                        )));
                    }
                    e
                }
                None => (theta / 2.0).min(0.01),
            };
            Some(resolved)
        };
        let codeword = encode_type(ctx.theta, ctx.types, ctx.actions)?;
        Ok(Self {
            core: ProtectedCore::new(ctx, t1)?,
            stage: Stage::Explore,
            codeword,
            sig_pos: 0,
            abar,
            eps_p,
        })
    }

    /// Exploration budget per arm.
    pub fn t1(&self) -> u64 {
        self.core.t1
    }

    /// Phase-1 payment mean of the chosen arm.
    pub fn phase1_payment(&self) -> f64 {
        self.core.pbar
    }

    fn enter_post_signal(&mut self) {
        self.stage = Stage::Exploit;
    }
}

impl Learner for Esep {
    fn choose(&mut self, _t: u64) -> usize {
        match self.stage {
            Stage::Explore => self.core.explore_action(),
            Stage::Signal => self.codeword[self.sig_pos],
            Stage::Exploit => {
                if self.core.astar != 0 {
                    self.core.astar
                } else if self.eps_p.is_some() {
                    self.abar
                } else {
                    0 // θ = 0: opting out is terminal
                }
            }
            Stage::Punish => 0,
        }
    }

    fn record(&mut self, outcome: &Outcome) {
        match self.stage {
            Stage::Explore => {
                self.core.record_exploration(outcome);
                if self.core.seen == self.core.explore_len() {
                    self.core.finalize_exploration();
                    if self.codeword.is_empty() {
                        self.enter_post_signal();
                    } else {
                        self.stage = Stage::Signal;
                    }
                }
            }
            Stage::Signal => {
                self.sig_pos += 1;
                if self.sig_pos == self.codeword.len() {
                    self.enter_post_signal();
                }
            }
            Stage::Exploit => {
                let tripped = if self.core.astar != 0 {
                    self.core.record_exploitation(outcome)
                } else if let Some(eps_p) = self.eps_p {
                    self.core.record_exploitation_absolute(outcome, eps_p)
                } else {
                    false
                };
                if tripped {
                    self.stage = Stage::Punish;
                }
            }
            Stage::Punish => {}
        }
    }

    fn phase(&self) -> PhaseTag {
        match self.stage {
            Stage::Explore => PhaseTag::Explore,
            Stage::Signal => PhaseTag::Signal,
            Stage::Exploit => PhaseTag::Exploit,
            Stage::Punish => PhaseTag::Punish,
        }
    }
}
