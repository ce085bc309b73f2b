//! Best responses to the protected-exploitation learners.
//!
//! Both strategies post a belief-optimal price during the learner's
//! exploration. Because the learner resolves exact payoff ties toward
//! opting out, the posted price is shaved by a tie margin `κ` (at most
//! 1e-3, and at most half the gap to the next lower type) so the boundary
//! type whose valuation equals the optimal price strictly prefers to
//! trade. The largest undetectable post-exploration drift
//! `ρ̄_{T1} + Δ*` with `Δ* = sqrt(2 ln T/(T − K·T1))` is available behind
//! the `drift` switch; it squeezes more revenue but moves both players'
//! payoffs off the equilibrium values by more than the shave.

use std::sync::Arc;

use super::EnvContext;
use crate::error::ArenaError;
use crate::game::{AgentType, Mechanism, Prior, TypeSpace};
use crate::learners::{codeword_len, LearnerSpec};
use crate::protocol::{Environment, PhaseTag};
use crate::stats::{monopoly_price, sup_argmax, StatsError};

/// Solution of the one-shot reduced game played through prices and a type
/// signal: the environment posts `p`, learns the type, and then either
/// holds `p` (type at or above it) or retreats to `eps_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedGame {
    /// The objective-maximizing posted price (sup tie-break over Θ).
    pub price: AgentType,
    /// Environment value `p·Pr(θ ≥ p) + eps_p·Pr(θ < p)`.
    pub env_value: f64,
    /// Per-type learner values: `θ − p` when `θ ≥ p`, else `θ − eps_p`.
    pub learner_values: Vec<f64>,
}

/// Enumerates the reduced-game objective over the type space.
pub fn reduced_game_solve(
    pi: &Prior,
    types: &TypeSpace,
    eps_p: f64,
) -> Result<ReducedGame, StatsError> {
    if eps_p <= 0.0 {
        return Err(StatsError::BadArgument(format!(
            "low-type price must be positive, got {eps_p}"
        )));
    }
    let objectives: Vec<f64> = types
        .values()
        .iter()
        .map(|t| {
            let p = t.value();
            let high_mass: f64 = types
                .values()
                .iter()
                .enumerate()
                .filter(|(_, u)| u.value() >= p)
                .map(|(j, _)| pi.weight(j))
                .sum();
            p * high_mass + eps_p * (1.0 - high_mass)
        })
        .collect();
    let best_idx = sup_argmax(&objectives);
    let best_val = objectives[best_idx];
    let p_star = types.get(best_idx).value();
    let learner_values = types
        .values()
        .iter()
        .map(|t| {
            if t.value() >= p_star {
                t.value() - p_star
            } else {
                t.value() - eps_p
            }
        })
        .collect();
    Ok(ReducedGame {
        price: types.get(best_idx),
        env_value: best_val,
        learner_values,
    })
}

/// Tie margin: strictly below 1e-3 never re-ranks any other type because
/// it also stays below half the gap to the next lower type.
fn tie_margin(p_star: f64, types: &TypeSpace) -> f64 {
    let mut margin: f64 = 1e-3;
    for t in types.values() {
        if t.value() < p_star {
            margin = margin.min((p_star - t.value()) / 2.0);
        }
    }
    margin.min(p_star)
}

fn resolved_exploration_len(
    learner: &LearnerSpec,
    ctx: &EnvContext<'_>,
) -> Result<(u64, u64), ArenaError> {
    let t1 = learner
        .resolved_t1(ctx.horizon)
        .ok_or_else(|| ArenaError::Config("learner has no exploration budget".into()))?;
    Ok((t1, t1 * ctx.actions.count() as u64))
}

// ---------------------------------------------------------------------------
// Best response to EEP
// ---------------------------------------------------------------------------

/// Monopoly price (κ-shaved) during exploration and ever after; optional
/// maximal undetectable drift once exploration ends.
pub struct EepBestResponse {
    explore_end: u64,
    explore_mech: Arc<Mechanism>,
    exploit_mech: Arc<Mechanism>,
    t: u64,
}

impl EepBestResponse {
    /// Rejects any learner descriptor other than the protected-exploitation
    /// learner: this strategy is a best response to it specifically.
    pub fn new(drift: bool, ctx: &EnvContext<'_>) -> Result<Self, ArenaError> {
        if !matches!(ctx.learner, LearnerSpec::Eep { .. }) {
            return Err(ArenaError::Config(format!(
                "eepbr is a best response to eep, not to `{}`",
                ctx.learner
            )));
        }
        if !ctx.prior.full_support() {
            return Err(ArenaError::Config(
                "adaptive environments need a full-support belief".into(),
            ));
        }
        let (t1, explore_end) = resolved_exploration_len(ctx.learner, ctx)?;
        let p_star = monopoly_price(ctx.prior, ctx.types)?.value();
        let base = (p_star - tie_margin(p_star, ctx.types)).max(0.0);
        let exploit_price = if drift && ctx.horizon > explore_end {
            let two_ln_t = 2.0 * (ctx.horizon.max(2) as f64).ln();
            let rho1 = (two_ln_t / t1 as f64).sqrt();
            let dstar = (two_ln_t / (ctx.horizon - explore_end) as f64).sqrt();
            (base + rho1 + dstar).min(0.5)
        } else {
            base
        };
        Ok(Self {
            explore_end,
            explore_mech: Arc::new(Mechanism::posted_price(ctx.actions, base)?),
            exploit_mech: Arc::new(Mechanism::posted_price(ctx.actions, exploit_price)?),
            t: 0,
        })
    }
}

/// Largest post-exploration price drift the tripwires cannot catch within
/// the horizon: `Δ* = sqrt(2 ln T / (T − K·T1))`.
pub fn optimal_drift(horizon: u64, exploration_len: u64) -> Result<f64, StatsError> {
    if horizon < 2 || exploration_len >= horizon {
        return Err(StatsError::BadArgument(
            "drift needs a nonempty post-exploration stretch".into(),
        ));
    }
    Ok((2.0 * (horizon as f64).ln() / (horizon - exploration_len) as f64).sqrt())
}

impl Environment for EepBestResponse {
    fn post(&mut self, t: u64) -> Arc<Mechanism> {
        self.t = t;
        if t <= self.explore_end {
            Arc::clone(&self.explore_mech)
        } else {
            Arc::clone(&self.exploit_mech)
        }
    }

    fn observe(&mut self, _action: usize) {}

    fn phase(&self) -> PhaseTag {
        if self.t <= self.explore_end {
            PhaseTag::Explore
        } else {
            PhaseTag::Exploit
        }
    }
}

// ---------------------------------------------------------------------------
// Best response to ESEP
// ---------------------------------------------------------------------------

enum EsepBrStage {
    Explore,
    Listen,
    Committed,
}

/// Reduced-game price (κ-shaved) during exploration and signaling, then
/// either that price or `eps_p` depending on the decoded type.
pub struct EsepBestResponse {
    explore_end: u64,
    signal_end: u64,
    p_star: f64,
    base_mech: Arc<Mechanism>,
    low_mech: Arc<Mechanism>,
    committed_mech: Option<Arc<Mechanism>>,
    digits: Vec<usize>,
    observed: u64,
    alphabet: usize,
    type_count: usize,
    types: TypeSpace,
    stage: EsepBrStage,
}

impl EsepBestResponse {
    /// Rejects non-signaling learner descriptors and nonpositive `eps_p`.
    pub fn new(eps_p: f64, ctx: &EnvContext<'_>) -> Result<Self, ArenaError> {
        if !matches!(ctx.learner, LearnerSpec::Esep { .. }) {
            return Err(ArenaError::Config(format!(
                "esepbr is a best response to esep, not to `{}`",
                ctx.learner
            )));
        }
        if !ctx.prior.full_support() {
            return Err(ArenaError::Config(
                "adaptive environments need a full-support belief".into(),
            ));
        }
        let solution = reduced_game_solve(ctx.prior, ctx.types, eps_p)?;
        let (_t1, explore_end) = resolved_exploration_len(ctx.learner, ctx)?;
        let signal_len = codeword_len(ctx.actions, ctx.types.len()) as u64;
        let p_star = solution.price.value();
        let base = (p_star - tie_margin(p_star, ctx.types)).max(0.0);
        Ok(Self {
            explore_end,
            signal_end: explore_end + signal_len,
            p_star,
            base_mech: Arc::new(Mechanism::posted_price(ctx.actions, base)?),
            low_mech: Arc::new(Mechanism::posted_price(ctx.actions, eps_p)?),
            committed_mech: None,
            digits: Vec::with_capacity(signal_len as usize),
            observed: 0,
            alphabet: ctx.actions.count(),
            type_count: ctx.types.len(),
            types: ctx.types.clone(),
            stage: EsepBrStage::Explore,
        })
    }

    fn decode_and_commit(&mut self) {
        let mut idx = 0usize;
        for &d in &self.digits {
            idx = idx * self.alphabet + d.min(self.alphabet - 1);
        }
        let idx = idx.min(self.type_count - 1);
        let theta_tilde = self.types.get(idx).value();
        let mech = if theta_tilde >= self.p_star {
            Arc::clone(&self.base_mech)
        } else {
            Arc::clone(&self.low_mech)
        };
        self.committed_mech = Some(mech);
        self.stage = EsepBrStage::Committed;
    }
}

impl Environment for EsepBestResponse {
    fn post(&mut self, _t: u64) -> Arc<Mechanism> {
        match self.stage {
            EsepBrStage::Explore | EsepBrStage::Listen => Arc::clone(&self.base_mech),
            EsepBrStage::Committed => Arc::clone(self.committed_mech.as_ref().unwrap()),
        }
    }

    fn observe(&mut self, action: usize) {
        self.observed += 1;
        match self.stage {
            EsepBrStage::Explore => {
                if self.observed == self.explore_end {
                    if self.signal_end == self.explore_end {
                        self.decode_and_commit();
                    } else {
                        self.stage = EsepBrStage::Listen;
                    }
                }
            }
            EsepBrStage::Listen => {
                self.digits.push(action);
                if self.observed == self.signal_end {
                    self.decode_and_commit();
                }
            }
            EsepBrStage::Committed => {}
        }
    }

    fn phase(&self) -> PhaseTag {
        match self.stage {
            EsepBrStage::Explore => PhaseTag::Explore,
            EsepBrStage::Listen => PhaseTag::Signal,
            EsepBrStage::Committed => PhaseTag::Exploit,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::ActionSet;
    use crate::stats::posted_revenue;

    fn fixture<'a>(
        types: &'a TypeSpace,
        prior: &'a Prior,
        learner: &'a LearnerSpec,
        horizon: u64,
    ) -> EnvContext<'a> {
        EnvContext {
            horizon,
            actions: ActionSet::new(2).unwrap(),
            types,
            prior,
            learner,
            seed: 1,
        }
    }

    #[test]
    fn reduced_game_examples() {
        let types = TypeSpace::new(&[0.1, 0.3]).unwrap();
        let pi = Prior::uniform(&types);
        let g = reduced_game_solve(&pi, &types, 0.01).unwrap();
        assert_eq!(g.price.value(), 0.3);
        assert!((g.env_value - 0.155).abs() < 1e-12);
        assert!((g.learner_values[0] - 0.09).abs() < 1e-12);
        assert!(g.learner_values[1].abs() < 1e-12);

        let point = TypeSpace::new(&[0.2]).unwrap();
        let g = reduced_game_solve(&Prior::uniform(&point), &point, 0.01).unwrap();
        assert_eq!(g.price.value(), 0.2);
        assert!((g.env_value - 0.2).abs() < 1e-12);
        assert!(g.learner_values[0].abs() < 1e-12);

        assert!(reduced_game_solve(&pi, &types, 0.0).is_err());
        assert!(reduced_game_solve(&pi, &types, -0.1).is_err());
    }

    #[test]
    fn reduced_game_trade_always_happens_in_the_small_eps_limit() {
        // Total surplus per type equals θ exactly: env + learner = θ.
        let types = TypeSpace::new(&[0.05, 0.15, 0.4]).unwrap();
        let pi = Prior::uniform(&types);
        let g = reduced_game_solve(&pi, &types, 1e-9).unwrap();
        let p = g.price.value();
        for (i, t) in types.values().iter().enumerate() {
            let env = if t.value() >= p { p } else { 1e-9 };
            assert!((g.learner_values[i] + env - t.value()).abs() < 1e-12);
        }
        // and the objective tends to the monopoly revenue
        let mono = posted_revenue(
            monopoly_price(&pi, &types).unwrap().value(),
            &pi,
            &types,
        );
        assert!((g.env_value - mono).abs() < 1e-6);
    }

    #[test]
    fn eepbr_prices_and_phase_boundary() {
        let types = TypeSpace::new(&[0.1, 0.3]).unwrap();
        let prior = Prior::uniform(&types);
        let eep = LearnerSpec::parse("eep:100").unwrap();
        let ctx = fixture(&types, &prior, &eep, 10_000);
        let mut env = EepBestResponse::new(false, &ctx).unwrap();
        // monopoly price 0.3 shaved by 1e-3
        let m = env.post(1);
        assert!((m.pay(1) - 0.299).abs() < 1e-12);
        assert_eq!(env.phase(), PhaseTag::Explore);
        let m = env.post(201);
        assert!((m.pay(1) - 0.299).abs() < 1e-12, "no drift by default");
        assert_eq!(env.phase(), PhaseTag::Exploit);

        // wrong learner descriptor is rejected
        let ucb = LearnerSpec::parse("ucb").unwrap();
        let bad = fixture(&types, &prior, &ucb, 10_000);
        assert!(EepBestResponse::new(false, &bad).is_err());
    }

    #[test]
    fn eepbr_drift_formula() {
        // Δ* at T = 10⁶, K = 2, T1 = auto: sqrt(2 ln T/(T − 2·T1)) ≈ 0.005388.
        let d = optimal_drift(1_000_000, 2 * 23_995).unwrap();
        assert!((d - 0.005388).abs() < 1e-5);
        assert!(optimal_drift(100, 100).is_err());

        let types = TypeSpace::new(&[0.1, 0.3]).unwrap();
        let prior = Prior::uniform(&types);
        let eep = LearnerSpec::parse("eep").unwrap();
        let ctx = fixture(&types, &prior, &eep, 1_000_000);
        let mut env = EepBestResponse::new(true, &ctx).unwrap();
        let t1 = eep.resolved_t1(1_000_000).unwrap();
        assert_eq!(t1, 23_995);
        let rho1 = (2.0 * (1e6f64).ln() / t1 as f64).sqrt();
        let m = env.post(2 * t1 + 1);
        assert!((m.pay(1) - (0.299 + rho1 + d)).abs() < 1e-9);
    }

    #[test]
    fn esepbr_commits_by_decoded_type() {
        let types = TypeSpace::new(&[0.1, 0.3]).unwrap();
        let prior = Prior::uniform(&types);
        let spec = LearnerSpec::Esep {
            t1: Some(10),
            abar: 1,
            eps_p: None,
        };
        let ctx = fixture(&types, &prior, &spec, 10_000);

        // low-type signal (digit 0) → price drops to eps_p
        let mut env = EsepBestResponse::new(0.01, &ctx).unwrap();
        for t in 1..=20u64 {
            assert!((env.post(t).pay(1) - 0.299).abs() < 1e-12);
            env.observe(((t - 1) % 2) as usize);
        }
        assert_eq!(env.phase(), PhaseTag::Signal);
        env.post(21);
        env.observe(0);
        assert!((env.post(22).pay(1) - 0.01).abs() < 1e-12);

        // high-type signal (digit 1) → price held
        let mut env = EsepBestResponse::new(0.01, &ctx).unwrap();
        for t in 1..=20u64 {
            env.post(t);
            env.observe(((t - 1) % 2) as usize);
        }
        env.post(21);
        env.observe(1);
        assert!((env.post(22).pay(1) - 0.299).abs() < 1e-12);

        // eps_p must be positive; descriptor must be the signaling learner
        assert!(EsepBestResponse::new(0.0, &ctx).is_err());
        let ue = LearnerSpec::parse("ue").unwrap();
        let bad = fixture(&types, &prior, &ue, 10_000);
        assert!(EsepBestResponse::new(0.01, &bad).is_err());
    }
}
