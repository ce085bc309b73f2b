//! A seeded family of adaptive price-raising environments, used to probe
//! whether any of them can extract near-full surplus from a protected
//! learner uniformly across types.
//!
//! Each family member posts a random type-space price during the learner's
//! exploration, then applies one to three random upward price jumps at
//! random later periods (capped at the payment bound). Members are
//! deterministic given their fuzz seed.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{EnvContext, EnvFactory};
use crate::error::ArenaError;
use crate::game::{ActionSet, Mechanism, StationaryStrategy};
use crate::protocol::{Environment, PhaseTag};

/// Factory for one member of the price-raising family.
#[derive(Debug, Clone, Copy)]
pub struct PriceRaisingFuzz {
    /// Identity of the family member; fixes the price path.
    pub fuzz_seed: u64,
}

impl EnvFactory for PriceRaisingFuzz {
    fn label(&self) -> String {
        format!("fuzzraise:{}", self.fuzz_seed)
    }

    fn build_env(&self, ctx: &EnvContext<'_>) -> Result<Box<dyn Environment>, ArenaError> {
        let explore_len = ctx
            .learner
            .resolved_t1(ctx.horizon)
            .map(|t1| t1 * ctx.actions.count() as u64)
            .unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(self.fuzz_seed);
        let base = ctx.types.get(rng.gen_range(0..ctx.types.len())).value();
        let mut steps = vec![(0u64, price_mech(ctx.actions, base)?)];
        let jumps = rng.gen_range(1..=3usize);
        let mut jump_times: Vec<u64> = (0..jumps)
            .map(|_| rng.gen_range(explore_len + 1..=ctx.horizon.max(explore_len + 2)))
            .collect();
        jump_times.sort_unstable();
        let mut price = base;
        for from in jump_times {
            price = (price + rng.gen_range(0.01..0.15)).min(0.5);
            steps.push((from, price_mech(ctx.actions, price)?));
        }
        Ok(Box::new(PiecewisePriceEnv {
            steps,
            idx: 0,
            explore_len,
        }))
    }
}

fn price_mech(actions: ActionSet, p: f64) -> Result<Arc<Mechanism>, ArenaError> {
    Ok(Arc::new(Mechanism::posted_price(actions, p)?))
}

/// Posts a piecewise-constant price path.
struct PiecewisePriceEnv {
    /// `(first_period, mechanism)` pairs, ascending by period.
    steps: Vec<(u64, Arc<Mechanism>)>,
    idx: usize,
    explore_len: u64,
}

impl Environment for PiecewisePriceEnv {
    fn post(&mut self, t: u64) -> Arc<Mechanism> {
        while self.idx + 1 < self.steps.len() && self.steps[self.idx + 1].0 <= t {
            self.idx += 1;
        }
        Arc::clone(&self.steps[self.idx].1)
    }

    fn observe(&mut self, _action: usize) {}

    fn phase(&self) -> PhaseTag {
        if self.steps[self.idx].0 <= self.explore_len {
            PhaseTag::Explore
        } else {
            PhaseTag::Exploit
        }
    }
}

/// The family never admits a stationary benchmark.
impl PriceRaisingFuzz {
    /// Convenience constructor.
    pub fn new(fuzz_seed: u64) -> Self {
        Self { fuzz_seed }
    }

    /// No stationary equivalent exists.
    pub fn stationary_strategy(&self) -> Option<StationaryStrategy> {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Prior, TypeSpace};
    use crate::learners::LearnerSpec;

    #[test]
    fn price_path_is_nondecreasing_and_deterministic() {
        let types = TypeSpace::new(&[0.1, 0.3]).unwrap();
        let prior = Prior::uniform(&types);
        let learner = LearnerSpec::parse("eep:100").unwrap();
        let ctx = EnvContext {
            horizon: 5_000,
            actions: ActionSet::new(2).unwrap(),
            types: &types,
            prior: &prior,
            learner: &learner,
            seed: 9,
        };
        let fam = PriceRaisingFuzz::new(17);
        let path = |ctx: &EnvContext<'_>| {
            let mut env = fam.build_env(ctx).unwrap();
            (1..=5_000u64).map(|t| env.post(t).pay(1)).collect::<Vec<_>>()
        };
        let a = path(&ctx);
        let b = path(&ctx);
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.iter().all(|p| *p <= 0.5));
        // price during exploration is one of the types
        assert!(types.values().iter().any(|t| t.value() == a[0]));
        // at least one raise happened after exploration
        assert!(a.last().unwrap() > &a[0]);
    }
}
