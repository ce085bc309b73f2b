//! Confidence intervals, regret metrics, and closed-form benchmark
//! quantities (monopoly price, consumer-surplus floor, rate bounds).
//!
//! The Hoeffding radius used everywhere is `ρ(n) = sqrt(2 ln T / n)` for
//! samples in [0, 1]; `log` is the natural logarithm throughout. Under any
//! stationary environment the event that every interval `mean ± ρ` covers
//! its true mean for all actions and periods (the *clean event*) has
//! probability at least `1 − 2/T²`.
//!
//! Metric operations are pure functions and thread-safe; the mutable
//! trackers ([`ConfidenceState`], [`CleanEventTracker`]) are single-owner.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{expected_utilities, AgentType, Mechanism, Prior, StationaryStrategy, TypeSpace};

/// Errors from statistics operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    /// Radius requested for an unsampled arm.
    #[error("confidence radius undefined for n = 0")]
    UndefinedRadius,
    /// A numeric argument is outside its admissible range.
    #[error("{0}")]
    BadArgument(String),
}

/// Confidence radius `sqrt(2 ln T / n)`; strictly decreasing in `n`.
pub fn radius(n: u64, horizon: u64) -> Result<f64, StatsError> {
    if n == 0 {
        return Err(StatsError::UndefinedRadius);
    }
    if horizon < 2 {
        return Err(StatsError::BadArgument(format!(
            "horizon must be at least 2, got {horizon}"
        )));
    }
    Ok((2.0 * (horizon as f64).ln() / n as f64).sqrt())
}

/// How long a sequence can stay inside its confidence funnel while ending
/// `delta` away from the boundary: `2 ln T / delta²`.
pub fn detection_horizon_bound(delta: f64, horizon: u64) -> Result<f64, StatsError> {
    if !(delta > 0.0) {
        return Err(StatsError::BadArgument(format!(
            "gap must be positive, got {delta}"
        )));
    }
    if horizon < 2 {
        return Err(StatsError::BadArgument(format!(
            "horizon must be at least 2, got {horizon}"
        )));
    }
    Ok(2.0 * (horizon as f64).ln() / (delta * delta))
}

// ---------------------------------------------------------------------------
// Per-arm sample tracking
// ---------------------------------------------------------------------------

/// Per-action pull counts and running means with the shared radius.
///
/// One instance per learner; samples are expected to be in [0, 1] when the
/// coverage guarantee matters (learners feed rescaled payoffs `u + 1/2`).
#[derive(Debug, Clone)]
pub struct ConfidenceState {
    counts: Vec<u64>,
    sums: Vec<f64>,
    two_ln_t: f64,
}

impl ConfidenceState {
    /// Fresh tracker for `arms` actions at horizon `horizon`.
    pub fn new(arms: usize, horizon: u64) -> Self {
        Self {
            counts: vec![0; arms],
            sums: vec![0.0; arms],
            two_ln_t: 2.0 * (horizon.max(2) as f64).ln(),
        }
    }

    /// Records one sample for arm `a`.
    pub fn observe(&mut self, a: usize, sample: f64) {
        self.counts[a] += 1;
        self.sums[a] += sample;
    }

    /// Number of samples of `a`.
    pub fn count(&self, a: usize) -> u64 {
        self.counts[a]
    }

    /// Running mean of `a`; `None` before the first sample.
    pub fn mean(&self, a: usize) -> Option<f64> {
        if self.counts[a] == 0 {
            None
        } else {
            Some(self.sums[a] / self.counts[a] as f64)
        }
    }

    /// Radius for `a` at its current count.
    pub fn rho(&self, a: usize) -> Option<f64> {
        if self.counts[a] == 0 {
            None
        } else {
            Some((self.two_ln_t / self.counts[a] as f64).sqrt())
        }
    }

    /// Lower confidence bound `mean − ρ`.
    pub fn lcb(&self, a: usize) -> Option<f64> {
        Some(self.mean(a)? - self.rho(a)?)
    }

    /// Upper confidence bound `mean + ρ`.
    pub fn ucb(&self, a: usize) -> Option<f64> {
        Some(self.mean(a)? + self.rho(a)?)
    }

    /// Number of arms tracked.
    pub fn arms(&self) -> usize {
        self.counts.len()
    }
}

/// Checks the clean event online: after every sample, is the true mean
/// still inside `mean ± ρ` for the sampled arm?
#[derive(Debug, Clone)]
pub struct CleanEventTracker {
    state: ConfidenceState,
    true_means: Vec<f64>,
    violated: bool,
}

impl CleanEventTracker {
    /// `true_means[a]` is the stationary expectation of arm `a`'s samples.
    pub fn new(true_means: Vec<f64>, horizon: u64) -> Self {
        Self {
            state: ConfidenceState::new(true_means.len(), horizon),
            true_means,
            violated: false,
        }
    }

    /// Feeds one sample and re-checks coverage for that arm.
    pub fn observe(&mut self, a: usize, sample: f64) {
        self.state.observe(a, sample);
        let mean = self.state.mean(a).unwrap();
        let rho = self.state.rho(a).unwrap();
        if (mean - self.true_means[a]).abs() > rho {
            self.violated = true;
        }
    }

    /// True once any interval has failed to cover its mean.
    pub fn violated(&self) -> bool {
        self.violated
    }
}

// ---------------------------------------------------------------------------
// Rate bounds
// ---------------------------------------------------------------------------

/// Regret rate triple: the bound `R(T) = C (ln T)^δ T^γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    /// Leading constant, strictly positive.
    pub c: f64,
    /// Log exponent δ ∈ [0, 1).
    pub delta: f64,
    /// Polynomial exponent γ ∈ (0, 1).
    pub gamma: f64,
}

impl RateBound {
    /// Validates the admissible ranges.
    pub fn new(c: f64, delta: f64, gamma: f64) -> Result<Self, StatsError> {
        if !(c > 0.0) {
            return Err(StatsError::BadArgument(format!("C must be > 0, got {c}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(StatsError::BadArgument(format!(
                "delta must lie in [0, 1), got {delta}"
            )));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(StatsError::BadArgument(format!(
                "gamma must lie in (0, 1), got {gamma}"
            )));
        }
        Ok(Self { c, delta, gamma })
    }
}

/// Evaluates `C (ln T)^δ T^γ`.
pub fn rate_bound_value(b: &RateBound, horizon: u64) -> Result<f64, StatsError> {
    if horizon < 2 {
        return Err(StatsError::BadArgument(format!(
            "horizon must be at least 2, got {horizon}"
        )));
    }
    let t = horizon as f64;
    Ok(b.c * t.ln().powf(b.delta) * t.powf(b.gamma))
}

/// Anytime constant from epoch doubling: `C' = 2^δ · 2^{γ+1}/(2^γ − 1) · C`.
pub fn doubling_constant(b: &RateBound) -> f64 {
    2f64.powf(b.delta) * 2f64.powf(b.gamma + 1.0) / (2f64.powf(b.gamma) - 1.0) * b.c
}

// ---------------------------------------------------------------------------
// Regret
// ---------------------------------------------------------------------------

/// Realized external regret of one action path against a fully recorded
/// mechanism sequence: best fixed action in hindsight minus what the path
/// earned. `periods` yields `(mechanism, action_played)` per period.
pub fn external_regret<'a, I>(periods: I, theta: AgentType) -> f64
where
    I: IntoIterator<Item = (&'a Mechanism, usize)>,
{
    let mut fixed: Vec<f64> = Vec::new();
    let mut realized = 0.0;
    for (m, a) in periods {
        if fixed.is_empty() {
            fixed = vec![0.0; m.action_count()];
        }
        for (alt, slot) in fixed.iter_mut().enumerate() {
            *slot += theta.value() * m.alloc(alt) - m.pay(alt);
        }
        realized += theta.value() * m.alloc(a) - m.pay(a);
    }
    let best = fixed.iter().cloned().fold(0.0_f64, f64::max);
    best - realized
}

/// Weak external regret against a stationary strategy: the benchmark term
/// is exact (`T · max_a E[u(a)]`), the learner term is the measured
/// cumulative payoff.
pub fn weak_external_regret(
    cumulative_learner_payoff: f64,
    horizon: u64,
    s: &StationaryStrategy,
    theta: AgentType,
) -> f64 {
    let best = expected_utilities(s, theta)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    horizon as f64 * best - cumulative_learner_payoff
}

/// Point estimate with a standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    /// Sample mean.
    pub mean: f64,
    /// Standard error of the mean (0 for a single run).
    pub se: f64,
}

impl MeanSe {
    /// Mean and standard error of a sample.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: 0.0, se: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        if n == 1 {
            return Self { mean, se: 0.0 };
        }
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        let se = (ss / ((n - 1) as f64 * n as f64)).sqrt();
        Self { mean, se }
    }
}

/// Monte-Carlo regret estimates for one matchup.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RegretReport {
    /// External regret estimate (hindsight best fixed action).
    pub er: MeanSe,
    /// Weak external regret estimate; only defined against stationary
    /// environments.
    pub wer: Option<MeanSe>,
}

// ---------------------------------------------------------------------------
// Closed-form pricing quantities
// ---------------------------------------------------------------------------

// Revenue comparisons use a relative tolerance so that algebraically tied
// prices (e.g. 0.2·(2/3) vs 0.4·(1/3)) resolve to the larger price
// regardless of last-bit rounding.
const TIE_EPS: f64 = 1e-12;

/// Index of the largest maximizer, treating values within a 1e-12 relative
/// band as tied (ties go to the later index; inputs ascend with price).
pub fn sup_argmax(values: &[f64]) -> usize {
    let mut best = 0usize;
    for (i, v) in values.iter().enumerate() {
        let tol = TIE_EPS * values[best].abs().max(1.0);
        if *v > values[best] + tol || (*v - values[best]).abs() <= tol {
            best = i;
        }
    }
    best
}

/// Expected revenue of posting `p` against belief `pi`: `p · Pr(θ ≥ p)`.
/// The inequality is weak.
pub fn posted_revenue(p: f64, pi: &Prior, types: &TypeSpace) -> f64 {
    let mut mass = 0.0;
    for (i, t) in types.values().iter().enumerate() {
        if t.value() >= p {
            mass += pi.weight(i);
        }
    }
    p * mass
}

/// The revenue-maximizing posted price over the type space, sup tie-break
/// (largest maximizer wins).
pub fn monopoly_price(pi: &Prior, types: &TypeSpace) -> Result<AgentType, StatsError> {
    if pi.weights().len() != types.len() {
        return Err(StatsError::BadArgument(
            "prior does not match type space".into(),
        ));
    }
    let revenues: Vec<f64> = types
        .values()
        .iter()
        .map(|t| posted_revenue(t.value(), pi, types))
        .collect();
    Ok(types.get(sup_argmax(&revenues)))
}

/// Revenue floor `p(π) · Pr(θ ≥ p(π))` — what the environment can always
/// secure by posting the monopoly price forever.
pub fn ps_lower(pi: &Prior, types: &TypeSpace) -> Result<f64, StatsError> {
    let p = monopoly_price(pi, types)?;
    Ok(posted_revenue(p.value(), pi, types))
}

/// Largest per-type shortfall of the environment from full surplus:
/// `max_θ (θ − env_avg(θ))`. A strategy extracts within ε of full surplus
/// uniformly iff the result is ≤ ε.
pub fn extraction_gap(
    env_avg_payoff_by_type: &[f64],
    types: &TypeSpace,
) -> Result<f64, StatsError> {
    if env_avg_payoff_by_type.len() != types.len() {
        return Err(StatsError::BadArgument(format!(
            "got {} payoffs for {} types",
            env_avg_payoff_by_type.len(),
            types.len()
        )));
    }
    Ok(types
        .values()
        .iter()
        .zip(env_avg_payoff_by_type)
        .map(|(t, v)| t.value() - v)
        .fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Mechanism;
    use crate::game::ActionSet;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn types(vals: &[f64]) -> TypeSpace {
        TypeSpace::new(vals).unwrap()
    }

    #[test]
    fn radius_values() {
        // ln e = 1
        let e = std::f64::consts::E;
        assert!((radius(1, e.ceil() as u64).unwrap() - (2.0 * 3f64.ln()).sqrt()).abs() < 1e-12);
        // exact check at analytic points, using f64 horizons via the formula
        let r = (2.0 * (100f64).ln() / 200.0).sqrt();
        assert!((radius(200, 100).unwrap() - r).abs() < 1e-15);
        assert!((r - 0.2146).abs() < 1e-4);
        assert_eq!(radius(0, 100), Err(StatsError::UndefinedRadius));
        assert!(radius(1, 1).is_err());
    }

    #[test]
    fn radius_monotone_in_n() {
        for horizon in [2u64, 10, 1000, 1_000_000] {
            let mut prev = f64::INFINITY;
            for n in 1..200 {
                let r = radius(n, horizon).unwrap();
                assert!(r < prev);
                prev = r;
            }
        }
    }

    #[test]
    fn detection_bound_values() {
        // 2·ln T/Δ² at analytic points; e² and e rounded up keep us within float noise
        let v = detection_horizon_bound(0.1, 1_000_000).unwrap();
        assert!((v - 2.0 * (1e6f64).ln() / 0.01).abs() < 1e-9);
        assert!((v - 2763.10).abs() < 0.01);
        assert!(detection_horizon_bound(0.0, 100).is_err());
        assert!(detection_horizon_bound(-1.0, 100).is_err());
    }

    #[test]
    fn rate_bound_examples() {
        let b = RateBound::new(1.0, 0.0, 0.5).unwrap();
        assert!((rate_bound_value(&b, 10_000).unwrap() - 100.0).abs() < 1e-9);

        // sqrt(2·K·ln K) at K = 2, T = 10⁴ → sqrt(4 ln 2)·100 ≈ 166.51
        let c = (2.0 * 2.0 * 2f64.ln()).sqrt();
        let exp3 = RateBound::new(c, 0.0, 0.5).unwrap();
        assert!((rate_bound_value(&exp3, 10_000).unwrap() - 166.51).abs() < 0.01);

        // 5·sqrt(K)·(ln T)^{1/2}·sqrt(T) at K = 4, T = 10⁴ ≈ 3034.85
        let se = RateBound::new(5.0 * 2.0, 0.5, 0.5).unwrap();
        assert!((rate_bound_value(&se, 10_000).unwrap() - 3034.85).abs() < 0.01);

        assert!(RateBound::new(0.0, 0.0, 0.5).is_err());
        assert!(RateBound::new(1.0, 1.0, 0.5).is_err());
        assert!(RateBound::new(1.0, 0.0, 1.0).is_err());
        assert!(rate_bound_value(&b, 1).is_err());
    }

    #[test]
    fn doubling_constant_examples() {
        let b = RateBound::new(1.0, 0.0, 0.5).unwrap();
        let expect = 2f64.powf(1.5) / (2f64.sqrt() - 1.0);
        assert!((doubling_constant(&b) - expect).abs() < 1e-12);
        assert!((doubling_constant(&b) - 6.8284).abs() < 1e-4);
        // linear in C
        let b2 = RateBound::new(2.0, 0.0, 0.5).unwrap();
        assert!((doubling_constant(&b2) - 2.0 * doubling_constant(&b)).abs() < 1e-12);
    }

    #[test]
    fn external_regret_examples() {
        let acts = ActionSet::new(2).unwrap();
        let th = AgentType::new(0.3).unwrap();
        let m01 = Mechanism::posted_price(acts, 0.1).unwrap();
        let m05 = Mechanism::posted_price(acts, 0.5).unwrap();

        // learner opted out twice while a1 earned 0.2 per period
        let er = external_regret(vec![(&m01, 0), (&m01, 0)], th);
        assert!((er - 0.4).abs() < 1e-12);

        // playing the hindsight-best fixed action has zero regret
        let er = external_regret(vec![(&m01, 1), (&m01, 1)], th);
        assert!(er.abs() < 1e-12);

        // prices (0.1, 0.5, 0.1): path a1,a1,a1 collects exactly the best fixed sum
        let er = external_regret(vec![(&m01, 1), (&m05, 1), (&m01, 1)], th);
        assert!(er.abs() < 1e-12);
    }

    #[test]
    fn weak_regret_examples() {
        let acts = ActionSet::new(2).unwrap();
        let th = AgentType::new(0.3).unwrap();
        let s = StationaryStrategy::deterministic(Mechanism::posted_price(acts, 0.1).unwrap());
        // constant opt-out for 100 periods: 100·0.2 − 0 = 20
        assert!((weak_external_regret(0.0, 100, &s, th) - 20.0).abs() < 1e-12);
        // optimal play: zero
        assert!(weak_external_regret(20.0, 100, &s, th).abs() < 1e-12);
        // θ below every price: benchmark is opt-out, WER = −cumulative
        let low = AgentType::new(0.05).unwrap();
        let wer = weak_external_regret(-3.0, 100, &s, low);
        assert!((wer - 3.0).abs() < 1e-12);
    }

    #[test]
    fn monopoly_price_examples() {
        let ts = types(&[0.1, 0.2, 0.4]);
        let pi = Prior::uniform(&ts);
        // revenues (0.1, 0.1333…, 0.1333…): tie resolves to the larger price
        assert_eq!(monopoly_price(&pi, &ts).unwrap().value(), 0.4);

        let point = types(&[0.3]);
        let ppi = Prior::uniform(&point);
        assert_eq!(monopoly_price(&ppi, &point).unwrap().value(), 0.3);

        let ts2 = types(&[0.1, 0.4]);
        let skew = Prior::new(&[0.9, 0.1], &ts2).unwrap();
        // revenues (0.1, 0.04)
        assert_eq!(monopoly_price(&skew, &ts2).unwrap().value(), 0.1);
    }

    #[test]
    fn ps_lower_examples() {
        let ts = types(&[0.1, 0.3]);
        let pi = Prior::uniform(&ts);
        assert!((ps_lower(&pi, &ts).unwrap() - 0.15).abs() < 1e-12);

        let point = types(&[0.3]);
        assert!((ps_lower(&Prior::uniform(&point), &point).unwrap() - 0.3).abs() < 1e-12);

        let ts3 = types(&[0.1, 0.2, 0.4]);
        assert!((ps_lower(&Prior::uniform(&ts3), &ts3).unwrap() - 0.4 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn monopoly_price_dominates_every_type_price() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let k = rng.gen_range(1..=6);
            let mut vals: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..0.499)).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            let ts = match TypeSpace::new(&vals) {
                Ok(ts) => ts,
                Err(_) => continue,
            };
            let raw: Vec<f64> = (0..ts.len()).map(|_| rng.gen_range(0.01..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / sum).collect();
            let pi = Prior::new(&weights, &ts).unwrap();
            let p = monopoly_price(&pi, &ts).unwrap();
            assert!(ts.index_of(p).is_some());
            let rstar = posted_revenue(p.value(), &pi, &ts);
            for t in ts.values() {
                assert!(rstar >= posted_revenue(t.value(), &pi, &ts) - 1e-12);
            }
        }
    }

    #[test]
    fn extraction_gap_examples() {
        let ts = types(&[0.1, 0.3]);
        assert!(extraction_gap(&[0.1, 0.3], &ts).unwrap().abs() < 1e-12);
        assert!((extraction_gap(&[0.0, 0.0], &ts).unwrap() - 0.3).abs() < 1e-12);
        assert!((extraction_gap(&[0.08, 0.25], &ts).unwrap() - 0.05).abs() < 1e-12);
        assert!(extraction_gap(&[0.1], &ts).is_err());
    }

    #[test]
    fn clean_event_tracker_flags_violations() {
        // Constant samples match the true mean: never violated.
        let mut ok = CleanEventTracker::new(vec![0.5], 1000);
        for _ in 0..100 {
            ok.observe(0, 0.5);
        }
        assert!(!ok.violated());

        // Samples pinned far from the claimed mean violate once ρ shrinks.
        let mut bad = CleanEventTracker::new(vec![0.9], 1000);
        for _ in 0..10_000 {
            bad.observe(0, 0.1);
        }
        assert!(bad.violated());
    }

    #[test]
    fn mean_se_basics() {
        let m = MeanSe::of(&[1.0, 1.0, 1.0]);
        assert_eq!(m.mean, 1.0);
        assert_eq!(m.se, 0.0);
        let m = MeanSe::of(&[0.0]);
        assert_eq!(m.se, 0.0);
        let m = MeanSe::of(&[0.0, 2.0]);
        assert_eq!(m.mean, 1.0);
        assert!((m.se - 1.0).abs() < 1e-12);
    }

    proptest! {
        // The funnel lemma: if the running mean plus radius stays above a
        // barrier B up to T0 but ends Δ below it, then T0 ≤ 2 ln T/Δ².
        #[test]
        fn funnel_exit_time_is_bounded(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let horizon = rng.gen_range(10u64..20_000);
            let t0_max = rng.gen_range(2usize..400);
            let cs: Vec<f64> = (0..t0_max).map(|_| rng.gen::<f64>()).collect();
            let mut sum = 0.0;
            let mut upper_env = f64::INFINITY; // min_s (mean_s + ρ_s)
            let mut lower_env = f64::NEG_INFINITY; // max_s (mean_s − ρ_s)
            for (s, c) in cs.iter().enumerate() {
                sum += c;
                let mean = sum / (s + 1) as f64;
                let rho = radius((s + 1) as u64, horizon).unwrap();
                upper_env = upper_env.min(mean + rho);
                lower_env = lower_env.max(mean - rho);
                let final_mean = mean;
                let t0 = (s + 1) as f64;
                // Upper variant: barrier B := upper envelope.
                let delta = upper_env - final_mean;
                if delta > 1e-9 {
                    prop_assert!(t0 <= detection_horizon_bound(delta, horizon).unwrap() + 1e-6);
                }
                // Mirrored variant.
                let delta2 = final_mean - lower_env;
                if delta2 > 1e-9 {
                    prop_assert!(t0 <= detection_horizon_bound(delta2, horizon).unwrap() + 1e-6);
                }
            }
        }
    }
}
