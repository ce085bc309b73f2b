//! Stage-game primitives: actions, types, mechanisms, payoffs.
//!
//! One period of the repeated game works like this: the environment posts a
//! *mechanism* — an allocation indicator and a payment per learner action —
//! and the learner simultaneously picks an action `a`. The learner's payoff
//! is `θ·x(a) − p(a)`, the environment's is `p(a)`. Action index 0 is the
//! opt-out action `a0`: every mechanism allocates nothing and charges
//! nothing there, so the learner can always guarantee payoff 0.
//!
//! Payments are normalized to `[0, 1/2]` and types to `[0, 1/2)`. Violations
//! are construction errors, never clamped.
//!
//! All types here are immutable after construction and safe to share across
//! concurrent episode runners.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest admissible payment (and strict upper bound for types).
pub const PAYMENT_CAP: f64 = 0.5;

/// Errors from constructing or using stage-game values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    /// A numeric field is outside its admissible range.
    #[error("{0}")]
    OutOfRange(String),
    /// An action index does not exist in the mechanism / action set.
    #[error("action index {index} out of range (action count {count})")]
    BadAction {
        /// Offending index.
        index: usize,
        /// Number of actions available.
        count: usize,
    },
    /// A mixture or type space is structurally invalid.
    #[error("{0}")]
    Invalid(String),
}

// ---------------------------------------------------------------------------
// Actions and types
// ---------------------------------------------------------------------------

/// The learner's finite action set; index 0 is the opt-out action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSet {
    count: usize,
}

impl ActionSet {
    /// At least two actions: opt-out plus something to trade with.
    pub fn new(count: usize) -> Result<Self, GameError> {
        if count < 2 {
            return Err(GameError::Invalid(format!(
                "action set needs at least 2 actions, got {count}"
            )));
        }
        Ok(Self { count })
    }

    /// Number of actions.
    pub fn count(&self) -> usize {
        self.count
    }

    /// The opt-out action index.
    pub fn opt_out(&self) -> usize {
        0
    }

    /// Checks that `a` indexes into this set.
    pub fn check(&self, a: usize) -> Result<(), GameError> {
        if a < self.count {
            Ok(())
        } else {
            Err(GameError::BadAction {
                index: a,
                count: self.count,
            })
        }
    }
}

/// The learner's private valuation θ ∈ [0, 1/2).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentType(f64);

impl AgentType {
    /// Validates the normalization range.
    pub fn new(theta: f64) -> Result<Self, GameError> {
        if theta.is_finite() && (0.0..PAYMENT_CAP).contains(&theta) {
            Ok(Self(theta))
        } else {
            Err(GameError::OutOfRange(format!(
                "agent type must lie in [0, 0.5), got {theta}"
            )))
        }
    }

    /// The raw valuation.
    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Commonly known finite set of possible types, strictly ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeSpace {
    values: Vec<AgentType>,
}

impl TypeSpace {
    /// Builds a type space from raw values; they must be strictly increasing
    /// and inside [0, 1/2).
    pub fn new(values: &[f64]) -> Result<Self, GameError> {
        if values.is_empty() {
            return Err(GameError::Invalid("type space must be non-empty".into()));
        }
        let mut out = Vec::with_capacity(values.len());
        for &v in values {
            out.push(AgentType::new(v)?);
        }
        for w in out.windows(2) {
            if w[0].value() >= w[1].value() {
                return Err(GameError::Invalid(
                    "type space must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self { values: out })
    }

    /// Number of types.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True when the space is a singleton — kept for clippy symmetry.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Type at 0-based index `i`.
    pub fn get(&self, i: usize) -> AgentType {
        self.values[i]
    }

    /// All types in ascending order.
    pub fn values(&self) -> &[AgentType] {
        &self.values
    }

    /// Index of `theta` in the space, if it is a member (exact match).
    pub fn index_of(&self, theta: AgentType) -> Option<usize> {
        self.values.iter().position(|t| t.value() == theta.value())
    }
}

/// A full-support-checked belief over a [`TypeSpace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    weights: Vec<f64>,
}

impl Prior {
    /// Weights must be nonnegative, match the type count, and sum to 1
    /// within 1e-9 (they are renormalized exactly afterwards).
    pub fn new(weights: &[f64], types: &TypeSpace) -> Result<Self, GameError> {
        if weights.len() != types.len() {
            return Err(GameError::Invalid(format!(
                "prior has {} weights for {} types",
                weights.len(),
                types.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(GameError::OutOfRange(
                "prior weights must be nonnegative and finite".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(GameError::Invalid(format!(
                "prior weights must sum to 1, got {sum}"
            )));
        }
        Ok(Self {
            weights: weights.iter().map(|w| w / sum).collect(),
        })
    }

    /// Uniform belief over the space.
    pub fn uniform(types: &TypeSpace) -> Self {
        let k = types.len();
        Self {
            weights: vec![1.0 / k as f64; k],
        }
    }

    /// Weight on type index `i`.
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// All weights, aligned with the type space.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True when every type has strictly positive mass. Adaptive
    /// environments require this.
    pub fn full_support(&self) -> bool {
        self.weights.iter().all(|w| *w > 0.0)
    }
}

// ---------------------------------------------------------------------------
// Mechanisms
// ---------------------------------------------------------------------------

/// One environment stage action: an allocation indicator and a payment per
/// learner action. `alloc[0] = false` and `pay[0] = 0` always (opt-out).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mechanism {
    alloc: Vec<bool>,
    pay: Vec<f64>,
}

impl Mechanism {
    /// Validates the opt-out clause and the payment cap.
    pub fn new(alloc: Vec<bool>, pay: Vec<f64>) -> Result<Self, GameError> {
        if alloc.len() != pay.len() || alloc.is_empty() {
            return Err(GameError::Invalid(
                "allocation and payment vectors must have equal nonzero length".into(),
            ));
        }
        if alloc[0] || pay[0] != 0.0 {
            return Err(GameError::Invalid(
                "opt-out action must have zero allocation and zero payment".into(),
            ));
        }
        if pay
            .iter()
            .any(|p| !p.is_finite() || *p < 0.0 || *p > PAYMENT_CAP)
        {
            return Err(GameError::OutOfRange(format!(
                "payments must lie in [0, {PAYMENT_CAP}]"
            )));
        }
        Ok(Self { alloc, pay })
    }

    /// Posted price: allocate on every non-opt-out action at price `p`.
    pub fn posted_price(actions: ActionSet, p: f64) -> Result<Self, GameError> {
        let count = actions.count();
        let mut alloc = vec![true; count];
        alloc[0] = false;
        let mut pay = vec![p; count];
        pay[0] = 0.0;
        Self::new(alloc, pay)
    }

    /// Allocate with price `p` on the single action `target`, nothing
    /// anywhere else.
    pub fn targeted(actions: ActionSet, target: usize, p: f64) -> Result<Self, GameError> {
        actions.check(target)?;
        if target == actions.opt_out() {
            return Err(GameError::Invalid(
                "cannot target the opt-out action".into(),
            ));
        }
        let mut alloc = vec![false; actions.count()];
        let mut pay = vec![0.0; actions.count()];
        alloc[target] = true;
        pay[target] = p;
        Self::new(alloc, pay)
    }

    /// The all-zero mechanism: no allocation, no payment anywhere.
    pub fn null(actions: ActionSet) -> Self {
        Self {
            alloc: vec![false; actions.count()],
            pay: vec![0.0; actions.count()],
        }
    }

    /// Number of actions the mechanism covers.
    pub fn action_count(&self) -> usize {
        self.alloc.len()
    }

    /// Allocation indicator for `a` as 0.0 / 1.0.
    pub fn alloc(&self, a: usize) -> f64 {
        if self.alloc[a] {
            1.0
        } else {
            0.0
        }
    }

    /// Payment charged on `a`.
    pub fn pay(&self, a: usize) -> f64 {
        self.pay[a]
    }

    fn check(&self, a: usize) -> Result<(), GameError> {
        if a < self.alloc.len() {
            Ok(())
        } else {
            Err(GameError::BadAction {
                index: a,
                count: self.alloc.len(),
            })
        }
    }
}

/// Learner payoff `u(a, (x,p), θ) = θ·x(a) − p(a)`.
pub fn payoff_u(a: usize, m: &Mechanism, theta: AgentType) -> Result<f64, GameError> {
    m.check(a)?;
    Ok(theta.value() * m.alloc(a) - m.pay(a))
}

/// Environment payoff `v(a, (x,p)) = p(a)`.
pub fn payoff_v(a: usize, m: &Mechanism) -> Result<f64, GameError> {
    m.check(a)?;
    Ok(m.pay(a))
}

// ---------------------------------------------------------------------------
// Stationary strategies
// ---------------------------------------------------------------------------

/// A stationary environment strategy: a finite-support mixture over
/// deterministic mechanisms, sampled i.i.d. each period.
#[derive(Debug, Clone)]
pub struct StationaryStrategy {
    atoms: Vec<(Arc<Mechanism>, f64)>,
}

impl StationaryStrategy {
    /// Probabilities must be nonnegative and sum to 1 within 1e-9.
    pub fn new(atoms: Vec<(Mechanism, f64)>) -> Result<Self, GameError> {
        if atoms.is_empty() {
            return Err(GameError::Invalid(
                "stationary strategy needs at least one atom".into(),
            ));
        }
        let count = atoms[0].0.action_count();
        if atoms.iter().any(|(m, _)| m.action_count() != count) {
            return Err(GameError::Invalid(
                "all atoms must cover the same action set".into(),
            ));
        }
        if atoms.iter().any(|(_, p)| !p.is_finite() || *p < 0.0) {
            return Err(GameError::OutOfRange(
                "atom probabilities must be nonnegative".into(),
            ));
        }
        let sum: f64 = atoms.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(GameError::Invalid(format!(
                "atom probabilities must sum to 1, got {sum}"
            )));
        }
        Ok(Self {
            atoms: atoms
                .into_iter()
                .map(|(m, p)| (Arc::new(m), p / sum))
                .collect(),
        })
    }

    /// Deterministic strategy: a single mechanism every period.
    pub fn deterministic(m: Mechanism) -> Self {
        Self {
            atoms: vec![(Arc::new(m), 1.0)],
        }
    }

    /// Atoms with their probabilities.
    pub fn atoms(&self) -> &[(Arc<Mechanism>, f64)] {
        &self.atoms
    }

    /// Number of actions the mixture covers.
    pub fn action_count(&self) -> usize {
        self.atoms[0].0.action_count()
    }
}

/// Draws one atom from the mixture.
pub fn sample_mechanism<R: Rng>(s: &StationaryStrategy, rng: &mut R) -> Arc<Mechanism> {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (m, p) in s.atoms() {
        acc += p;
        if u < acc {
            return Arc::clone(m);
        }
    }
    // Rounding slack: fall back to the last atom.
    Arc::clone(&s.atoms().last().unwrap().0)
}

/// Exact per-action expected learner payoff under the mixture (no sampling):
/// `E[u(a, ·, θ)] = Σ_atoms prob · u(a, atom, θ)`.
pub fn expected_utilities(s: &StationaryStrategy, theta: AgentType) -> Vec<f64> {
    let count = s.action_count();
    let mut out = vec![0.0; count];
    for (m, p) in s.atoms() {
        for (a, slot) in out.iter_mut().enumerate() {
            *slot += p * (theta.value() * m.alloc(a) - m.pay(a));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Outcomes and run configuration
// ---------------------------------------------------------------------------

/// What the learner privately observes at the end of one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    /// Action the learner played.
    pub action: usize,
    /// Allocation bit `x_t(a_t)`.
    pub got: bool,
    /// Payment `p_t(a_t)`.
    pub paid: f64,
}

impl Outcome {
    /// Realizes the bandit feedback for playing `a` against `m`.
    pub fn realize(m: &Mechanism, a: usize) -> Result<Self, GameError> {
        m.check(a)?;
        Ok(Self {
            action: a,
            got: m.alloc(a) == 1.0,
            paid: m.pay(a),
        })
    }

    /// Learner payoff implied by this outcome for type `theta`.
    pub fn payoff_u(&self, theta: AgentType) -> f64 {
        theta.value() * if self.got { 1.0 } else { 0.0 } - self.paid
    }
}

/// Per-episode run parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Number of periods T ≥ 1.
    pub horizon: u64,
    /// Root seed for the episode.
    pub seed: u64,
    /// The learner's private type.
    pub theta: AgentType,
    /// Size of the action set.
    pub action_count: usize,
}

impl RunConfig {
    /// Validates `horizon ≥ 1` and the action count.
    pub fn new(
        horizon: u64,
        seed: u64,
        theta: AgentType,
        action_count: usize,
    ) -> Result<Self, GameError> {
        if horizon == 0 {
            return Err(GameError::Invalid("horizon must be at least 1".into()));
        }
        ActionSet::new(action_count)?;
        Ok(Self {
            horizon,
            seed,
            theta,
            action_count,
        })
    }

    /// The action set implied by `action_count`.
    pub fn actions(&self) -> ActionSet {
        ActionSet { count: self.action_count }
    }
}
