//! Adaptive strategies that exploit specific learner algorithms.

use std::sync::Arc;

use super::EnvContext;
use crate::error::ArenaError;
use crate::game::{ActionSet, Mechanism, TypeSpace};
use crate::learners::LearnerSpec;
use crate::protocol::{Environment, PhaseTag};
use crate::stats::{rate_bound_value, RateBound};

// ---------------------------------------------------------------------------
// Descending price probes against a no-regret learner
// ---------------------------------------------------------------------------

/// One probing phase: post price `θ_k − δ_k` on the trade arm for `len`
/// periods and watch whether the learner takes it a majority of the time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbePhase {
    /// 1-based type index k being tested.
    pub type_index: usize,
    /// Phase length T_k.
    pub len: u64,
    /// Probe price θ_k − δ_k with δ_k = (θ_k − θ_{k−1})/2.
    pub price: f64,
}

/// The full probing schedule.
///
/// Phase lengths follow the recursion
/// `T_k = (2/ε′)(1/(1−ε′)^{K−k})(R(T) + Σ_{s>k} δ_s T_s)` for k = K..2
/// (ceiled to integers, with the already-ceiled lengths inside the sum),
/// where `ε′ = 1 − exp(ln(ε/2)/K)` and `R(T)` is the regret bound assumed
/// for the learner. Exploitation charges `θ_k − Δ_k` with
/// `Δ_k = (ε/(2−ε))·θ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExploiterSchedule {
    /// Per-phase detection error budget ε′.
    pub eps_prime: f64,
    /// Assumed regret bound value R(T).
    pub rate_value: f64,
    /// Probing phases in play order (k = K down to 2; empty when K = 1).
    pub phases: Vec<ProbePhase>,
    /// Exploitation price per type, indexed by k−1: θ_k − Δ_k.
    pub exploit_prices: Vec<f64>,
}

impl ExploiterSchedule {
    /// Builds the schedule for extraction slack `eps` against a learner
    /// assumed to satisfy `bound`.
    pub fn new(
        eps: f64,
        bound: &RateBound,
        types: &TypeSpace,
        horizon: u64,
    ) -> Result<Self, ArenaError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(ArenaError::Config(format!(
                "extraction slack must lie in (0, 1), got {eps}"
            )));
        }
        let k_types = types.len();
        let eps_prime = 1.0 - ((eps / 2.0).ln() / k_types as f64).exp();
        let rate_value = rate_bound_value(bound, horizon.max(2))?;
        let mut phases = Vec::new();
        let mut drift_sum = 0.0; // Σ_{s>k} δ_s T_s over already-scheduled phases
        for k in (2..=k_types).rev() {
            let theta_k = types.get(k - 1).value();
            let delta_k = (theta_k - types.get(k - 2).value()) / 2.0;
            let raw = (2.0 / eps_prime)
                * (1.0 / (1.0 - eps_prime).powi((k_types - k) as i32))
                * (rate_value + drift_sum);
            let len = raw.ceil().max(1.0) as u64;
            drift_sum += delta_k * len as f64;
            phases.push(ProbePhase {
                type_index: k,
                len,
                price: theta_k - delta_k,
            });
        }
        let margin = eps / (2.0 - eps);
        let exploit_prices = types
            .values()
            .iter()
            .map(|t| t.value() * (1.0 - margin))
            .collect();
        Ok(Self {
            eps_prime,
            rate_value,
            phases,
            exploit_prices,
        })
    }

    /// Total probing length.
    pub fn total_probe_len(&self) -> u64 {
        self.phases.iter().map(|p| p.len).sum()
    }
}

enum NoErStage {
    Probe { idx: usize, in_phase: u64, taken: u64 },
    Exploit,
}

/// Walks the probing schedule top-down. A phase where the learner trades
/// at least `⌈T_k/2⌉` times identifies the type as θ_k; the price
/// `θ_k − Δ_k` is then charged on the trade arm forever. Falling through
/// every phase exploits at the smallest type's price.
pub struct NoErExploiter {
    schedule: ExploiterSchedule,
    abar: usize,
    actions: ActionSet,
    stage: NoErStage,
    current: Arc<Mechanism>,
    exploit_mech: Option<Arc<Mechanism>>,
}

impl NoErExploiter {
    /// `abar` is the probe/trade arm; `bound` the learner's assumed regret
    /// bound.
    pub fn new(
        eps: f64,
        abar: usize,
        bound: &RateBound,
        ctx: &EnvContext<'_>,
    ) -> Result<Self, ArenaError> {
        ctx.actions.check(abar)?;
        if abar == ctx.actions.opt_out() {
            return Err(ArenaError::Config(
                "probe arm must differ from the opt-out action".into(),
            ));
        }
        let schedule = ExploiterSchedule::new(eps, bound, ctx.types, ctx.horizon)?;
        let (stage, current) = if schedule.phases.is_empty() {
            let price = schedule.exploit_prices[0];
            (
                NoErStage::Exploit,
                Arc::new(Mechanism::targeted(ctx.actions, abar, price)?),
            )
        } else {
            (
                NoErStage::Probe {
                    idx: 0,
                    in_phase: 0,
                    taken: 0,
                },
                Arc::new(Mechanism::targeted(
                    ctx.actions,
                    abar,
                    schedule.phases[0].price,
                )?),
            )
        };
        let exploit_mech = matches!(stage, NoErStage::Exploit).then(|| Arc::clone(&current));
        Ok(Self {
            schedule,
            abar,
            actions: ctx.actions,
            stage,
            current,
            exploit_mech,
        })
    }

    /// Read-only view of the schedule.
    pub fn schedule(&self) -> &ExploiterSchedule {
        &self.schedule
    }

    fn enter_exploit(&mut self, type_index: usize) {
        let price = self.schedule.exploit_prices[type_index - 1];
        let mech = Arc::new(
            Mechanism::targeted(self.actions, self.abar, price)
                .expect("exploit price is inside the payment range"),
        );
        self.current = Arc::clone(&mech);
        self.exploit_mech = Some(mech);
        self.stage = NoErStage::Exploit;
    }
}

impl Environment for NoErExploiter {
    fn post(&mut self, _t: u64) -> Arc<Mechanism> {
        Arc::clone(&self.current)
    }

    fn observe(&mut self, action: usize) {
        enum Step {
            Stay,
            NextPhase(usize),
            Exploit(usize),
        }
        let step = match &mut self.stage {
            NoErStage::Exploit => Step::Stay,
            NoErStage::Probe {
                idx,
                in_phase,
                taken,
            } => {
                *in_phase += 1;
                if action == self.abar {
                    *taken += 1;
                }
                let phase = &self.schedule.phases[*idx];
                if *in_phase < phase.len {
                    Step::Stay
                } else if *taken >= phase.len.div_ceil(2) {
                    // majority rule with ⌈T_k/2⌉ so even lengths are well-defined
                    Step::Exploit(phase.type_index)
                } else if *idx + 1 < self.schedule.phases.len() {
                    *idx += 1;
                    *in_phase = 0;
                    *taken = 0;
                    Step::NextPhase(*idx)
                } else {
                    Step::Exploit(1)
                }
            }
        };
        match step {
            Step::Stay => {}
            Step::NextPhase(idx) => {
                self.current = Arc::new(
                    Mechanism::targeted(self.actions, self.abar, self.schedule.phases[idx].price)
                        .expect("probe price is inside the payment range"),
                );
            }
            Step::Exploit(k) => self.enter_exploit(k),
        }
    }

    fn phase(&self) -> PhaseTag {
        match self.stage {
            NoErStage::Probe { .. } => PhaseTag::Explore,
            NoErStage::Exploit => PhaseTag::Exploit,
        }
    }
}

// ---------------------------------------------------------------------------
// Lock-in exploitation of explore-then-commit learners
// ---------------------------------------------------------------------------

enum LockinTrigger {
    /// Known commit period (explore-then-commit learners with a known
    /// budget): switch exactly when the commit phase starts.
    AtPeriod(u64),
    /// Confirmation window: switch once action 1 has been played this many
    /// consecutive periods (counted after the first K periods).
    Window { need: u64, streak: u64 },
}

/// Cheap price on action 1 until the learner stops exploring, then the
/// exploitation price forever.
pub struct LockinExploiter {
    explore: Arc<Mechanism>,
    exploit: Arc<Mechanism>,
    trigger: LockinTrigger,
    locked: bool,
    observed: u64,
    k: u64,
}

impl LockinExploiter {
    /// Requires `0 ≤ p_explore < p_exploit ≤ 1/2` and `window ≥ 1`.
    pub fn new(
        p_explore: f64,
        p_exploit: f64,
        window: u64,
        ctx: &EnvContext<'_>,
    ) -> Result<Self, ArenaError> {
        if !(p_explore >= 0.0 && p_explore < p_exploit && p_exploit <= 0.5) {
            return Err(ArenaError::Config(format!(
                "need 0 ≤ p_explore < p_exploit ≤ 0.5, got ({p_explore}, {p_exploit})"
            )));
        }
        if window == 0 {
            return Err(ArenaError::Config(
                "confirmation window must be at least 1".into(),
            ));
        }
        let trigger = match ctx.learner {
            LearnerSpec::UniformExploration { .. } => {
                let t1 = ctx.learner.resolved_t1(ctx.horizon).unwrap();
                LockinTrigger::AtPeriod(t1 * ctx.actions.count() as u64 + 1)
            }
            _ => LockinTrigger::Window {
                need: window,
                streak: 0,
            },
        };
        Ok(Self {
            explore: Arc::new(Mechanism::targeted(ctx.actions, 1, p_explore)?),
            exploit: Arc::new(Mechanism::targeted(ctx.actions, 1, p_exploit)?),
            trigger,
            locked: false,
            observed: 0,
            k: ctx.actions.count() as u64,
        })
    }
}

impl Environment for LockinExploiter {
    fn post(&mut self, t: u64) -> Arc<Mechanism> {
        if let LockinTrigger::AtPeriod(commit) = self.trigger {
            if t >= commit {
                self.locked = true;
            }
        }
        if self.locked {
            Arc::clone(&self.exploit)
        } else {
            Arc::clone(&self.explore)
        }
    }

    fn observe(&mut self, action: usize) {
        self.observed += 1;
        if let LockinTrigger::Window { need, streak } = &mut self.trigger {
            if self.observed > self.k {
                if action == 1 {
                    *streak += 1;
                    if *streak >= *need {
                        self.locked = true;
                    }
                } else {
                    *streak = 0;
                }
            }
        }
    }

    fn phase(&self) -> PhaseTag {
        if self.locked {
            PhaseTag::Exploit
        } else {
            PhaseTag::Explore
        }
    }
}

// ---------------------------------------------------------------------------
// Type identification via an optimistic learner's replay order
// ---------------------------------------------------------------------------

enum ProbeStage {
    FirstPass,
    Replay,
    Exploit,
}

/// Two-pass probe: pass one prices arm k at `θ_k − ε` (half the smallest
/// adjacent gap of Θ ∪ {1/2}) and leaves the remaining arms null; pass two
/// posts all-zero mechanisms. An optimistic learner replays arms in
/// descending order of first-pass performance, so the position of the
/// first *null* arm (the opt-out arm or any unpriced arm) in the replay
/// reveals the type index. Exploitation then charges `θ̂ − ε₀` everywhere.
pub struct UcbProbeExploiter {
    m: u64,
    k_types: usize,
    probe: Arc<Mechanism>,
    null: Arc<Mechanism>,
    exploit: Option<Arc<Mechanism>>,
    inferred: Option<usize>,
    replay: Vec<usize>,
    observed: u64,
    eps0: f64,
    actions: ActionSet,
    types: TypeSpace,
    stage: ProbeStage,
}

impl UcbProbeExploiter {
    /// Requires `|actions| ≥ |Θ| + 1` and `eps0 > 0`.
    pub fn new(eps0: f64, ctx: &EnvContext<'_>) -> Result<Self, ArenaError> {
        if eps0 <= 0.0 {
            return Err(ArenaError::Config(format!(
                "exploitation margin must be positive, got {eps0}"
            )));
        }
        let k_types = ctx.types.len();
        if ctx.actions.count() < k_types + 1 {
            return Err(ArenaError::Config(format!(
                "type probing needs at least {} actions for {} types",
                k_types + 1,
                k_types
            )));
        }
        // Half the smallest adjacent gap keeps every below-type price
        // strictly unprofitable, preserving the replay order.
        let mut min_gap = 0.5 - ctx.types.get(k_types - 1).value();
        for w in ctx.types.values().windows(2) {
            min_gap = min_gap.min(w[1].value() - w[0].value());
        }
        let eps = min_gap / 2.0;
        let count = ctx.actions.count();
        let mut alloc = vec![false; count];
        let mut pay = vec![0.0; count];
        for k in 1..=k_types {
            alloc[k] = true;
            pay[k] = (ctx.types.get(k - 1).value() - eps).max(0.0);
        }
        Ok(Self {
            m: count as u64,
            k_types,
            probe: Arc::new(Mechanism::new(alloc, pay)?),
            null: Arc::new(Mechanism::null(ctx.actions)),
            exploit: None,
            inferred: None,
            replay: Vec::with_capacity(count),
            observed: 0,
            eps0,
            actions: ctx.actions,
            types: ctx.types.clone(),
            stage: ProbeStage::FirstPass,
        })
    }

    /// 1-based index of the inferred type, once known.
    pub fn inferred_type_index(&self) -> Option<usize> {
        self.inferred
    }

    fn is_null_arm(&self, a: usize) -> bool {
        a == 0 || a > self.k_types
    }

    fn infer(&mut self) {
        let first_null = self
            .replay
            .iter()
            .position(|&a| self.is_null_arm(a))
            .map(|pos| pos + 1) // 1-based replay position
            .unwrap_or(self.k_types + 1);
        let k = first_null.saturating_sub(1).clamp(1, self.k_types);
        self.inferred = Some(k);
        let price = (self.types.get(k - 1).value() - self.eps0).max(0.0);
        self.exploit = Some(Arc::new(
            Mechanism::posted_price(self.actions, price)
                .expect("exploitation price is inside the payment range"),
        ));
        self.stage = ProbeStage::Exploit;
    }
}

impl Environment for UcbProbeExploiter {
    fn post(&mut self, _t: u64) -> Arc<Mechanism> {
        match self.stage {
            ProbeStage::FirstPass => Arc::clone(&self.probe),
            ProbeStage::Replay => Arc::clone(&self.null),
            ProbeStage::Exploit => Arc::clone(self.exploit.as_ref().unwrap()),
        }
    }

    fn observe(&mut self, action: usize) {
        self.observed += 1;
        match self.stage {
            ProbeStage::FirstPass => {
                if self.observed == self.m {
                    self.stage = ProbeStage::Replay;
                }
            }
            ProbeStage::Replay => {
                self.replay.push(action);
                if self.observed == 2 * self.m {
                    self.infer();
                }
            }
            ProbeStage::Exploit => {}
        }
    }

    fn phase(&self) -> PhaseTag {
        match self.stage {
            ProbeStage::Exploit => PhaseTag::Exploit,
            _ => PhaseTag::Explore,
        }
    }
}
