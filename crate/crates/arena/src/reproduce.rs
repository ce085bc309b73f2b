//! Desk-scale reproduction suite.
//!
//! Each criterion is a fixed, fully seeded experiment with its tolerances
//! pinned in code. `run_criterion` returns a machine-checkable report; the
//! CLI (`arena reproduce <id|all>`) and the acceptance test target both
//! drive these functions.

use crate::engine::{
    fit_log_log, mix_seed, run_episode, run_monte_carlo, EpisodeStats, GameSetup, MonteCarlo,
};
use crate::environments::{fuzz::PriceRaisingFuzz, EnvFactory, EnvSpec};
use crate::error::ArenaError;
use crate::game::{
    expected_utilities, ActionSet, AgentType, Mechanism, Prior, RunConfig, StationaryStrategy,
    TypeSpace,
};
use crate::learners::{rescale, LearnerSpec};
use crate::report::CsvRow;
use crate::stats::{
    detection_horizon_bound, doubling_constant, extraction_gap, monopoly_price, posted_revenue,
    ps_lower, radius, rate_bound_value, CleanEventTracker, RateBound,
};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Outcome of one reproduction experiment.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    /// Stable identifier.
    pub id: &'static str,
    /// One-line description.
    pub title: &'static str,
    /// Whether every check passed at its pinned tolerance.
    pub pass: bool,
    /// Per-check lines (prefixed `ok:` / `FAIL:`).
    pub details: Vec<String>,
    /// Per-run evidence rows.
    pub rows: Vec<CsvRow>,
}

/// `(id, description)` for every criterion, in run order.
pub const CRITERIA: &[(&str, &str)] = &[
    ("exp3-rate", "exponential weights: regret under the explicit square-root bound, fitted exponent at most 0.60"),
    ("ue-rate", "uniform exploration: fitted regret exponent 0.67 +/- 0.10"),
    ("se-constant", "successive elimination: mean regret under 5*sqrt(K ln T)*sqrt(T)"),
    ("exp3-extraction", "descending price probes extract near-full surplus from exponential weights"),
    ("lockin-unsafe", "lock-in exploitation leaves every type at least 0.15 below full surplus retention"),
    ("ucb-probe", "replay-order probe identifies the type and extracts within its margin"),
    ("eep-equilibrium", "protected exploitation reaches the monopoly-price equilibrium payoffs"),
    ("eep-no-wer", "protected exploitation keeps the two-thirds rate and never punishes stationary prices"),
    ("eep-partial-safety", "no fuzzed price-raising environment extracts near-full surplus uniformly"),
    ("ci-detection", "confidence-funnel exit times respect 2 ln T / gap^2"),
    ("clean-event", "confidence intervals cover true means in at least 99% of runs"),
    ("esep-welfare", "signaling equilibrium is welfare efficient and matches the reduced game"),
    ("consumer-surplus", "aggregate learner payoff approaches mean type minus the revenue floor"),
    ("doubling-trick", "epoch doubling keeps a sublinear rate without knowing the horizon"),
    ("oracle-equivalence", "pricing solvers agree exactly with brute-force enumeration"),
];

/// Runs one criterion by id.
pub fn run_criterion(id: &str, workers: usize) -> Result<CriterionReport, ArenaError> {
    match id {
        "exp3-rate" => exp3_rate(workers),
        "ue-rate" => ue_rate(workers),
        "se-constant" => se_constant(workers),
        "exp3-extraction" => exp3_extraction(workers),
        "lockin-unsafe" => lockin_unsafe(workers),
        "ucb-probe" => ucb_probe(workers),
        "eep-equilibrium" => eep_equilibrium(workers),
        "eep-no-wer" => eep_no_wer(workers),
        "eep-partial-safety" => eep_partial_safety(workers),
        "ci-detection" => ci_detection(),
        "clean-event" => clean_event(workers),
        "esep-welfare" => esep_welfare(workers),
        "consumer-surplus" => consumer_surplus(workers),
        "doubling-trick" => doubling_trick(workers),
        "oracle-equivalence" => oracle_equivalence(),
        _ => {
            let known: Vec<&str> = CRITERIA.iter().map(|(id, _)| *id).collect();
            Err(ArenaError::spec(
                id,
                format!("unknown experiment id; valid ids: {}", known.join(", ")),
            ))
        }
    }
}

/// Runs the whole suite in order.
pub fn run_all(workers: usize) -> Result<Vec<CriterionReport>, ArenaError> {
    CRITERIA
        .iter()
        .map(|(id, _)| run_criterion(id, workers))
        .collect()
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

struct Checks {
    pass: bool,
    details: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            pass: true,
            details: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.details.push(format!("ok: {what}"));
        } else {
            self.pass = false;
            self.details.push(format!("FAIL: {what}"));
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.details.push(what.into());
    }

    fn into_report(
        self,
        id: &'static str,
        rows: Vec<CsvRow>,
    ) -> Result<CriterionReport, ArenaError> {
        let title = CRITERIA
            .iter()
            .find(|(cid, _)| *cid == id)
            .map(|(_, t)| *t)
            .unwrap_or("");
        Ok(CriterionReport {
            id,
            title,
            pass: self.pass,
            details: self.details,
            rows,
        })
    }
}

fn theta(v: f64) -> AgentType {
    AgentType::new(v).expect("criterion types are in range")
}

/// The stationary benchmark mixture: price 0.1 with weight 0.75, price
/// 0.25 with weight 0.25.
fn benchmark_mixture(actions: ActionSet) -> EnvSpec {
    let strategy = StationaryStrategy::new(vec![
        (
            Mechanism::posted_price(actions, 0.1).expect("valid price"),
            0.75,
        ),
        (
            Mechanism::posted_price(actions, 0.25).expect("valid price"),
            0.25,
        ),
    ])
    .expect("valid mixture");
    EnvSpec::Stationary {
        label: "stationary:prices-0.1@0.75-0.25@0.25".to_string(),
        strategy,
    }
}

fn rows_from(
    id: &str,
    learner: &LearnerSpec,
    env_label: &str,
    th: AgentType,
    horizon: u64,
    episodes: &[EpisodeStats],
) -> Vec<CsvRow> {
    episodes
        .iter()
        .map(|e| CsvRow {
            experiment_id: id.to_string(),
            learner: learner.to_string(),
            environment: env_label.to_string(),
            theta: th.value(),
            horizon,
            run: e.run,
            learner_avg: e.learner_avg,
            env_avg: e.env_avg,
            er: e.er,
            wer: e.wer,
            learner_phase_final: e.final_phase,
            punish_entered: e.punish_entered,
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn mc_cell(
    id: &str,
    setup: &GameSetup,
    learner: &LearnerSpec,
    env: &dyn EnvFactory,
    th: AgentType,
    horizon: u64,
    runs: u64,
    seed: u64,
    workers: usize,
    rows: &mut Vec<CsvRow>,
) -> Result<MonteCarlo, ArenaError> {
    let mc = run_monte_carlo(setup, learner, env, th, horizon, runs, seed, workers)?;
    rows.extend(rows_from(id, learner, &env.label(), th, horizon, &mc.episodes));
    Ok(mc)
}

// ---------------------------------------------------------------------------
// Rate criteria
// ---------------------------------------------------------------------------

fn exp3_rate(workers: usize) -> Result<CriterionReport, ArenaError> {
    const SEED: u64 = 0xA1;
    let actions = ActionSet::new(3)?;
    let setup = GameSetup::uniform(actions, TypeSpace::new(&[0.3])?);
    let learner = LearnerSpec::parse("exp3")?;
    let env = benchmark_mixture(actions);
    let th = theta(0.3);
    let bound_c = RateBound::new((2.0 * 3.0 * 3f64.ln()).sqrt(), 0.0, 0.5)?;

    let mut checks = Checks::new();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for (i, exp) in (8..=14).enumerate() {
        let horizon = 1u64 << exp;
        let mc = mc_cell(
            "exp3-rate",
            &setup,
            &learner,
            &env,
            th,
            horizon,
            200,
            mix_seed(SEED, i as u64),
            workers,
            &mut rows,
        )?;
        let wer = mc.summary.wer.expect("stationary benchmark").mean;
        let bound = 2.0 * rate_bound_value(&bound_c, horizon)?;
        checks.require(
            wer <= bound,
            format!("T={horizon}: measured regret {wer:.2} <= 2x bound {bound:.2}"),
        );
        points.push((horizon as f64, wer));
    }
    let slope = fit_log_log(&points).unwrap_or(f64::NAN);
    checks.require(
        slope <= 0.60,
        format!("fitted exponent {slope:.3} <= 0.60"),
    );
    checks.into_report("exp3-rate", rows)
}

fn ue_rate(workers: usize) -> Result<CriterionReport, ArenaError> {
    const SEED: u64 = 0xA2;
    let actions = ActionSet::new(3)?;
    let setup = GameSetup::uniform(actions, TypeSpace::new(&[0.3])?);
    let learner = LearnerSpec::parse("ue")?;
    let env = benchmark_mixture(actions);
    let th = theta(0.3);

    let mut checks = Checks::new();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for (i, exp) in (8..=14).enumerate() {
        let horizon = 1u64 << exp;
        let mc = mc_cell(
            "ue-rate",
            &setup,
            &learner,
            &env,
            th,
            horizon,
            200,
            mix_seed(SEED, i as u64),
            workers,
            &mut rows,
        )?;
        points.push((horizon as f64, mc.summary.wer.expect("stationary").mean));
    }
    let slope = fit_log_log(&points).unwrap_or(f64::NAN);
    checks.require(
        (0.57..=0.77).contains(&slope),
        format!("fitted exponent {slope:.3} within 0.67 +/- 0.10"),
    );
    checks.into_report("ue-rate", rows)
}

fn se_constant(workers: usize) -> Result<CriterionReport, ArenaError> {
    const SEED: u64 = 0xA3;
    let actions = ActionSet::new(4)?;
    let setup = GameSetup::uniform(actions, TypeSpace::new(&[0.3])?);
    let learner = LearnerSpec::parse("se")?;
    let env = benchmark_mixture(actions);
    let th = theta(0.3);
    let horizon = 10_000u64;

    let mut checks = Checks::new();
    let mut rows = Vec::new();
    let mc = mc_cell(
        "se-constant",
        &setup,
        &learner,
        &env,
        th,
        horizon,
        200,
        SEED,
        workers,
        &mut rows,
    )?;
    let wer = mc.summary.wer.expect("stationary").mean;
    let bound = rate_bound_value(&RateBound::new(5.0 * 2.0, 0.5, 0.5)?, horizon)?;
    checks.require(
        wer <= bound,
        format!("mean regret {wer:.2} <= 5*sqrt(K ln T)*sqrt(T) = {bound:.2}"),
    );
    checks.into_report("se-constant", rows)
}

// ---------------------------------------------------------------------------
// Exploitation criteria
// ---------------------------------------------------------------------------

fn exp3_extraction(workers: usize) -> Result<CriterionReport, ArenaError> {
    const SEED: u64 = 0xA4;
    let actions = ActionSet::new(2)?;
    let types = TypeSpace::new(&[0.1, 0.3, 0.45])?;
    let setup = GameSetup::uniform(actions, types.clone());
    let learner = LearnerSpec::parse("exp3")?;
    let env = EnvSpec::parse("noer:0.2")?;
    let eps = 0.2;

    let mut checks = Checks::new();
    let mut rows = Vec::new();
    for (k, t) in types.values().iter().enumerate() {
        let big = mc_cell(
            "exp3-extraction",
            &setup,
            &learner,
            &env,
            *t,
            200_000,
            50,
            mix_seed(SEED, k as u64),
            workers,
            &mut rows,
        )?;
        let small = mc_cell(
            "exp3-extraction",
            &setup,
            &learner,
            &env,
            *t,
            20_000,
            50,
            mix_seed(SEED, 100 + k as u64),
            workers,
            &mut rows,
        )?;
        let floor = (1.0 - eps) * t.value() - 0.05;
        checks.require(
            big.summary.env_avg.mean >= floor,
            format!(
                "theta={}: extraction {:.4} >= (1-eps)*theta - 0.05 = {:.4}",
                t.value(),
                big.summary.env_avg.mean,
                floor
            ),
        );
        checks.require(
            big.summary.env_avg.mean > small.summary.env_avg.mean,
            format!(
                "theta={}: extraction grows with the horizon ({:.4} at 2e5 > {:.4} at 2e4)",
                t.value(),
                big.summary.env_avg.mean,
                small.summary.env_avg.mean
            ),
        );
    }
    checks.into_report("exp3-extraction", rows)
}

fn lockin_unsafe(workers: usize) -> Result<CriterionReport, ArenaError> {
    const SEED: u64 = 0xA5;
    let actions = ActionSet::new(2)?;
    let types = TypeSpace::new(&[0.1, 0.3])?;
    let setup = GameSetup::uniform(actions, types.clone());
    let env = EnvSpec::Lockin {
        p_explore: 0.0,
        p_exploit: 0.5,
        window: 50,
    };
    let horizon = 100_000u64;
    let retention = types.get(types.len() - 1).value() - 0.45; // max theta - 0.45

    let mut checks = Checks::new();
    let mut rows = Vec::new();
    for (li, token) in ["ue", "se"].iter().enumerate() {
        let learner = LearnerSpec::parse(token)?;
        let mut env_by_type = Vec::new();
        for (k, t) in types.values().iter().enumerate() {
            let mc = mc_cell(
                "lockin-unsafe",
                &setup,
                &learner,
                &env,
                *t,
                horizon,
                50,
                mix_seed(SEED, (k + 10 * (li + 1)) as u64),
                workers,
                &mut rows,
            )?;
            env_by_type.push(mc.summary.env_avg.mean);
        }
        let gap = extraction_gap(&env_by_type, &types)?;
        checks.require(
            gap <= retention,
            format!(
                "{token}: extraction gap {gap:.4} <= max theta - 0.45 = {retention:.4} \
                 (per-type extraction {env_by_type:.4?})"
            ),
        );
    }
    checks.into_report("lockin-unsafe", rows)
}

fn ucb_probe(workers: usize) -> Result<CriterionReport, ArenaError> {
    const SEED: u64 = 0xA6;
    let _ = workers; // episodes are cheap and inspected one by one
    let actions = ActionSet::new(5)?;
    let types = TypeSpace::new(&[0.1, 0.2, 0.3])?;
    let setup = GameSetup::uniform(actions, types.clone());
    let learner = LearnerSpec::parse("ucb")?;
    let env = EnvSpec::parse("ucbprobe:0.02")?;
    let horizon = 100_000u64;
    let eps0 = 0.02;

    let mut checks = Checks::new();
    let mut rows = Vec::new();
    for (k, t) in types.values().iter().enumerate() {
        let mut correct = 0u32;
        let mut env_avgs = Vec::new();
        let mut episodes = Vec::new();
        for run in 0..100u64 {
            let cfg = RunConfig::new(
                horizon,
                mix_seed(SEED, k as u64 * 1000 + run),
                *t,
                actions.count(),
            )?;
            let traj = run_episode(&setup, &learner, &env, &cfg)?;
            let final_price = traj.mechanism(horizon as usize).pay(1);
            if (final_price - (t.value() - eps0)).abs() < 1e-9 {
                correct += 1;
            }
            let env_avg = traj.env_total() / horizon as f64;
            env_avgs.push(env_avg);
            episodes.push(EpisodeStats {
                run,
                learner_avg: traj.learner_total() / horizon as f64,
                env_avg,
                er: traj.external_regret(),
                wer: None,
                final_phase: traj.final_phase(),
                punish_entered: traj.punish_entered(),
            });
        }
        rows.extend(rows_from("ucb-probe", &learner, &env.label(), *t, horizon, &episodes));
        let mean_env = env_avgs.iter().sum::<f64>() / env_avgs.len() as f64;
        checks.require(
            correct >= 99,
            format!("theta={}: inferred type correct in {correct}/100 runs", t.value()),
        );
        checks.require(
            mean_env >= t.value() - eps0 - 0.02,
            format!(
                "theta={}: extraction {:.4} >= theta - {eps0} - 0.02 = {:.4}",
                t.value(),
                mean_env,
                t.value() - eps0 - 0.02
            ),
        );
    }
    checks.into_report("ucb-probe", rows)
}

fn eep_equilibrium(workers: usize) -> Result<CriterionReport, ArenaError> {
    const SEED: u64 = 0xA7;
    let actions = ActionSet::new(2)?;
    let types = TypeSpace::new(&[0.1, 0.3])?;
    let setup = GameSetup::uniform(actions, types.clone());
    let learner = LearnerSpec::parse("eep")?;
    let env = EnvSpec::parse("eepbr")?;
    let horizon = 1_000_000u64;

    let mut checks = Checks::new();
    let p_star = monopoly_price(&setup.prior, &types)?.value();
    checks.require(
        p_star == 0.3,
        format!("monopoly price under the uniform belief is {p_star}"),
    );

    let mut rows = Vec::new();
    for (k, t) in types.values().iter().enumerate() {
        let mc = mc_cell(
            "eep-equilibrium",
            &setup,
            &learner,
            &env,
            *t,
            horizon,
            20,
            mix_seed(SEED, k as u64),
            workers,
            &mut rows,
        )?;
        let ind = if t.value() >= p_star { 1.0 } else { 0.0 };
        let env_err = (mc.summary.env_avg.mean - ind * p_star).abs();
        let learner_err = (mc.summary.learner_avg.mean - ind * (t.value() - p_star)).abs();
        checks.require(
            env_err <= 0.02,
            format!(
                "theta={}: |env {:.4} - {:.2}| = {env_err:.4} <= 0.02",
                t.value(),
                mc.summary.env_avg.mean,
                ind * p_star
            ),
        );
        checks.require(
            learner_err <= 0.02,
            format!(
                "theta={}: |learner {:.4} - {:.2}| = {learner_err:.4} <= 0.02",
                t.value(),
                mc.summary.learner_avg.mean,
                ind * (t.value() - p_star)
            ),
        );
    }
    checks.into_report("eep-equilibrium", rows)
}

fn eep_no_wer(workers: usize) -> Result<CriterionReport, ArenaError> {
    const SEED: u64 = 0xA8;
    let actions = ActionSet::new(2)?;
    let setup = GameSetup::uniform(actions, TypeSpace::new(&[0.3])?);
    let learner = LearnerSpec::parse("eep")?;
    let env = EnvSpec::parse("price:0.1")?;
    let th = theta(0.3);

    let mut checks = Checks::new();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for (i, exp) in (12..=16).enumerate() {
        let horizon = 1u64 << exp;
        let mc = mc_cell(
            "eep-no-wer",
            &setup,
            &learner,
            &env,
            th,
            horizon,
            10,
            mix_seed(SEED, i as u64),
            workers,
            &mut rows,
        )?;
        points.push((horizon as f64, mc.summary.wer.expect("stationary").mean));
    }
    let slope = fit_log_log(&points).unwrap_or(f64::NAN);
    checks.require(
        slope <= 0.75,
        format!("fitted regret exponent {slope:.3} <= 0.75"),
    );

    let quiet = mc_cell(
        "eep-no-wer",
        &setup,
        &learner,
        &env,
        th,
        2000,
        500,
        mix_seed(SEED, 99),
        workers,
        &mut rows,
    )?;
    checks.require(
        quiet.summary.punish_freq <= 0.01,
        format!(
            "punishment frequency {:.4} <= 0.01 over 500 runs at T=2000",
            quiet.summary.punish_freq
        ),
    );
    checks.into_report("eep-no-wer", rows)
}

fn eep_partial_safety(workers: usize) -> Result<CriterionReport, ArenaError> {
    const SEED: u64 = 0xA9;
    let _ = workers;
    let actions = ActionSet::new(2)?;
    let types = TypeSpace::new(&[0.1, 0.3])?;
    let setup = GameSetup::uniform(actions, types.clone());
    let learner = LearnerSpec::parse("eep")?;
    let horizon = 100_000u64;

    let mut checks = Checks::new();
    let mut rows = Vec::new();
    let mut min_gap = f64::INFINITY;
    for fuzz in 0..50u64 {
        let env = PriceRaisingFuzz::new(mix_seed(SEED, fuzz));
        let mut env_by_type = Vec::new();
        for t in types.values() {
            let cfg = RunConfig::new(horizon, mix_seed(SEED, 1000 + fuzz), *t, 2)?;
            let traj = run_episode(&setup, &learner, &env, &cfg)?;
            let env_avg = traj.env_total() / horizon as f64;
            env_by_type.push(env_avg);
            rows.push(CsvRow {
                experiment_id: "eep-partial-safety".to_string(),
                learner: learner.to_string(),
                environment: env.label(),
                theta: t.value(),
                horizon,
                run: fuzz,
                learner_avg: traj.learner_total() / horizon as f64,
                env_avg,
                er: traj.external_regret(),
                wer: None,
                learner_phase_final: traj.final_phase(),
                punish_entered: traj.punish_entered(),
            });
        }
        let gap = extraction_gap(&env_by_type, &types)?;
        min_gap = min_gap.min(gap);
        if gap < 0.05 {
            checks.require(
                false,
                format!("fuzz seed {fuzz}: extraction gap {gap:.4} >= 0.05"),
            );
        }
    }
    checks.require(
        min_gap >= 0.05,
        format!("smallest extraction gap across 50 fuzzed environments {min_gap:.4} >= 0.05"),
    );
    checks.into_report("eep-partial-safety", rows)
}

// ---------------------------------------------------------------------------
// Property criteria
// ---------------------------------------------------------------------------

fn ci_detection() -> Result<CriterionReport, ArenaError> {
    const SEED: u64 = 0xAA;
    let mut checks = Checks::new();
    let mut violations = 0u32;
    let mut instances = 0u64;
    for iter in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(SEED, iter));
        let horizon = rng.gen_range(10u64..20_000);
        let t0 = rng.gen_range(2usize..400);
        let mut sum = 0.0;
        let mut upper_env = f64::INFINITY;
        let mut lower_env = f64::NEG_INFINITY;
        for s in 1..=t0 {
            let c: f64 = rng.gen();
            sum += c;
            let mean = sum / s as f64;
            let rho = radius(s as u64, horizon).expect("s >= 1");
            upper_env = upper_env.min(mean + rho);
            lower_env = lower_env.max(mean - rho);
            // Upper variant: the running mean stayed inside the funnel up
            // to s, and ends delta below the tightest barrier.
            let delta = upper_env - mean;
            if delta > 1e-9 {
                instances += 1;
                if s as f64 > detection_horizon_bound(delta, horizon)? + 1e-6 {
                    violations += 1;
                }
            }
            // Mirrored variant.
            let delta = mean - lower_env;
            if delta > 1e-9 {
                instances += 1;
                if s as f64 > detection_horizon_bound(delta, horizon)? + 1e-6 {
                    violations += 1;
                }
            }
        }
    }
    checks.require(
        violations == 0,
        format!("0 violations over {instances} funnel-exit instances (got {violations})"),
    );
    checks.into_report("ci-detection", Vec::new())
}

fn clean_event(workers: usize) -> Result<CriterionReport, ArenaError> {
    const SEED: u64 = 0xAB;
    let _ = workers;
    let actions = ActionSet::new(3)?;
    let setup = GameSetup::uniform(actions, TypeSpace::new(&[0.3])?);
    let learner = LearnerSpec::parse("se")?;
    let env = benchmark_mixture(actions);
    let th = theta(0.3);
    let horizon = 2000u64;
    let strategy = env
        .stationary_strategy(actions)
        .expect("benchmark is stationary");
    let true_means: Vec<f64> = expected_utilities(&strategy, th)
        .into_iter()
        .map(rescale)
        .collect();

    let mut violated_runs = 0u32;
    let runs = 500u64;
    for run in 0..runs {
        let cfg = RunConfig::new(horizon, mix_seed(SEED, run), th, actions.count())?;
        let traj = run_episode(&setup, &learner, &env, &cfg)?;
        let mut tracker = CleanEventTracker::new(true_means.clone(), horizon);
        for t in 1..=traj.len() {
            let o = traj.outcome(t);
            tracker.observe(o.action, rescale(o.payoff_u(th)));
        }
        if tracker.violated() {
            violated_runs += 1;
        }
    }
    let freq = violated_runs as f64 / runs as f64;
    let mut checks = Checks::new();
    checks.require(
        freq <= 0.01,
        format!("coverage violation frequency {freq:.4} <= 0.01 over {runs} runs"),
    );
    checks.into_report("clean-event", Vec::new())
}

// ---------------------------------------------------------------------------
// Welfare criteria
// ---------------------------------------------------------------------------

fn esep_welfare(workers: usize) -> Result<CriterionReport, ArenaError> {
    const SEED: u64 = 0xAC;
    let actions = ActionSet::new(2)?;
    let types = TypeSpace::new(&[0.1, 0.3])?;
    let setup = GameSetup::uniform(actions, types.clone());
    let learner = LearnerSpec::parse("esep:1")?;
    let eps_p = 0.01;
    let env = EnvSpec::EsepBr { eps_p };
    let horizon = 1_000_000u64;
    let solution = crate::environments::reduced_game_solve(&setup.prior, &types, eps_p)?;

    let mut checks = Checks::new();
    checks.note(format!(
        "reduced game: price {}, environment value {:.4}",
        solution.price.value(),
        solution.env_value
    ));
    let mut rows = Vec::new();
    let mut env_aggregate = 0.0;
    for (k, t) in types.values().iter().enumerate() {
        let mc = mc_cell(
            "esep-welfare",
            &setup,
            &learner,
            &env,
            *t,
            horizon,
            20,
            mix_seed(SEED, k as u64),
            workers,
            &mut rows,
        )?;
        let welfare = mc.summary.learner_avg.mean + mc.summary.env_avg.mean;
        checks.require(
            (welfare - t.value()).abs() <= 0.02,
            format!(
                "theta={}: |welfare {:.4} - theta| <= 0.02",
                t.value(),
                welfare
            ),
        );
        let cs_err = (mc.summary.learner_avg.mean - solution.learner_values[k]).abs();
        checks.require(
            cs_err <= 0.02,
            format!(
                "theta={}: consumer surplus {:.4} within 0.02 of the reduced game's {:.4}",
                t.value(),
                mc.summary.learner_avg.mean,
                solution.learner_values[k]
            ),
        );
        env_aggregate += setup.prior.weight(k) * mc.summary.env_avg.mean;
    }
    checks.require(
        (env_aggregate - solution.env_value).abs() <= 0.02,
        format!(
            "aggregate extraction {env_aggregate:.4} within 0.02 of the objective {:.4}",
            solution.env_value
        ),
    );
    checks.into_report("esep-welfare", rows)
}

fn consumer_surplus(workers: usize) -> Result<CriterionReport, ArenaError> {
    const SEED: u64 = 0xAD;
    let actions = ActionSet::new(2)?;
    let types = TypeSpace::new(&[0.1, 0.3])?;
    let setup = GameSetup::uniform(actions, types.clone());
    let learner = LearnerSpec::parse("esep:1")?;
    let eps_p = 0.005;
    let env = EnvSpec::EsepBr { eps_p };
    let horizon = 1_000_000u64;

    let mean_type: f64 = types
        .values()
        .iter()
        .enumerate()
        .map(|(k, t)| setup.prior.weight(k) * t.value())
        .sum();
    let floor = ps_lower(&setup.prior, &types)?;
    let target = mean_type - floor;

    let mut checks = Checks::new();
    let mut rows = Vec::new();
    let mut learner_aggregate = 0.0;
    for (k, t) in types.values().iter().enumerate() {
        let mc = mc_cell(
            "consumer-surplus",
            &setup,
            &learner,
            &env,
            *t,
            horizon,
            20,
            mix_seed(SEED, k as u64),
            workers,
            &mut rows,
        )?;
        learner_aggregate += setup.prior.weight(k) * mc.summary.learner_avg.mean;
    }
    checks.require(
        (learner_aggregate - target).abs() <= 0.02,
        format!(
            "aggregate learner payoff {learner_aggregate:.4} within 0.02 of \
             E[theta] - revenue floor = {target:.4}"
        ),
    );
    checks.into_report("consumer-surplus", rows)
}

// ---------------------------------------------------------------------------
// Anytime and oracle criteria
// ---------------------------------------------------------------------------

fn doubling_trick(workers: usize) -> Result<CriterionReport, ArenaError> {
    const SEED: u64 = 0xAE;
    let actions = ActionSet::new(2)?;
    let setup = GameSetup::uniform(actions, TypeSpace::new(&[0.3])?);
    let learner = LearnerSpec::parse("doubling:ue")?;
    let env = benchmark_mixture(actions);
    let th = theta(0.3);

    let mut checks = Checks::new();
    let mut rows = Vec::new();
    let mut points = Vec::new();
    for (i, exp) in (10..=14).enumerate() {
        let horizon = 1u64 << exp;
        let mc = mc_cell(
            "doubling-trick",
            &setup,
            &learner,
            &env,
            th,
            horizon,
            100,
            mix_seed(SEED, i as u64),
            workers,
            &mut rows,
        )?;
        points.push((horizon as f64, mc.summary.wer.expect("stationary").mean));
    }
    let slope = fit_log_log(&points).unwrap_or(f64::NAN);
    checks.require(
        slope <= 0.85,
        format!("fitted regret exponent {slope:.3} <= 0.85 without knowing the horizon"),
    );

    // Anytime constant: independent recomputation to 12 digits.
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let c = rng.gen_range(0.01..50.0);
        let delta = rng.gen_range(0.0..0.999);
        let gamma = rng.gen_range(0.05..0.95);
        let b = RateBound::new(c, delta, gamma)?;
        let lib = doubling_constant(&b);
        let independent = 2f64.powf(delta) * (2f64.powf(gamma + 1.0) / (2f64.powf(gamma) - 1.0)) * c;
        let rel = (lib - independent).abs() / independent.abs();
        worst = worst.max(rel);
    }
    checks.require(
        worst <= 1e-12,
        format!("anytime constant matches independent recomputation, worst relative error {worst:.2e}"),
    );
    checks.into_report("doubling-trick", rows)
}

fn oracle_equivalence() -> Result<CriterionReport, ArenaError> {
    const SEED: u64 = 0xAF;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checks = Checks::new();
    let mut all_exact = true;
    for _ in 0..100 {
        let k = rng.gen_range(1usize..=7);
        let mut vals: Vec<f64> = (0..k).map(|_| rng.gen_range(0.001..0.499)).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup_by(|a, b| (*a - *b).abs() < 1e-4);
        let types = match TypeSpace::new(&vals) {
            Ok(ts) => ts,
            Err(_) => continue,
        };
        let raw: Vec<f64> = (0..types.len()).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let pi = Prior::new(&weights, &types)?;
        let eps_p = rng.gen_range(1e-4..1e-2);

        // Brute force, written independently of the library path: direct
        // nested loops with the same weak inequality and the shared sup
        // tie-break (within 1e-12 relative, later index wins).
        let mass_at = |p: f64| {
            let mut mass = 0.0;
            for (j, u) in types.values().iter().enumerate() {
                if u.value() >= p {
                    mass += pi.weight(j);
                }
            }
            mass
        };
        let pick = |vals: &[f64]| {
            let mut best = 0usize;
            for (i, v) in vals.iter().enumerate() {
                let tol = 1e-12 * vals[best].abs().max(1.0);
                if *v > vals[best] + tol || (*v - vals[best]).abs() <= tol {
                    best = i;
                }
            }
            best
        };
        let revenues: Vec<f64> = types
            .values()
            .iter()
            .map(|t| t.value() * mass_at(t.value()))
            .collect();
        let b_mono = pick(&revenues);
        let brute_price = types.get(b_mono);
        let brute_ps = brute_price.value() * mass_at(brute_price.value());

        let objectives: Vec<f64> = types
            .values()
            .iter()
            .map(|t| {
                let m = mass_at(t.value());
                t.value() * m + eps_p * (1.0 - m)
            })
            .collect();
        let b_game = pick(&objectives);

        let lib_price = monopoly_price(&pi, &types)?;
        let lib_ps = ps_lower(&pi, &types)?;
        let lib_game = crate::environments::reduced_game_solve(&pi, &types, eps_p)?;
        if lib_price.value() != brute_price.value()
            || lib_ps != brute_ps
            || lib_game.price.value() != types.get(b_game).value()
            || lib_game.env_value != objectives[b_game]
        {
            all_exact = false;
        }
        let p_star = types.get(b_game).value();
        for (i, t) in types.values().iter().enumerate() {
            let expect = if t.value() >= p_star {
                t.value() - p_star
            } else {
                t.value() - eps_p
            };
            if lib_game.learner_values[i] != expect {
                all_exact = false;
            }
        }
        // revenue dominance, recomputed directly
        for t in types.values() {
            if posted_revenue(lib_price.value(), &pi, &types)
                < posted_revenue(t.value(), &pi, &types) - 1e-12
            {
                all_exact = false;
            }
        }
    }
    checks.require(
        all_exact,
        "monopoly price, revenue floor, and reduced game agree exactly with brute force \
         on 100 random instances",
    );
    checks.into_report("oracle-equivalence", Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique_and_dispatch() {
        let mut seen = std::collections::HashSet::new();
        for (id, _) in CRITERIA {
            assert!(seen.insert(*id), "duplicate id {id}");
        }
        assert!(run_criterion("nope", 1).is_err());
    }

    #[test]
    fn fast_criteria_pass() {
        let r = run_criterion("ci-detection", 1).unwrap();
        assert!(r.pass, "{:?}", r.details);
        let r = run_criterion("oracle-equivalence", 1).unwrap();
        assert!(r.pass, "{:?}", r.details);
    }
}
