//! Command-line front end.
//!
//! ```text
//! arena simulate  --config <file> [--workers N]
//! arena sweep     --config <file> [--workers N]
//! arena reproduce <id|all> [--workers N] [--out DIR]
//! arena list      [--json]
//! ```
//!
//! Exit codes: 0 success, 1 a reproduction check failed, 2 usage or
//! configuration error, 3 I/O error. `ARENA_SEED` overrides the
//! configured root seed.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::config::{load_experiment, Experiment};
use crate::engine::{default_workers, fit_log_log, mix_seed, run_monte_carlo};
use crate::environments::EnvFactory;
use crate::error::ArenaError;
use crate::report::{fmt_g9, write_csv, write_summary, CellSummary, CsvRow, SummaryDoc};
use crate::reproduce::{run_all, run_criterion, CriterionReport, CRITERIA};

#[derive(Parser)]
#[command(
    name = "arena",
    about = "Repeated posted-price games between online learners and adaptive environments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and write CSV + JSON results.
    Simulate {
        /// JSON configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (overrides the config).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Sweep the configured horizons and fit the regret exponent.
    Sweep {
        /// JSON configuration file (horizon must be a list of at least 3).
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (overrides the config).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Re-run a named experiment (or `all`) against its pinned tolerances.
    Reproduce {
        /// Experiment id, or `all`.
        id: String,
        /// Worker threads.
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory for evidence CSVs.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// List learners, environments, and reproducible experiment ids.
    List {
        /// Emit machine-readable JSON.
        #[arg(long)]
        json: bool,
    },
}

/// Parses arguments and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { config, workers } => cmd_simulate(&config, workers),
        Command::Sweep { config, workers } => cmd_sweep(&config, workers),
        Command::Reproduce { id, workers, out } => {
            return match cmd_reproduce(&id, workers.unwrap_or_else(default_workers), &out) {
                Ok(all_pass) => {
                    if all_pass {
                        0
                    } else {
                        1
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            };
        }
        Command::List { json } => {
            cmd_list(json);
            return 0;
        }
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn cmd_simulate(config: &PathBuf, workers: Option<usize>) -> Result<(), ArenaError> {
    let mut exp = load_experiment(config)?;
    if let Some(w) = workers {
        exp.workers = w.max(1);
    }
    let mut rows: Vec<CsvRow> = Vec::new();
    let mut cells = Vec::new();
    let mut cell_index = 0u64;
    for &horizon in &exp.horizons {
        for &theta in &exp.thetas {
            let mc = run_monte_carlo(
                &exp.setup,
                &exp.learner,
                &exp.environment,
                theta,
                horizon,
                exp.runs,
                mix_seed(exp.seed, cell_index),
                exp.workers,
            )?;
            for e in &mc.episodes {
                rows.push(CsvRow {
                    experiment_id: exp.id.clone(),
                    learner: exp.learner.to_string(),
                    environment: exp.environment.label(),
                    theta: theta.value(),
                    horizon,
                    run: e.run,
                    learner_avg: e.learner_avg,
                    env_avg: e.env_avg,
                    er: e.er,
                    wer: e.wer,
                    learner_phase_final: e.final_phase,
                    punish_entered: e.punish_entered,
                });
            }
            print_summary(&exp, theta.value(), horizon, &mc.summary);
            cells.push(CellSummary {
                theta: theta.value(),
                horizon,
                summary: mc.summary,
            });
            cell_index += 1;
        }
    }
    let csv_path = exp.out_dir.join(format!("{}.csv", exp.id));
    write_csv(&csv_path, &rows)?;
    let doc = SummaryDoc {
        experiment_id: exp.id.clone(),
        learner: exp.learner.to_string(),
        environment: exp.environment.label(),
        seed: exp.seed,
        runs: exp.runs,
        workers: exp.workers,
        cells,
    };
    let json_path = exp.out_dir.join(format!("{}_summary.json", exp.id));
    write_summary(&json_path, &doc)?;
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn print_summary(exp: &Experiment, theta: f64, horizon: u64, s: &crate::engine::MatchSummary) {
    println!(
        "{} | {} vs {} | theta={} T={} runs={}",
        exp.id,
        exp.learner,
        exp.environment.label(),
        fmt_g9(theta),
        horizon,
        s.runs
    );
    println!(
        "  learner {} +/- {} | env {} +/- {}",
        fmt_g9(s.learner_avg.mean),
        fmt_g9(s.learner_avg.se),
        fmt_g9(s.env_avg.mean),
        fmt_g9(s.env_avg.se)
    );
    match &s.wer {
        Some(w) => println!(
            "  er {} +/- {} | wer {} +/- {} | punish {}",
            fmt_g9(s.er.mean),
            fmt_g9(s.er.se),
            fmt_g9(w.mean),
            fmt_g9(w.se),
            fmt_g9(s.punish_freq)
        ),
        None => println!(
            "  er {} +/- {} | wer n/a (adaptive environment) | punish {}",
            fmt_g9(s.er.mean),
            fmt_g9(s.er.se),
            fmt_g9(s.punish_freq)
        ),
    }
}

fn cmd_sweep(config: &PathBuf, workers: Option<usize>) -> Result<(), ArenaError> {
    let mut exp = load_experiment(config)?;
    if let Some(w) = workers {
        exp.workers = w.max(1);
    }
    if exp.horizons.len() < 3 {
        return Err(ArenaError::Config(
            "sweep needs a horizon list with at least three entries".into(),
        ));
    }
    let mut rows: Vec<CsvRow> = Vec::new();
    let mut summaries = Vec::new();
    for &theta in &exp.thetas {
        let mut points = Vec::new();
        for (i, &horizon) in exp.horizons.iter().enumerate() {
            let mc = run_monte_carlo(
                &exp.setup,
                &exp.learner,
                &exp.environment,
                theta,
                horizon,
                exp.runs,
                mix_seed(exp.seed, 0x5EED_0000 + i as u64),
                exp.workers,
            )?;
            let wer = mc.summary.wer.ok_or_else(|| {
                ArenaError::Config("rate sweeps need a stationary environment".into())
            })?;
            if wer.mean > 0.0 {
                points.push((horizon as f64, wer.mean));
            } else {
                eprintln!(
                    "warning: nonpositive mean regret {} at horizon {horizon}; dropped from the fit",
                    fmt_g9(wer.mean)
                );
            }
            println!(
                "theta={} T={} wer={} +/- {}",
                fmt_g9(theta.value()),
                horizon,
                fmt_g9(wer.mean),
                fmt_g9(wer.se)
            );
            for e in &mc.episodes {
                rows.push(CsvRow {
                    experiment_id: exp.id.clone(),
                    learner: exp.learner.to_string(),
                    environment: exp.environment.label(),
                    theta: theta.value(),
                    horizon,
                    run: e.run,
                    learner_avg: e.learner_avg,
                    env_avg: e.env_avg,
                    er: e.er,
                    wer: e.wer,
                    learner_phase_final: e.final_phase,
                    punish_entered: e.punish_entered,
                });
            }
            summaries.push(CellSummary {
                theta: theta.value(),
                horizon,
                summary: mc.summary,
            });
        }
        match fit_log_log(&points) {
            Some(slope) => println!(
                "theta={}: fitted exponent {}",
                fmt_g9(theta.value()),
                fmt_g9(slope)
            ),
            None => println!(
                "theta={}: not enough usable points for a fit",
                fmt_g9(theta.value())
            ),
        }
    }
    let csv_path = exp.out_dir.join(format!("{}_sweep.csv", exp.id));
    write_csv(&csv_path, &rows)?;
    let doc = SummaryDoc {
        experiment_id: exp.id.clone(),
        learner: exp.learner.to_string(),
        environment: exp.environment.label(),
        seed: exp.seed,
        runs: exp.runs,
        workers: exp.workers,
        cells: summaries,
    };
    write_summary(&exp.out_dir.join(format!("{}_sweep.json", exp.id)), &doc)?;
    println!("wrote {}", csv_path.display());
    Ok(())
}

fn print_report(report: &CriterionReport) {
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    println!("[{verdict}] {} — {}", report.id, report.title);
    for line in &report.details {
        println!("    {line}");
    }
}

fn cmd_reproduce(id: &str, workers: usize, out: &PathBuf) -> Result<bool, ArenaError> {
    let reports = if id == "all" {
        run_all(workers)?
    } else {
        vec![run_criterion(id, workers)?]
    };
    let mut all_pass = true;
    for report in &reports {
        print_report(report);
        let path = out.join(format!("{}.csv", report.id));
        write_csv(&path, &report.rows)?;
        all_pass &= report.pass;
    }
    let passed = reports.iter().filter(|r| r.pass).count();
    println!("{passed}/{} experiments passed", reports.len());
    Ok(all_pass)
}

const LEARNER_HELP: &[(&str, &str)] = &[
    ("exp3[:eta]", "exponential weights; auto rate sqrt(ln K/(T*K))"),
    ("ue[:t1]", "uniform exploration, then commit to the empirical best"),
    ("se", "successive elimination at confidence radius sqrt(2 ln T/n)"),
    ("ucb", "optimism: play the highest upper confidence bound"),
    ("eep[:t1]", "explore, exploit behind tripwires, punish by opting out"),
    ("esep:<abar>[:eps_p]", "eep plus a type-signaling phase and fallback trade arm"),
    ("const:<index>", "play one action forever"),
    ("doubling:<inner>", "anytime wrapper over geometric epochs"),
];

const ENV_HELP: &[(&str, &str)] = &[
    ("stationary:<file>", "i.i.d. mixture loaded from a JSON file"),
    ("price:<p>", "posted price on every non-opt-out action"),
    ("noer:<eps>", "descending probes, then surplus extraction"),
    ("lockin[:<pe>:<px>[:<w>]]", "raise the price once the learner commits"),
    ("ucbprobe:<eps0>", "identify the type from the replay order, then extract"),
    ("eepbr[:drift]", "best response to eep (monopoly price, optional drift)"),
    ("esepbr:<eps_p>", "best response to esep (reduced-game price or eps_p)"),
];

fn cmd_list(as_json: bool) {
    if as_json {
        let doc = json!({
            "learners": LEARNER_HELP.iter().map(|(t, d)| json!({"token": t, "description": d})).collect::<Vec<_>>(),
            "environments": ENV_HELP.iter().map(|(t, d)| json!({"token": t, "description": d})).collect::<Vec<_>>(),
            "reproduce": CRITERIA.iter().map(|(id, d)| json!({"id": id, "description": d})).collect::<Vec<_>>(),
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("static document"));
        return;
    }
    println!("learners:");
    for (token, desc) in LEARNER_HELP {
        println!("  {token:<24} {desc}");
    }
    println!("environments:");
    for (token, desc) in ENV_HELP {
        println!("  {token:<24} {desc}");
    }
    println!("reproduce ids:");
    for (id, desc) in CRITERIA {
        println!("  {id:<24} {desc}");
    }
}
