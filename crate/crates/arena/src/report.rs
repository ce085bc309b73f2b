//! Result files: fixed-schema CSV rows and a JSON summary document.
//!
//! Floating-point values are printed with 9 significant digits so reruns
//! with the same root seed produce byte-identical files. CSV files are
//! UTF-8 with LF line endings.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::engine::MatchSummary;
use crate::error::ArenaError;
use crate::protocol::PhaseTag;

/// Fixed CSV schema, one row per `(θ, T, run)`.
pub const CSV_HEADER: &str = "experiment_id,learner,environment,theta,T,run,learner_avg,env_avg,er,wer,learner_phase_final,punish_entered";

/// One CSV result row.
#[derive(Debug, Clone)]
pub struct CsvRow {
    /// Experiment or criterion identifier.
    pub experiment_id: String,
    /// Learner spec token.
    pub learner: String,
    /// Environment spec token.
    pub environment: String,
    /// The learner's type in this run.
    pub theta: f64,
    /// Horizon.
    pub horizon: u64,
    /// Run index.
    pub run: u64,
    /// Learner average payoff.
    pub learner_avg: f64,
    /// Environment average payoff.
    pub env_avg: f64,
    /// Realized external regret.
    pub er: f64,
    /// Weak external regret, when defined.
    pub wer: Option<f64>,
    /// Learner phase at the horizon.
    pub learner_phase_final: PhaseTag,
    /// Whether punishment was entered.
    pub punish_entered: bool,
}

/// Formats with 9 significant digits (fixed notation for moderate
/// magnitudes, scientific otherwise).
pub fn fmt_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}

impl CsvRow {
    fn to_line(&self) -> String {
        let mut line = String::new();
        let _ = write!(
            line,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.experiment_id,
            self.learner,
            self.environment,
            fmt_g9(self.theta),
            self.horizon,
            self.run,
            fmt_g9(self.learner_avg),
            fmt_g9(self.env_avg),
            fmt_g9(self.er),
            self.wer.map(fmt_g9).unwrap_or_default(),
            self.learner_phase_final,
            self.punish_entered,
        );
        line
    }
}

/// Writes rows under the fixed header.
pub fn write_csv(path: &Path, rows: &[CsvRow]) -> Result<(), ArenaError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut out = fs::File::create(path)?;
    let mut buf = String::with_capacity(64 * (rows.len() + 1));
    buf.push_str(CSV_HEADER);
    buf.push('\n');
    for row in rows {
        buf.push_str(&row.to_line());
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

/// One `(θ, T)` cell of the JSON summary.
#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    /// The learner's type.
    pub theta: f64,
    /// Horizon.
    pub horizon: u64,
    /// Aggregates over the cell's runs.
    #[serde(flatten)]
    pub summary: MatchSummary,
}

/// JSON summary document for one experiment.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryDoc {
    /// Experiment identifier.
    pub experiment_id: String,
    /// Learner spec token.
    pub learner: String,
    /// Environment spec token.
    pub environment: String,
    /// Root seed after any override.
    pub seed: u64,
    /// Runs per cell.
    pub runs: u64,
    /// Worker threads used.
    pub workers: usize,
    /// Per-`(θ, T)` aggregates.
    pub cells: Vec<CellSummary>,
}

/// Writes the summary as pretty JSON.
pub fn write_summary(path: &Path, doc: &SummaryDoc) -> Result<(), ArenaError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let text = serde_json::to_string_pretty(doc).map_err(ArenaError::Json)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_g9(0.0), "0");
        assert_eq!(fmt_g9(0.3), "0.300000000");
        assert_eq!(fmt_g9(123.456), "123.456000");
        assert_eq!(fmt_g9(-0.05), "-0.0500000000");
        assert_eq!(fmt_g9(1.0e12), "1.00000000e12");
        // representable round trips stay stable
        assert_eq!(fmt_g9(0.214603), "0.214603000");
    }

    #[test]
    fn csv_lines_are_stable() {
        let row = CsvRow {
            experiment_id: "demo".into(),
            learner: "exp3".into(),
            environment: "price:0.1".into(),
            theta: 0.3,
            horizon: 1000,
            run: 7,
            learner_avg: 0.19,
            env_avg: 0.1,
            er: 1.25,
            wer: None,
            learner_phase_final: PhaseTag::None,
            punish_entered: false,
        };
        assert_eq!(
            row.to_line(),
            "demo,exp3,price:0.1,0.300000000,1000,7,0.190000000,0.100000000,1.25000000,,none,false"
        );
    }
}
