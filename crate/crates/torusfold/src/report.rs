//! Structured run reports: one self-describing text file (key-value with
//! nested arrays, a TOML subset) plus an optional flat CSV table.
//!
//! Reports embed the full config, so re-running from the echoed config
//! reproduces them byte for byte, except for the `timestamp` line.

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

/// One chain verification run.
#[derive(Clone, Debug, Serialize)]
pub struct DrawRecord {
    pub draw: usize,
    pub seed: u64,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub k_final: f64,
    pub vacuous: bool,
    pub passed: bool,
}

/// One measured inequality from the lemma harness.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaRecord {
    pub draw: usize,
    pub seed: u64,
    /// Which bound: "step_approx", "part_sum_lower", "part_sum_upper",
    /// "modulation_exchange" or "modulation_identity".
    pub kind: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub vacuous: bool,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub vacuous: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub min_slack: f64,
    pub max_identity_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report<R: Serialize> {
    /// Excluded from the determinism contract.
    pub timestamp: String,
    pub version: String,
    /// Bernstein constant actually used.
    pub c_b: f64,
    pub config: ExperimentConfig,
    pub summary: Summary,
    pub records: Vec<R>,
}

impl<R: Serialize> Report<R> {
    pub fn new(config: &ExperimentConfig, c_b: f64, records: Vec<R>, summary: Summary) -> Self {
        Report {
            timestamp: now_utc(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            c_b,
            config: config.clone(),
            summary,
            records,
        }
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }

    /// Writes the text form to `config.out`, or stdout when unset.
    pub fn write_out(&self) -> Result<()> {
        let text = self.to_text();
        if self.config.out.is_empty() {
            print!("{text}");
        } else {
            std::fs::write(&self.config.out, text)?;
        }
        Ok(())
    }
}

impl Report<DrawRecord> {
    /// Writes the flat table, one row per draw.
    pub fn write_csv(&self, path: &str) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(["draw", "seed", "ratio", "lower", "upper", "passed"])
            .map_err(csv_err)?;
        for r in &self.records {
            w.write_record([
                r.draw.to_string(),
                r.seed.to_string(),
                r.ratio.to_string(),
                r.lower.to_string(),
                r.upper.to_string(),
                r.passed.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

/// Drops the timestamp line so two runs of the same config compare equal.
pub fn strip_timestamp(report_text: &str) -> String {
    report_text
        .lines()
        .filter(|l| !l.starts_with("timestamp = "))
        .collect::<Vec<_>>()
        .join("\n")
}

fn now_utc() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("{secs} (unix)")
}
