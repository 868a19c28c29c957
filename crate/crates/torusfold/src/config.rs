//! Experiment configuration: a flat `key = value` text file with array
//! syntax `a = [1, 1, 1]`. The format is a subset of TOML and is parsed as
//! such, so quoting and comments behave the usual way.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{BernsteinConstant, GridPolicy, DEFAULT_GRID_BUDGET};
use crate::sampling::CoeffDistribution;
use crate::spectrum::{suggest_tau, BoxSpec, FoldingSeq, DEFAULT_ENUMERATION_CAP};

/// Everything a run needs; every field has a default so a config file may
/// set only what it cares about.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Per-axis box bounds `a_k >= 0`.
    pub a: Vec<u64>,
    /// Folding sequence; empty means "construct one via `target_tail`".
    pub tau: Vec<i64>,
    /// Tail-sum budget used when `tau` is empty.
    pub target_tail: f64,
    /// Coefficient distribution: "gaussian", "unimodular" or "sparse".
    pub dist: String,
    /// Mode count for the "sparse" distribution.
    pub sparse_k: usize,
    pub seed: u64,
    pub draws: usize,
    pub eps: f64,
    /// Enumeration cap for box scans.
    pub cap: u64,
    /// Bernstein constant: "2pi" (sound) or "paper".
    pub cb: String,
    /// Slab count for the step-approximation checks.
    pub n_slabs: usize,
    /// Part count for the modulation checks.
    pub parts: usize,
    /// Structured report destination; empty means stdout.
    pub out: String,
    /// Flat CSV table destination; empty means none.
    pub csv: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            a: vec![1, 1],
            tau: Vec::new(),
            target_tail: 0.5,
            dist: "gaussian".to_string(),
            sparse_k: 4,
            seed: 0,
            draws: 20,
            eps: 1e-2,
            cap: DEFAULT_ENUMERATION_CAP as u64,
            cb: "2pi".to_string(),
            n_slabs: 16,
            parts: 3,
            out: String::new(),
            csv: String::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.is_empty() {
            return Err(Error::Config("a must be a nonempty array".into()));
        }
        if !self.tau.is_empty() && self.tau.len() != self.a.len() {
            return Err(Error::Config(format!(
                "tau has {} entries but a has {}",
                self.tau.len(),
                self.a.len()
            )));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.target_tail > 0.0) {
            return Err(Error::Config(format!(
                "target_tail must be positive, got {}",
                self.target_tail
            )));
        }
        if self.n_slabs == 0 {
            return Err(Error::Config("n_slabs must be at least 1".into()));
        }
        if self.parts == 0 {
            return Err(Error::Config("parts must be at least 1".into()));
        }
        self.distribution()?;
        self.bernstein()?;
        Ok(())
    }

    pub fn box_spec(&self) -> Result<BoxSpec> {
        BoxSpec::new(self.a.clone())
    }

    /// The configured sequence, or a constructed one when `tau` is empty.
    pub fn folding_seq(&self) -> Result<FoldingSeq> {
        if self.tau.is_empty() {
            suggest_tau(&self.box_spec()?, self.target_tail)
        } else {
            FoldingSeq::new(self.tau.clone())
        }
    }

    pub fn distribution(&self) -> Result<CoeffDistribution> {
        match self.dist.as_str() {
            "gaussian" | "sparse" => Ok(CoeffDistribution::ComplexGaussian),
            "unimodular" => Ok(CoeffDistribution::UnimodularPhase),
            other => Err(Error::Config(format!(
                "unknown distribution {other:?}; expected gaussian, unimodular or sparse"
            ))),
        }
    }

    pub fn is_sparse(&self) -> bool {
        self.dist == "sparse"
    }

    pub fn bernstein(&self) -> Result<BernsteinConstant> {
        match self.cb.as_str() {
            "2pi" => Ok(BernsteinConstant::TwoPi),
            "paper" => Ok(BernsteinConstant::PaperStated),
            other => Err(Error::Config(format!(
                "unknown Bernstein constant {other:?}; expected 2pi or paper"
            ))),
        }
    }

    pub fn grid_policy(&self) -> Result<GridPolicy> {
        Ok(GridPolicy {
            bernstein: self.bernstein()?,
            budget: DEFAULT_GRID_BUDGET,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_key_value_with_arrays() {
        let cfg = ExperimentConfig::from_str(
            "a = [1, 1, 1]\ntau = [1, 3, 9]\neps = 0.05\nseed = 7\ndraws = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.a, vec![1, 1, 1]);
        assert_eq!(cfg.tau, vec![1, 3, 9]);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.draws, 3);
    }

    #[test]
    fn round_trips_through_text() {
        let mut cfg = ExperimentConfig::default();
        cfg.a = vec![2, 0, 1];
        cfg.dist = "sparse".into();
        cfg.csv = "runs.csv".into();
        let again = ExperimentConfig::from_str(&cfg.to_text()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::from_str("nonsense = 1\n").is_err());
        assert!(ExperimentConfig::from_str("a = []\n").is_err());
        assert!(ExperimentConfig::from_str("a = [1]\neps = -0.5\n").is_err());
        assert!(ExperimentConfig::from_str("a = [1]\ntau = [1, 5]\n").is_err());
        assert!(ExperimentConfig::from_str("a = [1]\ndist = \"cauchy\"\n").is_err());
        assert!(ExperimentConfig::from_str("a = [1]\ncb = \"pi\"\n").is_err());
    }

    #[test]
    fn empty_tau_constructs_a_sequence() {
        let cfg = ExperimentConfig::from_str("a = [1, 1]\ntarget_tail = 0.5\n").unwrap();
        let taus = cfg.folding_seq().unwrap();
        assert_eq!(taus.len(), 2);
    }
}
