//! Run configuration: a TOML document with `model` and `optimizer`
//! sections plus the evaluation grid and output settings.

use std::fmt;
use std::path::{Path, PathBuf};

use fixdepth_core::models::{ModelName, ModelSpec};
use fixdepth_core::optimize::OptimizerOptions;
use fixdepth_core::zassenhaus::CoefficientSet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::failure::{FailureKind, Stage, StageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    /// Zassenhaus order of the ansatz, 1..=4.
    pub order: usize,
    pub coefficients: CoefficientSet,
    pub optimizer: OptimizerOptions,
    pub t_max: f64,
    pub t_points: usize,
    /// Time at which benchmark tables report the error.
    pub table_t: f64,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
    /// Terms added to the model Hamiltonian.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub extra_terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub label: String,
    pub coefficient: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelSpec::new(ModelName::Tfim, 4),
            order: 2,
            coefficients: CoefficientSet::Standard,
            optimizer: OptimizerOptions::default(),
            t_max: 200.0,
            t_points: 101,
            table_t: 20.0,
            output_dir: PathBuf::from("runs"),
            formats: vec![Format::Csv, Format::Json],
            extra_terms: vec![],
        }
    }
}

/// Optimizer settings used by `benchmark` when no config file is given:
/// a tight gradient tolerance so every cell lands on the numerical floor,
/// and 16 starts of scale 1 so each cell reaches the global minimum.
pub fn benchmark_optimizer() -> OptimizerOptions {
    OptimizerOptions {
        tol_grad_inf: 1e-13,
        multi_start: 16,
        init_scale: 1.0,
        ..OptimizerOptions::default()
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, StageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| StageError::new(Stage::Config, FailureKind::Config, format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, StageError> {
        toml::from_str(text).map_err(|e| StageError::new(Stage::Config, FailureKind::Config, e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn validate(&self) -> Result<(), StageError> {
        let bad = |msg: String| Err(StageError::new(Stage::Config, FailureKind::Config, msg));
        if !(1..=4).contains(&self.order) {
            return bad(format!("order must be 1..=4, got {}", self.order));
        }
        if self.t_points < 2 {
            return bad(format!("t_points must be at least 2, got {}", self.t_points));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        if !(0.0..=self.t_max).contains(&self.table_t) {
            return bad(format!("table_t must lie in [0, t_max], got {}", self.table_t));
        }
        if let Err(e) = self.optimizer.validate() {
            return bad(e.to_string());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, lowercase hex.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes to JSON");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// `output_dir/<first 12 hex digits of the hash>`.
    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.join(&self.hash()[..12])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_and_defaults() {
        let cfg = RunConfig::from_toml(
            r#"
            order = 3
            [model]
            name = "heisenberg"
            n = 3
            [optimizer]
            seed = 11
            "#,
        )
        .unwrap();
        assert_eq!(cfg.order, 3);
        assert_eq!(cfg.model.name, ModelName::Heisenberg);
        assert_eq!(cfg.optimizer.seed, 11);
        assert_eq!(cfg.optimizer.tol_grad_inf, 1e-10);
        assert_eq!(cfg.t_points, 101);
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn extra_terms_parse() {
        let cfg = RunConfig::from_toml(
            r#"
            [[extra_terms]]
            label = "XYII"
            coefficient = 0.5
            "#,
        )
        .unwrap();
        assert_eq!(cfg.extra_terms[0].label, "XYII");
        assert!(!RunConfig::default().to_toml().contains("extra_terms"));
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.optimizer.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let cfg = RunConfig {
            t_points: 1,
            ..RunConfig::default()
        };
        assert_eq!(cfg.validate().unwrap_err().kind, FailureKind::Config);
        let cfg = RunConfig {
            table_t: 300.0,
            ..RunConfig::default()
        };
        assert!(cfg.validate().is_err());
        assert!(RunConfig::from_toml("colour = 1").is_err());
    }
}
