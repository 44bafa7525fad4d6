use std::path::{Path, PathBuf};

use fixdepth_core::evolution::ErrorCurve;
use fixdepth_core::optimize::OptimizationResult;
use fixdepth_core::zassenhaus::BlockCounts;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::failure::{FailureKind, Stage, StageError};
use crate::pipeline::{Progress, SplitSizes, StageTiming};

pub const RECORD_VERSION: &str = "1";
pub const RECORD_FILE: &str = "record.json";

/// Provenance of a single run. Written even when a stage fails, with the
/// failure filled in and everything after it left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: String,
    pub config: RunConfig,
    pub config_hash: String,
    pub dla_dim: Option<usize>,
    pub split_sizes: Option<SplitSizes>,
    pub factor_counts: Option<BlockCounts>,
    pub optimization: Option<OptimizationResult>,
    /// `f(θ*)` divided by `‖v‖_F ‖H‖_F`.
    pub normalized_final_cost: Option<f64>,
    /// `residual_fro / ‖H‖_F`.
    pub residual_relative: Option<f64>,
    pub error_curve: Option<ErrorCurve>,
    pub error_at_table_t: Option<f64>,
    pub timings: Vec<StageTiming>,
    /// Paths relative to the run directory.
    pub artifacts: Vec<String>,
    pub failure: Option<StageError>,
}

impl RunRecord {
    pub fn new(config: &RunConfig) -> Self {
        RunRecord {
            version: RECORD_VERSION.into(),
            config: config.clone(),
            config_hash: config.hash(),
            dla_dim: None,
            split_sizes: None,
            factor_counts: None,
            optimization: None,
            normalized_final_cost: None,
            residual_relative: None,
            error_curve: None,
            error_at_table_t: None,
            timings: vec![],
            artifacts: vec![],
            failure: None,
        }
    }

    pub fn absorb(&mut self, progress: Progress) {
        self.dla_dim = progress.dla_dim;
        self.split_sizes = progress.split_sizes;
        self.factor_counts = progress.factor_counts;
        self.timings.extend(progress.timings);
    }

    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, StageError::exit_code)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes to JSON")
    }

    pub fn from_json(text: &str) -> Result<Self, StageError> {
        let r: RunRecord =
            serde_json::from_str(text).map_err(|e| StageError::new(Stage::Verify, FailureKind::Config, e.to_string()))?;
        if r.version != RECORD_VERSION {
            return Err(StageError::new(
                Stage::Verify,
                FailureKind::Config,
                format!("unsupported record version {:?}", r.version),
            ));
        }
        Ok(r)
    }

    pub fn read(path: &Path) -> Result<Self, StageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| StageError::new(Stage::Verify, FailureKind::Config, format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Writes `dir/record.json`, creating `dir` if needed.
    pub fn write(&self, dir: &Path) -> Result<PathBuf, StageError> {
        std::fs::create_dir_all(dir).map_err(StageError::output)?;
        let path = dir.join(RECORD_FILE);
        std::fs::write(&path, self.to_json()).map_err(StageError::output)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_record_round_trips() {
        let r = RunRecord::new(&RunConfig::default());
        assert_eq!(RunRecord::from_json(&r.to_json()).unwrap(), r);
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn wrong_version_is_rejected() {
        let mut r = RunRecord::new(&RunConfig::default());
        r.version = "0".into();
        assert!(RunRecord::from_json(&r.to_json()).is_err());
    }
}
