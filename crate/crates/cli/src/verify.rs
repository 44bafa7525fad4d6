//! Offline re-check of a stored record from its own θ*.

use fixdepth_core::evolution;
use fixdepth_core::optimize;
use serde::{Deserialize, Serialize};

use crate::failure::{AtStage, FailureKind, Stage, StageError};
use crate::pipeline::{prepare, Progress};
use crate::record::RunRecord;

pub const VERIFY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub hash_matches: bool,
    pub cost_diff: f64,
    pub h0_diff: f64,
    pub residual_diff: f64,
    pub error_at_table_t_diff: Option<f64>,
    pub curve_diff: Option<f64>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn into_result(self) -> Result<VerifyReport, StageError> {
        if self.passed {
            Ok(self)
        } else {
            Err(StageError::new(
                Stage::Verify,
                FailureKind::Numerical,
                format!("stored values are not reproduced: {self:?}"),
            ))
        }
    }
}

/// Rebuilds the ansatz from the stored config and re-evaluates cost, `h₀`,
/// residual and error values at the stored θ*.
pub fn verify_record(record: &RunRecord) -> Result<VerifyReport, StageError> {
    let opt = record.optimization.as_ref().ok_or_else(|| {
        StageError::new(
            Stage::Verify,
            FailureKind::Config,
            "record has no optimization result to verify",
        )
    })?;
    let p = prepare(&record.config, &mut Progress::default())?;
    let (cost, h0, residual, k) = match &p.ansatz {
        Some(a) => {
            let cost = optimize::cost(a, &opt.theta_star, &p.target, &p.hamiltonian).at(Stage::Verify)?;
            let (h0, residual) =
                optimize::extract_h0(a, &opt.theta_star, &p.hamiltonian, &p.split.h_basis).at(Stage::Verify)?;
            let k = fixdepth_core::zassenhaus::k_dense(a, &opt.theta_star).at(Stage::Verify)?;
            (cost, h0, residual, k)
        }
        None => {
            let h0 = p.hamiltonian.restrict_to(&p.split.h_basis);
            let cost = p.target.element.hs_inner(&p.hamiltonian).at(Stage::Verify)?;
            let residual = p.hamiltonian.add_scaled(&h0, -1.0).at(Stage::Verify)?.fro_norm();
            (cost, h0, residual, fixdepth_core::linalg::identity(1 << p.hamiltonian.n()))
        }
    };
    let errors_at = |grid: &[f64]| evolution::error_curve(&p.hamiltonian, &k, &h0, grid).at(Stage::Verify);
    let error_at_table_t_diff = match record.error_at_table_t {
        Some(e) => Some((errors_at(&[record.config.table_t])?.rows[0].error - e).abs()),
        None => None,
    };
    let curve_diff = match &record.error_curve {
        Some(c) => {
            let grid: Vec<f64> = c.rows.iter().map(|r| r.t).collect();
            let again = errors_at(&grid)?;
            Some(
                c.rows
                    .iter()
                    .zip(&again.rows)
                    .map(|(a, b)| (a.error - b.error).abs())
                    .fold(0.0, f64::max),
            )
        }
        None => None,
    };
    let hash_matches = record.config.hash() == record.config_hash;
    let cost_diff = (cost - opt.final_cost).abs();
    let h0_diff = h0.max_coeff_diff(&opt.h0);
    let residual_diff = (residual - opt.residual_fro).abs();
    let passed = hash_matches
        && [Some(cost_diff), Some(h0_diff), Some(residual_diff), error_at_table_t_diff, curve_diff]
            .iter()
            .flatten()
            .all(|&d| d <= VERIFY_TOL);
    Ok(VerifyReport {
        hash_matches,
        cost_diff,
        h0_diff,
        residual_diff,
        error_at_table_t_diff,
        curve_diff,
        passed,
    })
}
