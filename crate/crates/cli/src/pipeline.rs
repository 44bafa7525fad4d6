//! build_model → generate_dla → involution_split → check_hamiltonian_in_m →
//! cartan_subalgebra → build_ansatz → make_target_v → bfgs_minimize →
//! extract_h0, with per-stage timing.

use std::time::Instant;

use fixdepth_core::evolution::{self, ErrorCurve};
use fixdepth_core::lie::{self, CartanSplit};
use fixdepth_core::linalg::{self, CMatrix};
use fixdepth_core::models::build_model;
use fixdepth_core::optimize::{self, OptimizationResult, TargetV, TraceRow};
use fixdepth_core::pauli::{parse_label, AlgebraElement, PauliString};
use fixdepth_core::zassenhaus::{self, Ansatz, BlockCounts};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::failure::{AtStage, FailureKind, Stage, StageError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub k: usize,
    pub h: usize,
    pub mtilde: usize,
}

/// What is known about a run so far; survives a failing stage.
#[derive(Debug, Clone, Default)]
pub struct Progress {
    pub timings: Vec<StageTiming>,
    pub dla_dim: Option<usize>,
    pub split_sizes: Option<SplitSizes>,
    pub factor_counts: Option<BlockCounts>,
}

impl Progress {
    fn time<T>(&mut self, stage: Stage, f: impl FnOnce() -> Result<T, StageError>) -> Result<T, StageError> {
        let start = Instant::now();
        let out = f();
        self.timings.push(StageTiming {
            stage,
            ms: start.elapsed().as_secs_f64() * 1e3,
        });
        out
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub hamiltonian: AlgebraElement,
    pub split: CartanSplit,
    /// `None` when `k` is empty: `K` is the identity and nothing is optimized.
    pub ansatz: Option<Ansatz>,
    pub target: TargetV,
    pub result: OptimizationResult,
}

/// Everything up to the optimizer.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub hamiltonian: AlgebraElement,
    pub split: CartanSplit,
    pub ansatz: Option<Ansatz>,
    pub target: TargetV,
}

pub fn decompose(config: &RunConfig, progress: &mut Progress) -> Result<Decomposition, StageError> {
    let Prepared {
        hamiltonian: h,
        split,
        ansatz,
        target,
    } = prepare(config, progress)?;
    let mut result = match &ansatz {
        Some(a) => progress.time(Stage::BfgsMinimize, || {
            optimize::optimize_ansatz(a, &target, &h, &split.h_basis, &config.optimizer).at(Stage::BfgsMinimize)
        })?,
        None => identity_result(&target, &h, &split, config.optimizer.seed).at(Stage::BfgsMinimize)?,
    };
    if let Some(a) = &ansatz {
        let (h0, residual) = progress.time(Stage::ExtractH0, || {
            optimize::extract_h0(a, &result.theta_star, &h, &split.h_basis).at(Stage::ExtractH0)
        })?;
        result.h0 = h0;
        result.residual_fro = residual;
    }
    Ok(Decomposition {
        hamiltonian: h,
        split,
        ansatz,
        target,
        result,
    })
}

pub fn prepare(config: &RunConfig, progress: &mut Progress) -> Result<Prepared, StageError> {
    let h = progress.time(Stage::BuildModel, || {
        let mut h = build_model(&config.model).at(Stage::BuildModel)?;
        for t in &config.extra_terms {
            let p = parse_label(&t.label).at(Stage::BuildModel)?;
            if p.n() != h.n() {
                return Err(StageError::new(
                    Stage::BuildModel,
                    FailureKind::Config,
                    format!("extra term {} has {} sites, model has {}", t.label, p.n(), h.n()),
                ));
            }
            h.add_term(p, t.coefficient);
        }
        Ok(h)
    })?;
    let terms: Vec<PauliString> = h.strings().copied().collect();
    let dla = progress.time(Stage::GenerateDla, || lie::generate_dla(&terms).at(Stage::GenerateDla))?;
    progress.dla_dim = Some(dla.dim());
    let (k, m) = progress.time(Stage::InvolutionSplit, || Ok(lie::involution_split(&dla)))?;
    progress.time(Stage::CheckHamiltonianInM, || {
        lie::check_hamiltonian_in_m(&h).at(Stage::CheckHamiltonianInM)
    })?;
    let (h_basis, mtilde) = progress.time(Stage::CartanSubalgebra, || {
        lie::cartan_subalgebra(&m, &terms).at(Stage::CartanSubalgebra)
    })?;
    progress.split_sizes = Some(SplitSizes {
        k: k.len(),
        h: h_basis.len(),
        mtilde: mtilde.len(),
    });
    let split = CartanSplit {
        dla_dim: dla.dim(),
        k_basis: k,
        h_basis,
        mtilde_basis: mtilde,
    };
    let ansatz = if split.k_basis.is_empty() {
        None
    } else {
        let a = progress.time(Stage::BuildAnsatz, || {
            zassenhaus::build_ansatz_with(&split.k_basis, config.order, config.coefficients).at(Stage::BuildAnsatz)
        })?;
        progress.factor_counts = Some(a.block_counts());
        Some(a)
    };
    let target = progress.time(Stage::MakeTargetV, || {
        optimize::make_target_v(&split.h_basis).at(Stage::MakeTargetV)
    })?;
    Ok(Prepared {
        hamiltonian: h,
        split,
        ansatz,
        target,
    })
}

/// With `k` empty, `m` is abelian, so `h = m ∋ H` and `K = I`.
fn identity_result(
    target: &TargetV,
    h: &AlgebraElement,
    split: &CartanSplit,
    seed: u64,
) -> fixdepth_core::Result<OptimizationResult> {
    let f = target.element.hs_inner(h)?;
    let h0 = h.restrict_to(&split.h_basis);
    let residual = h.add_scaled(&h0, -1.0)?.fro_norm();
    Ok(OptimizationResult {
        theta_star: vec![],
        final_cost: f,
        cost_trace: vec![TraceRow {
            iteration: 0,
            cost: f,
            grad_inf_norm: 0.0,
        }],
        converged: true,
        iterations: 0,
        seed,
        h0,
        residual_fro: residual,
    })
}

impl Decomposition {
    pub fn k_matrix(&self) -> Result<CMatrix, StageError> {
        match &self.ansatz {
            Some(a) => zassenhaus::k_dense(a, &self.result.theta_star).at(Stage::ErrorCurve),
            None => Ok(linalg::identity(1 << self.hamiltonian.n())),
        }
    }

    pub fn error_curve(&self, grid: &[f64]) -> Result<ErrorCurve, StageError> {
        let k = self.k_matrix()?;
        evolution::error_curve(&self.hamiltonian, &k, &self.result.h0, grid).at(Stage::ErrorCurve)
    }

    /// A run that stopped at `max_iters` is an optimizer failure.
    pub fn convergence_failure(&self) -> Option<StageError> {
        (!self.result.converged).then(|| {
            StageError::new(
                Stage::BfgsMinimize,
                FailureKind::Optimizer,
                format!(
                    "gradient tolerance not reached within {} iterations (final cost {:e})",
                    self.result.iterations, self.result.final_cost
                ),
            )
        })
    }

    pub fn normalized_cost(&self, f: f64) -> f64 {
        optimize::normalized_cost(f, &self.target, &self.hamiltonian)
    }
}
