use std::fmt;

use fixdepth_core::Error;
use serde::{Deserialize, Serialize};

/// Pipeline stages, named as they appear in records and error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    BuildModel,
    GenerateDla,
    InvolutionSplit,
    CheckHamiltonianInM,
    CartanSubalgebra,
    BuildAnsatz,
    MakeTargetV,
    BfgsMinimize,
    ExtractH0,
    ErrorCurve,
    Scaling,
    Verify,
    Output,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::BuildModel => "build_model",
            Stage::GenerateDla => "generate_dla",
            Stage::InvolutionSplit => "involution_split",
            Stage::CheckHamiltonianInM => "check_hamiltonian_in_m",
            Stage::CartanSubalgebra => "cartan_subalgebra",
            Stage::BuildAnsatz => "build_ansatz",
            Stage::MakeTargetV => "make_target_v",
            Stage::BfgsMinimize => "bfgs_minimize",
            Stage::ExtractH0 => "extract_h0",
            Stage::ErrorCurve => "error_curve",
            Stage::Scaling => "scaling",
            Stage::Verify => "verify",
            Stage::Output => "output",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Config,
    Structural,
    Optimizer,
    Numerical,
}

impl FailureKind {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureKind::Config => 2,
            FailureKind::Structural => 3,
            FailureKind::Optimizer => 4,
            FailureKind::Numerical => 5,
        }
    }

    pub fn of(e: &Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Spec(_) | Error::Argument(_) | Error::Resource { .. } => FailureKind::Config,
            Error::Structural { .. } | Error::Capacity { .. } => FailureKind::Structural,
            Error::Stagnation { .. } => FailureKind::Optimizer,
            Error::Numerical { .. } | Error::Dimension { .. } => FailureKind::Numerical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
#[error("{stage} failed: {message}")]
pub struct StageError {
    pub stage: Stage,
    pub kind: FailureKind,
    pub message: String,
}

impl StageError {
    pub fn new(stage: Stage, kind: FailureKind, message: impl Into<String>) -> Self {
        StageError {
            stage,
            kind,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }

    pub fn output(e: impl fmt::Display) -> Self {
        StageError::new(Stage::Output, FailureKind::Config, e.to_string())
    }
}

/// Attaches a stage name to a core error.
pub trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T, Error> {
    fn at(self, stage: Stage) -> Result<T, StageError> {
        self.map_err(|e| StageError::new(stage, FailureKind::of(&e), e.to_string()))
    }
}
