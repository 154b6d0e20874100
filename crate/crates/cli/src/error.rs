//! CLI error taxonomy: validation failures exit with 1, numerical failures
//! with 2, both with a single-line machine-parsable prefix on stderr.

use lct_core::bifurcation::{BifurcationError, ModelError};
use lct_core::equilibria::EquilibriumError;
use lct_core::integrators::IntegrateError;
use lct_core::kernels::KernelError;
use lct_core::logistic::LogisticError;
use lct_core::stability::StabilityError;
use lct_core::system::SpecError;
use lct_core::transform::InitialStateError;
use std::fmt;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        CliError::Numeric(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "error[validation]: {msg}"),
            CliError::Numeric(msg) => write!(f, "error[numeric]: {msg}"),
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<LogisticError> for CliError {
    fn from(e: LogisticError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<InitialStateError> for CliError {
    fn from(e: InitialStateError) -> Self {
        match e {
            InitialStateError::InvalidTolerance { .. } => CliError::Validation(e.to_string()),
            InitialStateError::NonConvergent { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<EquilibriumError> for CliError {
    fn from(e: EquilibriumError) -> Self {
        match e {
            EquilibriumError::InvalidSigma { .. }
            | EquilibriumError::DimensionMismatch { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<IntegrateError> for CliError {
    fn from(e: IntegrateError) -> Self {
        match e {
            IntegrateError::NonPositiveDuration { .. }
            | IntegrateError::NonPositiveStep { .. }
            | IntegrateError::StepTooLargeForFrequency { .. }
            | IntegrateError::DimensionMismatch { .. }
            | IntegrateError::SpecMismatch
            | IntegrateError::Kernel(_) => CliError::Validation(e.to_string()),
            IntegrateError::StepUnderflow { .. } | IntegrateError::NonFiniteState { .. } => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

impl From<BifurcationError> for CliError {
    fn from(e: BifurcationError) -> Self {
        match e {
            BifurcationError::InvalidBracket { .. } | BifurcationError::InvalidRange => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<StabilityError> for CliError {
    fn from(e: StabilityError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("io: {e}"))
    }
}
