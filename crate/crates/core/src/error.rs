use std::fmt;

use crate::manifold::SpdMatrix;
use crate::transport::TransportPlan;

/// Stage of the adaptation pipeline an error was raised in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineStep {
    Validation,
    MassAssignment,
    CostConstruction,
    PlanSolve,
    BarycentricMap,
}

impl fmt::Display for PipelineStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            PipelineStep::Validation => "input validation",
            PipelineStep::MassAssignment => "mass assignment",
            PipelineStep::CostConstruction => "cost construction",
            PipelineStep::PlanSolve => "transport plan solve",
            PipelineStep::BarycentricMap => "barycentric mapping",
        };
        f.write_str(name)
    }
}

/// Last iterate carried by a [`Error::ConvergenceFailure`].
#[derive(Debug, Clone)]
pub enum LastIterate {
    Mean(Box<SpdMatrix>),
    Plan(Box<TransportPlan>),
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e} <= floor {floor:e})")]
    NotPositiveDefinite { min_eigenvalue: f64, floor: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("{context} did not converge after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure {
        context: &'static str,
        iterations: usize,
        residual: f64,
        last: Option<LastIterate>,
    },

    #[error("unsupported instance: {0}")]
    UnsupportedInstance(String),

    #[error("transport plan row {row} carries no mass")]
    DegeneratePlan { row: usize },

    #[error("{step}: {source}")]
    Step {
        step: PipelineStep,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn at(self, step: PipelineStep) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }

    /// Innermost error, with any pipeline-step tags removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for input/validation errors, false for numerical or solver failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self.root(),
            Error::InvalidInput(_) | Error::UnsupportedInstance(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
