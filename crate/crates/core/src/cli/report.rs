use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{file_digest, CliError};
use crate::adapt::RowDiagnostics;
use crate::transport::{CostMatrix, TransportPlan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    pub diagonal_mass: f64,
    pub objective: f64,
    /// Max absolute row-sum error.
    pub source_marginal_residual: f64,
    /// Max absolute column-sum error.
    pub target_marginal_residual: f64,
}

impl PlanStats {
    pub fn of(plan: &TransportPlan, cost: &CostMatrix) -> Self {
        let (source_marginal_residual, target_marginal_residual) = plan.marginal_residuals();
        PlanStats {
            diagonal_mass: plan.diagonal_mass(),
            objective: plan.objective(cost),
            source_marginal_residual,
            target_marginal_residual,
        }
    }
}

/// Written as `report.json` by every command that takes `--out <dir>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub config: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_used: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_used: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanStats>,
    /// One entry per adapted source point.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<RowDiagnostics>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub summary: serde_json::Value,
    /// Only present with `--timings`, so default output is reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl RunReport {
    pub fn new(command: &str, inputs: &[&Path]) -> Result<Self, CliError> {
        let inputs = inputs
            .iter()
            .map(|p| {
                Ok(InputDigest {
                    path: p.display().to_string(),
                    sha256: file_digest(p)?,
                })
            })
            .collect::<Result<_, CliError>>()?;
        Ok(RunReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            inputs,
            config: serde_json::Value::Null,
            lambda_used: None,
            eta_used: None,
            plan: None,
            rows: Vec::new(),
            summary: serde_json::Value::Null,
            elapsed_ms: None,
        })
    }
}
