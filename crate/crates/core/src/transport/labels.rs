//! Sinkhorn with a class-based group penalty on the source side.

use nalgebra::DMatrix;

use super::{sinkhorn, CostMatrix, LabelSet, MassVector, SinkhornOptions, TransportPlan};
use crate::error::{Error, LastIterate, Result};

/// Power applied to the per-group L1 norm in the penalty.
const GROUP_EXPONENT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelSinkhornOptions {
    pub inner: SinkhornOptions,
    /// Weight of the group penalty.
    pub eta: f64,
    /// Offset added to each group norm before linearizing.
    pub eps_reg: f64,
    /// Stop when `‖ΔΓ‖_∞ <= outer_tol` between consecutive plans.
    pub outer_tol: f64,
    pub outer_max_iter: usize,
}

impl LabelSinkhornOptions {
    pub fn new(lambda: f64, eta: f64) -> Self {
        LabelSinkhornOptions {
            inner: SinkhornOptions::new(lambda),
            eta,
            eps_reg: 1e-12,
            outer_tol: 1e-8,
            outer_max_iter: 50,
        }
    }
}

/// `Σ_j Σ_y ‖Γ(I_y, j)‖₁²`.
pub fn group_lasso_penalty(plan: &TransportPlan, labels: &LabelSet) -> Result<f64> {
    if labels.len() != plan.rows() {
        return Err(Error::invalid("label count does not match plan rows"));
    }
    let gamma = plan.matrix();
    let groups = labels.groups();
    let mut total = 0.0;
    for j in 0..plan.cols() {
        for group in &groups {
            let s: f64 = group.iter().map(|&i| gamma[(i, j)]).sum();
            total += s.powf(GROUP_EXPONENT);
        }
    }
    Ok(total)
}

/// Entropic OT with the label penalty `η Σ_j Σ_y ‖Γ(I_y, j)‖₁²`.
///
/// Alternates a Sinkhorn solve on `C₀ + G` with the update
/// `G(I_y, j) = η·2·(‖Γ(I_y, j)‖₁ + ε)` until consecutive plans agree.
pub fn sinkhorn_with_labels(
    cost0: &CostMatrix,
    p: &MassVector,
    q: &MassVector,
    labels: &LabelSet,
    opts: LabelSinkhornOptions,
) -> Result<TransportPlan> {
    if labels.len() != cost0.rows() {
        return Err(Error::invalid(format!(
            "{} labels for {} source points",
            labels.len(),
            cost0.rows()
        )));
    }
    if !(opts.eta >= 0.0) || !opts.eta.is_finite() {
        return Err(Error::invalid(format!("η must be nonnegative, got {}", opts.eta)));
    }

    let groups = labels.groups();
    let (n1, n2) = (cost0.rows(), cost0.cols());
    let mut penalty = DMatrix::zeros(n1, n2);
    let mut previous: Option<TransportPlan> = None;
    let mut change = f64::INFINITY;

    for _ in 0..opts.outer_max_iter {
        let cost = CostMatrix::new(cost0.matrix() + &penalty, cost0.metric())?;
        let plan = sinkhorn(&cost, p, q, opts.inner)?;

        let gamma = plan.matrix();
        for j in 0..n2 {
            for group in &groups {
                let norm: f64 = group.iter().map(|&i| gamma[(i, j)]).sum();
                let g = opts.eta * GROUP_EXPONENT * (norm + opts.eps_reg).powf(GROUP_EXPONENT - 1.0);
                for &i in group {
                    penalty[(i, j)] = g;
                }
            }
        }

        if let Some(prev) = &previous {
            change = (plan.matrix() - prev.matrix()).amax();
            if change <= opts.outer_tol {
                return Ok(plan);
            }
        }
        previous = Some(plan);
    }

    Err(Error::ConvergenceFailure {
        context: "label-regularized Sinkhorn",
        iterations: opts.outer_max_iter,
        residual: change,
        last: previous.map(|p| LastIterate::Plan(Box::new(p))),
    })
}
