//! Domain adaptation of a source SPD set onto a target SPD set through an
//! optimal transport plan and per-row weighted Riemannian means.
//!
//! Steps: source/target masses (uniform or kernel density), pairwise cost,
//! transport plan, then each source point is replaced by the Fréchet mean
//! of the target points weighted by its plan row.
//!
//! With [`Metric::Euclidean`] only the cost changes; the barycentric step
//! still uses the Riemannian weighted mean.

mod mdm;

use serde::{Deserialize, Serialize};

use crate::error::{Error, PipelineStep, Result};
use crate::manifold::{frechet_mean_with_stats, riemannian_distance_sq, MeanEstimate, MeanOptions, SpdMatrix};
use crate::transport::{
    adaptive_lambda, exact_ot, median, sinkhorn, sinkhorn_with_labels, CostMatrix, LabelSet, LabelSinkhornOptions,
    MassVector, Metric, SinkhornOptions, TransportPlan,
};

pub use mdm::{mdm_classify, mdm_fit, MdmModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Exact,
    Sinkhorn,
    SinkhornLabels,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaPolicy {
    /// `1 / (2 (0.05 · median C)²)`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassPolicy {
    Uniform,
    Kde,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaPolicy {
    /// `σ²` = median of the pairwise squared distances within each set.
    MedianSquaredDistance,
    /// Fixed `σ²`.
    Fixed(f64),
}

/// Knobs of the adaptation pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptationConfig {
    pub metric: Metric,
    pub solver: Solver,
    pub lambda: LambdaPolicy,
    /// Label-penalty weight; `None` means `2 · median(C₀)`.
    pub eta: Option<f64>,
    pub mass: MassPolicy,
    pub kde_sigma: SigmaPolicy,
    /// Keep only the `k` heaviest entries of each plan row before averaging.
    /// Dense rows are fine up to a few hundred targets; beyond that `Some(10)`
    /// is a reasonable choice.
    pub top_k: Option<usize>,
    pub mean_tol: f64,
    pub mean_max_iter: usize,
    pub sinkhorn_tol: f64,
    pub sinkhorn_max_iter: usize,
    pub seed: Option<u64>,
}

impl Default for AdaptationConfig {
    fn default() -> Self {
        AdaptationConfig {
            metric: Metric::Riemannian,
            solver: Solver::Sinkhorn,
            lambda: LambdaPolicy::Auto,
            eta: None,
            mass: MassPolicy::Uniform,
            kde_sigma: SigmaPolicy::MedianSquaredDistance,
            top_k: None,
            mean_tol: 1e-10,
            mean_max_iter: 200,
            sinkhorn_tol: 1e-9,
            sinkhorn_max_iter: 10_000,
            seed: None,
        }
    }
}

impl AdaptationConfig {
    pub fn exact() -> Self {
        AdaptationConfig {
            solver: Solver::Exact,
            ..Self::default()
        }
    }

    fn mean_options(&self) -> MeanOptions {
        MeanOptions {
            tol: self.mean_tol,
            max_iter: self.mean_max_iter,
        }
    }
}

/// Convergence record of one barycentric mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowDiagnostics {
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct AdaptationResult {
    pub adapted_source: Vec<SpdMatrix>,
    pub plan: TransportPlan,
    pub cost: CostMatrix,
    /// `None` for the exact solver.
    pub lambda_used: Option<f64>,
    pub eta_used: Option<f64>,
    pub diagnostics: Vec<RowDiagnostics>,
}

fn check_uniform_dim(sets: &[&[SpdMatrix]]) -> Result<usize> {
    let mut dim = None;
    for set in sets {
        if set.is_empty() {
            return Err(Error::invalid("point set is empty"));
        }
        for p in set.iter() {
            match dim {
                None => dim = Some(p.dim()),
                Some(d) if d != p.dim() => {
                    return Err(Error::invalid(format!("mixed dimensions: {d} and {}", p.dim())))
                }
                _ => {}
            }
        }
    }
    Ok(dim.unwrap_or(0))
}

/// Mass `p[i] ∝ Σ_j exp(-d²(Pᵢ, Pⱼ) / 2σ²)`, self-term included.
pub fn kde_weights(points: &[SpdMatrix], sigma2: f64) -> Result<MassVector> {
    check_uniform_dim(&[points])?;
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::invalid(format!("σ² must be positive, got {sigma2}")));
    }
    let n = points.len();
    let mut density = vec![0.0; n];
    for i in 0..n {
        density[i] += 1.0;
        for j in (i + 1)..n {
            let k = (-riemannian_distance_sq(&points[i], &points[j])? / (2.0 * sigma2)).exp();
            density[i] += k;
            density[j] += k;
        }
    }
    let z: f64 = density.iter().sum();
    MassVector::new(density.into_iter().map(|d| d / z).collect())
}

/// Median of `d²(Pᵢ, Pⱼ)` over `i < j`; falls back to 1 for degenerate sets.
pub fn kde_sigma2_auto(points: &[SpdMatrix]) -> Result<f64> {
    let mut sq = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            sq.push(riemannian_distance_sq(&points[i], &points[j])?);
        }
    }
    if sq.is_empty() {
        return Ok(1.0);
    }
    let m = median(sq);
    Ok(if m > 0.0 { m } else { 1.0 })
}

fn squared_frobenius(p: &SpdMatrix, q: &SpdMatrix) -> f64 {
    (p.matrix() - q.matrix()).norm_squared()
}

/// Pairwise squared distances under `metric`.
pub fn build_cost(source: &[SpdMatrix], target: &[SpdMatrix], metric: Metric) -> Result<CostMatrix> {
    check_uniform_dim(&[source, target])?;
    let mut entries = nalgebra::DMatrix::zeros(source.len(), target.len());
    for (i, p) in source.iter().enumerate() {
        for (j, q) in target.iter().enumerate() {
            entries[(i, j)] = match metric {
                Metric::Riemannian => riemannian_distance_sq(p, q)?,
                Metric::Euclidean => squared_frobenius(p, q),
            };
        }
    }
    CostMatrix::new(entries, metric)
}

fn row_weights(row: &[f64], top_k: Option<usize>) -> Vec<f64> {
    let mut w = row.to_vec();
    if let Some(k) = top_k {
        if k < w.len() {
            let mut order: Vec<usize> = (0..w.len()).collect();
            order.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
            for &j in &order[k..] {
                w[j] = 0.0;
            }
        }
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Barycentric image of every source point: the Fréchet mean of `target`
/// weighted by the corresponding (optionally top-k truncated) plan row.
pub fn barycentric_map(
    source: &[SpdMatrix],
    target: &[SpdMatrix],
    plan: &TransportPlan,
    top_k: Option<usize>,
    mean_opts: MeanOptions,
) -> Result<Vec<SpdMatrix>> {
    Ok(barycentric_map_with_stats(source, target, plan, top_k, mean_opts)?
        .into_iter()
        .map(|e| e.mean)
        .collect())
}

pub fn barycentric_map_with_stats(
    source: &[SpdMatrix],
    target: &[SpdMatrix],
    plan: &TransportPlan,
    top_k: Option<usize>,
    mean_opts: MeanOptions,
) -> Result<Vec<MeanEstimate>> {
    if plan.rows() != source.len() || plan.cols() != target.len() {
        return Err(Error::invalid(format!(
            "plan is {}x{} but sets have {} and {} points",
            plan.rows(),
            plan.cols(),
            source.len(),
            target.len()
        )));
    }
    if top_k == Some(0) {
        return Err(Error::invalid("top_k must be positive"));
    }
    (0..plan.rows())
        .map(|i| {
            let row = plan.row(i);
            if !(row.iter().sum::<f64>() > 0.0) {
                return Err(Error::DegeneratePlan { row: i });
            }
            frechet_mean_with_stats(target, &row_weights(&row, top_k), mean_opts)
        })
        .collect()
}

fn masses(points: &[SpdMatrix], config: &AdaptationConfig) -> Result<MassVector> {
    match config.mass {
        MassPolicy::Uniform => MassVector::uniform(points.len()),
        MassPolicy::Kde => {
            let sigma2 = match config.kde_sigma {
                SigmaPolicy::MedianSquaredDistance => kde_sigma2_auto(points)?,
                SigmaPolicy::Fixed(s) => s,
            };
            kde_weights(points, sigma2)
        }
    }
}

/// Runs the full adaptation pipeline.
pub fn adapt(
    source: &[SpdMatrix],
    target: &[SpdMatrix],
    source_labels: Option<&LabelSet>,
    config: &AdaptationConfig,
) -> Result<AdaptationResult> {
    validate(source, target, source_labels, config).map_err(|e| e.at(PipelineStep::Validation))?;

    let p = masses(source, config).map_err(|e| e.at(PipelineStep::MassAssignment))?;
    let q = masses(target, config).map_err(|e| e.at(PipelineStep::MassAssignment))?;

    let cost = build_cost(source, target, config.metric).map_err(|e| e.at(PipelineStep::CostConstruction))?;

    let (plan, lambda_used, eta_used) = solve(&cost, &p, &q, source_labels, config).map_err(|e| e.at(PipelineStep::PlanSolve))?;

    let estimates = barycentric_map_with_stats(source, target, &plan, config.top_k, config.mean_options())
        .map_err(|e| e.at(PipelineStep::BarycentricMap))?;

    let diagnostics = estimates
        .iter()
        .map(|e| RowDiagnostics {
            iterations: e.iterations,
            residual: e.residual,
        })
        .collect();
    Ok(AdaptationResult {
        adapted_source: estimates.into_iter().map(|e| e.mean).collect(),
        plan,
        cost,
        lambda_used,
        eta_used,
        diagnostics,
    })
}

fn validate(
    source: &[SpdMatrix],
    target: &[SpdMatrix],
    source_labels: Option<&LabelSet>,
    config: &AdaptationConfig,
) -> Result<()> {
    check_uniform_dim(&[source, target])?;
    match (config.solver, source_labels) {
        (Solver::SinkhornLabels, None) => {
            return Err(Error::invalid("the label-regularized solver needs source labels"))
        }
        (Solver::SinkhornLabels, Some(l)) if l.len() != source.len() => {
            return Err(Error::invalid(format!(
                "{} labels for {} source points",
                l.len(),
                source.len()
            )))
        }
        (Solver::Exact | Solver::Sinkhorn, Some(_)) => {
            return Err(Error::invalid("source labels are only used by the label-regularized solver"))
        }
        _ => {}
    }
    if let Some(k) = config.top_k {
        if k == 0 || k > target.len() {
            return Err(Error::invalid(format!("top_k = {k} outside 1..={}", target.len())));
        }
    }
    if let Some(eta) = config.eta {
        if !(eta >= 0.0) {
            return Err(Error::invalid(format!("η must be nonnegative, got {eta}")));
        }
    }
    Ok(())
}

fn solve(
    cost: &CostMatrix,
    p: &MassVector,
    q: &MassVector,
    labels: Option<&LabelSet>,
    config: &AdaptationConfig,
) -> Result<(TransportPlan, Option<f64>, Option<f64>)> {
    let lambda = || match config.lambda {
        LambdaPolicy::Auto => adaptive_lambda(cost),
        LambdaPolicy::Fixed(l) => Ok(l),
    };
    let inner = |lambda: f64| SinkhornOptions {
        lambda,
        tol: config.sinkhorn_tol,
        max_iter: config.sinkhorn_max_iter,
    };
    match config.solver {
        Solver::Exact => Ok((exact_ot(cost, p, q)?, None, None)),
        Solver::Sinkhorn => {
            let l = lambda()?;
            Ok((sinkhorn(cost, p, q, inner(l))?, Some(l), None))
        }
        Solver::SinkhornLabels => {
            let l = lambda()?;
            let eta = config.eta.unwrap_or_else(|| 2.0 * cost.median());
            let labels = labels.ok_or_else(|| Error::invalid("missing source labels"))?;
            let opts = LabelSinkhornOptions {
                inner: inner(l),
                ..LabelSinkhornOptions::new(l, eta)
            };
            Ok((sinkhorn_with_labels(cost, p, q, labels, opts)?, Some(l), Some(eta)))
        }
    }
}
