//! Discrete optimal transport between weighted point sets.

mod exact;
mod labels;
mod sinkhorn;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use exact::{exact_ot, linear_assignment};
pub use labels::{group_lasso_penalty, sinkhorn_with_labels, LabelSinkhornOptions};
pub use sinkhorn::{adaptive_lambda, median, sinkhorn, SinkhornOptions, KERNEL_FLOOR};

/// Tolerance on `|Σ weights - 1|` for a [`MassVector`].
pub const MASS_SUM_TOL: f64 = 1e-12;
/// ∞-norm tolerance on the marginals of a [`TransportPlan`].
pub const MARGINAL_TOL: f64 = 1e-6;

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MassVector {
    weights: Vec<f64>,
}

impl MassVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("mass vector is empty"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("mass vector has negative or non-finite entries"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_SUM_TOL {
            return Err(Error::invalid(format!("mass vector sums to {total}, expected 1")));
        }
        Ok(MassVector { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("mass vector is empty"));
        }
        Ok(MassVector {
            weights: vec![1.0 / n as f64; n],
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.len() as f64;
        self.weights.iter().all(|w| (w - u).abs() <= MASS_SUM_TOL)
    }
}

/// Ground metric a cost matrix was built with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Riemannian,
    Euclidean,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Riemannian => "riemannian",
            Metric::Euclidean => "euclidean",
        })
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "riemannian" => Ok(Metric::Riemannian),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

/// Pairwise squared distances between a source and a target set.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    entries: DMatrix<f64>,
    metric: Metric,
}

impl CostMatrix {
    pub fn new(entries: DMatrix<f64>, metric: Metric) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::invalid("cost matrix is empty"));
        }
        if entries.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::invalid("cost entries must be finite and nonnegative"));
        }
        Ok(CostMatrix { entries, metric })
    }

    pub fn from_rows(rows: &[Vec<f64>], metric: Metric) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::invalid("ragged cost rows"));
        }
        Self::new(DMatrix::from_fn(n, m, |i, j| rows[i][j]), metric)
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Median over all entries; the mean of the two central values for even counts.
    pub fn median(&self) -> f64 {
        median(self.entries.iter().copied().collect())
    }

    pub fn transpose(&self) -> CostMatrix {
        CostMatrix {
            entries: self.entries.transpose(),
            metric: self.metric,
        }
    }
}

/// A coupling with prescribed marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    gamma: DMatrix<f64>,
    source_marginal: MassVector,
    target_marginal: MassVector,
}

impl TransportPlan {
    /// Checks nonnegativity and both marginals within [`MARGINAL_TOL`].
    pub fn new(gamma: DMatrix<f64>, source_marginal: MassVector, target_marginal: MassVector) -> Result<Self> {
        let plan = TransportPlan {
            gamma,
            source_marginal,
            target_marginal,
        };
        if plan.gamma.nrows() != plan.source_marginal.len() || plan.gamma.ncols() != plan.target_marginal.len() {
            return Err(Error::invalid("plan shape does not match marginals"));
        }
        if plan.gamma.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return Err(Error::NumericalFailure("plan has negative or non-finite entries".into()));
        }
        let (row_res, col_res) = plan.marginal_residuals();
        if row_res > MARGINAL_TOL || col_res > MARGINAL_TOL {
            return Err(Error::NumericalFailure(format!(
                "plan marginals off by {row_res:e} (rows) and {col_res:e} (columns)"
            )));
        }
        Ok(plan)
    }

    pub(crate) fn unchecked(gamma: DMatrix<f64>, source_marginal: MassVector, target_marginal: MassVector) -> Self {
        TransportPlan {
            gamma,
            source_marginal,
            target_marginal,
        }
    }

    pub fn rows(&self) -> usize {
        self.gamma.nrows()
    }

    pub fn cols(&self) -> usize {
        self.gamma.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn source_marginal(&self) -> &MassVector {
        &self.source_marginal
    }

    pub fn target_marginal(&self) -> &MassVector {
        &self.target_marginal
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.gamma.row(i).iter().copied().collect()
    }

    /// `⟨Γ, C⟩`.
    pub fn objective(&self, cost: &CostMatrix) -> f64 {
        self.gamma.component_mul(cost.matrix()).sum()
    }

    /// ∞-norm residuals of `Γ1 - p` and `Γᵀ1 - q`.
    pub fn marginal_residuals(&self) -> (f64, f64) {
        let rows = self
            .gamma
            .row_iter()
            .zip(self.source_marginal.as_slice())
            .map(|(r, p)| (r.sum() - p).abs())
            .fold(0.0, f64::max);
        let cols = self
            .gamma
            .column_iter()
            .zip(self.target_marginal.as_slice())
            .map(|(c, q)| (c.sum() - q).abs())
            .fold(0.0, f64::max);
        (rows, cols)
    }

    /// Mass on the `i ↔ i` correspondence, as a fraction of the total mass.
    pub fn diagonal_mass(&self) -> f64 {
        let n = self.rows().min(self.cols());
        let total = self.gamma.sum();
        let diag: f64 = (0..n).map(|i| self.gamma[(i, i)]).sum();
        (diag / total).clamp(0.0, 1.0)
    }

    pub fn transpose(&self) -> TransportPlan {
        TransportPlan {
            gamma: self.gamma.transpose(),
            source_marginal: self.target_marginal.clone(),
            target_marginal: self.source_marginal.clone(),
        }
    }
}

/// Source labels and their distinct classes (sorted ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    labels: Vec<i64>,
    classes: Vec<i64>,
}

impl LabelSet {
    pub fn new(labels: Vec<i64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("label set is empty"));
        }
        let mut classes = labels.clone();
        classes.sort_unstable();
        classes.dedup();
        Ok(LabelSet { labels, classes })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn classes(&self) -> &[i64] {
        &self.classes
    }

    /// Index sets, one per entry of [`classes`](Self::classes), in the same order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        self.classes
            .iter()
            .map(|c| {
                self.labels
                    .iter()
                    .enumerate()
                    .filter(|(_, l)| *l == c)
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect()
    }
}
