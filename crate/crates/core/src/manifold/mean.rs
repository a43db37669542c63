//! Weighted Fréchet (Karcher) mean by tangent-space averaging.

use nalgebra::DMatrix;

use super::{apply_trusted, MatrixFn, SpdMatrix, Whitener};
use crate::error::{Error, LastIterate, Result};

/// Tolerance on `|Σ wᵢ - 1|`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanOptions {
    /// Stop once the Frobenius norm of the averaged tangent step is at most this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MeanOptions {
    fn default() -> Self {
        MeanOptions {
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MeanEstimate {
    pub mean: SpdMatrix,
    /// Number of Exp updates applied after initialization.
    pub iterations: usize,
    /// `‖Σ wᵢ Log_mean(Pᵢ)‖_F` at the returned mean.
    pub residual: f64,
}

pub(crate) fn validate_weights(weights: &[f64]) -> Result<()> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::invalid("weights must be finite and nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::invalid(format!("weights sum to {total}, expected 1")));
    }
    Ok(())
}

/// Weighted Riemannian mean of `points`.
pub fn frechet_mean(points: &[SpdMatrix], weights: &[f64], opts: MeanOptions) -> Result<SpdMatrix> {
    frechet_mean_with_stats(points, weights, opts).map(|e| e.mean)
}

/// Fixed-point iteration: average the logs at the current estimate, step along Exp.
///
/// Starts from the weighted arithmetic mean. The returned point satisfies
/// the stopping rule `‖S̄‖_F <= tol` where `S̄ = Σ wᵢ Log_P̄(Pᵢ)`.
pub fn frechet_mean_with_stats(
    points: &[SpdMatrix],
    weights: &[f64],
    opts: MeanOptions,
) -> Result<MeanEstimate> {
    if points.is_empty() {
        return Err(Error::invalid("cannot average an empty set"));
    }
    if points.len() != weights.len() {
        return Err(Error::invalid(format!(
            "{} points but {} weights",
            points.len(),
            weights.len()
        )));
    }
    let dim = points[0].dim();
    if points.iter().any(|p| p.dim() != dim) {
        return Err(Error::invalid("points have mixed dimensions"));
    }
    validate_weights(weights)?;

    let active: Vec<(&SpdMatrix, f64)> = points
        .iter()
        .zip(weights.iter().copied())
        .filter(|(_, w)| *w > 0.0)
        .collect();

    let mut init = DMatrix::zeros(dim, dim);
    for (p, w) in &active {
        init += p.matrix() * *w;
    }
    let mut mean = SpdMatrix::from_trusted(init);

    let mut iter = 0;
    loop {
        let whitener = Whitener::new(&mean)?;
        // Σ wᵢ log(P̄^{-1/2} Pᵢ P̄^{-1/2}); recoloring it gives S̄.
        let mut step = DMatrix::zeros(dim, dim);
        for (p, w) in &active {
            step += apply_trusted(&whitener.whiten(p.matrix()), MatrixFn::Log, 0.0)? * *w;
        }
        let residual = whitener.color(&step).norm();
        if !residual.is_finite() {
            return Err(Error::NumericalFailure("mean iteration diverged".into()));
        }
        if residual <= opts.tol {
            return Ok(MeanEstimate {
                mean,
                iterations: iter,
                residual,
            });
        }
        if iter >= opts.max_iter {
            return Err(Error::ConvergenceFailure {
                context: "Fréchet mean",
                iterations: iter,
                residual,
                last: Some(LastIterate::Mean(Box::new(mean))),
            });
        }
        let moved = apply_trusted(&step, MatrixFn::Exp, 0.0)?;
        mean = SpdMatrix::from_trusted(whitener.color(&moved));
        iter += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{geodesic, riemannian_distance};

    fn diag(v: &[f64]) -> SpdMatrix {
        SpdMatrix::from_diagonal(v).unwrap()
    }

    #[test]
    fn repeated_point() {
        let p = SpdMatrix::from_row_slice(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        let m = frechet_mean(&[p.clone(), p.clone()], &[0.5, 0.5], MeanOptions::default()).unwrap();
        assert!((m.matrix() - p.matrix()).norm() < 1e-12);
    }

    #[test]
    fn commuting_geometric_mean() {
        let m = frechet_mean(
            &[diag(&[1.0, 1.0]), diag(&[4.0, 4.0])],
            &[0.5, 0.5],
            MeanOptions::default(),
        )
        .unwrap();
        assert!((m.matrix() - diag(&[2.0, 2.0]).matrix()).norm() < 1e-10);
    }

    #[test]
    fn one_hot_returns_input() {
        let pts = [diag(&[1.0, 2.0]), diag(&[3.0, 0.5]), diag(&[7.0, 7.0])];
        let est = frechet_mean_with_stats(&pts, &[0.0, 1.0, 0.0], MeanOptions::default()).unwrap();
        assert_eq!(est.mean, pts[1]);
        assert_eq!(est.iterations, 0);
    }

    #[test]
    fn two_point_mean_is_on_geodesic() {
        let p = SpdMatrix::from_row_slice(2, &[2.0, 0.7, 0.7, 1.0]).unwrap();
        let q = SpdMatrix::from_row_slice(2, &[0.5, -0.2, -0.2, 3.0]).unwrap();
        let m = frechet_mean(&[p.clone(), q.clone()], &[0.7, 0.3], MeanOptions::default()).unwrap();
        let g = geodesic(&p, &q, 0.3).unwrap();
        assert!(riemannian_distance(&m, &g).unwrap() < 1e-7);
    }

    #[test]
    fn rejects_bad_weights() {
        let pts = [diag(&[1.0, 1.0]), diag(&[2.0, 2.0])];
        let o = MeanOptions::default();
        assert!(matches!(frechet_mean(&pts, &[0.5, 0.6], o), Err(Error::InvalidInput(_))));
        assert!(matches!(frechet_mean(&pts, &[1.5, -0.5], o), Err(Error::InvalidInput(_))));
        assert!(matches!(frechet_mean(&pts, &[1.0], o), Err(Error::InvalidInput(_))));
        assert!(matches!(frechet_mean(&[], &[], o), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn exhausted_budget_reports_last_iterate() {
        let pts = [diag(&[1.0, 10.0]), diag(&[10.0, 1.0])];
        let opts = MeanOptions { tol: 1e-14, max_iter: 0 };
        match frechet_mean(&pts, &[0.5, 0.5], opts) {
            Err(Error::ConvergenceFailure { iterations, last: Some(LastIterate::Mean(m)), .. }) => {
                assert_eq!(iterations, 0);
                assert_eq!(m.dim(), 2);
            }
            other => panic!("expected ConvergenceFailure, got {other:?}"),
        }
    }
}
