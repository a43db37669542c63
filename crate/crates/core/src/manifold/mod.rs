//! Affine-invariant geometry of the cone of symmetric positive-definite matrices.
//!
//! Every matrix function goes through a symmetric eigendecomposition
//! ([`sym_eig`]); results are symmetrized after assembly.

mod eig;
mod mean;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use eig::{is_symmetric, sym_eig, symmetric_function, symmetrize, MatrixFn, SymEig, SYMMETRY_TOL};
pub use mean::{frechet_mean, frechet_mean_with_stats, MeanEstimate, MeanOptions};

pub(crate) use eig::{apply_eig, apply_trusted, sym_eig_trusted};

/// Default eigenvalue floor below which a matrix is not considered positive definite.
pub const DEFAULT_EPS_PD: f64 = 1e-10;

/// A point on the SPD cone.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    m: DMatrix<f64>,
}

impl SpdMatrix {
    /// Validates symmetry and positive-definiteness with the default floor.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_floor(m, DEFAULT_EPS_PD)
    }

    /// Validates with a caller-chosen eigenvalue floor.
    pub fn with_floor(m: DMatrix<f64>, floor: f64) -> Result<Self> {
        eig::check_symmetric(&m)?;
        let m = symmetrize(&m);
        let min = sym_eig_trusted(&m)?.min_value();
        if !(min > floor) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
                floor,
            });
        }
        Ok(SpdMatrix { m })
    }

    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn identity(dim: usize) -> Self {
        SpdMatrix {
            m: DMatrix::identity(dim, dim),
        }
    }

    /// Wraps a matrix that is SPD by construction (a congruence, exp, or mean of SPD inputs).
    pub(crate) fn from_trusted(m: DMatrix<f64>) -> Self {
        SpdMatrix { m: symmetrize(&m) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        self.m.transpose().as_slice().to_vec()
    }

    /// Spectral function of this matrix.
    pub fn apply(&self, f: MatrixFn) -> Result<DMatrix<f64>> {
        apply_trusted(&self.m, f, 0.0)
    }

    pub fn inverse(&self) -> Result<SpdMatrix> {
        Ok(SpdMatrix::from_trusted(self.apply(MatrixFn::Power(-1.0))?))
    }

    /// `A P Aᵀ`, validated (a singular `A` yields a non-SPD result).
    pub fn congruence(&self, a: &DMatrix<f64>) -> Result<SpdMatrix> {
        if a.ncols() != self.dim() || a.nrows() != self.dim() {
            return Err(Error::invalid(format!(
                "congruence factor is {}x{}, expected {d}x{d}",
                a.nrows(),
                a.ncols(),
                d = self.dim()
            )));
        }
        SpdMatrix::new(symmetrize(&(a * &self.m * a.transpose())))
    }
}

/// Matrix function of an SPD matrix; see [`MatrixFn`].
pub fn matrix_function(p: &SpdMatrix, f: MatrixFn) -> Result<DMatrix<f64>> {
    p.apply(f)
}

/// A symmetric matrix in the tangent space at `base_point`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    entries: DMatrix<f64>,
    base_point: Option<SpdMatrix>,
}

impl TangentVector {
    pub fn new(entries: DMatrix<f64>, base_point: Option<SpdMatrix>) -> Result<Self> {
        eig::check_symmetric(&entries)?;
        if let Some(b) = &base_point {
            if b.dim() != entries.nrows() {
                return Err(Error::invalid("tangent vector and base point differ in dimension"));
            }
        }
        Ok(TangentVector {
            entries: symmetrize(&entries),
            base_point,
        })
    }

    pub fn zeros(dim: usize) -> Self {
        TangentVector {
            entries: DMatrix::zeros(dim, dim),
            base_point: None,
        }
    }

    pub(crate) fn from_trusted(entries: DMatrix<f64>, base_point: Option<SpdMatrix>) -> Self {
        TangentVector {
            entries: symmetrize(&entries),
            base_point,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn base_point(&self) -> Option<&SpdMatrix> {
        self.base_point.as_ref()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    /// Norm under the affine-invariant inner product `tr(P⁻¹ A P⁻¹ A)` at `base`.
    pub fn norm_at(&self, base: &SpdMatrix) -> Result<f64> {
        check_same_dim(base.dim(), self.dim())?;
        let w = Whitener::new(base)?;
        Ok(w.whiten(&self.entries).norm())
    }
}

/// `P^{1/2}` and `P^{-1/2}` of one base point, from a single eigendecomposition.
pub(crate) struct Whitener {
    sqrt: DMatrix<f64>,
    inv_sqrt: DMatrix<f64>,
}

impl Whitener {
    pub(crate) fn new(p: &SpdMatrix) -> Result<Self> {
        let eig = sym_eig_trusted(p.matrix())?;
        Ok(Whitener {
            sqrt: apply_eig(&eig, MatrixFn::Sqrt, 0.0)?,
            inv_sqrt: apply_eig(&eig, MatrixFn::InvSqrt, 0.0)?,
        })
    }

    /// `P^{-1/2} M P^{-1/2}`.
    pub(crate) fn whiten(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        symmetrize(&(&self.inv_sqrt * m * &self.inv_sqrt))
    }

    /// `P^{1/2} M P^{1/2}`.
    pub(crate) fn color(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        symmetrize(&(&self.sqrt * m * &self.sqrt))
    }
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::invalid(format!("dimension mismatch: {a} vs {b}")));
    }
    Ok(())
}

/// Generalized eigenvalues of the pair `(P, Q)`, i.e. the spectrum of `Q⁻¹P`.
pub fn generalized_eigenvalues(p: &SpdMatrix, q: &SpdMatrix) -> Result<DVector<f64>> {
    check_same_dim(p.dim(), q.dim())?;
    let chol = nalgebra::Cholesky::new(q.matrix().clone())
        .ok_or_else(|| Error::NumericalFailure("Cholesky factorization failed".into()))?;
    let l = chol.l();
    // L⁻¹ P L⁻ᵀ
    let left = l
        .solve_lower_triangular(p.matrix())
        .ok_or_else(|| Error::NumericalFailure("singular Cholesky factor".into()))?;
    let both = l
        .solve_lower_triangular(&left.transpose())
        .ok_or_else(|| Error::NumericalFailure("singular Cholesky factor".into()))?;
    Ok(sym_eig_trusted(&symmetrize(&both))?.values)
}

/// Squared affine-invariant distance, `Σ log² λᵢ(Q⁻¹P)`.
pub fn riemannian_distance_sq(p: &SpdMatrix, q: &SpdMatrix) -> Result<f64> {
    check_same_dim(p.dim(), q.dim())?;
    if p == q {
        return Ok(0.0);
    }
    let values = generalized_eigenvalues(p, q)?;
    if values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NumericalFailure(
            "non-positive generalized eigenvalue".into(),
        ));
    }
    Ok(values.iter().map(|v| v.ln().powi(2)).sum())
}

/// Affine-invariant Riemannian distance between two SPD matrices.
pub fn riemannian_distance(p: &SpdMatrix, q: &SpdMatrix) -> Result<f64> {
    riemannian_distance_sq(p, q).map(f64::sqrt)
}

/// The same distance through `‖log(P^{-1/2} Q P^{-1/2})‖_F`. Slower; kept as a cross-check.
pub fn riemannian_distance_log_form(p: &SpdMatrix, q: &SpdMatrix) -> Result<f64> {
    check_same_dim(p.dim(), q.dim())?;
    let w = Whitener::new(p)?;
    Ok(apply_trusted(&w.whiten(q.matrix()), MatrixFn::Log, 0.0)?.norm())
}

/// Point at parameter `t ∈ [0, 1]` on the geodesic from `P` to `Q`.
pub fn geodesic(p: &SpdMatrix, q: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    check_same_dim(p.dim(), q.dim())?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid(format!("geodesic parameter {t} outside [0, 1]")));
    }
    let w = Whitener::new(p)?;
    let inner = apply_trusted(&w.whiten(q.matrix()), MatrixFn::Power(t), 0.0)?;
    Ok(SpdMatrix::from_trusted(w.color(&inner)))
}

/// `Exp_P(A) = P^{1/2} exp(P^{-1/2} A P^{-1/2}) P^{1/2}`.
pub fn exp_map(p: &SpdMatrix, a: &TangentVector) -> Result<SpdMatrix> {
    check_same_dim(p.dim(), a.dim())?;
    let w = Whitener::new(p)?;
    let inner = apply_trusted(&w.whiten(a.matrix()), MatrixFn::Exp, 0.0)?;
    Ok(SpdMatrix::from_trusted(w.color(&inner)))
}

/// `Log_P(Q) = P^{1/2} log(P^{-1/2} Q P^{-1/2}) P^{1/2}`.
pub fn log_map(p: &SpdMatrix, q: &SpdMatrix) -> Result<TangentVector> {
    check_same_dim(p.dim(), q.dim())?;
    let w = Whitener::new(p)?;
    let inner = apply_trusted(&w.whiten(q.matrix()), MatrixFn::Log, 0.0)?;
    Ok(TangentVector::from_trusted(w.color(&inner), Some(p.clone())))
}

/// Whitened log coordinates `log(B^{-1/2} Pᵢ B^{-1/2})` at `base`.
///
/// Their Frobenius norms equal the Riemannian distances to `base`; pairwise
/// Frobenius distances approximate the Riemannian ones near `base`.
pub fn tangent_coordinates(points: &[SpdMatrix], base: &SpdMatrix) -> Result<Vec<TangentVector>> {
    let w = Whitener::new(base)?;
    points
        .iter()
        .map(|p| {
            check_same_dim(base.dim(), p.dim())?;
            let a = apply_trusted(&w.whiten(p.matrix()), MatrixFn::Log, 0.0)?;
            Ok(TangentVector::from_trusted(a, Some(base.clone())))
        })
        .collect()
}
