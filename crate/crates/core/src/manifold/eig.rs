//! Symmetric eigendecomposition and the spectral matrix functions built on it.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative tolerance used when checking that an input matrix is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Iteration budget handed to the QR sweeps, per matrix dimension.
const QR_ITERS_PER_DIM: usize = 200;

/// Eigenpairs of a symmetric matrix, eigenvalues sorted in descending order.
/// Column `k` of `vectors` pairs with `values[k]`.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymEig {
    /// `V f(Λ) Vᵀ`, symmetrized.
    pub fn recompose_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.values[k]);
        }
        symmetrize(&(scaled * self.vectors.transpose()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// True when `|m[i,j] - m[j,i]| <= SYMMETRY_TOL * max(1, |m[i,j]|)` for every pair.
pub fn is_symmetric(m: &DMatrix<f64>) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let a = m[(i, j)];
            let b = m[(j, i)];
            if !a.is_finite() || !b.is_finite() {
                return false;
            }
            if (a - b).abs() > SYMMETRY_TOL * a.abs().max(1.0) {
                return false;
            }
        }
    }
    m.iter().all(|x| x.is_finite())
}

/// `(M + Mᵀ) / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::invalid(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Err(Error::invalid("matrix dimension must be positive"));
    }
    if !is_symmetric(m) {
        return Err(Error::invalid("matrix is not symmetric (or has non-finite entries)"));
    }
    Ok(())
}

/// Eigendecomposition `M = V Λ Vᵀ` of a symmetric matrix.
pub fn sym_eig(m: &DMatrix<f64>) -> Result<SymEig> {
    check_symmetric(m)?;
    sym_eig_trusted(&symmetrize(m))
}

/// Skips the symmetry check; callers pass matrices that are symmetric by construction.
pub(crate) fn sym_eig_trusted(m: &DMatrix<f64>) -> Result<SymEig> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, QR_ITERS_PER_DIM * n.max(1))
        .ok_or_else(|| Error::NumericalFailure("symmetric eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite eigenvalue".into()));
    }
    Ok(SymEig { values, vectors })
}

/// Scalar function applied to the spectrum of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixFn {
    Log,
    Exp,
    Sqrt,
    InvSqrt,
    Power(f64),
}

impl MatrixFn {
    fn needs_positive_spectrum(self) -> bool {
        !matches!(self, MatrixFn::Exp)
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            MatrixFn::Log => x.ln(),
            MatrixFn::Exp => x.exp(),
            MatrixFn::Sqrt => x.sqrt(),
            MatrixFn::InvSqrt => 1.0 / x.sqrt(),
            MatrixFn::Power(t) => x.powf(t),
        }
    }
}

/// Applies `f` through the eigendecomposition of a symmetric matrix.
///
/// Every function except `Exp` requires the spectrum to lie above `floor`.
pub fn symmetric_function(m: &DMatrix<f64>, f: MatrixFn, floor: f64) -> Result<DMatrix<f64>> {
    check_symmetric(m)?;
    apply_trusted(&symmetrize(m), f, floor)
}

pub(crate) fn apply_trusted(m: &DMatrix<f64>, f: MatrixFn, floor: f64) -> Result<DMatrix<f64>> {
    let eig = sym_eig_trusted(m)?;
    apply_eig(&eig, f, floor)
}

pub(crate) fn apply_eig(eig: &SymEig, f: MatrixFn, floor: f64) -> Result<DMatrix<f64>> {
    if f.needs_positive_spectrum() {
        let min = eig.min_value();
        if !(min > floor) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
                floor,
            });
        }
    }
    let out = eig.recompose_with(|x| f.apply(x));
    if out.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure(format!(
            "matrix function {f:?} produced non-finite entries"
        )));
    }
    Ok(out)
}
