//! Entropic OT by alternating diagonal scaling.

use nalgebra::{DMatrix, DVector};

use super::{CostMatrix, MassVector, TransportPlan};
use crate::error::{Error, LastIterate, Result};

/// Kernel entries `exp(-λC)` are clamped from below to this value.
pub const KERNEL_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornOptions {
    /// Inverse entropic temperature; larger means closer to unregularized OT.
    pub lambda: f64,
    /// Stop when `max_i |Δuᵢ| / |uᵢ| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
}

impl SinkhornOptions {
    pub fn new(lambda: f64) -> Self {
        SinkhornOptions {
            lambda,
            tol: 1e-9,
            max_iter: 10_000,
        }
    }
}

/// Median of a list of reals; even counts average the two central values.
pub fn median(mut values: Vec<f64>) -> f64 {
    assert!(!values.is_empty(), "median of an empty list");
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// `λ = 1 / (2m²)` with `m = 0.05 · median(C)`.
pub fn adaptive_lambda(cost: &CostMatrix) -> Result<f64> {
    let med = cost.median();
    if !(med > 0.0) {
        return Err(Error::invalid(
            "adaptive λ needs a cost matrix with a positive median",
        ));
    }
    let m = 0.05 * med;
    Ok(1.0 / (2.0 * m * m))
}

fn check_inputs(cost: &CostMatrix, p: &MassVector, q: &MassVector, opts: &SinkhornOptions) -> Result<()> {
    if p.len() != cost.rows() || q.len() != cost.cols() {
        return Err(Error::invalid("marginal lengths do not match the cost matrix"));
    }
    if !(opts.lambda > 0.0) || !opts.lambda.is_finite() {
        return Err(Error::invalid(format!("λ must be positive and finite, got {}", opts.lambda)));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("Sinkhorn tolerance must be positive"));
    }
    Ok(())
}

fn kernel(cost: &CostMatrix, lambda: f64) -> Result<DMatrix<f64>> {
    let k = cost.matrix().map(|c| (-lambda * c).exp().max(KERNEL_FLOOR));
    let row_dead = k.row_iter().position(|r| r.iter().all(|&x| x <= KERNEL_FLOOR));
    let col_dead = k.column_iter().position(|c| c.iter().all(|&x| x <= KERNEL_FLOOR));
    if let Some(i) = row_dead {
        return Err(Error::NumericalFailure(format!(
            "exp(-λC) underflows on all of row {i}; lower λ (currently {lambda})"
        )));
    }
    if let Some(j) = col_dead {
        return Err(Error::NumericalFailure(format!(
            "exp(-λC) underflows on all of column {j}; lower λ (currently {lambda})"
        )));
    }
    Ok(k)
}

fn divide(num: &[f64], den: &DVector<f64>) -> Result<DVector<f64>> {
    let mut out = DVector::zeros(num.len());
    divide_into(&mut out, num, den)?;
    Ok(out)
}

fn divide_into(out: &mut DVector<f64>, num: &[f64], den: &DVector<f64>) -> Result<()> {
    for ((o, a), b) in out.iter_mut().zip(num).zip(den.iter()) {
        *o = a / b;
        if !o.is_finite() {
            return Err(Error::NumericalFailure("Sinkhorn scaling overflowed; lower λ".into()));
        }
    }
    Ok(())
}

/// `max_i |aᵢ - bᵢ| / max(|aᵢ|, |bᵢ|)`, skipping entries that are zero in both.
fn relative_change(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .filter(|(x, y)| **x != 0.0 || **y != 0.0)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()))
        .fold(0.0, f64::max)
}

/// Entropy-regularized OT plan, `argmin ⟨Γ,C⟩ - h(Γ)/λ` over couplings of `p` and `q`.
///
/// `u` starts at `1/N₁` and alternates `z = q ⊘ Kᵀu`, `u = p ⊘ Kz` until no
/// entry of `u` moves by more than `opts.tol` relative to itself; then
/// `Γ = diag(u) K diag(v)` with `v = q ⊘ Kᵀu`. At that point every column sum
/// is within `tol · max q` of its target.
pub fn sinkhorn(cost: &CostMatrix, p: &MassVector, q: &MassVector, opts: SinkhornOptions) -> Result<TransportPlan> {
    check_inputs(cost, p, q, &opts)?;
    let k = kernel(cost, opts.lambda)?;
    let n1 = cost.rows();

    let mut u = DVector::from_element(n1, 1.0 / n1 as f64);
    let mut next = DVector::zeros(n1);
    let mut ktu = DVector::zeros(cost.cols());
    let mut z = DVector::zeros(cost.cols());
    let mut kz = DVector::zeros(n1);
    let mut converged = false;
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        ktu.gemv_tr(1.0, &k, &u, 0.0);
        divide_into(&mut z, q.as_slice(), &ktu)?;
        // 1 ⊘ (K̃z) with K̃ = diag(p)⁻¹K, written without dividing by zero masses.
        kz.gemv(1.0, &k, &z, 0.0);
        divide_into(&mut next, p.as_slice(), &kz)?;
        change = relative_change(&u, &next);
        std::mem::swap(&mut u, &mut next);
        iterations += 1;
        if change <= opts.tol {
            converged = true;
            break;
        }
    }

    let v = divide(q.as_slice(), &k.tr_mul(&u))?;
    let mut gamma = k;
    for (i, mut row) in gamma.row_iter_mut().enumerate() {
        for (j, g) in row.iter_mut().enumerate() {
            *g *= u[i] * v[j];
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure {
            context: "Sinkhorn",
            iterations,
            residual: change,
            last: Some(LastIterate::Plan(Box::new(TransportPlan::unchecked(
                gamma,
                p.clone(),
                q.clone(),
            )))),
        });
    }
    TransportPlan::new(gamma, p.clone(), q.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::{exact_ot, Metric};

    fn uniform(n: usize) -> MassVector {
        MassVector::uniform(n).unwrap()
    }

    #[test]
    fn constant_cost_gives_outer_product() {
        let c = CostMatrix::from_rows(&[vec![2.0; 3], vec![2.0; 3]], Metric::Euclidean).unwrap();
        let p = MassVector::new(vec![0.3, 0.7]).unwrap();
        let q = MassVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let plan = sinkhorn(&c, &p, &q, SinkhornOptions::new(1.0)).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                let expected = p.as_slice()[i] * q.as_slice()[j];
                assert!((plan.matrix()[(i, j)] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn large_lambda_approaches_exact() {
        let c = CostMatrix::from_rows(&[vec![0.0, 5.0], vec![5.0, 0.0]], Metric::Euclidean).unwrap();
        let plan = sinkhorn(&c, &uniform(2), &uniform(2), SinkhornOptions::new(50.0)).unwrap();
        let exact = exact_ot(&c, &uniform(2), &uniform(2)).unwrap();
        assert!((plan.matrix() - exact.matrix()).amax() < 1e-3);
    }

    #[test]
    fn adaptive_lambda_values() {
        let ones = CostMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]], Metric::Riemannian).unwrap();
        assert!((adaptive_lambda(&ones).unwrap() - 200.0).abs() < 1e-9);
        let c = CostMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]], Metric::Riemannian).unwrap();
        assert!((adaptive_lambda(&c).unwrap() - 32.0).abs() < 1e-9);
        let scaled = CostMatrix::new(c.matrix() * 3.0, Metric::Riemannian).unwrap();
        let ratio = adaptive_lambda(&scaled).unwrap() / adaptive_lambda(&c).unwrap();
        assert!((ratio - 1.0 / 9.0).abs() < 1e-12);
        let zero = CostMatrix::from_rows(&[vec![0.0, 0.0]], Metric::Riemannian).unwrap();
        assert!(matches!(adaptive_lambda(&zero), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn underflow_is_reported() {
        let c = CostMatrix::from_rows(&[vec![10.0, 20.0], vec![0.0, 0.0]], Metric::Euclidean).unwrap();
        let r = sinkhorn(&c, &uniform(2), &uniform(2), SinkhornOptions::new(1e3));
        assert!(matches!(r, Err(Error::NumericalFailure(_))));
    }

    #[test]
    fn iteration_budget() {
        let c = CostMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.3]], Metric::Euclidean).unwrap();
        let opts = SinkhornOptions {
            lambda: 30.0,
            tol: 1e-15,
            max_iter: 2,
        };
        assert!(matches!(
            sinkhorn(&c, &uniform(2), &uniform(2), opts),
            Err(Error::ConvergenceFailure { context: "Sinkhorn", .. })
        ));
    }

    #[test]
    fn rejects_bad_lambda_and_shapes() {
        let c = CostMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], Metric::Euclidean).unwrap();
        assert!(sinkhorn(&c, &uniform(2), &uniform(2), SinkhornOptions::new(0.0)).is_err());
        assert!(sinkhorn(&c, &uniform(3), &uniform(2), SinkhornOptions::new(1.0)).is_err());
    }

    #[test]
    fn zero_mass_rows_stay_empty() {
        let c = CostMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]], Metric::Euclidean).unwrap();
        let p = MassVector::new(vec![0.5, 0.5, 0.0]).unwrap();
        let plan = sinkhorn(&c, &p, &uniform(2), SinkhornOptions::new(5.0)).unwrap();
        assert_eq!(plan.row(2), vec![0.0, 0.0]);
    }
}
