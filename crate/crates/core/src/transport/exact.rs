//! Unregularized OT for uniform, equal-size marginals, solved as a linear
//! assignment problem.

use nalgebra::DMatrix;

use super::{CostMatrix, MassVector, TransportPlan};
use crate::error::{Error, Result};

/// Minimum-cost perfect matching on a square cost matrix.
///
/// Returns `assignment[row] = col`. Shortest augmenting paths with dual
/// potentials, O(n³).
pub fn linear_assignment(cost: &DMatrix<f64>) -> Result<Vec<usize>> {
    let n = cost.nrows();
    if n == 0 || cost.ncols() != n {
        return Err(Error::invalid(format!(
            "assignment needs a nonempty square matrix, got {}x{}",
            cost.nrows(),
            cost.ncols()
        )));
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::invalid("assignment costs must be finite"));
    }

    // 1-based; index 0 is the virtual root of each augmenting search.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if j1 == 0 {
                return Err(Error::NumericalFailure("assignment search stalled".into()));
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[owner[j] - 1] = j - 1;
    }
    Ok(assignment)
}

/// Exact OT plan `(1/N)·Π` for uniform marginals of equal size.
///
/// Any other marginals are rejected with `UnsupportedInstance`; use
/// [`sinkhorn`](super::sinkhorn) for those.
pub fn exact_ot(cost: &CostMatrix, p: &MassVector, q: &MassVector) -> Result<TransportPlan> {
    let n = cost.rows();
    if p.len() != n || q.len() != cost.cols() {
        return Err(Error::invalid("marginal lengths do not match the cost matrix"));
    }
    if cost.rows() != cost.cols() || !p.is_uniform() || !q.is_uniform() {
        return Err(Error::UnsupportedInstance(
            "exact OT supports only uniform marginals of equal size".into(),
        ));
    }
    let assignment = linear_assignment(cost.matrix())?;
    let mut gamma = DMatrix::zeros(n, n);
    let mass = 1.0 / n as f64;
    for (i, &j) in assignment.iter().enumerate() {
        gamma[(i, j)] = mass;
    }
    TransportPlan::new(gamma, p.clone(), q.clone())
}
