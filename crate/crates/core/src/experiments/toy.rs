use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{apply_congruence, random_spd, recovery_error, rotation, CongruenceMap, MatchReport};
use crate::adapt::{adapt, barycentric_map, build_cost, AdaptationConfig};
use crate::error::{Error, Result};
use crate::manifold::{MeanOptions, SpdMatrix};
use crate::transport::{exact_ot, MassVector, Metric, TransportPlan};

/// Default θ-grid size of the congruence sweep over `[0, π]`.
pub const TOY_A_GRID: usize = 64;
/// Default θ-grid size of the rotation search over `[0, 2π)`.
pub const TOY_B_GRID: usize = 256;
/// Spread of the toy source sets, passed to [`random_spd`] as `scale`.
pub const TOY_SOURCE_SCALE: f64 = 0.2;
/// Axis lengths of the fixed congruence that makes the toy source law
/// anisotropic.
pub const TOY_SOURCE_AXES: [f64; 2] = [1.0, 0.75];

/// `n` matrices `A Pᵢ Aᵀ` with `Pᵢ` from [`random_spd`] at
/// [`TOY_SOURCE_SCALE`] and `A = diag(TOY_SOURCE_AXES)`.
///
/// Recovery under the Riemannian cost needs a concentrated cloud, and the
/// rotation search needs a law that is not rotation invariant, which plain
/// `random_spd` is.
pub fn toy_source(n: usize, seed: u64) -> Vec<SpdMatrix> {
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&TOY_SOURCE_AXES));
    random_spd(2, n, TOY_SOURCE_SCALE, seed)
        .iter()
        .map(|p| SpdMatrix::from_trusted(crate::manifold::symmetrize(&(&a * p.matrix() * &a))))
        .collect()
}

/// For each θ, maps a random 2×2 source set through the reference
/// congruence `s_θ`, adapts the source onto the image with exact OT, and
/// reports how well the true pairing is recovered.
pub fn toy_a_sweep(n: usize, theta_grid: &[f64], seed: u64) -> Result<Vec<(f64, MatchReport)>> {
    if n == 0 {
        return Err(Error::invalid("toy sweep needs at least one point"));
    }
    if let Some(t) = theta_grid.iter().find(|t| !(0.0..=PI).contains(*t)) {
        return Err(Error::invalid(format!("θ = {t} outside [0, π]")));
    }
    let source = toy_source(n, seed);
    let config = AdaptationConfig::exact();
    theta_grid
        .iter()
        .map(|&theta| {
            let target = apply_congruence(&CongruenceMap::reference(theta), &source)?;
            let result = adapt(&source, &target, None, &config)?;
            Ok((
                theta,
                MatchReport {
                    diagonal_mass: result.plan.diagonal_mass(),
                    recovery_error: recovery_error(&result.adapted_source, &target)?,
                    objective: result.plan.objective(&result.cost),
                },
            ))
        })
        .collect()
}

/// Rotation search over a θ-grid: at each θ the source is rotated by `U_θ`
/// and exact OT is solved against the target.
#[derive(Debug, Clone)]
pub struct ToyBSearch {
    pub best_theta: f64,
    pub best_index: usize,
    /// `(θ, ⟨Γ_θ, C_θ⟩)` for every grid value.
    pub curve: Vec<(f64, f64)>,
    pub plans: Vec<TransportPlan>,
}

impl ToyBSearch {
    pub fn best_plan(&self) -> &TransportPlan {
        &self.plans[self.best_index]
    }
}

pub fn toy_b_search(source: &[SpdMatrix], target: &[SpdMatrix], theta_grid: &[f64]) -> Result<ToyBSearch> {
    if theta_grid.is_empty() {
        return Err(Error::invalid("θ-grid is empty"));
    }
    if source.iter().chain(target).any(|p| p.dim() != 2) {
        return Err(Error::invalid("rotation search is defined for 2x2 matrices only"));
    }
    let p = MassVector::uniform(source.len())?;
    let q = MassVector::uniform(target.len())?;

    let mut curve = Vec::with_capacity(theta_grid.len());
    let mut plans = Vec::with_capacity(theta_grid.len());
    let mut best_index = 0;
    for (k, &theta) in theta_grid.iter().enumerate() {
        let u = rotation(theta);
        let rotated = source.iter().map(|s| s.congruence(&u)).collect::<Result<Vec<_>>>()?;
        let cost = build_cost(&rotated, target, Metric::Riemannian)?;
        let plan = exact_ot(&cost, &p, &q)?;
        let objective = plan.objective(&cost);
        if objective < curve.get(best_index).map_or(f64::INFINITY, |(_, o): &(f64, f64)| *o) {
            best_index = k;
        }
        curve.push((theta, objective));
        plans.push(plan);
    }
    Ok(ToyBSearch {
        best_theta: theta_grid[best_index],
        best_index,
        curve,
        plans,
    })
}

/// A generated rotation-search instance and its per-θ match statistics.
#[derive(Debug, Clone)]
pub struct ToyBRun {
    pub search: ToyBSearch,
    pub reports: Vec<(f64, MatchReport)>,
}

/// Source of `n` random 2×2 matrices, target `S Pᵢ Sᵀ` with `S = T U_{θ*}`.
pub fn toy_b_run(n: usize, theta_star: f64, theta_grid: &[f64], seed: u64) -> Result<ToyBRun> {
    if n == 0 {
        return Err(Error::invalid("toy search needs at least one point"));
    }
    let source = toy_source(n, seed);
    let target = apply_congruence(&CongruenceMap::reference(theta_star), &source)?;
    let search = toy_b_search(&source, &target, theta_grid)?;
    let mut reports = Vec::with_capacity(theta_grid.len());
    for (&(theta, objective), plan) in search.curve.iter().zip(&search.plans) {
        let mapped = barycentric_map(&source, &target, plan, None, MeanOptions::default())?;
        reports.push((
            theta,
            MatchReport {
                diagonal_mass: plan.diagonal_mass(),
                recovery_error: recovery_error(&mapped, &target)?,
                objective,
            },
        ));
    }
    Ok(ToyBRun { search, reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::uniform_grid;

    #[test]
    fn sweep_rejects_out_of_range_theta() {
        assert!(toy_a_sweep(5, &[4.0], 1).is_err());
    }

    #[test]
    fn identical_sets_minimize_at_zero() {
        let source = random_spd(2, 6, 1.0, 2);
        let grid = uniform_grid(0.0, 2.0 * PI, 32, false);
        let s = toy_b_search(&source, &source, &grid).unwrap();
        assert_eq!(s.best_theta, 0.0);
        assert!(s.curve[0].1.abs() < 1e-20);
        assert_eq!(s.best_plan().diagonal_mass(), 1.0);
    }

    #[test]
    fn curve_is_periodic() {
        let source = random_spd(2, 5, 1.0, 3);
        let target = apply_congruence(&CongruenceMap::reference(0.4), &source).unwrap();
        let grid = [0.1, 0.7, 0.1 + 2.0 * PI, 0.7 + 2.0 * PI];
        let s = toy_b_search(&source, &target, &grid).unwrap();
        assert!((s.curve[0].1 - s.curve[2].1).abs() < 1e-9);
        assert!((s.curve[1].1 - s.curve[3].1).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_2x2() {
        let a = random_spd(3, 2, 1.0, 1);
        assert!(toy_b_search(&a, &a, &[0.0]).is_err());
    }
}
