//! Synthetic experiments: congruence-map toy problems on 2×2 SPD matrices and
//! the cosine-signal comparison of three ways to set up the transport problem.

mod cosine;
mod toy;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{riemannian_distance_sq, SpdMatrix};

pub use cosine::{
    covariance, cosine_trials, three_config_comparison, three_config_comparison_with, ConfigReport, CosineParams,
    CovarianceEstimate, OtConfiguration, TimeSeriesTrial,
};
pub use toy::{
    toy_a_sweep, toy_b_run, toy_b_search, toy_source, ToyBRun, ToyBSearch, TOY_A_GRID, TOY_B_GRID, TOY_SOURCE_AXES,
    TOY_SOURCE_SCALE,
};

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` matrices `G Gᵀ / dim + 0.1 I` with `G` standard normal times `scale`.
pub fn random_spd(dim: usize, count: usize, scale: f64, seed: u64) -> Vec<SpdMatrix> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let g = DMatrix::from_fn(dim, dim, |_, _| {
                let z: f64 = StandardNormal.sample(&mut rng);
                scale * z
            });
            let m = &g * g.transpose() / dim as f64 + DMatrix::identity(dim, dim) * 0.1;
            SpdMatrix::from_trusted(m)
        })
        .collect()
}

/// `k` evenly spaced values from `start`; `end` is included when `inclusive`.
pub fn uniform_grid(start: f64, end: f64, k: usize, inclusive: bool) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let steps = if inclusive { k - 1 } else { k } as f64;
            (0..k).map(|i| start + (end - start) * i as f64 / steps).collect()
        }
    }
}

/// Rotation `[[cos θ, sin θ], [-sin θ, cos θ]]`.
pub fn rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, s, -s, c])
}

/// `s(P) = S P Sᵀ` with `S = T U_θ`, `T` SPD and `U_θ` a plane rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct CongruenceMap {
    pub positive: SpdMatrix,
    pub theta: f64,
}

impl CongruenceMap {
    pub fn new(positive: SpdMatrix, theta: f64) -> Result<Self> {
        if positive.dim() != 2 {
            return Err(Error::invalid("congruence maps are parameterized on 2x2 matrices"));
        }
        Ok(CongruenceMap { positive, theta })
    }

    /// The toy-problem map with `T = [[0.5, -0.25], [-0.25, 1]]`.
    pub fn reference(theta: f64) -> Self {
        let t = DMatrix::from_row_slice(2, 2, &[0.5, -0.25, -0.25, 1.0]);
        CongruenceMap {
            positive: SpdMatrix::from_trusted(t),
            theta,
        }
    }

    /// `S = T U_θ`.
    pub fn matrix(&self) -> DMatrix<f64> {
        self.positive.matrix() * rotation(self.theta)
    }
}

pub fn apply_congruence(map: &CongruenceMap, points: &[SpdMatrix]) -> Result<Vec<SpdMatrix>> {
    let s = map.matrix();
    points.iter().map(|p| p.congruence(&s)).collect()
}

/// How well a plan recovers a known `i ↔ i` correspondence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    /// Fraction of plan mass on the true pairs.
    pub diagonal_mass: f64,
    /// `sqrt(mean d²(γ(Pᵢ), s(Pᵢ)))`.
    pub recovery_error: f64,
    /// `⟨Γ, C⟩`.
    pub objective: f64,
}

/// `sqrt((1/N) Σ d²(mappedᵢ, truthᵢ))`.
pub fn recovery_error(mapped: &[SpdMatrix], truth: &[SpdMatrix]) -> Result<f64> {
    if mapped.len() != truth.len() || mapped.is_empty() {
        return Err(Error::invalid("recovery error needs two nonempty sets of equal size"));
    }
    let mut total = 0.0;
    for (a, b) in mapped.iter().zip(truth) {
        total += riemannian_distance_sq(a, b)?;
    }
    Ok((total / mapped.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{riemannian_distance, sym_eig};

    #[test]
    fn random_spd_is_deterministic() {
        assert_eq!(random_spd(3, 4, 1.0, 9), random_spd(3, 4, 1.0, 9));
        assert_ne!(random_spd(3, 4, 1.0, 9), random_spd(3, 4, 1.0, 10));
    }

    #[test]
    fn zero_scale_gives_ridge() {
        for p in random_spd(3, 5, 0.0, 1) {
            assert!((p.matrix() - DMatrix::identity(3, 3) * 0.1).norm() == 0.0);
        }
    }

    #[test]
    fn many_draws_are_spd() {
        for p in random_spd(4, 1000, 1.0, 3) {
            assert!(sym_eig(p.matrix()).unwrap().min_value() > 1e-10);
            assert!(SpdMatrix::new(p.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn identity_map() {
        let map = CongruenceMap::new(SpdMatrix::identity(2), 0.0).unwrap();
        let pts = random_spd(2, 3, 1.0, 4);
        let out = apply_congruence(&map, &pts).unwrap();
        for (a, b) in out.iter().zip(&pts) {
            assert!((a.matrix() - b.matrix()).norm() < 1e-15);
        }
    }

    #[test]
    fn reference_map_squares_t_on_identity() {
        let out = apply_congruence(&CongruenceMap::reference(0.0), &[SpdMatrix::identity(2)]).unwrap();
        // T² for T = [[0.5, -0.25], [-0.25, 1]]
        let expected = DMatrix::from_row_slice(2, 2, &[0.3125, -0.375, -0.375, 1.0625]);
        assert!((out[0].matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn congruence_preserves_distance() {
        let pts = random_spd(2, 2, 1.0, 5);
        let map = CongruenceMap::reference(0.8);
        let out = apply_congruence(&map, &pts).unwrap();
        let d0 = riemannian_distance(&pts[0], &pts[1]).unwrap();
        let d1 = riemannian_distance(&out[0], &out[1]).unwrap();
        assert!((d0 - d1).abs() <= 1e-9 * d0);
    }

    #[test]
    fn grids() {
        assert_eq!(uniform_grid(0.0, 1.0, 3, true), vec![0.0, 0.5, 1.0]);
        assert_eq!(uniform_grid(0.0, 1.0, 4, false), vec![0.0, 0.25, 0.5, 0.75]);
        assert_eq!(uniform_grid(2.0, 3.0, 1, true), vec![2.0]);
    }

    #[test]
    fn rotation_is_periodic() {
        let a = rotation(0.3);
        let b = rotation(0.3 + 2.0 * std::f64::consts::PI);
        assert!((a - b).norm() < 1e-14);
    }
}
