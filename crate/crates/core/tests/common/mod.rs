//! Independent oracles shared by the integration tests. None of them goes
//! through the library's eigendecomposition or assignment code.

#![allow(dead_code)]

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spdot::SpdMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `G Gᵀ / d + 0.2 I`, entries of `G` uniform in `[-1, 1]`.
pub fn random_spd(dim: usize, rng: &mut ChaCha8Rng) -> SpdMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    let m = &g * g.transpose() / dim as f64 + DMatrix::identity(dim, dim) * 0.2;
    SpdMatrix::new(symmetric(&m)).unwrap()
}

pub fn random_symmetric(dim: usize, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-scale..scale));
    symmetric(&g)
}

/// Diagonally dominated random matrix, hence invertible.
pub fn random_invertible(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| {
        rng.random_range(-1.0..1.0) + if i == j { 2.0 * dim as f64 } else { 0.0 }
    })
}

pub fn symmetric(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Scaling-and-squaring Taylor series.
pub fn expm_series(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let norm = x.norm();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let y = x / 2f64.powi(s);
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..30 {
        term = &term * &y / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// Roots of `det(Q - λP) = 0` for 2×2 inputs, by the quadratic formula.
pub fn generalized_eigenvalues_2x2(p: &DMatrix<f64>, q: &DMatrix<f64>) -> (f64, f64) {
    let a = p[(0, 0)] * p[(1, 1)] - p[(0, 1)] * p[(1, 0)];
    let b = -(p[(0, 0)] * q[(1, 1)] + p[(1, 1)] * q[(0, 0)] - p[(0, 1)] * q[(1, 0)] - p[(1, 0)] * q[(0, 1)]);
    let c = q[(0, 0)] * q[(1, 1)] - q[(0, 1)] * q[(1, 0)];
    let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
    let r1 = (-b + disc) / (2.0 * a);
    (r1, c / (a * r1))
}

pub fn distance_2x2(p: &SpdMatrix, q: &SpdMatrix) -> f64 {
    let (l1, l2) = generalized_eigenvalues_2x2(p.matrix(), q.matrix());
    (l1.ln().powi(2) + l2.ln().powi(2)).sqrt()
}

fn sym_from_params(params: &[f64], dim: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, dim);
    let mut k = 0;
    for i in 0..dim {
        for j in i..dim {
            m[(i, j)] = params[k];
            m[(j, i)] = params[k];
            k += 1;
        }
    }
    m
}

/// Minimizes `Σ wᵢ d²(exp(X), Pᵢ)` over symmetric `X` by gradient descent
/// with central finite differences and backtracking.
pub fn gradient_descent_mean(points: &[SpdMatrix], weights: &[f64]) -> DMatrix<f64> {
    let dim = points[0].dim();
    let np = dim * (dim + 1) / 2;
    let objective = |params: &[f64]| -> f64 {
        let p = SpdMatrix::new(symmetric(&expm_series(&sym_from_params(params, dim)))).unwrap();
        points
            .iter()
            .zip(weights)
            .map(|(q, w)| w * spdot::manifold::riemannian_distance_sq(&p, q).unwrap())
            .sum()
    };
    let mut x = vec![0.0; np];
    let mut f = objective(&x);
    let h = 1e-6;
    let mut step: f64 = 0.5;
    for _ in 0..5000 {
        let grad: Vec<f64> = (0..np)
            .map(|k| {
                let mut up = x.clone();
                let mut down = x.clone();
                up[k] += h;
                down[k] -= h;
                (objective(&up) - objective(&down)) / (2.0 * h)
            })
            .collect();
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-9 {
            break;
        }
        step = (step * 2.0).min(1.0);
        loop {
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
            let ft = objective(&trial);
            if ft < f || step < 1e-14 {
                x = trial;
                f = ft;
                break;
            }
            step *= 0.5;
        }
    }
    symmetric(&expm_series(&sym_from_params(&x, dim)))
}

/// All permutations of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, a, out);
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
        heap(k - 1, a, out);
    }
    let mut out = Vec::new();
    heap(n, &mut (0..n).collect(), &mut out);
    out
}

/// Cheapest permutation and its total cost.
pub fn brute_force_assignment(c: &DMatrix<f64>) -> (Vec<usize>, f64) {
    permutations(c.nrows())
        .into_iter()
        .map(|perm| {
            let total = perm.iter().enumerate().map(|(i, &j)| c[(i, j)]).sum::<f64>();
            (perm, total)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

/// Textbook unbiased covariance with an explicit mean.
pub fn textbook_covariance(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (d, m) = x.shape();
    let means: Vec<f64> = (0..d).map(|j| (0..m).map(|k| x[(j, k)]).sum::<f64>() / m as f64).collect();
    DMatrix::from_fn(d, d, |a, b| {
        (0..m).map(|k| (x[(a, k)] - means[a]) * (x[(b, k)] - means[b])).sum::<f64>() / (m - 1) as f64
    })
}

/// Index of the largest DFT magnitude among bins `1..=len/2`.
pub fn dft_peak_bin(signal: &[f64]) -> usize {
    let n = signal.len();
    let mean = signal.iter().sum::<f64>() / n as f64;
    (1..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, &x) in signal.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                re += (x - mean) * phase.cos();
                im += (x - mean) * phase.sin();
            }
            (k, re.hypot(im))
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
        .0
}

pub fn assert_close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) {
    let err = (a - b).norm();
    assert!(err <= tol, "‖a - b‖ = {err:e} > {tol:e}\na = {a}\nb = {b}");
}

/// SPD matrices of dimension `dim` from a bounded random factor.
pub fn spd_strategy(dim: usize) -> impl Strategy<Value = SpdMatrix> {
    prop::collection::vec(-1.5f64..1.5, dim * dim).prop_map(move |v| {
        let g = DMatrix::from_vec(dim, dim, v);
        let m = &g * g.transpose() / dim as f64 + DMatrix::identity(dim, dim) * 0.1;
        SpdMatrix::new(symmetric(&m)).unwrap()
    })
}

pub fn symmetric_strategy(dim: usize, scale: f64) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-scale..scale, dim * dim).prop_map(move |v| symmetric(&DMatrix::from_vec(dim, dim, v)))
}
