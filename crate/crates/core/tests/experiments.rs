mod common;

use std::f64::consts::PI;

use common::*;
use nalgebra::DMatrix;
use spdot::experiments::*;

#[test]
fn noiseless_pairs_share_spectral_peaks() {
    let params = CosineParams {
        pairs: 6,
        noise: false,
        ..CosineParams::default()
    };
    let (xs, zs) = cosine_trials(&params, 3).unwrap();
    for (x, z) in xs.iter().zip(&zs) {
        for j in 0..params.channels {
            let row = |t: &TimeSeriesTrial| t.data.row(j).iter().copied().collect::<Vec<f64>>();
            assert_eq!(dft_peak_bin(&row(x)), dft_peak_bin(&row(z)), "channel {j}");
        }
        assert_eq!(x.amplitudes, z.amplitudes);
        assert_eq!(x.frequencies, z.frequencies);
        assert_ne!(x.phases, z.phases);
    }
}

#[test]
fn default_trials_have_expected_shapes_and_are_seeded() {
    let (xs, zs) = cosine_trials(&CosineParams::default(), 0).unwrap();
    assert_eq!((xs.len(), zs.len()), (40, 40));
    assert!(xs.iter().chain(&zs).all(|t| t.data.shape() == (5, 101)));
    assert_eq!(cosine_trials(&CosineParams::default(), 0).unwrap().0, xs);
    assert_ne!(cosine_trials(&CosineParams::default(), 1).unwrap().0, xs);
}

#[test]
fn covariance_matches_textbook_formula() {
    let mut r = rng(5);
    let x = DMatrix::from_fn(3, 50, |_, _| rand::Rng::random_range(&mut r, -2.0..2.0));
    let est = covariance(&TimeSeriesTrial::from_data(x.clone())).unwrap();
    assert!(est.ridge.is_none());
    assert_close(est.matrix.matrix(), &textbook_covariance(&x), 1e-13);

    let tiny = covariance(&TimeSeriesTrial::from_data(DMatrix::from_row_slice(1, 2, &[1.0, -1.0]))).unwrap();
    assert_eq!(tiny.matrix.matrix()[(0, 0)], 2.0);
}

#[test]
fn rank_one_trial_gets_a_ridge() {
    let row = [1.0, 2.0, 0.5, -1.0, 3.0];
    let x = DMatrix::from_fn(2, 5, |_, k| row[k]);
    let est = covariance(&TimeSeriesTrial::from_data(x)).unwrap();
    assert!(est.ridge.is_some());
}

#[test]
fn diagonal_mass_counts_correct_pairs() {
    for r in three_config_comparison(2).unwrap() {
        let scaled = r.report.diagonal_mass * 40.0;
        assert!((scaled - scaled.round()).abs() < 1e-9, "{}: {}", r.config, r.report.diagonal_mass);
    }
    let one = CosineParams {
        pairs: 1,
        ..CosineParams::default()
    };
    for r in three_config_comparison_with(&one, 0).unwrap() {
        assert_eq!(r.report.diagonal_mass, 1.0);
    }
}

#[test]
fn comparison_is_deterministic() {
    assert_eq!(three_config_comparison(6).unwrap(), three_config_comparison(6).unwrap());
}

#[test]
fn toy_a_endpoint_and_continuity() {
    let grid = uniform_grid(0.0, PI, 32, true);
    let sweep = toy_a_sweep(20, &grid, 1).unwrap();
    assert!(sweep[0].1.recovery_error <= 1e-6);
    assert_eq!(sweep[0].1.diagonal_mass, 1.0);

    // Refining the grid only inserts points; shared θ give identical rows.
    let fine = toy_a_sweep(20, &uniform_grid(0.0, PI, 63, true), 1).unwrap();
    for (k, (theta, report)) in sweep.iter().enumerate() {
        let (t2, r2) = &fine[2 * k];
        assert!((theta - t2).abs() < 1e-12);
        assert!((report.recovery_error - r2.recovery_error).abs() < 1e-9);
    }
    let spacing = PI / 62.0;
    let max_err = fine.iter().map(|(_, r)| r.recovery_error).fold(0.0, f64::max);
    let worst_jump = fine
        .windows(2)
        .map(|w| (w[1].1.recovery_error - w[0].1.recovery_error).abs())
        .fold(0.0, f64::max);
    assert!(worst_jump < 10.0 * spacing * max_err, "{worst_jump} vs {}", 10.0 * spacing * max_err);
}

#[test]
fn toy_a_fails_at_quarter_turn() {
    let sweep = toy_a_sweep(50, &[0.0, PI / 2.0], 3).unwrap();
    let (e0, e90) = (sweep[0].1.recovery_error, sweep[1].1.recovery_error);
    assert!(e90 > e0);
    assert!(sweep[1].1.diagonal_mass < 1.0);
}

#[test]
fn toy_b_minimum_sits_at_the_true_rotation() {
    let theta_star = 1.0;
    let grid = [0.0, theta_star];
    let run = toy_b_run(20, theta_star, &grid, 4).unwrap();
    let (at_zero, at_star) = (run.search.curve[0].1, run.search.curve[1].1);
    assert!(at_star < at_zero - 1e-3, "{at_star} vs {at_zero}");
    assert_eq!(run.search.plans[1].diagonal_mass(), 1.0);
    assert_eq!(run.search.best_theta, theta_star);
    assert_eq!(run.reports.len(), 2);
}

#[test]
fn toy_sources_are_seeded_and_anisotropic() {
    let a = toy_source(200, 2);
    assert_eq!(a, toy_source(200, 2));
    assert_ne!(a, toy_source(200, 3));
    // The first axis is stretched, so its diagonal entry dominates on average.
    let gap: f64 = a.iter().map(|p| p.matrix()[(0, 0)] - p.matrix()[(1, 1)]).sum::<f64>() / 200.0;
    assert!(gap > 0.0);
    assert!(a.iter().all(|p| p.dim() == 2));
}
