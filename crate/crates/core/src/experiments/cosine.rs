//! Paired multichannel cosine signals that share amplitude and frequency per
//! channel but differ in phase and noise, and the comparison of three OT
//! setups on them.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{recovery_error, rng, MatchReport};
use crate::adapt::{barycentric_map, build_cost};
use crate::error::{Error, Result};
use crate::manifold::{sym_eig, MeanOptions, SpdMatrix, DEFAULT_EPS_PD};
use crate::transport::{exact_ot, CostMatrix, MassVector, Metric};

/// Generator settings for [`cosine_trials`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CosineParams {
    /// Number of source/target pairs.
    pub pairs: usize,
    pub channels: usize,
    pub samples: usize,
    /// Sampling period in seconds.
    pub sample_period: f64,
    /// Add unit-variance Gaussian noise (disable only for spectral checks).
    pub noise: bool,
}

impl Default for CosineParams {
    fn default() -> Self {
        CosineParams {
            pairs: 40,
            channels: 5,
            samples: 101,
            sample_period: 0.01,
            noise: true,
        }
    }
}

/// One `channels × samples` recording and the parameters that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesTrial {
    pub data: DMatrix<f64>,
    pub amplitudes: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub phases: Vec<f64>,
    pub noise_seed: u64,
}

impl TimeSeriesTrial {
    pub fn from_data(data: DMatrix<f64>) -> Self {
        TimeSeriesTrial {
            data,
            amplitudes: Vec::new(),
            frequencies: Vec::new(),
            phases: Vec::new(),
            noise_seed: 0,
        }
    }

    pub fn channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn samples(&self) -> usize {
        self.data.ncols()
    }
}

fn synthesize(
    amplitudes: &[f64],
    frequencies: &[f64],
    phases: &[f64],
    params: &CosineParams,
    noise_seed: u64,
) -> TimeSeriesTrial {
    let mut noise = rng(noise_seed);
    let data = DMatrix::from_fn(params.channels, params.samples, |j, k| {
        let t = k as f64 * params.sample_period;
        amplitudes[j] * (2.0 * PI * frequencies[j] * t + phases[j]).cos()
    });
    // Noise is drawn row-major so the stream does not depend on storage order.
    let mut data = data;
    if params.noise {
        for j in 0..params.channels {
            for k in 0..params.samples {
                let n: f64 = StandardNormal.sample(&mut noise);
                data[(j, k)] += n;
            }
        }
    }
    TimeSeriesTrial {
        data,
        amplitudes: amplitudes.to_vec(),
        frequencies: frequencies.to_vec(),
        phases: phases.to_vec(),
        noise_seed,
    }
}

/// Source and target trials; pair `i` shares amplitudes and frequencies
/// (both `U[0, 20]`, frequencies in Hz) and has independent phases
/// (`U[0, 2π]`) and per-sample noise.
pub fn cosine_trials(params: &CosineParams, seed: u64) -> Result<(Vec<TimeSeriesTrial>, Vec<TimeSeriesTrial>)> {
    if params.pairs == 0 || params.channels == 0 || params.samples == 0 {
        return Err(Error::invalid("cosine generator needs positive sizes"));
    }
    if !(params.sample_period > 0.0) {
        return Err(Error::invalid("sample period must be positive"));
    }
    let mut rng = rng(seed);
    let d = params.channels;
    let mut source = Vec::with_capacity(params.pairs);
    let mut target = Vec::with_capacity(params.pairs);
    for _ in 0..params.pairs {
        let amplitudes: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..20.0)).collect();
        let frequencies: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..20.0)).collect();
        let source_phases: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        let target_phases: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        let source_noise = rng.next_u64();
        let target_noise = rng.next_u64();
        source.push(synthesize(&amplitudes, &frequencies, &source_phases, params, source_noise));
        target.push(synthesize(&amplitudes, &frequencies, &target_phases, params, target_noise));
    }
    Ok((source, target))
}

/// Sample covariance and the ridge that was added, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub matrix: SpdMatrix,
    /// `1e-8 · trace / d` when the raw estimate was not positive definite.
    pub ridge: Option<f64>,
}

/// Row-centered sample covariance `X Xᵀ / (M - 1)`.
///
/// A near-singular estimate gets a ridge of `1e-8 · trace / d`, reported in
/// the result.
pub fn covariance(trial: &TimeSeriesTrial) -> Result<CovarianceEstimate> {
    let (d, m) = (trial.channels(), trial.samples());
    if d == 0 || m < 2 {
        return Err(Error::invalid(format!(
            "covariance needs at least one channel and two samples, got {d}x{m}"
        )));
    }
    if trial.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("trial has non-finite samples"));
    }
    let mut centered = trial.data.clone();
    for mut row in centered.row_iter_mut() {
        let mean = row.mean();
        row.add_scalar_mut(-mean);
    }
    let cov = &centered * centered.transpose() / (m - 1) as f64;
    let cov = crate::manifold::symmetrize(&cov);
    if sym_eig(&cov)?.min_value() > DEFAULT_EPS_PD {
        return Ok(CovarianceEstimate {
            matrix: SpdMatrix::new(cov)?,
            ridge: None,
        });
    }
    let ridge = 1e-8 * cov.trace() / d as f64;
    let repaired = cov + DMatrix::identity(d, d) * ridge;
    Ok(CovarianceEstimate {
        matrix: SpdMatrix::new(repaired)?,
        ridge: Some(ridge),
    })
}

/// The three ways of posing the transport problem on paired trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OtConfiguration {
    /// Flattened raw trials, squared Euclidean distance.
    RawEuclidean,
    /// Covariances, squared Frobenius distance.
    CovarianceEuclidean,
    /// Covariances, squared Riemannian distance.
    CovarianceRiemannian,
}

impl OtConfiguration {
    pub const ALL: [OtConfiguration; 3] = [
        OtConfiguration::RawEuclidean,
        OtConfiguration::CovarianceEuclidean,
        OtConfiguration::CovarianceRiemannian,
    ];
}

impl fmt::Display for OtConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OtConfiguration::RawEuclidean => "raw-euclidean",
            OtConfiguration::CovarianceEuclidean => "cov-euclidean",
            OtConfiguration::CovarianceRiemannian => "cov-riemannian",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfigReport {
    pub config: OtConfiguration,
    pub report: MatchReport,
}

fn raw_cost(source: &[TimeSeriesTrial], target: &[TimeSeriesTrial]) -> Result<CostMatrix> {
    let entries = DMatrix::from_fn(source.len(), target.len(), |i, j| {
        (&source[i].data - &target[j].data).norm_squared()
    });
    CostMatrix::new(entries, Metric::Euclidean)
}

/// Exact OT under each configuration at the default generator settings.
pub fn three_config_comparison(seed: u64) -> Result<Vec<ConfigReport>> {
    three_config_comparison_with(&CosineParams::default(), seed)
}

pub fn three_config_comparison_with(params: &CosineParams, seed: u64) -> Result<Vec<ConfigReport>> {
    let (xs, zs) = cosine_trials(params, seed)?;
    let p: Vec<SpdMatrix> = xs.iter().map(|t| covariance(t).map(|c| c.matrix)).collect::<Result<_>>()?;
    let q: Vec<SpdMatrix> = zs.iter().map(|t| covariance(t).map(|c| c.matrix)).collect::<Result<_>>()?;
    let mass = MassVector::uniform(params.pairs)?;

    OtConfiguration::ALL
        .iter()
        .map(|&config| {
            let cost = match config {
                OtConfiguration::RawEuclidean => raw_cost(&xs, &zs)?,
                OtConfiguration::CovarianceEuclidean => build_cost(&p, &q, Metric::Euclidean)?,
                OtConfiguration::CovarianceRiemannian => build_cost(&p, &q, Metric::Riemannian)?,
            };
            let plan = exact_ot(&cost, &mass, &mass)?;
            let mapped = barycentric_map(&p, &q, &plan, None, MeanOptions::default())?;
            Ok(ConfigReport {
                config,
                report: MatchReport {
                    diagonal_mass: plan.diagonal_mass(),
                    recovery_error: recovery_error(&mapped, &q)?,
                    objective: plan.objective(&cost),
                },
            })
        })
        .collect()
}
