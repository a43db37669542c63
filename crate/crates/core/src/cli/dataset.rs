//! On-disk dataset format: one JSON object tagged by `kind`.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::experiments::TimeSeriesTrial;
use crate::manifold::SpdMatrix;
use crate::transport::LabelSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatasetFile {
    Spd {
        dim: usize,
        /// Row-major, `dim²` entries each.
        matrices: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<i64>>,
    },
    Timeseries {
        channels: usize,
        samples: usize,
        /// One `channels × samples` array per trial, outer index = channel.
        trials: Vec<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<i64>>,
    },
}

/// A validated `spd` file.
#[derive(Debug, Clone)]
pub struct SpdDataset {
    pub dim: usize,
    pub matrices: Vec<SpdMatrix>,
    pub labels: Option<LabelSet>,
}

impl SpdDataset {
    pub fn to_file(&self) -> DatasetFile {
        DatasetFile::Spd {
            dim: self.dim,
            matrices: self.matrices.iter().map(|m| m.to_row_major()).collect(),
            labels: self.labels.as_ref().map(|l| l.labels().to_vec()),
        }
    }
}

/// A validated `timeseries` file.
#[derive(Debug, Clone)]
pub struct TimeSeriesDataset {
    pub trials: Vec<TimeSeriesTrial>,
    pub labels: Option<Vec<i64>>,
}

impl TimeSeriesDataset {
    pub fn to_file(&self) -> DatasetFile {
        let (channels, samples) = self.trials.first().map_or((0, 0), |t| (t.channels(), t.samples()));
        DatasetFile::Timeseries {
            channels,
            samples,
            trials: self
                .trials
                .iter()
                .map(|t| t.data.row_iter().map(|r| r.iter().copied().collect()).collect())
                .collect(),
            labels: self.labels.clone(),
        }
    }
}

fn bad(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::input(format!("{}: {msg}", path.display()))
}

pub fn read_file(path: &Path) -> Result<DatasetFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| bad(path, e))?;
    serde_json::from_str(&text).map_err(|e| bad(path, e))
}

fn check_labels(path: &Path, labels: &Option<Vec<i64>>, count: usize, what: &str) -> Result<(), CliError> {
    match labels {
        Some(l) if l.len() != count => Err(bad(path, format!("{} labels for {count} {what}", l.len()))),
        _ => Ok(()),
    }
}

pub fn load_spd(path: &Path) -> Result<SpdDataset, CliError> {
    let DatasetFile::Spd { dim, matrices, labels } = read_file(path)? else {
        return Err(bad(path, "expected kind \"spd\""));
    };
    if dim == 0 {
        return Err(bad(path, "dim must be positive"));
    }
    if matrices.is_empty() {
        return Err(bad(path, "no matrices"));
    }
    check_labels(path, &labels, matrices.len(), "matrices")?;
    let matrices = matrices
        .iter()
        .enumerate()
        .map(|(i, m)| {
            if m.len() != dim * dim {
                return Err(bad(path, format!("matrix {i}: {} entries, expected {}", m.len(), dim * dim)));
            }
            SpdMatrix::from_row_slice(dim, m).map_err(|e| bad(path, format!("matrix {i}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let labels = labels
        .map(LabelSet::new)
        .transpose()
        .map_err(|e| bad(path, e))?;
    Ok(SpdDataset { dim, matrices, labels })
}

pub fn load_timeseries(path: &Path) -> Result<TimeSeriesDataset, CliError> {
    let DatasetFile::Timeseries {
        channels,
        samples,
        trials,
        labels,
    } = read_file(path)?
    else {
        return Err(bad(path, "expected kind \"timeseries\""));
    };
    if trials.is_empty() {
        return Err(bad(path, "no trials"));
    }
    check_labels(path, &labels, trials.len(), "trials")?;
    let trials = trials
        .iter()
        .enumerate()
        .map(|(i, rows)| {
            if rows.len() != channels || rows.iter().any(|r| r.len() != samples) {
                return Err(bad(path, format!("trial {i}: expected {channels}x{samples} samples")));
            }
            if rows.iter().flatten().any(|x| !x.is_finite()) {
                return Err(bad(path, format!("trial {i}: non-finite sample")));
            }
            let data = DMatrix::from_fn(channels, samples, |j, k| rows[j][k]);
            Ok(TimeSeriesTrial::from_data(data))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TimeSeriesDataset { trials, labels })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| bad(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| bad(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| bad(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| bad(dir, e))?;
    Ok(dir.to_path_buf())
}

/// `{:.16e}` keeps 17 significant digits, enough for an exact round trip.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Comma-separated rows, no header.
pub fn matrix_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Parses a headerless numeric CSV such as `plan.csv`.
pub fn parse_matrix_csv(text: &str) -> Result<DMatrix<f64>, String> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|e| format!("row {i}: {e}")))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(i) = rows.iter().position(|r| r.len() != cols) {
        return Err(format!("row {i}: expected {cols} columns"));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let m = DMatrix::from_row_slice(2, 2, &[0.1, 1.0 / 3.0, 2e-300, 7.0]);
        assert_eq!(parse_matrix_csv(&matrix_csv(&m)).unwrap(), m);
    }

    #[test]
    fn labels_are_optional_in_json() {
        let f: DatasetFile = serde_json::from_str(r#"{"kind":"spd","dim":1,"matrices":[[2.0]]}"#).unwrap();
        assert_eq!(
            f,
            DatasetFile::Spd {
                dim: 1,
                matrices: vec![vec![2.0]],
                labels: None
            }
        );
        assert!(!serde_json::to_string(&f).unwrap().contains("labels"));
    }

    #[test]
    fn ragged_csv_is_rejected() {
        assert!(parse_matrix_csv("1,2\n3\n").is_err());
    }
}
