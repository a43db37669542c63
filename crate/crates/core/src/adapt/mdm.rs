//! Minimum distance to mean classification.

use crate::error::{Error, Result};
use crate::manifold::{frechet_mean, riemannian_distance, MeanOptions, SpdMatrix};
use crate::transport::LabelSet;

/// One Riemannian mean per class, classes ascending.
#[derive(Debug, Clone)]
pub struct MdmModel {
    classes: Vec<i64>,
    means: Vec<SpdMatrix>,
}

impl MdmModel {
    pub fn classes(&self) -> &[i64] {
        &self.classes
    }

    pub fn means(&self) -> &[SpdMatrix] {
        &self.means
    }

    pub fn mean_of(&self, class: i64) -> Option<&SpdMatrix> {
        self.classes.iter().position(|&c| c == class).map(|k| &self.means[k])
    }

    /// Builds a model from explicit class means.
    pub fn from_means(mut pairs: Vec<(i64, SpdMatrix)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::invalid("classifier needs at least one class mean"));
        }
        pairs.sort_by_key(|(c, _)| *c);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid("duplicate class label"));
        }
        let (classes, means) = pairs.into_iter().unzip();
        Ok(MdmModel { classes, means })
    }
}

pub fn mdm_fit(train: &[SpdMatrix], labels: &LabelSet, opts: MeanOptions) -> Result<MdmModel> {
    if train.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} training points but {} labels",
            train.len(),
            labels.len()
        )));
    }
    let mut means = Vec::with_capacity(labels.classes().len());
    for group in labels.groups() {
        let points: Vec<SpdMatrix> = group.iter().map(|&i| train[i].clone()).collect();
        let w = vec![1.0 / points.len() as f64; points.len()];
        means.push(frechet_mean(&points, &w, opts)?);
    }
    Ok(MdmModel {
        classes: labels.classes().to_vec(),
        means,
    })
}

/// Label of the nearest class mean; ties go to the smallest label.
pub fn mdm_classify(query: &SpdMatrix, model: &MdmModel) -> Result<i64> {
    let mut best: Option<(i64, f64)> = None;
    for (&class, mean) in model.classes.iter().zip(&model.means) {
        let d = riemannian_distance(query, mean)?;
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((class, d));
        }
    }
    best.map(|(c, _)| c)
        .ok_or_else(|| Error::invalid("classifier has no classes"))
}
