//! Optimal-transport domain adaptation on the manifold of symmetric
//! positive-definite (SPD) matrices.
//!
//! - [`manifold`]: affine-invariant geometry (distance, geodesics, Exp/Log,
//!   weighted Fréchet means, tangent coordinates).
//! - [`transport`]: exact assignment OT, Sinkhorn, label-regularized Sinkhorn.
//! - [`adapt`]: the adaptation pipeline (masses, cost, plan, barycentric map)
//!   and a minimum-distance-to-mean classifier.
//! - [`experiments`]: synthetic toy problems and the cosine-signal comparison.
//! - [`cli`]: the `spdot` command-line front end.

// `!(x > 0.0)` is used on purpose so NaN takes the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adapt;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod manifold;
pub mod transport;

pub use error::{Error, LastIterate, PipelineStep, Result};
pub use manifold::{SpdMatrix, TangentVector};
pub use transport::{CostMatrix, LabelSet, MassVector, Metric, TransportPlan};
