//! Possibilistic inference and decision making with validity guarantees.

// Negated comparisons also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod choquet;
pub mod contour;
pub mod decision;
pub mod dist;
pub mod error;
pub mod fiducial;
pub mod loss;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod solve;
pub mod special;
pub mod validity;

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use choquet::{choquet_upper, level_sup, ChoquetOptions, ChoquetResult};
pub use contour::{ContourModel, LocationKernel, PlausibilityRegion, PossibilityContour};
pub use dist::Distribution;
pub use error::{Error, Result};
pub use fiducial::ConfidenceDistribution;
pub use loss::{LossFunction, LossKind};
