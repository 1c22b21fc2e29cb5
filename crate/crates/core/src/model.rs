//! Statistical models: how data arise from a parameter, and the contour and
//! fiducial distribution each observation induces.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::contour::{LocationKernel, PossibilityContour};
use crate::dist::{binomial_pmf, Distribution};
use crate::error::{Error, Result};
use crate::fiducial::ConfidenceDistribution;

/// Serializable model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ModelSpec {
    /// `Y = theta + U` with `U ~ t(df)`.
    TLocation { df: f64 },
    /// `Y = theta + U` with `U ~ N(0, sd^2)`.
    NormalLocation {
        #[serde(default = "unit")]
        sd: f64,
    },
    /// `Y = theta + U` with `U` skew-normal.
    SkewNormal { slant: f64 },
    /// `Y ~ Bin(n, theta)`.
    Binomial { n: u64 },
}

fn unit() -> f64 {
    1.0
}

/// Outcome spaces up to this size are enumerated exactly.
pub const EXACT_OUTCOME_LIMIT: u64 = 10_000;

/// A model with its shared contour kernel.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    kernel: Option<Arc<LocationKernel>>,
}

impl Model {
    pub fn new(spec: ModelSpec) -> Result<Self> {
        let law = match spec {
            ModelSpec::TLocation { df } => Some(Distribution::student_t(df)?),
            ModelSpec::NormalLocation { sd } => Some(Distribution::normal(0.0, sd)?),
            ModelSpec::SkewNormal { slant } => Some(Distribution::skew_normal(slant)?),
            ModelSpec::Binomial { n } => {
                if n == 0 {
                    return Err(Error::InvalidParameter("binomial needs at least one trial".into()));
                }
                None
            }
        };
        let kernel = law.map(LocationKernel::new).transpose()?;
        Ok(Self { spec, kernel })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn kernel(&self) -> Option<&Arc<LocationKernel>> {
        self.kernel.as_ref()
    }

    /// Fails when `theta` is not a parameter of this model.
    pub fn check_parameter(&self, theta: f64) -> Result<()> {
        let ok = match self.spec {
            ModelSpec::Binomial { .. } => (0.0..=1.0).contains(&theta),
            _ => theta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ModelMismatch(format!("{theta} is not a parameter of {:?}", self.spec)))
        }
    }

    /// Fails when `y` cannot be an observation of this model.
    pub fn check_observation(&self, y: f64) -> Result<()> {
        let ok = match self.spec {
            ModelSpec::Binomial { n } => y >= 0.0 && y <= n as f64 && y.fract() == 0.0,
            _ => y.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ModelMismatch(format!("{y} is not an observation of {:?}", self.spec)))
        }
    }

    pub fn contour(&self, y: f64) -> Result<PossibilityContour> {
        self.check_observation(y)?;
        match (&self.spec, &self.kernel) {
            (ModelSpec::Binomial { n }, _) => PossibilityContour::binomial(*n, y as u64),
            (_, Some(kernel)) => PossibilityContour::location(kernel.clone(), y),
            _ => unreachable!("location models carry a kernel"),
        }
    }

    pub fn fiducial(&self, y: f64) -> Result<ConfidenceDistribution> {
        self.check_observation(y)?;
        match (&self.spec, &self.kernel) {
            (ModelSpec::Binomial { n }, _) => ConfidenceDistribution::binomial(*n, y as u64),
            (_, Some(kernel)) => ConfidenceDistribution::location(kernel.clone(), y),
            _ => unreachable!("location models carry a kernel"),
        }
    }

    /// One observation at parameter `theta`.
    pub fn draw<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> f64 {
        match (&self.spec, &self.kernel) {
            (ModelSpec::Binomial { n }, _) => Distribution::Binomial { n: *n, p: theta }.sample_one(rng),
            (_, Some(kernel)) => theta + kernel.law().sample_one(rng),
            _ => unreachable!("location models carry a kernel"),
        }
    }

    /// Every outcome with its probability at `theta`, for discrete models
    /// small enough to enumerate.
    pub fn outcomes(&self, theta: f64) -> Option<Vec<(f64, f64)>> {
        match self.spec {
            ModelSpec::Binomial { n } if n < EXACT_OUTCOME_LIMIT => {
                Some((0..=n).map(|k| (k as f64, binomial_pmf(n, theta, k))).collect())
            }
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.spec {
            ModelSpec::TLocation { .. } => "t-location",
            ModelSpec::NormalLocation { .. } => "normal-location",
            ModelSpec::SkewNormal { .. } => "skew-normal",
            ModelSpec::Binomial { .. } => "binomial",
        }
    }
}
