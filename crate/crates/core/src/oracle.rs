//! Quasi-oracle loss assessments and the minimum-ratio statistics built on
//! them.
//!
//! The quasi-oracle knows the true parameter only up to its plausibility: it
//! reports the worst loss over every parameter value at least as plausible as
//! the truth. A minimum ratio compares an upper (or fiducial) risk with that
//! assessment across a grid of actions.

use serde::{Deserialize, Serialize};

use crate::choquet::{choquet_upper, level_sup};
use crate::contour::{linspace, PossibilityContour};
use crate::decision::default_bracket;
use crate::error::{Error, Result};
use crate::fiducial::ConfidenceDistribution;
use crate::loss::LossFunction;

/// `sup{l_a(v): pi(v) > pi(theta)}`. At a mode the region degenerates and
/// the supremum is taken over the mode interval instead.
pub fn quasi_oracle(contour: &PossibilityContour, loss: &LossFunction, a: f64, theta: f64) -> f64 {
    assessment_at(contour, loss, a, contour.plausibility(theta))
}

/// `sup{l_a(v): pi(v) > pi(theta) / 2}`; never below [`quasi_oracle`].
pub fn modified_quasi_oracle(contour: &PossibilityContour, loss: &LossFunction, a: f64, theta: f64) -> f64 {
    assessment_at(contour, loss, a, 0.5 * contour.plausibility(theta))
}

fn assessment_at(contour: &PossibilityContour, loss: &LossFunction, a: f64, level: f64) -> f64 {
    if level >= 1.0 {
        let (lo, hi) = contour.mode_interval();
        return loss.eval(a, lo).max(loss.eval(a, hi));
    }
    level_sup(contour, loss, a, level)
}

/// Actions over which the infimum of a ratio is approximated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ActionGrid {
    Explicit {
        actions: Vec<f64>,
    },
    Uniform {
        lo: f64,
        hi: f64,
        points: usize,
    },
    /// Equispaced over the contour's default decision bracket.
    DataCentered {
        points: usize,
    },
}

impl ActionGrid {
    pub fn resolve(&self, contour: &PossibilityContour) -> Result<Vec<f64>> {
        let actions = match self {
            ActionGrid::Explicit { actions } => actions.clone(),
            ActionGrid::Uniform { lo, hi, points } => {
                if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::InvalidParameter(format!("action range [{lo}, {hi}]")));
                }
                linspace(*lo, *hi, *points)
            }
            ActionGrid::DataCentered { points } => {
                let (lo, hi) = default_bracket(contour);
                linspace(lo, hi, *points)
            }
        };
        if actions.is_empty() {
            return Err(Error::EmptyRequest("action grid"));
        }
        if let Some(bad) = actions.iter().find(|a| !a.is_finite()) {
            return Err(Error::Domain(format!("action {bad} is not finite")));
        }
        Ok(actions)
    }
}

/// Which quasi-oracle sits in the denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioVariant {
    Plain,
    Modified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSpec {
    pub grid: ActionGrid,
    pub variant: RatioVariant,
    /// Relative tolerance of each risk in a numerator.
    #[serde(default = "default_risk_tol")]
    pub risk_tol: f64,
}

const DEFAULT_GRID_POINTS: usize = 101;

fn default_risk_tol() -> f64 {
    1e-6
}

impl Default for RatioSpec {
    fn default() -> Self {
        Self {
            grid: ActionGrid::DataCentered { points: DEFAULT_GRID_POINTS },
            variant: RatioVariant::Modified,
            risk_tol: default_risk_tol(),
        }
    }
}

impl RatioSpec {
    pub fn new(grid: ActionGrid, variant: RatioVariant) -> Self {
        Self { grid, variant, ..Self::default() }
    }

    fn denominator(&self, contour: &PossibilityContour, loss: &LossFunction, a: f64, theta: f64) -> f64 {
        match self.variant {
            RatioVariant::Plain => quasi_oracle(contour, loss, a, theta),
            RatioVariant::Modified => modified_quasi_oracle(contour, loss, a, theta),
        }
    }
}

/// `risk / assessment` with the conventions: a zero or infinite assessment,
/// or an infinite risk, gives `+inf`.
pub fn ratio(risk: f64, assessment: f64) -> f64 {
    if !(assessment > 0.0) || assessment.is_infinite() || !risk.is_finite() {
        return f64::INFINITY;
    }
    risk / assessment
}

/// Infimum over the grid of the upper risk divided by the quasi-oracle
/// assessment. Actions whose upper risk is not finite count as `+inf`.
pub fn min_ratio(contour: &PossibilityContour, loss: &LossFunction, spec: &RatioSpec, theta: f64) -> Result<f64> {
    let actions = spec.grid.resolve(contour)?;
    let mut best = f64::INFINITY;
    for &a in &actions {
        let risk = upper_risk_or_inf(contour, loss, a, spec.risk_tol)?;
        best = best.min(ratio(risk, spec.denominator(contour, loss, a, theta)));
    }
    Ok(best)
}

/// As [`min_ratio`] with the expected loss under `q` in the numerator.
pub fn fiducial_min_ratio(
    q: &ConfidenceDistribution,
    loss: &LossFunction,
    spec: &RatioSpec,
    theta: f64,
    contour: &PossibilityContour,
) -> Result<f64> {
    let actions = spec.grid.resolve(contour)?;
    let mut best = f64::INFINITY;
    for &a in &actions {
        let risk = expected_risk_or_inf(q, loss, a, spec.risk_tol)?;
        best = best.min(ratio(risk, spec.denominator(contour, loss, a, theta)));
    }
    Ok(best)
}

/// Both minimum ratios at once, sharing the denominators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioPair {
    pub upper: f64,
    pub fiducial: f64,
}

pub fn ratio_pair(
    contour: &PossibilityContour,
    q: &ConfidenceDistribution,
    loss: &LossFunction,
    spec: &RatioSpec,
    theta: f64,
) -> Result<RatioPair> {
    let actions = spec.grid.resolve(contour)?;
    let mut pair = RatioPair { upper: f64::INFINITY, fiducial: f64::INFINITY };
    for &a in &actions {
        let assessment = spec.denominator(contour, loss, a, theta);
        let upper = upper_risk_or_inf(contour, loss, a, spec.risk_tol)?;
        let fiducial = expected_risk_or_inf(q, loss, a, spec.risk_tol)?;
        pair.upper = pair.upper.min(ratio(upper, assessment));
        pair.fiducial = pair.fiducial.min(ratio(fiducial, assessment));
    }
    Ok(pair)
}

// Numerical failures (non-previsible or divergent) mean an unbounded risk.
fn upper_risk_or_inf(contour: &PossibilityContour, loss: &LossFunction, a: f64, tol: f64) -> Result<f64> {
    match choquet_upper(contour, loss, a, tol) {
        Ok(r) => Ok(r.value),
        Err(e) if e.is_numerical() => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

fn expected_risk_or_inf(q: &ConfidenceDistribution, loss: &LossFunction, a: f64, tol: f64) -> Result<f64> {
    match q.expected_loss(loss, a, tol) {
        Ok(v) => Ok(v),
        Err(e) if e.is_numerical() => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}
