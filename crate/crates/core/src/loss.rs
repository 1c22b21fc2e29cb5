//! Loss functions `(a, theta) -> l_a(theta) >= 0`.

use std::sync::Arc;

use crate::contour::{linspace, LocationKernel, PlausibilityRegion};
use crate::error::{Error, Result};

/// The shape of a loss before scaling.
#[derive(Debug, Clone)]
pub enum LossKind {
    /// `(a - theta)^2`.
    SquaredError,
    /// `(a - theta)^2 / (theta (1 - theta))` on `(0, 1)`.
    WeightedSquaredError,
    /// Test of `H = [lo, hi]`: action 1 loses when `theta` is in `H`, action 0
    /// when it is not. Actions are rounded to the nearer of 0 and 1.
    ZeroOne { lo: f64, hi: f64 },
    /// `-c ln pi(a - theta)` for the auxiliary contour `pi` of `kernel`.
    GroupInvariant { c: f64, kernel: Arc<LocationKernel> },
    /// The same value for every action and parameter.
    Constant { value: f64 },
}

/// A non-negative loss with a multiplicative scale and convexity metadata.
#[derive(Debug, Clone)]
pub struct LossFunction {
    kind: LossKind,
    scale: f64,
    convex: bool,
}

const CONVEXITY_SLACK: f64 = 1e-9;

impl LossFunction {
    pub fn squared_error() -> Self {
        Self { kind: LossKind::SquaredError, scale: 1.0, convex: true }
    }

    pub fn weighted_squared_error() -> Self {
        Self { kind: LossKind::WeightedSquaredError, scale: 1.0, convex: true }
    }

    pub fn zero_one(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidParameter(format!("hypothesis [{lo}, {hi}] is empty")));
        }
        Ok(Self { kind: LossKind::ZeroOne { lo, hi }, scale: 1.0, convex: false })
    }

    /// Convexity in `theta` is established numerically on a grid spanning
    /// thirty units either side of the kernel's mode, ignoring points where
    /// the contour underflows.
    pub fn group_invariant(c: f64, kernel: Arc<LocationKernel>) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("loss constant {c} must be positive")));
        }
        let m = kernel.mode();
        let grid = linspace(m - 30.0, m + 30.0, 601);
        let values: Vec<f64> = grid.iter().map(|&u| -kernel.ln_plausibility(u)).collect();
        let convex = values
            .windows(3)
            .filter(|w| w.iter().all(|v| v.is_finite()))
            .all(|w| w[0] - 2.0 * w[1] + w[2] >= -CONVEXITY_SLACK);
        Ok(Self { kind: LossKind::GroupInvariant { c, kernel }, scale: 1.0, convex })
    }

    pub fn constant(value: f64) -> Result<Self> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::InvalidParameter(format!("constant loss {value} must be non-negative")));
        }
        Ok(Self { kind: LossKind::Constant { value }, scale: 1.0, convex: true })
    }

    /// The loss multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidParameter(format!("scale {factor} must be positive")));
        }
        Ok(Self { scale: self.scale * factor, ..self.clone() })
    }

    pub fn kind(&self) -> &LossKind {
        &self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Convex in `theta` for every action.
    pub fn is_convex(&self) -> bool {
        self.convex
    }

    /// Quasi-convex in `theta`, so its supremum over an interval sits at an
    /// endpoint.
    pub fn is_quasi_convex(&self) -> bool {
        !matches!(self.kind, LossKind::ZeroOne { .. })
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            LossKind::SquaredError => "squared-error",
            LossKind::WeightedSquaredError => "weighted-squared-error",
            LossKind::ZeroOne { .. } => "zero-one",
            LossKind::GroupInvariant { .. } => "group-invariant",
            LossKind::Constant { .. } => "constant",
        }
    }

    /// `l_a(theta)`; `+inf` where the loss is unbounded.
    pub fn eval(&self, a: f64, theta: f64) -> f64 {
        self.scale * self.base(a, theta)
    }

    fn base(&self, a: f64, theta: f64) -> f64 {
        match &self.kind {
            LossKind::SquaredError => {
                if theta.is_infinite() {
                    f64::INFINITY
                } else {
                    (a - theta).powi(2)
                }
            }
            LossKind::WeightedSquaredError => {
                if a == theta {
                    0.0
                } else if theta <= 0.0 || theta >= 1.0 {
                    f64::INFINITY
                } else {
                    (a - theta).powi(2) / (theta * (1.0 - theta))
                }
            }
            LossKind::ZeroOne { lo, hi } => {
                let inside = theta >= *lo && theta <= *hi;
                let reject = a >= 0.5;
                if inside == reject {
                    1.0
                } else {
                    0.0
                }
            }
            LossKind::GroupInvariant { c, kernel } => {
                if theta.is_infinite() {
                    return f64::INFINITY;
                }
                -c * kernel.ln_plausibility(a - theta)
            }
            LossKind::Constant { value } => *value,
        }
    }

    /// `d l_a(theta) / da` where the loss is differentiable in the action.
    pub fn action_derivative(&self, a: f64, theta: f64) -> Option<f64> {
        let d = match &self.kind {
            LossKind::SquaredError => 2.0 * (a - theta),
            LossKind::WeightedSquaredError => {
                if theta <= 0.0 || theta >= 1.0 {
                    return None;
                }
                2.0 * (a - theta) / (theta * (1.0 - theta))
            }
            LossKind::GroupInvariant { c, kernel } => -c * kernel.log_slope(a - theta),
            LossKind::ZeroOne { .. } | LossKind::Constant { .. } => return None,
        };
        Some(self.scale * d)
    }

    pub fn is_action_differentiable(&self) -> bool {
        !matches!(self.kind, LossKind::ZeroOne { .. } | LossKind::Constant { .. })
    }

    /// Supremum of `l_a` over the region, with the parameter attaining it
    /// when that is an endpoint. Empty regions give zero.
    pub fn sup_over(&self, a: f64, region: &PlausibilityRegion) -> (f64, Option<f64>) {
        if region.is_empty() {
            return (0.0, None);
        }
        match &self.kind {
            LossKind::ZeroOne { lo, hi } => {
                let reject = a >= 0.5;
                let meets_h = region_meets(region, *lo, *hi);
                let leaves_h = region.lo < *lo || region.hi > *hi;
                let hit = if reject { meets_h } else { leaves_h };
                (if hit { self.scale } else { 0.0 }, None)
            }
            LossKind::Constant { value } => (self.scale * value, None),
            _ => {
                let left = self.eval(a, region.lo);
                let right = self.eval(a, region.hi);
                if left >= right {
                    (left, Some(region.lo))
                } else {
                    (right, Some(region.hi))
                }
            }
        }
    }
}

fn region_meets(region: &PlausibilityRegion, lo: f64, hi: f64) -> bool {
    if hi < region.lo || lo > region.hi {
        return false;
    }
    if hi == region.lo {
        return region.lo_closed;
    }
    if lo == region.hi {
        return region.hi_closed;
    }
    true
}
