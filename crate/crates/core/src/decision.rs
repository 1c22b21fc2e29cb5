//! Minimum upper (and expected) loss actions.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::choquet::{choquet_action_derivative, choquet_upper};
use crate::contour::{linspace, ContourModel, PossibilityContour};
use crate::error::{Error, Result};
use crate::fiducial::ConfidenceDistribution;
use crate::loss::LossFunction;
use crate::solve::{find_root, golden_section, Tolerance};

/// Where and how finely to search for an action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionSearchSpec {
    pub lo: f64,
    pub hi: f64,
    /// Absolute tolerance on the action.
    pub tol: f64,
    /// Number of interior seeds; the bracket ends are always included.
    pub starts: usize,
    /// Relative tolerance of each risk evaluation.
    pub risk_tol: f64,
}

const DEFAULT_STARTS: usize = 5;
const DEFAULT_ACTION_TOL: f64 = 1e-8;
const DEFAULT_RISK_TOL: f64 = 1e-9;
// The derivative polish stops at this fraction of the action tolerance.
const POLISH_FRACTION: f64 = 0.01;
const LOCATION_HALF_WIDTH: f64 = 10.0;
const BINOMIAL_BRACKET: (f64, f64) = (0.001, 0.999);

impl ActionSearchSpec {
    pub fn new(lo: f64, hi: f64, tol: f64) -> Result<Self> {
        Self { lo, hi, tol, starts: DEFAULT_STARTS, risk_tol: DEFAULT_RISK_TOL }.validated()
    }

    /// `y +- 10 scale` for location models and `[0.001, 0.999]` for the
    /// binomial.
    pub fn for_contour(contour: &PossibilityContour) -> Self {
        let (lo, hi) = default_bracket(contour);
        Self { lo, hi, tol: DEFAULT_ACTION_TOL, starts: DEFAULT_STARTS, risk_tol: DEFAULT_RISK_TOL }
    }

    pub fn with_starts(self, starts: usize) -> Self {
        Self { starts, ..self }
    }

    pub fn with_risk_tol(self, risk_tol: f64) -> Self {
        Self { risk_tol, ..self }
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.lo < self.hi && self.lo.is_finite() && self.hi.is_finite()) {
            return Err(Error::InvalidParameter(format!("bracket [{}, {}]", self.lo, self.hi)));
        }
        if !(self.tol > 0.0) || !(self.risk_tol > 0.0 && self.risk_tol < 1.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        Ok(self)
    }
}

/// The default decision bracket for a contour.
pub fn default_bracket(contour: &PossibilityContour) -> (f64, f64) {
    match contour.model() {
        ContourModel::Binomial => BINOMIAL_BRACKET,
        ContourModel::Vacuous => contour.domain(),
        _ => {
            let scale = contour
                .kernel()
                .map(|k| match *k.law() {
                    crate::dist::Distribution::Normal { sd, .. } => sd,
                    _ => 1.0,
                })
                .unwrap_or(1.0);
            let y = contour.observation();
            (y - LOCATION_HALF_WIDTH * scale, y + LOCATION_HALF_WIDTH * scale)
        }
    }
}

/// Serializable description of a loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LossSpec {
    SquaredError,
    WeightedSquaredError,
    ZeroOne {
        lo: f64,
        hi: f64,
    },
    /// `-c ln pi(a - theta)` built on the contour's own auxiliary law.
    GroupInvariant {
        c: f64,
    },
    Constant {
        value: f64,
    },
}

impl LossSpec {
    pub fn build(&self, contour: &PossibilityContour) -> Result<LossFunction> {
        make_loss(self, contour)
    }
}

/// Builds a loss; the group-invariant loss takes its base contour from
/// `contour`, which must be a location contour.
pub fn make_loss(spec: &LossSpec, contour: &PossibilityContour) -> Result<LossFunction> {
    match *spec {
        LossSpec::SquaredError => Ok(LossFunction::squared_error()),
        LossSpec::WeightedSquaredError => Ok(LossFunction::weighted_squared_error()),
        LossSpec::ZeroOne { lo, hi } => LossFunction::zero_one(lo, hi),
        LossSpec::GroupInvariant { c } => {
            let kernel = contour
                .kernel()
                .ok_or_else(|| Error::UnsupportedModel("group-invariant loss needs a location model".into()))?;
            LossFunction::group_invariant(c, kernel.clone())
        }
        LossSpec::Constant { value } => LossFunction::constant(value),
    }
}

/// A selected action and its risk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionChoice {
    pub action: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Minimizes the upper expected loss over the bracket.
pub fn minimize_upper_loss(
    contour: &PossibilityContour,
    loss: &LossFunction,
    spec: &ActionSearchSpec,
) -> Result<ActionChoice> {
    let spec = spec.validated()?;
    minimize(
        |a| choquet_upper(contour, loss, a, spec.risk_tol).map(|r| r.value),
        |a| choquet_action_derivative(contour, loss, a, spec.risk_tol),
        &spec,
    )
}

/// Minimizes the expected loss under `q` over the bracket.
pub fn minimize_expected_loss(
    q: &ConfidenceDistribution,
    loss: &LossFunction,
    spec: &ActionSearchSpec,
) -> Result<ActionChoice> {
    let spec = spec.validated()?;
    minimize(|a| q.expected_loss(loss, a, spec.risk_tol), |a| q.expected_loss_derivative(loss, a, spec.risk_tol), &spec)
}

// Multi-start golden section, then a bisection on the derivative's sign
// change when the loss is differentiable in the action. Equal risks resolve
// to the smaller action.
fn minimize<F, D>(objective: F, derivative: D, spec: &ActionSearchSpec) -> Result<ActionChoice>
where
    F: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<Option<f64>>,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let evaluations = RefCell::new(0usize);
    let eval = |a: f64| -> f64 {
        *evaluations.borrow_mut() += 1;
        match objective(a) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::INFINITY
            }
        }
    };

    let grid = linspace(spec.lo, spec.hi, spec.starts + 2);
    let values: Vec<f64> = grid.iter().map(|&a| eval(a)).collect();
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let mut candidates: Vec<(f64, f64)> = grid.iter().copied().zip(values.iter().copied()).collect();
    let last = grid.len() - 1;
    for i in 0..grid.len() {
        let left_ok = i == 0 || values[i] <= values[i - 1];
        let right_ok = i == last || values[i] <= values[i + 1];
        if left_ok && right_ok {
            let lo = grid[i.saturating_sub(1)];
            let hi = grid[(i + 1).min(last)];
            let m = golden_section(&eval, lo, hi, spec.tol);
            candidates.push((m.x, m.value));
        }
    }
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let (mut best_x, mut best_v) = pick_best(&candidates);

    // Polish on the derivative's sign change near the golden-section answer.
    let interior = best_x > spec.lo + spec.tol && best_x < spec.hi - spec.tol;
    if interior {
        let mut width = 10.0 * spec.tol;
        let max_width = (spec.hi - spec.lo) / (spec.starts + 1) as f64;
        while width <= max_width {
            let lo = (best_x - width).max(spec.lo);
            let hi = (best_x + width).min(spec.hi);
            let (Some(dlo), Some(dhi)) = (derivative(lo)?, derivative(hi)?) else {
                break;
            };
            if dlo < 0.0 && dhi > 0.0 {
                let root = find_root(
                    |a| match derivative(a) {
                        Ok(Some(d)) => (d, f64::NAN),
                        _ => (f64::NAN, f64::NAN),
                    },
                    lo,
                    hi,
                    Tolerance { abs: POLISH_FRACTION * spec.tol, rel: 1e-12 },
                );
                let v = eval(root);
                if let Some(e) = failure.borrow_mut().take() {
                    return Err(e);
                }
                if v <= best_v + (best_v.abs() * 1e-8).max(1e-14) {
                    best_x = root;
                    best_v = v;
                }
                break;
            }
            if dlo == 0.0 && dhi == 0.0 {
                break;
            }
            width *= 4.0;
        }
    }
    let evaluations = *evaluations.borrow();
    Ok(ActionChoice { action: best_x, value: best_v, evaluations })
}

fn pick_best(candidates: &[(f64, f64)]) -> (f64, f64) {
    let best_v = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let slack = 1e-12 * best_v.abs().max(1e-300);
    candidates
        .iter()
        .filter(|c| c.1 <= best_v + slack)
        .copied()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap_or((f64::NAN, f64::INFINITY))
}

/// The quantities of the risk chain
/// `inf_a upper(a) = upper(a*) = Q*(a*) = inf_a Q*(a)`, where `a*` minimizes
/// the fiducial expected loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiskChainReport {
    pub action: f64,
    pub upper_minimizer: f64,
    pub inf_upper: f64,
    pub upper_at_action: f64,
    pub fiducial_at_action: f64,
    pub inf_fiducial: f64,
    /// Largest relative gap between the loss at the two ends of a
    /// plausibility region, over the levels 0.05, 0.10, ..., 0.95.
    pub alignment_error: f64,
    pub precondition_holds: bool,
    /// Largest relative gap among the four risks.
    pub chain_gap: f64,
    pub chain_holds: bool,
    pub pass: bool,
}

/// Relative tolerance of the alignment precondition and of the chain.
pub const RISK_CHAIN_TOL: f64 = 1e-4;

/// Checks the equal-minimum-risk chain for a convex loss whose level sets,
/// at the fiducial action, coincide with the contour's.
pub fn theorem_risk_check(
    contour: &PossibilityContour,
    q_star: &ConfidenceDistribution,
    loss: &LossFunction,
    spec: &ActionSearchSpec,
) -> Result<RiskChainReport> {
    let fiducial = minimize_expected_loss(q_star, loss, spec)?;
    let action = fiducial.action;
    let mut alignment_error: f64 = 0.0;
    for i in 1..20 {
        let region = contour.region(i as f64 * 0.05);
        let (left, right) = (loss.eval(action, region.lo), loss.eval(action, region.hi));
        let scale = left.abs().max(right.abs()).max(f64::MIN_POSITIVE);
        alignment_error = alignment_error.max((left - right).abs() / scale);
    }
    let precondition_holds = loss.is_convex() && alignment_error <= RISK_CHAIN_TOL;
    let upper = minimize_upper_loss(contour, loss, spec)?;
    let upper_at_action = choquet_upper(contour, loss, action, spec.risk_tol)?.value;
    let risks = [upper.value, upper_at_action, fiducial.value, fiducial.value];
    let hi = risks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = risks.iter().copied().fold(f64::INFINITY, f64::min);
    let chain_gap = (hi - lo) / hi.abs().max(f64::MIN_POSITIVE);
    let chain_holds = chain_gap <= RISK_CHAIN_TOL;
    Ok(RiskChainReport {
        action,
        upper_minimizer: upper.action,
        inf_upper: upper.value,
        upper_at_action,
        fiducial_at_action: fiducial.value,
        inf_fiducial: fiducial.value,
        alignment_error,
        precondition_holds,
        chain_gap,
        chain_holds,
        pass: precondition_holds && chain_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{binomial_contour, location_contour, LocationKernel};
    use crate::dist::Distribution;
    use approx::assert_relative_eq;

    fn t3_contour(y: f64) -> PossibilityContour {
        location_contour(&Distribution::student_t(3.0).unwrap(), y).unwrap()
    }

    #[test]
    fn make_loss_examples() {
        let c = t3_contour(0.0);
        assert_eq!(make_loss(&LossSpec::SquaredError, &c).unwrap().eval(2.0, 0.0), 4.0);
        let w = make_loss(&LossSpec::WeightedSquaredError, &c).unwrap();
        assert_relative_eq!(w.eval(0.2, 0.5), 0.36, epsilon = 1e-15);
        let b = binomial_contour(18, 7).unwrap();
        assert!(matches!(make_loss(&LossSpec::GroupInvariant { c: 0.2 }, &b), Err(Error::UnsupportedModel(_))));
        assert!(make_loss(&LossSpec::ZeroOne { lo: 1.0, hi: 0.0 }, &c).is_err());
    }

    #[test]
    fn t3_squared_minimizers_are_the_observation() {
        let l = LossFunction::squared_error();
        for &y in &[0.0, 1.3, -2.71] {
            let c = t3_contour(y);
            let spec = ActionSearchSpec::for_contour(&c);
            let up = minimize_upper_loss(&c, &l, &spec).unwrap();
            assert!((up.action - y).abs() <= 1e-6, "{y}: {}", up.action);
            assert_relative_eq!(up.value, 3.0, max_relative = 1e-6);
            let q = ConfidenceDistribution::fiducial_for(&c).unwrap();
            let fid = minimize_expected_loss(&q, &l, &spec).unwrap();
            assert!((fid.action - y).abs() <= 1e-6, "{y}: {}", fid.action);
            assert_relative_eq!(fid.value, 3.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn binomial_minimizers_agree() {
        let c = binomial_contour(18, 7).unwrap();
        let l = LossFunction::weighted_squared_error();
        let spec = ActionSearchSpec::for_contour(&c);
        let up = minimize_upper_loss(&c, &l, &spec).unwrap();
        let q = ConfidenceDistribution::fiducial_for(&c).unwrap();
        let fid = minimize_expected_loss(&q, &l, &spec).unwrap();
        assert!((up.action - fid.action).abs() < 0.02, "{} vs {}", up.action, fid.action);
        assert!(up.value >= fid.value);
    }

    #[test]
    fn scale_equivariance_of_the_minimizer() {
        let c = binomial_contour(18, 7).unwrap();
        let l = LossFunction::weighted_squared_error();
        let spec = ActionSearchSpec::for_contour(&c);
        let a = minimize_upper_loss(&c, &l, &spec).unwrap();
        let b = minimize_upper_loss(&c, &l.scaled(7.0).unwrap(), &spec).unwrap();
        assert!((a.action - b.action).abs() <= 1e-6);
        assert_relative_eq!(b.value, 7.0 * a.value, max_relative = 1e-6);
    }

    #[test]
    fn plateau_ties_go_to_the_smallest_action() {
        // Constant risk: every action ties.
        let c = t3_contour(0.0);
        let l = LossFunction::constant(1.0).unwrap();
        let spec = ActionSearchSpec::new(-2.0, 2.0, 1e-6).unwrap();
        assert_eq!(minimize_upper_loss(&c, &l, &spec).unwrap().action, -2.0);
    }

    #[test]
    fn narrow_distribution_minimizer_is_its_center() {
        let k = LocationKernel::new(Distribution::student_t(3.0).unwrap()).unwrap();
        let q = ConfidenceDistribution::scaled_location(k, 0.8, 1e-3, 0.0).unwrap();
        let spec = ActionSearchSpec::new(-5.0, 5.0, 1e-8).unwrap();
        let m = minimize_expected_loss(&q, &LossFunction::squared_error(), &spec).unwrap();
        assert!((m.action - 0.8).abs() < 1e-6);
    }

    #[test]
    fn risk_chain_examples() {
        let c = t3_contour(0.4);
        let q = ConfidenceDistribution::fiducial_for(&c).unwrap();
        let spec = ActionSearchSpec::for_contour(&c);
        let r = theorem_risk_check(&c, &q, &LossFunction::squared_error(), &spec).unwrap();
        assert!(r.pass, "{r:?}");
        assert_relative_eq!(r.inf_upper, 3.0, max_relative = 1e-6);

        let sn = location_contour(&Distribution::skew_normal(3.0).unwrap(), 0.0).unwrap();
        let q = ConfidenceDistribution::fiducial_for(&sn).unwrap();
        let spec = ActionSearchSpec::for_contour(&sn);
        let g = make_loss(&LossSpec::GroupInvariant { c: 0.2 }, &sn).unwrap();
        let r = theorem_risk_check(&sn, &q, &g, &spec).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.action.abs() < 1e-4);
        let r = theorem_risk_check(&sn, &q, &LossFunction::squared_error(), &spec).unwrap();
        assert!(!r.precondition_holds && !r.pass, "{r:?}");
    }

    #[test]
    fn non_previsible_bracket_is_an_error() {
        let c = location_contour(&Distribution::student_t(1.0).unwrap(), 0.0).unwrap();
        let spec = ActionSearchSpec::for_contour(&c);
        let e = minimize_upper_loss(&c, &LossFunction::squared_error(), &spec).unwrap_err();
        assert!(e.is_numerical());
    }
}
