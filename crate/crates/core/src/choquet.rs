//! Upper expectations of losses under a possibility contour.
//!
//! The Choquet integral `int_0^1 h(alpha) d alpha` of the level-sup function
//! `h(alpha) = sup{l_a(theta): pi(theta) > alpha}` is computed on the panels
//! `[1/2, 1]`, `[1/10, 1/2]` and then one decade at a time towards zero, in the
//! variable `ln alpha`. Refinement stops once a decade contributes less than a
//! tenth of the tolerance and the geometric extrapolation of the remaining
//! decades is equally small; that extrapolated tail is added to the value.

use rayon::prelude::*;
use serde::Serialize;

use crate::contour::PossibilityContour;
use crate::error::{Error, Result};
use crate::loss::LossFunction;
use crate::quad::{integrate, QuadOptions};

/// Value of an upper expectation with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChoquetResult {
    pub value: f64,
    pub abs_error: f64,
    /// Number of integrand evaluations.
    pub nodes: usize,
}

/// Controls for [`choquet_upper_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoquetOptions {
    /// Relative tolerance.
    pub tol: f64,
    /// Decades below `alpha = 1/10` explored before giving up.
    pub max_decades: usize,
}

impl Default for ChoquetOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_decades: 100 }
    }
}

impl ChoquetOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidParameter(format!("tolerance {} not in (0, 1)", self.tol)));
        }
        Ok(())
    }
}

// The previsibility test looks at decades entirely below this level.
const TAIL_TEST_START: f64 = 1e-6;
// alpha h(alpha) must shrink by at least this fraction per decade.
const TAIL_DECREASE: f64 = 1e-3;
const TAIL_FAILURES: usize = 3;
// Endpoint losses this close count as a tie.
const TIE_TOL: f64 = 1e-10;

/// `h(alpha) = sup{l_a(theta): pi(theta) > alpha}`; zero for `alpha >= 1`
/// and `+inf` when the loss is unbounded on the region.
pub fn level_sup(contour: &PossibilityContour, loss: &LossFunction, a: f64, alpha: f64) -> f64 {
    if alpha >= 1.0 {
        return 0.0;
    }
    loss.sup_over(a, &contour.region(alpha)).0
}

/// The upper expected loss of action `a` to relative tolerance `tol`.
pub fn choquet_upper(contour: &PossibilityContour, loss: &LossFunction, a: f64, tol: f64) -> Result<ChoquetResult> {
    choquet_upper_with(contour, loss, a, &ChoquetOptions::with_tol(tol))
}

pub fn choquet_upper_with(
    contour: &PossibilityContour,
    loss: &LossFunction,
    a: f64,
    opts: &ChoquetOptions,
) -> Result<ChoquetResult> {
    opts.validate()?;
    if !a.is_finite() {
        return Err(Error::Domain(format!("action {a} is not finite")));
    }
    integrate_levels(|alpha| level_sup(contour, loss, a, alpha), opts, true)
}

/// Derivative of the upper expected loss in the action, for losses that are
/// differentiable in it. Where the supremum switches endpoint the one-sided
/// derivatives may differ; the endpoint with the larger loss is used, and on
/// a tie the right derivative (the larger endpoint derivative) is returned.
pub fn choquet_action_derivative(
    contour: &PossibilityContour,
    loss: &LossFunction,
    a: f64,
    tol: f64,
) -> Result<Option<f64>> {
    let opts = ChoquetOptions::with_tol(tol);
    opts.validate()?;
    if !loss.is_action_differentiable() || !loss.is_quasi_convex() {
        return Ok(None);
    }
    let r = integrate_levels(
        |alpha| {
            if alpha >= 1.0 {
                return 0.0;
            }
            let region = contour.region(alpha);
            if region.is_empty() {
                return 0.0;
            }
            let (left, right) = (loss.eval(a, region.lo), loss.eval(a, region.hi));
            let slope = |theta| loss.action_derivative(a, theta).unwrap_or(f64::NAN);
            if (left - right).abs() <= TIE_TOL * left.abs().max(right.abs()) {
                slope(region.lo).max(slope(region.hi))
            } else if left > right {
                slope(region.lo)
            } else {
                slope(region.hi)
            }
        },
        &opts,
        false,
    )?;
    Ok(Some(r.value))
}

/// Upper expected loss at each action, in input order.
pub fn upper_risk_curve(
    contour: &PossibilityContour,
    loss: &LossFunction,
    actions: &[f64],
    tol: f64,
) -> Result<Vec<(f64, ChoquetResult)>> {
    if actions.is_empty() {
        return Err(Error::EmptyRequest("action grid is empty"));
    }
    actions.par_iter().map(|&a| choquet_upper(contour, loss, a, tol).map(|r| (a, r))).collect()
}

fn integrate_levels<F: Fn(f64) -> f64>(h: F, opts: &ChoquetOptions, previsibility: bool) -> Result<ChoquetResult> {
    let tol = opts.tol;
    let diverged = |what: &str| Error::NonPrevisible(format!("upper expectation is infinite: {what}"));
    let mut nodes = 0;
    let mut total = 0.0;
    let mut abs_error = 0.0;
    for (lo, hi) in [(0.5, 1.0), (0.1, 0.5)] {
        let q = integrate(&h, lo, hi, QuadOptions { abs_tol: 0.0, rel_tol: 0.25 * tol, max_panels: 200 });
        nodes += q.evaluations;
        if !q.value.is_finite() {
            return Err(diverged("loss unbounded on a region of positive level"));
        }
        total += q.value;
        abs_error += q.abs_error;
    }
    let mut previous: Option<f64> = None;
    let mut last_scaled: Option<f64> = None;
    let mut failures = 0;
    for k in 1..=opts.max_decades {
        let hi = 10f64.powi(-(k as i32));
        let lo = hi / 10.0;
        let quad_opts = QuadOptions { abs_tol: 0.01 * tol * total.abs(), rel_tol: 0.25 * tol, max_panels: 200 };
        let q = integrate(
            |s: f64| {
                let alpha = s.exp();
                let v = h(alpha);
                if v == 0.0 {
                    0.0
                } else {
                    v * alpha
                }
            },
            lo.ln(),
            hi.ln(),
            quad_opts,
        );
        nodes += q.evaluations;
        if !q.value.is_finite() {
            return Err(diverged("loss unbounded on a region of positive level"));
        }
        total += q.value;
        abs_error += q.abs_error;

        if previsibility && hi <= TAIL_TEST_START {
            let scaled = lo * h(lo);
            nodes += 1;
            if !scaled.is_finite() {
                return Err(diverged("loss unbounded on a region of positive level"));
            }
            if let Some(prev) = last_scaled {
                if scaled > 0.0 && scaled > prev * (1.0 - TAIL_DECREASE) {
                    failures += 1;
                } else {
                    failures = 0;
                }
            }
            if failures >= TAIL_FAILURES {
                return Err(diverged("alpha h(alpha) does not vanish as alpha -> 0"));
            }
            last_scaled = Some(scaled);
        }

        let contribution = q.value.abs();
        let budget = 0.1 * tol * total.abs();
        if contribution == 0.0 && previous == Some(0.0) {
            return Ok(ChoquetResult { value: total, abs_error, nodes });
        }
        if let Some(prev) = previous {
            let ratio = if prev > 0.0 { contribution / prev } else { f64::INFINITY };
            if ratio < 1.0 {
                let tail = q.value * ratio / (1.0 - ratio);
                if contribution <= budget && tail.abs() <= budget {
                    return Ok(ChoquetResult { value: total + tail, abs_error: abs_error + tail.abs(), nodes });
                }
            }
        }
        previous = Some(contribution);
    }
    Err(diverged("no convergence after the maximum number of decades"))
}
