//! Fiducial and confidence distributions, and their relation to the
//! possibility contour.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::contour::{LocationKernel, PlausibilityRegion, PossibilityContour};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::loss::{LossFunction, LossKind};
use crate::quad::{integrate, integrate_range, QuadOptions, Quadrature};
use crate::solve::{find_root, Tolerance};

/// A data-dependent probability distribution for the parameter.
#[derive(Debug, Clone)]
pub enum ConfidenceDistribution {
    /// Law of `y + shift - scale * U`. With unit scale and zero shift this is
    /// the fiducial distribution of the location model, density `f(y - theta)`.
    Location {
        kernel: Arc<LocationKernel>,
        y: f64,
        scale: f64,
        shift: f64,
    },
    /// Beta law on the unit interval.
    Beta {
        law: Distribution,
    },
    PointMass {
        at: f64,
    },
}

/// Tolerance for probabilities of plausibility regions.
pub const REGION_MASS_TOL: f64 = 1e-8;
/// Slack allowed by the confidence-distribution and stochastic-order tests.
pub const ORDER_SLACK: f64 = 1e-6;

const CUT_MERGE: f64 = 1e-9;
const ROUGH_REL_TOL: f64 = 1e-4;

impl ConfidenceDistribution {
    /// Density `f(y - theta)`.
    pub fn location(kernel: Arc<LocationKernel>, y: f64) -> Result<Self> {
        Self::scaled_location(kernel, y, 1.0, 0.0)
    }

    /// Law of `y + shift - scale * U`; `scale = 0` is a point mass.
    pub fn scaled_location(kernel: Arc<LocationKernel>, y: f64, scale: f64, shift: f64) -> Result<Self> {
        if !(y.is_finite() && shift.is_finite() && scale.is_finite() && scale >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "location confidence distribution with y={y}, scale={scale}, shift={shift}"
            )));
        }
        if scale == 0.0 {
            return Ok(Self::PointMass { at: y + shift });
        }
        Ok(Self::Location { kernel, y, scale, shift })
    }

    /// Beta(y + 1/2, n - y + 1/2).
    pub fn binomial(n: u64, y: u64) -> Result<Self> {
        if y > n {
            return Err(Error::Domain(format!("count {y} exceeds trial count {n}")));
        }
        let law = Distribution::beta(y as f64 + 0.5, (n - y) as f64 + 0.5)?;
        Ok(Self::Beta { law })
    }

    /// The fiducial distribution matching `contour`.
    pub fn fiducial_for(contour: &PossibilityContour) -> Result<Self> {
        if let Some(kernel) = contour.kernel() {
            return Self::location(kernel.clone(), contour.observation());
        }
        if let Some((n, y)) = contour.binomial_counts() {
            return Self::binomial(n, y);
        }
        Err(Error::UnsupportedModel("no fiducial distribution for a vacuous contour".into()))
    }

    pub fn is_point_mass(&self) -> bool {
        matches!(self, Self::PointMass { .. })
    }

    /// Density; zero everywhere for a point mass.
    pub fn density(&self, theta: f64) -> f64 {
        match self {
            Self::Location { kernel, y, scale, shift } => kernel.law().pdf((y + shift - theta) / scale) / scale,
            Self::Beta { law } => law.pdf(theta),
            Self::PointMass { .. } => 0.0,
        }
    }

    pub fn cdf(&self, theta: f64) -> f64 {
        match self {
            Self::Location { kernel, y, scale, shift } => kernel.law().sf((y + shift - theta) / scale),
            Self::Beta { law } => law.cdf(theta),
            Self::PointMass { at } => {
                if theta >= *at {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn sf(&self, theta: f64) -> f64 {
        match self {
            Self::Location { kernel, y, scale, shift } => kernel.law().cdf((y + shift - theta) / scale),
            Self::Beta { law } => law.sf(theta),
            Self::PointMass { at } => {
                if theta < *at {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// A point of high density, used to split quadrature ranges.
    pub fn center(&self) -> f64 {
        match self {
            Self::Location { kernel, y, scale, shift } => y + shift - scale * kernel.mode(),
            Self::Beta { law } => law.mode().unwrap_or(law.mean()),
            Self::PointMass { at } => *at,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Location { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Self::Beta { .. } => (0.0, 1.0),
            Self::PointMass { at } => (*at, *at),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Location { kernel, y, scale, shift } => y + shift - scale * kernel.law().mean(),
            Self::Beta { law } => law.mean(),
            Self::PointMass { at } => *at,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Self::Location { kernel, scale, .. } => scale * scale * kernel.law().variance(),
            Self::Beta { law } => law.variance(),
            Self::PointMass { .. } => 0.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, m: usize) -> Result<Vec<f64>> {
        if m == 0 {
            return Err(Error::EmptyRequest("sample count must be at least 1"));
        }
        Ok((0..m)
            .map(|_| match self {
                Self::Location { kernel, y, scale, shift } => y + shift - scale * kernel.law().sample_one(rng),
                Self::Beta { law } => law.sample_one(rng),
                Self::PointMass { at } => *at,
            })
            .collect())
    }

    /// Probability of `[lo, hi]` by adaptive quadrature of the density.
    pub fn prob_interval(&self, lo: f64, hi: f64) -> f64 {
        if !(lo < hi) {
            return match self {
                Self::PointMass { at } if lo == hi && *at == lo => 1.0,
                _ => 0.0,
            };
        }
        if let Self::PointMass { at } = self {
            return if (lo..=hi).contains(at) { 1.0 } else { 0.0 };
        }
        let (slo, shi) = self.support();
        let (lo, hi) = (lo.max(slo), hi.min(shi));
        if !(lo < hi) {
            return 0.0;
        }
        let center = self.center().clamp(lo.max(-1e300), hi.min(1e300));
        let opts = QuadOptions { abs_tol: 0.1 * REGION_MASS_TOL, rel_tol: 1e-12, max_panels: 500 };
        let left = integrate_range(|t| self.density(t), lo, center, center, opts);
        let right = integrate_range(|t| self.density(t), center, hi, center, opts);
        (left.value + right.value).clamp(0.0, 1.0)
    }

    /// Probability of a plausibility region, by quadrature.
    pub fn prob_region(&self, region: &PlausibilityRegion) -> f64 {
        if region.is_empty() {
            return 0.0;
        }
        if let Self::PointMass { at } = self {
            return if region.contains(*at) { 1.0 } else { 0.0 };
        }
        self.prob_interval(region.lo, region.hi)
    }

    /// Probability of a plausibility region from the distribution function.
    pub fn prob_region_by_cdf(&self, region: &PlausibilityRegion) -> f64 {
        if region.is_empty() {
            return 0.0;
        }
        if let Self::PointMass { at } = self {
            return if region.contains(*at) { 1.0 } else { 0.0 };
        }
        (1.0 - self.cdf(region.lo) - self.sf(region.hi)).clamp(0.0, 1.0)
    }

    /// `int l_a(theta) q(theta) d theta` to relative tolerance `tol`.
    pub fn expected_loss(&self, loss: &LossFunction, a: f64, tol: f64) -> Result<f64> {
        self.integrate_loss(a, tol, |t| loss.eval(a, t), Some(loss))
    }

    /// Derivative of [`expected_loss`](Self::expected_loss) in the action,
    /// for losses differentiable in it.
    pub fn expected_loss_derivative(&self, loss: &LossFunction, a: f64, tol: f64) -> Result<Option<f64>> {
        if !loss.is_action_differentiable() {
            return Ok(None);
        }
        let value = self.integrate_loss(a, tol, |t| loss.action_derivative(a, t).unwrap_or(0.0), Some(loss))?;
        Ok(Some(value))
    }

    fn integrate_loss<F: Fn(f64) -> f64>(
        &self,
        a: f64,
        tol: f64,
        integrand: F,
        loss: Option<&LossFunction>,
    ) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
        }
        if let Self::PointMass { at } = self {
            let v = integrand(*at);
            return if v.is_finite() { Ok(v) } else { Err(divergent(a)) };
        }
        if let Some(loss) = loss {
            self.check_integrable(loss, a)?;
        }
        let (lo, hi) = self.support();
        let mut cuts = vec![self.center()];
        if a > lo && a < hi {
            cuts.push(a);
        }
        // Sign change of the group-invariant action derivative.
        if let Some(LossKind::GroupInvariant { kernel, .. }) = loss.map(|l| l.kind()) {
            let t = a - kernel.mode();
            if t > lo && t < hi {
                cuts.push(t);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|b, a| (*b - *a).abs() <= CUT_MERGE * (1.0 + a.abs()));
        let f = |t: f64| {
            let q = self.density(t);
            if q == 0.0 {
                0.0
            } else {
                integrand(t) * q
            }
        };
        let pieces = |opts: QuadOptions| -> Vec<Quadrature> {
            let mut out = vec![integrate_range(f, lo, cuts[0], cuts[0], opts)];
            for w in cuts.windows(2) {
                out.push(integrate(f, w[0], w[1], opts));
            }
            let last = *cuts.last().expect("nonempty cuts");
            out.push(integrate_range(f, last, hi, last, opts));
            out
        };
        // A rough pass fixes the scale, so small pieces and near-zero totals
        // are held to an absolute tolerance.
        let rough = pieces(QuadOptions { abs_tol: 0.0, rel_tol: ROUGH_REL_TOL, max_panels: 1000 });
        let magnitude: f64 = rough.iter().map(|p| p.value.abs()).sum();
        if !magnitude.is_finite() {
            return Err(divergent(a));
        }
        let abs_tol = 0.1 * tol * magnitude / rough.len() as f64;
        let fine = pieces(QuadOptions { abs_tol, rel_tol: 0.1 * tol, max_panels: 1000 });
        let total = fine.into_iter().reduce(Quadrature::combine).expect("nonempty pieces");
        if !total.converged || !total.value.is_finite() {
            return Err(divergent(a));
        }
        Ok(total.value)
    }

    // Known non-integrable combinations, caught before quadrature.
    fn check_integrable(&self, loss: &LossFunction, a: f64) -> Result<()> {
        match (self, loss.kind()) {
            (Self::Location { kernel, .. }, LossKind::SquaredError) => {
                if !kernel.law().variance().is_finite() {
                    return Err(divergent(a));
                }
            }
            (Self::Beta { law: Distribution::Beta { a: p, b: q } }, LossKind::WeightedSquaredError) => {
                if (*p <= 1.0 && a != 0.0) || (*q <= 1.0 && a != 1.0) {
                    return Err(divergent(a));
                }
            }
            (Self::Location { .. }, LossKind::WeightedSquaredError) => return Err(divergent(a)),
            _ => {}
        }
        Ok(())
    }
}

fn divergent(a: f64) -> Error {
    Error::Divergent(format!("expected loss of action {a} is infinite"))
}

/// Pass/fail record of a credal-set test over a grid of levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CredalReport {
    pub pass: bool,
    pub levels: Vec<f64>,
    /// The compared quantity at each level (see the producing function).
    pub values: Vec<f64>,
    /// Smallest margin over the grid; negative below the slack means failure.
    pub worst_margin: f64,
    pub worst_level: Option<f64>,
}

fn check_levels(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::EmptyRequest("level grid is empty"));
    }
    if alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
        return Err(Error::Domain("levels must lie in (0, 1)".into()));
    }
    Ok(())
}

fn credal_report(alphas: &[f64], values: Vec<f64>, margins: impl Iterator<Item = f64>) -> CredalReport {
    let mut worst_margin = f64::INFINITY;
    let mut worst_level = None;
    for (&alpha, m) in alphas.iter().zip(margins) {
        if m < worst_margin {
            worst_margin = m;
            worst_level = Some(alpha);
        }
    }
    CredalReport { pass: worst_margin >= -ORDER_SLACK, levels: alphas.to_vec(), values, worst_margin, worst_level }
}

/// Passes iff `Q(C_alpha) >= 1 - alpha - 1e-6` at every level; `values` holds
/// `Q(C_alpha)`.
pub fn confidence_distribution_test(
    q: &ConfidenceDistribution,
    contour: &PossibilityContour,
    alphas: &[f64],
) -> Result<CredalReport> {
    check_levels(alphas)?;
    let values: Vec<f64> = alphas.iter().map(|&alpha| q.prob_region(&contour.region(alpha))).collect();
    let margins = values.iter().zip(alphas).map(|(v, alpha)| v - (1.0 - alpha));
    Ok(credal_report(alphas, values.clone(), margins))
}

/// Passes iff `Q(C_alpha^c) <= Q*(C_alpha^c) + 1e-6` at every level; the
/// complements of plausibility regions are the increasing sets of the
/// plausibility order. `values` holds `Q(C_alpha^c)`.
pub fn stochastic_order_check(
    q: &ConfidenceDistribution,
    q_star: &ConfidenceDistribution,
    contour: &PossibilityContour,
    alphas: &[f64],
) -> Result<CredalReport> {
    check_levels(alphas)?;
    let mut values = Vec::with_capacity(alphas.len());
    let mut margins = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let region = contour.region(alpha);
        let outside = 1.0 - q.prob_region(&region);
        let outside_star = 1.0 - q_star.prob_region(&region);
        values.push(outside);
        margins.push(outside_star - outside);
    }
    Ok(credal_report(alphas, values, margins.into_iter()))
}

/// Fiducial distribution of the location model `Y = theta + U`, `U ~ law`.
pub fn location_fiducial(law: &Distribution, y: f64) -> Result<ConfidenceDistribution> {
    ConfidenceDistribution::location(LocationKernel::new(*law)?, y)
}

/// Fiducial distribution of `y` successes in `n` trials.
pub fn binomial_fiducial(n: u64, y: u64) -> Result<ConfidenceDistribution> {
    ConfidenceDistribution::binomial(n, y)
}

/// `eta(z) = P{f(U) < z}` for the density `f` of the kernel's law.
pub fn eta(kernel: &LocationKernel, z: f64) -> Result<f64> {
    let peak = kernel.law().pdf(kernel.mode());
    if !(0.0..=peak).contains(&z) {
        return Err(Error::Domain(format!("density value {z} outside [0, {peak}]")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z == peak {
        return Ok(1.0);
    }
    Ok(kernel.plausibility(density_point(kernel, z)))
}

/// `eta^{-1}(alpha)`: the density value at the boundary of the level-alpha set.
pub fn eta_inverse(kernel: &LocationKernel, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("level {alpha} outside [0, 1]")));
    }
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let (_, r) = kernel.level_set(alpha);
    Ok(kernel.law().pdf(r))
}

// The point right of the mode at which the density equals z.
fn density_point(kernel: &LocationKernel, z: f64) -> f64 {
    let law = kernel.law();
    let m = kernel.mode();
    let target = z.ln();
    let mut near = m;
    let mut step = 1.0;
    let mut far = m + step;
    while law.ln_pdf(far) > target {
        near = far;
        step *= 4.0;
        far = m + step;
    }
    find_root(|x| (law.ln_pdf(x) - target, law.score(x)), near, far, Tolerance::TIGHT)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{binomial_contour, linspace};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kernel(law: Distribution) -> Arc<LocationKernel> {
        LocationKernel::new(law).unwrap()
    }

    fn t3() -> Arc<LocationKernel> {
        kernel(Distribution::student_t(3.0).unwrap())
    }

    fn levels() -> Vec<f64> {
        (1..100).map(|i| i as f64 / 100.0).collect()
    }

    #[test]
    fn location_fiducial_examples() {
        let f = Distribution::student_t(3.0).unwrap();
        let q = location_fiducial(&f, 0.0).unwrap();
        assert_relative_eq!(q.density(0.7), f.pdf(0.7), epsilon = 1e-15);
        assert_relative_eq!(q.cdf(0.0), 0.5, epsilon = 1e-15);
        let sn = ConfidenceDistribution::location(kernel(Distribution::skew_normal(3.0).unwrap()), 0.0).unwrap();
        assert_relative_eq!(sn.prob_interval(f64::NEG_INFINITY, f64::INFINITY), 1.0, epsilon = 1e-6);
        // Mass sits to the left: theta = -U with U right-skewed.
        assert!(sn.mean() < 0.0);
        assert_relative_eq!(
            sn.density(-0.5),
            2.0 * 0.352_065_326_764_299_5 * crate::special::norm_cdf(1.5),
            epsilon = 1e-12
        );
    }

    #[test]
    fn binomial_fiducial_examples() {
        let q = binomial_fiducial(18, 7).unwrap();
        assert_relative_eq!(q.mean(), 7.5 / 19.0, epsilon = 1e-15);
        let q = ConfidenceDistribution::binomial(2, 1).unwrap();
        assert_relative_eq!(q.cdf(0.5), 0.5, epsilon = 1e-14);
        let ConfidenceDistribution::Beta { law } = ConfidenceDistribution::binomial(50, 15).unwrap() else {
            panic!("expected a beta law");
        };
        assert_eq!(law, Distribution::Beta { a: 15.5, b: 35.5 });
    }

    #[test]
    fn expected_loss_examples() {
        let l = LossFunction::squared_error();
        let q = ConfidenceDistribution::location(t3(), 0.5).unwrap();
        assert_relative_eq!(q.expected_loss(&l, 2.0, 1e-10).unwrap(), 2.25 + 3.0, max_relative = 1e-8);
        let b = ConfidenceDistribution::binomial(18, 7).unwrap();
        assert_relative_eq!(b.expected_loss(&l, b.mean(), 1e-10).unwrap(), b.variance(), max_relative = 1e-8);
    }

    #[test]
    fn weighted_loss_matches_monte_carlo() {
        let b = ConfidenceDistribution::binomial(18, 7).unwrap();
        let l = LossFunction::weighted_squared_error();
        let exact = b.expected_loss(&l, 0.2, 1e-10).unwrap();
        let draws = b.sample(&mut ChaCha8Rng::seed_from_u64(3), 1_000_000).unwrap();
        let losses: Vec<f64> = draws.iter().map(|&t| l.eval(0.2, t)).collect();
        let m = losses.iter().sum::<f64>() / losses.len() as f64;
        let sd = (losses.iter().map(|x| (x - m).powi(2)).sum::<f64>() / losses.len() as f64).sqrt();
        assert!((m - exact).abs() <= 3.0 * sd / 1000.0, "{m} vs {exact}");
    }

    #[test]
    fn divergent_expectations_are_reported() {
        let l = LossFunction::weighted_squared_error();
        let b = ConfidenceDistribution::binomial(50, 0).unwrap();
        assert!(matches!(b.expected_loss(&l, 0.3, 1e-8), Err(Error::Divergent(_))));
        let cauchy = ConfidenceDistribution::location(kernel(Distribution::student_t(1.0).unwrap()), 0.0).unwrap();
        assert!(cauchy.expected_loss(&LossFunction::squared_error(), 0.0, 1e-8).is_err());
    }

    #[test]
    fn identity_between_fiducial_mass_and_level() {
        for law in [Distribution::student_t(3.0).unwrap(), Distribution::skew_normal(3.0).unwrap()] {
            let k = kernel(law);
            let c = PossibilityContour::location(k.clone(), 0.3).unwrap();
            let q = ConfidenceDistribution::location(k, 0.3).unwrap();
            for alpha in levels() {
                let r = c.region(alpha);
                assert!((1.0 - q.prob_region(&r) - alpha).abs() <= 1e-6);
                assert!((q.prob_region_by_cdf(&r) - q.prob_region(&r)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn scaled_and_shifted_members() {
        let k = t3();
        let c = PossibilityContour::location(k.clone(), 0.0).unwrap();
        let star = ConfidenceDistribution::location(k.clone(), 0.0).unwrap();
        for (s, shift, member) in
            [(0.0, 0.0, true), (0.5, 0.0, true), (1.0, 0.0, true), (2.0, 0.0, false), (1.0, 1.0, false)]
        {
            let q = ConfidenceDistribution::scaled_location(k.clone(), 0.0, s, shift).unwrap();
            let cd = confidence_distribution_test(&q, &c, &levels()).unwrap();
            let order = stochastic_order_check(&q, &star, &c, &levels()).unwrap();
            assert_eq!(cd.pass, member, "s={s} shift={shift}");
            assert_eq!(order.pass, member, "s={s} shift={shift}");
        }
    }

    #[test]
    fn binomial_fiducial_is_not_a_confidence_distribution_everywhere() {
        // The contour is conservative, so the fiducial may still pass; the
        // test only needs to run on the bounded domain.
        let c = binomial_contour(18, 7).unwrap();
        let q = ConfidenceDistribution::binomial(18, 7).unwrap();
        let report = confidence_distribution_test(&q, &c, &levels()).unwrap();
        assert_eq!(report.values.len(), 99);
    }

    #[test]
    fn eta_examples() {
        let k = t3();
        let peak = k.law().pdf(0.0);
        assert_eq!(eta(&k, peak).unwrap(), 1.0);
        assert_eq!(eta(&k, 0.0).unwrap(), 0.0);
        assert!(eta(&k, 2.0 * peak).is_err());
        let z = k.law().pdf(2.0);
        assert_relative_eq!(eta(&k, z).unwrap(), k.plausibility(2.0), epsilon = 1e-12);
        for &alpha in &[0.05, 0.3, 0.8] {
            assert_relative_eq!(eta(&k, eta_inverse(&k, alpha).unwrap()).unwrap(), alpha, epsilon = 1e-9);
        }
    }

    #[test]
    fn alternative_region_representation() {
        // {theta: f(y - theta) > eta^{-1}(alpha)} = {theta: pi_y(theta) > alpha}.
        let k = t3();
        let c = PossibilityContour::location(k.clone(), 1.0).unwrap();
        for &alpha in &[0.1, 0.5, 0.9] {
            let cut = eta_inverse(&k, alpha).unwrap();
            for theta in linspace(-6.0, 8.0, 141) {
                let by_density = k.law().pdf(1.0 - theta) > cut;
                let by_contour = c.plausibility(theta) > alpha;
                if (c.plausibility(theta) - alpha).abs() > 1e-9 {
                    assert_eq!(by_density, by_contour, "alpha={alpha} theta={theta}");
                }
            }
        }
    }
}
