//! Possibility contours and their plausibility regions.
//!
//! Three families are supported: location models `Y = theta + U` with a
//! unimodal auxiliary law, the binomial count model, and the vacuous contour
//! that is identically one on an interval.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::solve::{find_root, Tolerance};

/// Which family a contour belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContourModel {
    SymmetricLocation,
    SkewNormalLocation,
    Binomial,
    Vacuous,
}

// Within this distance of the mode the partner point is a Taylor polynomial.
const PARTNER_TAYLOR: f64 = 1e-4;
const TAYLOR_STEP: f64 = 1e-3;
// Below this, plausibility is recomputed in log space.
const LN_FLOOR: f64 = 1e-250;
// Above this, plausibility is recomputed from its complement.
const NEAR_MODE: f64 = 0.5;

fn ln_add_exp(x: f64, y: f64) -> f64 {
    let hi = x.max(y);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((x - hi).exp() + (y - hi).exp()).ln()
}

const LEVEL_CACHE_CAPACITY: usize = 1 << 16;

type LevelCache = Mutex<HashMap<u64, (f64, f64)>>;

/// The contour of the auxiliary variable, `u -> P{f(U) <= f(u)}`, together
/// with its level sets. Shared between location contours that differ only in
/// the observation, so level sets computed for one are reused by all.
#[derive(Debug)]
pub struct LocationKernel {
    law: Distribution,
    mode: f64,
    symmetric: bool,
    // Near the mode the partner is `m - x + bend x^2`.
    bend: f64,
    levels: LevelCache,
}

impl LocationKernel {
    /// Fails for laws that are not continuous and unimodal on the real line.
    pub fn new(law: Distribution) -> Result<Arc<Self>> {
        let law = law.validated()?;
        let symmetric = match law {
            Distribution::Normal { .. } | Distribution::StudentT { .. } => true,
            Distribution::SkewNormal { slant } => slant == 0.0,
            other => {
                return Err(Error::UnsupportedModel(format!(
                    "{other:?} is not a unimodal location law on the real line"
                )))
            }
        };
        let mode = law.mode().expect("location laws have a mode");
        let bend = if symmetric {
            0.0
        } else {
            // Third over second derivative of the log-density at the mode.
            let h = TAYLOR_STEP;
            let (left, right) = (law.score(mode - h), law.score(mode + h));
            let second = (right - left) / (2.0 * h);
            let third = (right - 2.0 * law.score(mode) + left) / (h * h);
            -third / (3.0 * second)
        };
        Ok(Arc::new(Self { law, mode, symmetric, bend, levels: Mutex::new(HashMap::new()) }))
    }

    pub fn law(&self) -> &Distribution {
        &self.law
    }

    pub fn mode(&self) -> f64 {
        self.mode
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// `P{f(U) <= f(u)}`.
    pub fn plausibility(&self, u: f64) -> f64 {
        if u.is_nan() {
            return f64::NAN;
        }
        if u.is_infinite() {
            return 0.0;
        }
        let m = self.mode;
        if self.symmetric {
            return (2.0 * self.law.sf(m + (u - m).abs())).min(1.0);
        }
        if u == m {
            return 1.0;
        }
        let (lo, hi) = self.ordered_pair(u);
        (self.law.cdf(lo) + self.law.sf(hi)).min(1.0)
    }

    /// `ln plausibility(u)`, finite wherever the density is positive.
    pub fn ln_plausibility(&self, u: f64) -> f64 {
        let p = self.plausibility(u);
        if p > NEAR_MODE {
            return (-self.central_mass(u)).ln_1p();
        }
        if p > LN_FLOOR || !u.is_finite() {
            return p.ln();
        }
        let m = self.mode;
        if self.symmetric {
            return std::f64::consts::LN_2 + self.law.ln_sf(m + (u - m).abs());
        }
        let (lo, hi) = self.ordered_pair(u);
        ln_add_exp(self.law.ln_cdf(lo), self.law.ln_sf(hi))
    }

    /// Derivative of [`ln_plausibility`](Self::ln_plausibility) in `u`.
    pub fn log_slope(&self, u: f64) -> f64 {
        let p = self.plausibility(u);
        if p > LN_FLOOR || !u.is_finite() {
            return self.slope(u) / p;
        }
        let m = self.mode;
        let ln_p = self.ln_plausibility(u);
        if self.symmetric {
            let far = m + (u - m).abs();
            return -2.0 * (self.law.ln_pdf(far) - ln_p).exp() * (u - m).signum();
        }
        let dp = self.partner_slope(u);
        let factor = if u > m { dp - 1.0 } else { 1.0 - dp };
        (self.law.ln_pdf(u) - ln_p).exp() * factor
    }

    /// `1 - plausibility(u)`: the mass strictly between `u` and its partner,
    /// integrated directly so it keeps full relative precision near the mode.
    pub fn central_mass(&self, u: f64) -> f64 {
        if !u.is_finite() {
            return if u.is_nan() { f64::NAN } else { 1.0 };
        }
        let (lo, hi) = self.ordered_pair(u);
        if lo == hi {
            return 0.0;
        }
        let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-14, max_panels: 200 };
        integrate(|t| self.law.pdf(t), lo, hi, opts).value.min(1.0)
    }

    fn ordered_pair(&self, u: f64) -> (f64, f64) {
        let p = self.partner(u);
        if u < p {
            (u, p)
        } else {
            (p, u)
        }
    }

    /// Derivative of [`plausibility`](Self::plausibility) in `u`.
    pub fn slope(&self, u: f64) -> f64 {
        let m = self.mode;
        if u == m || !u.is_finite() {
            return 0.0;
        }
        if self.symmetric {
            return -2.0 * self.law.pdf(m + (u - m).abs()) * (u - m).signum();
        }
        let dp = self.partner_slope(u);
        if u > m {
            self.law.pdf(u) * (dp - 1.0)
        } else {
            self.law.pdf(u) * (1.0 - dp)
        }
    }

    /// Derivative of [`partner`](Self::partner).
    pub fn partner_slope(&self, u: f64) -> f64 {
        let x = u - self.mode;
        if self.symmetric {
            return -1.0;
        }
        if x.abs() < PARTNER_TAYLOR {
            return -1.0 + 2.0 * self.bend * x;
        }
        self.law.score(u) / self.law.score(self.partner(u))
    }

    /// The point on the other side of the mode with the same density.
    pub fn partner(&self, u: f64) -> f64 {
        let m = self.mode;
        if self.symmetric {
            return 2.0 * m - u;
        }
        let x = u - m;
        if x.abs() < PARTNER_TAYLOR {
            return m - x + self.bend * x * x;
        }
        let target = self.law.ln_pdf_unnormalized(u);
        let direction = if u > m { -1.0 } else { 1.0 };
        let mut near = m;
        let mut step = (u - m).abs().max(0.5);
        let mut far = m + direction * step;
        while self.law.ln_pdf_unnormalized(far) > target {
            near = far;
            step *= 4.0;
            far = m + direction * step;
        }
        let (lo, hi) = if direction > 0.0 { (near, far) } else { (far, near) };
        find_root(|x| (self.law.ln_pdf_unnormalized(x) - target, self.law.score(x)), lo, hi, Tolerance::TIGHT)
    }

    /// Endpoints `(l, r)` with `l <= mode <= r` and plausibility `alpha` at
    /// both; `{u: plausibility(u) > alpha} = (l, r)`.
    pub fn level_set(&self, alpha: f64) -> (f64, f64) {
        if alpha.is_nan() || alpha >= 1.0 {
            return (self.mode, self.mode);
        }
        if alpha <= 0.0 {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        let key = alpha.to_bits();
        if let Some(&hit) = self.levels.lock().expect("cache poisoned").get(&key) {
            return hit;
        }
        let set = self.solve_level(alpha);
        let mut cache = self.levels.lock().expect("cache poisoned");
        if cache.len() >= LEVEL_CACHE_CAPACITY {
            cache.clear();
        }
        cache.insert(key, set);
        set
    }

    fn solve_level(&self, alpha: f64) -> (f64, f64) {
        let m = self.mode;
        if self.symmetric {
            let r = self.law.upper_point(0.5 * alpha);
            return (2.0 * m - r, r);
        }
        let ln_alpha = alpha.ln();
        let objective = |r: f64| {
            if r <= m {
                return (-ln_alpha, f64::NAN);
            }
            let l = self.partner(r);
            let pl = self.law.cdf(l) + self.law.sf(r);
            let slope = self.law.pdf(r) * (self.partner_slope(r) - 1.0);
            (pl.ln() - ln_alpha, slope / pl)
        };
        let mut near = m;
        let mut step = 1.0;
        let mut far = m + step;
        while objective(far).0 > 0.0 {
            near = far;
            step *= 4.0;
            far = m + step;
        }
        let r = find_root(objective, near, far, Tolerance::TIGHT);
        (self.partner(r), r)
    }

    /// Number of cached level sets.
    pub fn cached_levels(&self) -> usize {
        self.levels.lock().expect("cache poisoned").len()
    }
}

/// Clopper-Pearson-type contour for a binomial count.
#[derive(Debug)]
pub struct BinomialContour {
    n: u64,
    y: u64,
    // Beta(y, n - y + 1): 2 P(Y >= y) on the increasing branch.
    lower_law: Option<Distribution>,
    // Beta(y + 1, n - y): 2 P(Y <= y) on the decreasing branch.
    upper_law: Option<Distribution>,
    plateau: (f64, f64),
    levels: LevelCache,
}

impl BinomialContour {
    fn new(n: u64, y: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("binomial trial count must be positive".into()));
        }
        if y > n {
            return Err(Error::Domain(format!("count {y} exceeds trial count {n}")));
        }
        let (nf, yf) = (n as f64, y as f64);
        let lower_law = (y > 0).then_some(Distribution::Beta { a: yf, b: nf - yf + 1.0 });
        let upper_law = (y < n).then_some(Distribution::Beta { a: yf + 1.0, b: nf - yf });
        let plateau = (
            lower_law.map_or(0.0, |d| d.quantile(0.5).expect("median level")),
            upper_law.map_or(1.0, |d| d.quantile(0.5).expect("median level")),
        );
        Ok(Self { n, y, lower_law, upper_law, plateau, levels: Mutex::new(HashMap::new()) })
    }

    fn plausibility(&self, theta: f64) -> f64 {
        if theta.is_nan() {
            return f64::NAN;
        }
        if !(0.0..=1.0).contains(&theta) {
            return 0.0;
        }
        let rising = self.lower_law.map_or(1.0, |d| 2.0 * d.cdf(theta));
        let falling = self.upper_law.map_or(1.0, |d| 2.0 * d.sf(theta));
        rising.min(falling).min(1.0)
    }

    fn level_set(&self, alpha: f64) -> (f64, f64) {
        let key = alpha.to_bits();
        if let Some(&hit) = self.levels.lock().expect("cache poisoned").get(&key) {
            return hit;
        }
        let lo = self.lower_law.map_or(0.0, |d| d.lower_point(0.5 * alpha));
        let hi = self.upper_law.map_or(1.0, |d| d.upper_point(0.5 * alpha));
        let mut cache = self.levels.lock().expect("cache poisoned");
        if cache.len() >= LEVEL_CACHE_CAPACITY {
            cache.clear();
        }
        cache.insert(key, (lo, hi));
        (lo, hi)
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Location { kernel: Arc<LocationKernel>, y: f64 },
    Binomial(Arc<BinomialContour>),
    Vacuous { lo: f64, hi: f64 },
}

/// The map `theta -> pi_y(theta)` for observed data `y`.
///
/// Contours are immutable and cheap to clone; clones share level-set caches.
#[derive(Debug, Clone)]
pub struct PossibilityContour {
    kind: Kind,
}

/// The level set `{theta: pi_y(theta) > level}`, always a single interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlausibilityRegion {
    pub level: f64,
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl PlausibilityRegion {
    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi || (self.lo == self.hi && self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, theta: f64) -> bool {
        let above = theta > self.lo || (self.lo_closed && theta == self.lo);
        let below = theta < self.hi || (self.hi_closed && theta == self.hi);
        above && below
    }

    pub fn width(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.hi - self.lo
        }
    }
}

impl PossibilityContour {
    /// Location contour `pi_y(theta) = pi(y - theta)` sharing `kernel`.
    pub fn location(kernel: Arc<LocationKernel>, y: f64) -> Result<Self> {
        if !y.is_finite() {
            return Err(Error::Domain(format!("observation {y} is not finite")));
        }
        Ok(Self { kind: Kind::Location { kernel, y } })
    }

    pub fn binomial(n: u64, y: u64) -> Result<Self> {
        Ok(Self { kind: Kind::Binomial(Arc::new(BinomialContour::new(n, y)?)) })
    }

    /// The contour equal to one on `[lo, hi]` and zero elsewhere.
    pub fn vacuous(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidParameter(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Self { kind: Kind::Vacuous { lo, hi } })
    }

    pub fn model(&self) -> ContourModel {
        match &self.kind {
            Kind::Location { kernel, .. } if kernel.is_symmetric() => ContourModel::SymmetricLocation,
            Kind::Location { .. } => ContourModel::SkewNormalLocation,
            Kind::Binomial(_) => ContourModel::Binomial,
            Kind::Vacuous { .. } => ContourModel::Vacuous,
        }
    }

    pub fn kernel(&self) -> Option<&Arc<LocationKernel>> {
        match &self.kind {
            Kind::Location { kernel, .. } => Some(kernel),
            _ => None,
        }
    }

    /// Observed data: `y` for location models, the count for binomial.
    pub fn observation(&self) -> f64 {
        match &self.kind {
            Kind::Location { y, .. } => *y,
            Kind::Binomial(b) => b.y as f64,
            Kind::Vacuous { lo, hi } => 0.5 * (lo + hi),
        }
    }

    /// `(n, y)` for the binomial model.
    pub fn binomial_counts(&self) -> Option<(u64, u64)> {
        match &self.kind {
            Kind::Binomial(b) => Some((b.n, b.y)),
            _ => None,
        }
    }

    /// A representative point of the mode interval.
    pub fn center(&self) -> f64 {
        let (lo, hi) = self.mode_interval();
        0.5 * (lo + hi)
    }

    pub fn plausibility(&self, theta: f64) -> f64 {
        match &self.kind {
            Kind::Location { kernel, y } => kernel.plausibility(y - theta),
            Kind::Binomial(b) => b.plausibility(theta),
            Kind::Vacuous { lo, hi } => {
                if theta.is_nan() {
                    f64::NAN
                } else if (*lo..=*hi).contains(&theta) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// The interval on which the contour equals one.
    pub fn mode_interval(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Location { kernel, y } => (y - kernel.mode(), y - kernel.mode()),
            Kind::Binomial(b) => b.plateau,
            Kind::Vacuous { lo, hi } => (*lo, *hi),
        }
    }

    /// Closed hull of the parameter space.
    pub fn domain(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Location { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Kind::Binomial(_) => (0.0, 1.0),
            Kind::Vacuous { lo, hi } => (*lo, *hi),
        }
    }

    /// Upper probability of the interval `[lo, hi]`: the supremum of the
    /// contour over it.
    pub fn upper_probability(&self, lo: f64, hi: f64) -> f64 {
        if !(lo <= hi) {
            return 0.0;
        }
        let (mlo, mhi) = self.mode_interval();
        if hi >= mlo && lo <= mhi {
            return 1.0;
        }
        let nearest = if hi < mlo { hi } else { lo };
        self.plausibility(nearest)
    }

    /// `C_alpha = {theta: pi(theta) > alpha}`. Levels at or above one give the
    /// empty region, levels at or below zero the whole domain, NaN the empty
    /// region.
    pub fn region(&self, alpha: f64) -> PlausibilityRegion {
        let (dlo, dhi) = self.domain();
        if alpha.is_nan() || alpha >= 1.0 {
            let c = self.center();
            return PlausibilityRegion { level: alpha, lo: c, hi: c, lo_closed: false, hi_closed: false };
        }
        let (lo, hi) = match &self.kind {
            Kind::Location { kernel, y } => {
                let (l, r) = kernel.level_set(alpha);
                (y - r, y - l)
            }
            Kind::Binomial(b) => {
                if alpha <= 0.0 {
                    (0.0, 1.0)
                } else {
                    b.level_set(alpha)
                }
            }
            Kind::Vacuous { lo, hi } => (*lo, *hi),
        };
        // Endpoints inside the domain sit on the level curve and are excluded;
        // domain bounds are included when the contour there exceeds the level.
        let lo_closed = lo.is_finite() && lo == dlo && self.plausibility(lo) > alpha;
        let hi_closed = hi.is_finite() && hi == dhi && self.plausibility(hi) > alpha;
        PlausibilityRegion { level: alpha, lo, hi, lo_closed, hi_closed }
    }
}

/// `P{f(U) <= f(u)}` for a unimodal continuous law.
pub fn auxiliary_contour(law: &Distribution, u: f64) -> Result<f64> {
    Ok(LocationKernel::new(*law)?.plausibility(u))
}

pub fn location_contour(law: &Distribution, y: f64) -> Result<PossibilityContour> {
    PossibilityContour::location(LocationKernel::new(*law)?, y)
}

pub fn binomial_contour(n: u64, y: u64) -> Result<PossibilityContour> {
    PossibilityContour::binomial(n, y)
}

pub fn plausibility_region(contour: &PossibilityContour, alpha: f64) -> PlausibilityRegion {
    contour.region(alpha)
}

/// Outcome of [`check_directional_convexity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub convex: bool,
    /// Most negative normalized second difference seen (0 when none).
    pub worst_second_difference: f64,
    /// Middle grid point of the worst triple.
    pub worst_at: Option<f64>,
    pub triples_checked: usize,
}

const CONVEXITY_SLACK: f64 = 1e-9;

/// Checks convexity of the contour on each monotone branch, using the
/// second divided differences of consecutive grid points strictly outside
/// the mode interval.
pub fn check_directional_convexity(contour: &PossibilityContour, grid: &[f64]) -> Result<ConvexityReport> {
    if grid.len() < 3 {
        return Err(Error::DegenerateGrid(format!("{} points, need at least 3", grid.len())));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::DegenerateGrid("grid must be finite and strictly increasing".into()));
    }
    let (mlo, mhi) = contour.mode_interval();
    let values: Vec<f64> = grid.iter().map(|&x| contour.plausibility(x)).collect();
    let mut report = ConvexityReport { convex: true, worst_second_difference: 0.0, worst_at: None, triples_checked: 0 };
    let branches = [
        grid.iter().position(|&x| x >= mlo).unwrap_or(grid.len()),
        grid.iter().position(|&x| x > mhi).unwrap_or(grid.len()),
    ];
    for (start, end) in [(0, branches[0]), (branches[1], grid.len())] {
        for i in start..end.saturating_sub(2) {
            let (x0, x1, x2) = (grid[i], grid[i + 1], grid[i + 2]);
            let (p0, p1, p2) = (values[i], values[i + 1], values[i + 2]);
            let second = (p0 * (x2 - x1) - p1 * (x2 - x0) + p2 * (x1 - x0)) / ((x2 - x1) * (x1 - x0) * (x2 - x0)) * 2.0;
            report.triples_checked += 1;
            // Scale-free comparison: second differences on the grid spacing.
            let scaled = second * (x2 - x1) * (x1 - x0);
            if scaled < report.worst_second_difference {
                report.worst_second_difference = scaled;
                report.worst_at = Some(x1);
            }
        }
    }
    report.convex = report.worst_second_difference >= -CONVEXITY_SLACK;
    Ok(report)
}

/// Uniform grid of `points` values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| if i + 1 == points { hi } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn t3() -> Distribution {
        Distribution::student_t(3.0).unwrap()
    }

    #[test]
    fn symmetric_auxiliary_contour() {
        let d = t3();
        for &u in &[-4.0, -0.3, 0.0, 1.0, 2.0] {
            let expected = 2.0 * (1.0 - d.cdf(f64::abs(u)));
            assert_relative_eq!(auxiliary_contour(&d, u).unwrap(), expected, epsilon = 1e-14);
        }
        assert_eq!(auxiliary_contour(&d, 0.0).unwrap(), 1.0);
        assert!(auxiliary_contour(&Distribution::beta(2.0, 2.0).unwrap(), 0.1).is_err());
    }

    #[test]
    fn t3_location_example() {
        let c = location_contour(&t3(), 0.0).unwrap();
        assert_relative_eq!(c.plausibility(2.0), 0.139_326, epsilon = 1e-6);
        assert_eq!(c.plausibility(0.0), 1.0);
        assert_eq!(c.model(), ContourModel::SymmetricLocation);
    }

    #[test]
    fn skew_normal_partner_has_equal_density() {
        let k = LocationKernel::new(Distribution::skew_normal(3.0).unwrap()).unwrap();
        for &u in &[-1.5, -0.2, 1.0, 2.5, 6.0] {
            let p = k.partner(u);
            assert!((p - k.mode()) * (u - k.mode()) < 0.0);
            assert_relative_eq!(k.law().ln_pdf(p), k.law().ln_pdf(u), epsilon = 1e-10);
        }
    }

    #[test]
    fn partner_is_continuous_near_the_mode() {
        let k = LocationKernel::new(Distribution::skew_normal(3.0).unwrap()).unwrap();
        let m = k.mode();
        for &x in &[-PARTNER_TAYLOR, PARTNER_TAYLOR] {
            let inside = k.partner(m + x * (1.0 - 1e-12));
            let outside = k.partner(m + x * (1.0 + 1e-12));
            assert!((inside - outside).abs() < 5e-12, "{inside} vs {outside}");
            assert_relative_eq!(
                k.partner_slope(m + x * (1.0 - 1e-12)),
                k.partner_slope(m + x * (1.0 + 1e-12)),
                max_relative = 1e-6
            );
        }
        // Both sides of the cusp have a finite log-slope.
        for &x in &[-1e-9, 1e-9] {
            assert!(k.log_slope(m + x).is_finite());
        }
    }

    #[test]
    fn kernel_slope_matches_finite_differences() {
        for law in [t3(), Distribution::skew_normal(3.0).unwrap()] {
            let k = LocationKernel::new(law).unwrap();
            for &u in &[-2.0, -0.4, 0.9, 3.0] {
                let h = 1e-6;
                let fd = (k.plausibility(u + h) - k.plausibility(u - h)) / (2.0 * h);
                assert_relative_eq!(k.slope(u), fd, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn upper_probability_is_sup_of_contour() {
        let c = location_contour(&t3(), 0.0).unwrap();
        assert_eq!(c.upper_probability(-1.0, 2.0), 1.0);
        assert_relative_eq!(c.upper_probability(2.0, 5.0), c.plausibility(2.0));
        assert_relative_eq!(c.upper_probability(-5.0, -2.0), c.plausibility(-2.0));
    }

    #[test]
    fn skew_normal_level_sets_hit_the_level() {
        let k = LocationKernel::new(Distribution::skew_normal(3.0).unwrap()).unwrap();
        for &alpha in &[0.9, 0.5, 0.05, 1e-4, 1e-10, 1e-20] {
            let (l, r) = k.level_set(alpha);
            assert!(l < k.mode() && k.mode() < r);
            assert_relative_eq!(k.plausibility(r), alpha, max_relative = 1e-9);
            assert_relative_eq!(k.plausibility(l), alpha, max_relative = 1e-8);
        }
        assert!(k.cached_levels() >= 6);
    }

    #[test]
    fn binomial_examples() {
        let c = binomial_contour(18, 7).unwrap();
        assert_eq!(c.plausibility(7.0 / 18.0), 1.0);
        assert_eq!(c.plausibility(0.0), 0.0);
        // Reference value from an independent incomplete-beta implementation.
        assert_relative_eq!(c.plausibility(0.2), 0.102_541_997_621_379_17, max_relative = 1e-12);
        let (lo, hi) = c.mode_interval();
        assert_relative_eq!(lo, 0.363_713_8, epsilon = 1e-6);
        assert_relative_eq!(hi, 0.418_226_3, epsilon = 1e-6);
        assert!(binomial_contour(18, 19).is_err());
    }

    #[test]
    fn binomial_region_endpoints_hit_the_level() {
        let c = binomial_contour(18, 7).unwrap();
        let r = c.region(0.05);
        assert!((c.plausibility(r.lo) - 0.05).abs() <= 1e-9);
        assert!((c.plausibility(r.hi) - 0.05).abs() <= 1e-9);
        assert!(!r.lo_closed && !r.hi_closed);
        let full = c.region(0.0);
        assert_eq!((full.lo, full.hi), (0.0, 1.0));
        assert!(!full.contains(0.0) && full.contains(1e-9));
    }

    #[test]
    fn boundary_counts_keep_the_domain_edge() {
        let c = binomial_contour(10, 0).unwrap();
        assert_eq!(c.plausibility(0.0), 1.0);
        let r = c.region(0.3);
        assert_eq!(r.lo, 0.0);
        assert!(r.lo_closed && r.contains(0.0));
        let c = binomial_contour(10, 10).unwrap();
        assert!(c.region(0.3).hi_closed);
    }

    #[test]
    fn symmetric_region_matches_quantiles() {
        let d = t3();
        let c = location_contour(&d, 1.5).unwrap();
        let r = c.region(0.1);
        let q = d.quantile(0.95).unwrap();
        assert_relative_eq!(r.lo, 1.5 - q, epsilon = 1e-10);
        assert_relative_eq!(r.hi, 1.5 + q, epsilon = 1e-10);
        let full = c.region(0.0);
        assert!(full.lo.is_infinite() && full.hi.is_infinite());
        assert!(c.region(1.0).is_empty());
    }

    #[test]
    fn convexity_examples() {
        let grid = linspace(-10.0, 10.0, 401);
        let c = location_contour(&t3(), 0.0).unwrap();
        assert!(check_directional_convexity(&c, &grid).unwrap().convex);
        let flat = PossibilityContour::vacuous(-20.0, 20.0).unwrap();
        assert!(check_directional_convexity(&flat, &grid).unwrap().convex);
        let b = binomial_contour(18, 7).unwrap();
        assert!(check_directional_convexity(&b, &linspace(0.0, 1.0, 101)).unwrap().convex);
        assert!(matches!(check_directional_convexity(&c, &[0.0, 1.0]), Err(Error::DegenerateGrid(_))));
    }

    #[test]
    fn binomial_left_branch_has_a_concave_sliver() {
        // Between the mode and the median of Beta(7, 12) the rising branch is
        // a scaled distribution function past its density peak.
        let b = binomial_contour(18, 7).unwrap();
        let report = check_directional_convexity(&b, &linspace(0.0, 1.0, 1001)).unwrap();
        assert!(!report.convex);
        let at = report.worst_at.unwrap();
        assert!(at > 6.0 / 17.0 && at < 0.3638, "{at}");
    }
}
