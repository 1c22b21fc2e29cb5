//! Univariate distributions used by the location and binomial models.

use rand::Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_upper, QuadOptions};
use crate::solve::{find_root, Tolerance};
use crate::special::{inc_beta_pair, ln_beta, ln_gamma, ln_norm_cdf, norm_cdf, norm_mills_inverse, norm_sf, owens_t};

// Below this, tail probabilities are recomputed in log space.
const LOG_TAIL_FLOOR: f64 = 1e-250;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_406;

/// A univariate law: density, distribution function, quantile and sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Distribution {
    Normal {
        mean: f64,
        sd: f64,
    },
    StudentT {
        df: f64,
    },
    /// Azzalini skew-normal with density `2 phi(u) Phi(slant * u)`.
    SkewNormal {
        slant: f64,
    },
    Beta {
        a: f64,
        b: f64,
    },
    Binomial {
        n: u64,
        p: f64,
    },
    Uniform01,
}

impl Distribution {
    pub fn standard_normal() -> Self {
        Distribution::Normal { mean: 0.0, sd: 1.0 }
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        Distribution::Normal { mean, sd }.validated()
    }

    pub fn student_t(df: f64) -> Result<Self> {
        Distribution::StudentT { df }.validated()
    }

    pub fn skew_normal(slant: f64) -> Result<Self> {
        Distribution::SkewNormal { slant }.validated()
    }

    pub fn beta(a: f64, b: f64) -> Result<Self> {
        Distribution::Beta { a, b }.validated()
    }

    pub fn binomial(n: u64, p: f64) -> Result<Self> {
        Distribution::Binomial { n, p }.validated()
    }

    /// Checks the parameter record, returning the distribution unchanged.
    pub fn validated(self) -> Result<Self> {
        let ok = match self {
            Distribution::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
            Distribution::StudentT { df } => df.is_finite() && df > 0.0,
            Distribution::SkewNormal { slant } => slant.is_finite(),
            Distribution::Beta { a, b } => a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0,
            Distribution::Binomial { p, .. } => (0.0..=1.0).contains(&p),
            Distribution::Uniform01 => true,
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::InvalidParameter(format!("{self:?}")))
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Distribution::Binomial { .. })
    }

    /// Closed support `(lower, upper)`.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Distribution::Beta { .. } | Distribution::Uniform01 => (0.0, 1.0),
            Distribution::Binomial { n, .. } => (0.0, n as f64),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Centre of symmetry, when the law is symmetric.
    pub fn symmetry_center(&self) -> Option<f64> {
        match *self {
            Distribution::Normal { mean, .. } => Some(mean),
            Distribution::StudentT { .. } => Some(0.0),
            Distribution::SkewNormal { slant: 0.0 } => Some(0.0),
            Distribution::Beta { a, b } if a == b => Some(0.5),
            Distribution::Uniform01 => Some(0.5),
            Distribution::Binomial { n, p: 0.5 } => Some(n as f64 / 2.0),
            _ => None,
        }
    }

    /// Density (probability mass for the binomial) at `u`.
    pub fn density(&self, u: f64) -> Result<f64> {
        if !u.is_finite() {
            return Err(Error::Domain(format!("density at non-finite point {u}")));
        }
        Ok(self.pdf(u))
    }

    pub(crate) fn pdf(&self, u: f64) -> f64 {
        match *self {
            Distribution::Binomial { n, p } => {
                if u < 0.0 || u > n as f64 || u.fract() != 0.0 {
                    return 0.0;
                }
                binomial_ln_pmf(n, p, u as u64).exp()
            }
            Distribution::Uniform01 => {
                if (0.0..=1.0).contains(&u) {
                    1.0
                } else {
                    0.0
                }
            }
            _ => self.ln_pdf(u).exp(),
        }
    }

    /// Log-density of a continuous law.
    pub fn ln_pdf(&self, u: f64) -> f64 {
        if let Distribution::Binomial { .. } = self {
            return self.pdf(u).ln();
        }
        self.ln_pdf_unnormalized(u) + self.ln_normalizer()
    }

    /// The part of [`ln_pdf`](Self::ln_pdf) that does not depend on `u`.
    pub fn ln_normalizer(&self) -> f64 {
        match *self {
            Distribution::Normal { sd, .. } => -LN_SQRT_2PI - sd.ln(),
            Distribution::StudentT { df } => {
                ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) - 0.5 * (df * std::f64::consts::PI).ln()
            }
            Distribution::SkewNormal { .. } => std::f64::consts::LN_2 - LN_SQRT_2PI,
            Distribution::Beta { a, b } => -ln_beta(a, b),
            Distribution::Uniform01 | Distribution::Binomial { .. } => 0.0,
        }
    }

    /// Log-density up to the additive constant [`ln_normalizer`](Self::ln_normalizer).
    pub fn ln_pdf_unnormalized(&self, u: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, sd } => {
                let z = (u - mean) / sd;
                -0.5 * z * z
            }
            Distribution::StudentT { df } => -0.5 * (df + 1.0) * (u * u / df).ln_1p(),
            Distribution::SkewNormal { slant } => -0.5 * u * u + ln_norm_cdf(slant * u),
            Distribution::Beta { a, b } => {
                if !(0.0..=1.0).contains(&u) {
                    return f64::NEG_INFINITY;
                }
                (a - 1.0) * u.ln() + (b - 1.0) * (-u).ln_1p()
            }
            Distribution::Uniform01 => {
                if (0.0..=1.0).contains(&u) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Distribution::Binomial { .. } => self.pdf(u).ln(),
        }
    }

    /// Derivative of the log-density.
    pub fn score(&self, u: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, sd } => -(u - mean) / (sd * sd),
            Distribution::StudentT { df } => -(df + 1.0) * u / (df + u * u),
            Distribution::SkewNormal { slant } => -u + slant * norm_mills_inverse(slant * u),
            Distribution::Beta { a, b } => (a - 1.0) / u - (b - 1.0) / (1.0 - u),
            Distribution::Uniform01 => 0.0,
            Distribution::Binomial { .. } => f64::NAN,
        }
    }

    /// Distribution function P(U <= u).
    pub fn cdf(&self, u: f64) -> f64 {
        if u.is_nan() {
            return f64::NAN;
        }
        match *self {
            Distribution::Normal { mean, sd } => norm_cdf((u - mean) / sd),
            Distribution::StudentT { df } => {
                if u == f64::INFINITY {
                    return 1.0;
                }
                let tail = t_tail(df, u.abs());
                if u < 0.0 {
                    tail
                } else {
                    1.0 - tail
                }
            }
            Distribution::SkewNormal { slant } => skew_normal_cdf(slant, u),
            Distribution::Beta { a, b } => {
                if u <= 0.0 {
                    0.0
                } else if u >= 1.0 {
                    1.0
                } else {
                    inc_beta_pair(a, b, u, 1.0 - u).0
                }
            }
            Distribution::Binomial { n, p } => binomial_cdf(n, p, u),
            Distribution::Uniform01 => u.clamp(0.0, 1.0),
        }
    }

    /// Survival function P(U > u), computed without cancellation in the
    /// upper tail.
    pub fn sf(&self, u: f64) -> f64 {
        if u.is_nan() {
            return f64::NAN;
        }
        match *self {
            Distribution::Normal { mean, sd } => norm_sf((u - mean) / sd),
            Distribution::StudentT { df } => {
                if u == f64::INFINITY {
                    return 0.0;
                }
                let tail = t_tail(df, u.abs());
                if u > 0.0 {
                    tail
                } else {
                    1.0 - tail
                }
            }
            Distribution::SkewNormal { slant } => skew_normal_cdf(-slant, -u),
            Distribution::Beta { a, b } => {
                if u <= 0.0 {
                    1.0
                } else if u >= 1.0 {
                    0.0
                } else {
                    inc_beta_pair(a, b, u, 1.0 - u).1
                }
            }
            _ => 1.0 - self.cdf(u),
        }
    }

    /// `ln cdf(u)`, finite far into the lower tail of a continuous law.
    pub fn ln_cdf(&self, u: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, sd } => return ln_norm_cdf((u - mean) / sd),
            Distribution::SkewNormal { slant } if u.is_finite() => {
                return if slant >= 0.0 { skew_normal_ln_lower(slant, u) } else { skew_normal_ln_upper(-slant, -u) };
            }
            _ => {}
        }
        let p = self.cdf(u);
        if p > LOG_TAIL_FLOOR || self.is_discrete() || !u.is_finite() {
            return p.ln();
        }
        self.ln_tail(u, -1.0)
    }

    /// `ln sf(u)`, finite far into the upper tail of a continuous law.
    pub fn ln_sf(&self, u: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, sd } => return ln_norm_cdf((mean - u) / sd),
            Distribution::SkewNormal { slant } if u.is_finite() => {
                return if slant >= 0.0 { skew_normal_ln_upper(slant, u) } else { skew_normal_ln_lower(-slant, -u) };
            }
            _ => {}
        }
        let p = self.sf(u);
        if p > LOG_TAIL_FLOOR || self.is_discrete() || !u.is_finite() {
            return p.ln();
        }
        self.ln_tail(u, 1.0)
    }

    // ln of the mass beyond `u` in `direction`, factored through the density at `u`.
    fn ln_tail(&self, u: f64, direction: f64) -> f64 {
        let base = self.ln_pdf(u);
        if base == f64::NEG_INFINITY {
            return base;
        }
        let ratio =
            integrate_upper(|s: f64| (self.ln_pdf(u + direction * s) - base).exp(), 0.0, QuadOptions::relative(1e-12));
        base + ratio.value.ln()
    }

    /// Smallest `u` with `cdf(u) >= p`; for continuous laws the unique root
    /// of `cdf(u) = p`, solved to 1e-12.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile level {p} outside (0, 1)")));
        }
        if let Distribution::Binomial { n, p: prob } = *self {
            return Ok(binomial_quantile(n, prob, p));
        }
        if let Distribution::Uniform01 = self {
            return Ok(p);
        }
        Ok(if p <= 0.5 { self.lower_point(p) } else { self.upper_point(1.0 - p) })
    }

    /// The point `u` with `sf(u) = q`, accurate for tiny `q`.
    pub fn upper_point(&self, q: f64) -> f64 {
        let (lo, hi) = self.bracket(|x| self.sf(x) > q);
        find_root(
            |x| {
                let s = self.sf(x);
                (s.ln() - q.ln(), -self.pdf(x) / s)
            },
            lo,
            hi,
            Tolerance { abs: 1e-13, rel: 1e-13 },
        )
    }

    /// The point `u` with `cdf(u) = p`, accurate for tiny `p`.
    pub fn lower_point(&self, p: f64) -> f64 {
        let (lo, hi) = self.bracket(|x| self.cdf(x) < p);
        find_root(
            |x| {
                let c = self.cdf(x);
                (c.ln() - p.ln(), self.pdf(x) / c)
            },
            lo,
            hi,
            Tolerance { abs: 1e-13, rel: 1e-13 },
        )
    }

    // Bracket `[lo, hi]` with `left_of_root(lo)` and `!left_of_root(hi)`,
    // grown geometrically around the centre.
    fn bracket<P: Fn(f64) -> bool>(&self, left_of_root: P) -> (f64, f64) {
        let (slo, shi) = self.support();
        if slo.is_finite() && shi.is_finite() {
            return (slo, shi);
        }
        let center = self.center();
        let mut step = self.spread();
        let (mut lo, mut hi) = (center - step, center + step);
        while !left_of_root(lo) && lo.is_finite() {
            hi = lo;
            step *= 4.0;
            lo = center - step;
        }
        while left_of_root(hi) && hi.is_finite() {
            lo = hi;
            step *= 4.0;
            hi = center + step;
        }
        (lo, hi)
    }

    fn center(&self) -> f64 {
        match *self {
            Distribution::Normal { mean, .. } => mean,
            _ => self.mode().unwrap_or(0.0),
        }
    }

    fn spread(&self) -> f64 {
        match *self {
            Distribution::Normal { sd, .. } => sd,
            _ => 1.0,
        }
    }

    /// Location of the maximum of the density, when unique.
    pub fn mode(&self) -> Option<f64> {
        match *self {
            Distribution::Normal { mean, .. } => Some(mean),
            Distribution::StudentT { .. } => Some(0.0),
            Distribution::SkewNormal { slant } => Some(skew_normal_mode(slant)),
            Distribution::Beta { a, b } if a > 1.0 && b > 1.0 => Some((a - 1.0) / (a + b - 2.0)),
            Distribution::Binomial { n, p } => Some(((n as f64 + 1.0) * p).floor().min(n as f64)),
            _ => None,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Normal { mean, .. } => mean,
            Distribution::StudentT { df } => {
                if df > 1.0 {
                    0.0
                } else {
                    f64::NAN
                }
            }
            Distribution::SkewNormal { slant } => skew_delta(slant) * (2.0 / std::f64::consts::PI).sqrt(),
            Distribution::Beta { a, b } => a / (a + b),
            Distribution::Binomial { n, p } => n as f64 * p,
            Distribution::Uniform01 => 0.5,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Distribution::Normal { sd, .. } => sd * sd,
            Distribution::StudentT { df } => {
                if df > 2.0 {
                    df / (df - 2.0)
                } else {
                    f64::INFINITY
                }
            }
            Distribution::SkewNormal { slant } => {
                let d = skew_delta(slant);
                1.0 - 2.0 * d * d / std::f64::consts::PI
            }
            Distribution::Beta { a, b } => a * b / ((a + b).powi(2) * (a + b + 1.0)),
            Distribution::Binomial { n, p } => n as f64 * p * (1.0 - p),
            Distribution::Uniform01 => 1.0 / 12.0,
        }
    }

    /// Draws `m` independent values.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, m: usize) -> Result<Vec<f64>> {
        if m == 0 {
            return Err(Error::EmptyRequest("sample count must be at least 1"));
        }
        Ok((0..m).map(|_| self.sample_one(rng)).collect())
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            Distribution::StudentT { df } => {
                rand_distr::StudentT::new(df).expect("validated degrees of freedom").sample(rng)
            }
            Distribution::SkewNormal { slant } => {
                let delta = skew_delta(slant);
                let z1: f64 = StandardNormal.sample(rng);
                let z2: f64 = StandardNormal.sample(rng);
                delta * z1.abs() + (1.0 - delta * delta).sqrt() * z2
            }
            Distribution::Beta { a, b } => rand_distr::Beta::new(a, b).expect("validated shapes").sample(rng),
            Distribution::Binomial { n, p } => {
                rand_distr::Binomial::new(n, p).expect("validated probability").sample(rng) as f64
            }
            Distribution::Uniform01 => rng.random::<f64>(),
        }
    }
}

fn skew_delta(slant: f64) -> f64 {
    slant / (1.0 + slant * slant).sqrt()
}

// P(T > t) for t >= 0.
fn t_tail(df: f64, t: f64) -> f64 {
    let t2 = t * t;
    let x = df / (df + t2);
    let one_minus_x = t2 / (df + t2);
    0.5 * inc_beta_pair(0.5 * df, 0.5, x, one_minus_x).0
}

fn skew_normal_cdf(slant: f64, u: f64) -> f64 {
    if u == f64::NEG_INFINITY {
        return 0.0;
    }
    if u == f64::INFINITY {
        return 1.0;
    }
    if slant <= 0.0 {
        // F_k(u) = 1 - F_{-k}(-u) = Phi(u) + 2 T(u, -k); both terms positive.
        return (norm_cdf(u) + 2.0 * owens_t(u, -slant)).min(1.0);
    }
    let v = norm_cdf(u) - 2.0 * owens_t(u, slant);
    if v >= 0.01 {
        return v.min(1.0);
    }
    // Phi(u) - 2 T(u, k) = [u >= 0] (2 Phi(u) - 1) + 2 (T(u, inf) - T(u, k)), free of
    // cancellation.
    let wedge = skew_normal_ln_wedge(slant, u).exp();
    if u < 0.0 {
        wedge
    } else {
        (2.0 * norm_cdf(u) - 1.0 + wedge).min(1.0)
    }
}

// ln of 2 (T(u, inf) - T(u, k)) = (1/pi) int_{atan k}^{pi/2} exp(-u^2 / (2 cos^2 t)) dt
// for k >= 0, with the peak at the lower limit factored out.
fn skew_normal_ln_wedge(slant: f64, u: f64) -> f64 {
    let hh = 0.5 * u * u;
    let peak = 1.0 + slant * slant;
    let q = integrate(
        |t: f64| {
            let c = t.cos();
            if c <= 0.0 {
                0.0
            } else {
                (-hh * (1.0 / (c * c) - peak)).exp()
            }
        },
        slant.atan(),
        std::f64::consts::FRAC_PI_2,
        QuadOptions { abs_tol: 0.0, rel_tol: 1e-14, max_panels: 400 },
    );
    -hh * peak + q.value.ln() - std::f64::consts::PI.ln()
}

// ln F_k(u) for k >= 0: the thin tail when u < 0.
fn skew_normal_ln_lower(slant: f64, u: f64) -> f64 {
    if slant == 0.0 {
        return ln_norm_cdf(u);
    }
    let v = skew_normal_cdf(slant, u);
    if v >= 0.01 {
        return v.ln();
    }
    skew_normal_ln_wedge(slant, u)
}

// ln sf_k(u) for k >= 0: the heavy tail when u > 0, equal to 2 Phi(-u) - F_k(-u).
fn skew_normal_ln_upper(slant: f64, u: f64) -> f64 {
    if slant == 0.0 {
        return ln_norm_cdf(-u);
    }
    if u <= 0.0 {
        return skew_normal_cdf(-slant, -u).ln();
    }
    let ln_twice_phi = std::f64::consts::LN_2 + ln_norm_cdf(-u);
    ln_twice_phi + (-(skew_normal_ln_wedge(slant, -u) - ln_twice_phi).exp()).ln_1p()
}

fn skew_normal_mode(slant: f64) -> f64 {
    if slant == 0.0 {
        return 0.0;
    }
    let d = Distribution::SkewNormal { slant };
    let span = 0.8 * slant.abs() + 1.0;
    let (lo, hi) = if slant > 0.0 { (0.0, span) } else { (-span, 0.0) };
    find_root(
        |u| {
            let m = norm_mills_inverse(slant * u);
            let ds = -1.0 - slant * slant * m * (slant * u + m);
            (d.score(u), ds)
        },
        lo,
        hi,
        Tolerance { abs: 1e-15, rel: 1e-15 },
    )
}

fn binomial_ln_pmf(n: u64, p: f64, k: u64) -> f64 {
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if p == 1.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let (n, k) = (n as f64, k as f64);
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0) + k * p.ln() + (n - k) * (-p).ln_1p()
}

/// Binomial probability mass P(X = k).
pub fn binomial_pmf(n: u64, p: f64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    binomial_ln_pmf(n, p, k).exp()
}

fn binomial_cdf(n: u64, p: f64, u: f64) -> f64 {
    if u < 0.0 {
        return 0.0;
    }
    if u >= n as f64 {
        return 1.0;
    }
    let k = u.floor();
    if p == 0.0 {
        return 1.0;
    }
    if p == 1.0 {
        return 0.0;
    }
    // P(X <= k) = I_{1-p}(n - k, k + 1).
    inc_beta_pair(n as f64 - k, k + 1.0, 1.0 - p, p).0
}

fn binomial_quantile(n: u64, p: f64, level: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..=n {
        acc += binomial_pmf(n, p, k);
        if acc >= level * (1.0 - 1e-14) {
            return k as f64;
        }
    }
    n as f64
}
