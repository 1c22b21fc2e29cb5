//! Sampling distributions of validity statistics, by seeded Monte Carlo or by
//! exact enumeration of small discrete outcome spaces.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decision::{make_loss, LossSpec};
use crate::error::{Error, Result};
use crate::model::{Model, ModelSpec};
use crate::oracle::{fiducial_min_ratio, min_ratio, ratio_pair, RatioSpec};

/// Exact CDF values are compared with the diagonal up to this slack.
pub const EXACT_SLACK: f64 = 1e-12;
/// Monte Carlo values may exceed the diagonal by this many standard errors.
pub const SE_MULTIPLIER: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparator {
    /// Upper risk from the possibility contour.
    Im,
    /// Expected loss under the fiducial distribution.
    Fiducial,
}

impl Comparator {
    pub fn name(self) -> &'static str {
        match self {
            Comparator::Im => "im",
            Comparator::Fiducial => "fiducial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    /// Exact when the outcome space is small enough, otherwise Monte Carlo.
    #[default]
    Auto,
    MonteCarlo,
    Exact,
}

/// How outcomes are generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub mode: SamplingMode,
}

impl Simulation {
    pub fn monte_carlo(replications: usize, seed: u64) -> Self {
        Self { replications, seed, mode: SamplingMode::MonteCarlo }
    }

    pub fn exact() -> Self {
        Self { replications: 0, seed: 0, mode: SamplingMode::Exact }
    }

    pub fn auto(replications: usize, seed: u64) -> Self {
        Self { replications, seed, mode: SamplingMode::Auto }
    }
}

/// A ratio-CDF experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub theta: f64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    pub loss: LossSpec,
    #[serde(default)]
    pub ratio: RatioSpec,
    #[serde(default = "default_comparators")]
    pub comparators: Vec<Comparator>,
    #[serde(default)]
    pub sampling: SamplingMode,
}

pub const DEFAULT_REPLICATIONS: usize = 10_000;

fn default_replications() -> usize {
    DEFAULT_REPLICATIONS
}

/// `0.01, 0.02, ..., 0.99`.
pub fn default_alphas() -> Vec<f64> {
    (1..100).map(|i| i as f64 / 100.0).collect()
}

fn default_comparators() -> Vec<Comparator> {
    vec![Comparator::Im, Comparator::Fiducial]
}

impl ExperimentConfig {
    pub fn new(model: ModelSpec, theta: f64, loss: LossSpec) -> Self {
        Self {
            model,
            theta,
            replications: DEFAULT_REPLICATIONS,
            seed: 0,
            alphas: default_alphas(),
            loss,
            ratio: RatioSpec::default(),
            comparators: default_comparators(),
            sampling: SamplingMode::Auto,
        }
    }

    pub fn simulation(&self) -> Simulation {
        Simulation { replications: self.replications, seed: self.seed, mode: self.sampling }
    }

    pub fn validate(&self) -> Result<()> {
        check_levels(&self.alphas)?;
        if self.comparators.is_empty() {
            return Err(Error::EmptyRequest("comparator set"));
        }
        if !(self.ratio.risk_tol > 0.0 && self.ratio.risk_tol < 1.0) {
            return Err(Error::InvalidParameter(format!("risk tolerance {}", self.ratio.risk_tol)));
        }
        Ok(())
    }
}

fn check_levels(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::EmptyRequest("level grid"));
    }
    if alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::InvalidParameter("levels must lie in [0, 1]".into()));
    }
    if alphas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("levels must be sorted".into()));
    }
    Ok(())
}

/// Empirical (or exact) distribution function of a statistic on a level grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfReport {
    pub statistic: String,
    /// The mode actually used: Monte Carlo or exact.
    pub mode: SamplingMode,
    /// Replications, or the number of enumerated outcomes.
    pub replications: usize,
    pub levels: Vec<f64>,
    pub cdf: Vec<f64>,
    /// Binomial standard error `sqrt(p (1 - p) / M)`; zero when exact.
    pub se: Vec<f64>,
    /// `cdf <= level + 3 se` everywhere.
    pub pass: bool,
    /// Largest `cdf - level - 3 se`, and where it occurs.
    pub worst_excess: f64,
    pub worst_level: f64,
}

impl CdfReport {
    fn tabulate(statistic: &str, outcomes: &Outcomes<f64>, levels: &[f64]) -> Self {
        let mut pairs: Vec<(f64, f64)> = outcomes.values.iter().copied().zip(outcomes.weights()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cumulative = Vec::with_capacity(pairs.len());
        let mut running = 0.0;
        for p in &pairs {
            running += p.1;
            cumulative.push(running);
        }
        let exact = outcomes.mode == SamplingMode::Exact;
        let m = outcomes.values.len() as f64;
        let mut report = Self {
            statistic: statistic.to_string(),
            mode: outcomes.mode,
            replications: outcomes.values.len(),
            levels: levels.to_vec(),
            cdf: Vec::with_capacity(levels.len()),
            se: Vec::with_capacity(levels.len()),
            pass: true,
            worst_excess: f64::NEG_INFINITY,
            worst_level: f64::NAN,
        };
        for &alpha in levels {
            let count = pairs.partition_point(|p| p.0 <= alpha);
            let p = if count == 0 { 0.0 } else { cumulative[count - 1].clamp(0.0, 1.0) };
            let se = if exact { 0.0 } else { (p * (1.0 - p) / m).sqrt() };
            let excess = p - alpha - SE_MULTIPLIER * se;
            if excess > report.worst_excess {
                report.worst_excess = excess;
                report.worst_level = alpha;
            }
            report.cdf.push(p);
            report.se.push(se);
        }
        report.pass = report.worst_excess <= EXACT_SLACK;
        report
    }

    /// True when the CDF rises above the diagonal by more than `3 se`
    /// somewhere on the grid.
    pub fn exceeds_diagonal(&self) -> bool {
        self.worst_excess > EXACT_SLACK
    }
}

// Statistic values with either equal (Monte Carlo) or probability weights.
struct Outcomes<T> {
    values: Vec<T>,
    probabilities: Option<Vec<f64>>,
    mode: SamplingMode,
}

impl<T> Outcomes<T> {
    fn weights(&self) -> Vec<f64> {
        match &self.probabilities {
            Some(p) => p.clone(),
            None => vec![1.0 / self.values.len() as f64; self.values.len()],
        }
    }
}

// Evaluates `statistic` at each generated observation, in replication order.
fn generate<T, F>(model: &Model, theta: f64, sim: &Simulation, statistic: F) -> Result<Outcomes<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
{
    model.check_parameter(theta)?;
    let enumerable = model.outcomes(theta);
    let mode = match (sim.mode, &enumerable) {
        (SamplingMode::Exact, None) => {
            return Err(Error::UnsupportedModel(format!("{} outcomes cannot be enumerated", model.name())))
        }
        (SamplingMode::Exact, Some(_)) | (SamplingMode::Auto, Some(_)) => SamplingMode::Exact,
        _ => SamplingMode::MonteCarlo,
    };
    if mode == SamplingMode::Exact {
        let outcomes = enumerable.expect("enumerable outcomes");
        let values = outcomes.par_iter().map(|&(y, _)| statistic(y)).collect::<Result<Vec<T>>>()?;
        let probabilities = outcomes.iter().map(|o| o.1).collect();
        return Ok(Outcomes { values, probabilities: Some(probabilities), mode });
    }
    if sim.replications == 0 {
        return Err(Error::EmptyRequest("at least one replication is required"));
    }
    let values = (0..sim.replications)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
            rng.set_stream(i as u64);
            statistic(model.draw(theta, &mut rng))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(Outcomes { values, probabilities: None, mode })
}

/// Distribution functions of the minimum ratio, one report per comparator
/// in configuration order.
pub fn simulate_ratio_cdf(cfg: &ExperimentConfig) -> Result<Vec<CdfReport>> {
    cfg.validate()?;
    let model = Model::new(cfg.model.clone())?;
    model.check_parameter(cfg.theta)?;
    // The loss does not depend on the observation; build it once.
    let reference = match cfg.model {
        ModelSpec::Binomial { .. } => 0.0,
        _ => cfg.theta,
    };
    let loss = make_loss(&cfg.loss, &model.contour(reference)?)?;
    let want_im = cfg.comparators.contains(&Comparator::Im);
    let want_fid = cfg.comparators.contains(&Comparator::Fiducial);
    let theta = cfg.theta;
    let spec: &RatioSpec = &cfg.ratio;
    let outcomes = generate(&model, theta, &cfg.simulation(), |y| {
        let contour = model.contour(y)?;
        match (want_im, want_fid) {
            (true, true) => {
                let q = model.fiducial(y)?;
                let pair = ratio_pair(&contour, &q, &loss, spec, theta)?;
                Ok((pair.upper, pair.fiducial))
            }
            (true, false) => Ok((min_ratio(&contour, &loss, spec, theta)?, f64::NAN)),
            _ => {
                let q = model.fiducial(y)?;
                Ok((f64::NAN, fiducial_min_ratio(&q, &loss, spec, theta, &contour)?))
            }
        }
    })?;
    let split = |pick: fn(&(f64, f64)) -> f64| Outcomes {
        values: outcomes.values.iter().map(pick).collect(),
        probabilities: outcomes.probabilities.clone(),
        mode: outcomes.mode,
    };
    Ok(cfg
        .comparators
        .iter()
        .map(|c| match c {
            Comparator::Im => CdfReport::tabulate("im-ratio", &split(|v| v.0), &cfg.alphas),
            Comparator::Fiducial => CdfReport::tabulate("fiducial-ratio", &split(|v| v.1), &cfg.alphas),
        })
        .collect())
}

/// Estimated probability that the plausibility region covers the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageReport {
    pub alpha: f64,
    pub coverage: f64,
    pub se: f64,
    pub mode: SamplingMode,
    pub replications: usize,
    /// `coverage >= 1 - alpha - 3 se`.
    pub pass: bool,
}

/// Coverage of the region `{pi_Y > alpha}` at parameter `theta`.
pub fn coverage_check(model: &ModelSpec, theta: f64, alpha: f64, sim: &Simulation) -> Result<CoverageReport> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("level {alpha} outside [0, 1]")));
    }
    let model = Model::new(model.clone())?;
    let outcomes =
        generate(&model, theta, sim, |y| Ok(if model.contour(y)?.region(alpha).contains(theta) { 1.0 } else { 0.0 }))?;
    let coverage: f64 = outcomes.values.iter().zip(outcomes.weights()).map(|(v, w)| v * w).sum::<f64>().min(1.0);
    let exact = outcomes.mode == SamplingMode::Exact;
    let m = outcomes.values.len();
    let se = if exact { 0.0 } else { (coverage * (1.0 - coverage) / m as f64).sqrt() };
    Ok(CoverageReport {
        alpha,
        coverage,
        se,
        mode: outcomes.mode,
        replications: m,
        pass: coverage >= 1.0 - alpha - SE_MULTIPLIER * se - EXACT_SLACK,
    })
}

/// Distribution function of `pi_Y(theta)`; validity puts it below the
/// diagonal.
pub fn contour_validity_cdf(model: &ModelSpec, theta: f64, sim: &Simulation, alphas: &[f64]) -> Result<CdfReport> {
    check_levels(alphas)?;
    let model = Model::new(model.clone())?;
    let outcomes = generate(&model, theta, sim, |y| Ok(model.contour(y)?.plausibility(theta)))?;
    Ok(CdfReport::tabulate("plausibility", &outcomes, alphas))
}
