//! Fully resolved commands. A job is what a manifest records and what
//! replay re-runs, so running one must depend on nothing but its fields.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use validim_core::choquet::choquet_upper;
use validim_core::contour::linspace;
use validim_core::decision::{make_loss, minimize_expected_loss, minimize_upper_loss, ActionSearchSpec, LossSpec};
use validim_core::model::{Model, ModelSpec};
use validim_core::oracle::ActionGrid;
use validim_core::validity::{simulate_ratio_cdf, ExperimentConfig};

use crate::error::{CliError, Result};
use crate::output::Table;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourJob {
    pub model: ModelSpec,
    pub y: f64,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskCurveJob {
    pub model: ModelSpec,
    pub y: f64,
    pub loss: LossSpec,
    pub actions: ActionGrid,
    pub risk_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecideJob {
    pub model: ModelSpec,
    pub y: f64,
    pub loss: LossSpec,
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
    pub starts: usize,
    pub risk_tol: f64,
}

/// The two minimizers and their risks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub action: f64,
    pub upper_risk: f64,
    pub fiducial_action: f64,
    pub fiducial_risk: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Contour(ContourJob),
    RiskCurve(RiskCurveJob),
    Decide(DecideJob),
    Validity(ExperimentConfig),
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::Contour(_) => "contour",
            Job::RiskCurve(_) => "risk-curve",
            Job::Decide(_) => "decide",
            Job::Validity(_) => "validity",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Job::Validity(cfg) => Some(cfg.seed),
            _ => None,
        }
    }

    pub fn config(&self) -> serde_json::Value {
        let value = match self {
            Job::Contour(j) => serde_json::to_value(j),
            Job::RiskCurve(j) => serde_json::to_value(j),
            Job::Decide(j) => serde_json::to_value(j),
            Job::Validity(j) => serde_json::to_value(j),
        };
        value.expect("job configs serialize")
    }

    pub fn from_config(command: &str, config: serde_json::Value) -> Result<Self> {
        let bad = |e: serde_json::Error| CliError::Usage(format!("manifest config for {command}: {e}"));
        Ok(match command {
            "contour" => Job::Contour(serde_json::from_value(config).map_err(bad)?),
            "risk-curve" => Job::RiskCurve(serde_json::from_value(config).map_err(bad)?),
            "decide" => Job::Decide(serde_json::from_value(config).map_err(bad)?),
            "validity" => Job::Validity(serde_json::from_value(config).map_err(bad)?),
            other => return Err(CliError::Usage(format!("unknown command {other:?} in manifest"))),
        })
    }

    /// Runs the job and returns the bytes of its output file.
    pub fn run(&self) -> Result<Vec<u8>> {
        match self {
            Job::Contour(j) => j.run(),
            Job::RiskCurve(j) => j.run(),
            Job::Decide(j) => {
                let mut text = serde_json::to_string_pretty(&j.run()?).expect("decision serializes");
                text.push('\n');
                Ok(text.into_bytes())
            }
            Job::Validity(cfg) => run_validity(cfg),
        }
    }
}

fn check_range(lo: f64, hi: f64, points: usize) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(CliError::Usage(format!("invalid range [{lo}, {hi}]")));
    }
    if points == 0 {
        return Err(CliError::Usage("the grid needs at least one point".into()));
    }
    Ok(())
}

impl ContourJob {
    fn run(&self) -> Result<Vec<u8>> {
        check_range(self.lo, self.hi, self.points)?;
        let contour = Model::new(self.model.clone())?.contour(self.y)?;
        let mut table = Table::new(["theta", "plausibility"]);
        for theta in linspace(self.lo, self.hi, self.points) {
            table.push(vec![theta, contour.plausibility(theta)]);
        }
        Ok(table.to_bytes())
    }
}

impl RiskCurveJob {
    fn run(&self) -> Result<Vec<u8>> {
        let model = Model::new(self.model.clone())?;
        let contour = model.contour(self.y)?;
        let q = model.fiducial(self.y)?;
        let loss = make_loss(&self.loss, &contour)?;
        let actions = self.actions.resolve(&contour)?;
        let rows: Vec<Vec<f64>> = actions
            .par_iter()
            .map(|&a| {
                let upper = choquet_upper(&contour, &loss, a, self.risk_tol)?.value;
                let fiducial = q.expected_loss(&loss, a, self.risk_tol)?;
                Ok(vec![a, upper, fiducial])
            })
            .collect::<validim_core::Result<_>>()?;
        let mut table = Table::new(["action", "upper_risk", "fiducial_risk"]);
        rows.into_iter().for_each(|r| table.push(r));
        Ok(table.to_bytes())
    }
}

impl DecideJob {
    pub fn run(&self) -> Result<Decision> {
        let model = Model::new(self.model.clone())?;
        let contour = model.contour(self.y)?;
        let q = model.fiducial(self.y)?;
        let loss = make_loss(&self.loss, &contour)?;
        let spec =
            ActionSearchSpec::new(self.lo, self.hi, self.tol)?.with_starts(self.starts).with_risk_tol(self.risk_tol);
        let upper = minimize_upper_loss(&contour, &loss, &spec)?;
        let fiducial = minimize_expected_loss(&q, &loss, &spec)?;
        Ok(Decision {
            action: upper.action,
            upper_risk: upper.value,
            fiducial_action: fiducial.action,
            fiducial_risk: fiducial.value,
        })
    }
}

fn run_validity(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let reports = simulate_ratio_cdf(cfg)?;
    let mut header = vec!["alpha".to_string()];
    for c in &cfg.comparators {
        header.push(format!("cdf_{}", c.name()));
        header.push(format!("se_{}", c.name()));
    }
    let mut table = Table::new(header);
    for (i, &alpha) in cfg.alphas.iter().enumerate() {
        let mut row = vec![alpha];
        for r in &reports {
            row.extend([r.cdf[i], r.se[i]]);
        }
        table.push(row);
    }
    for (c, r) in cfg.comparators.iter().zip(&reports) {
        eprintln!(
            "{}: {} outcomes ({:?}); largest cdf - alpha - 3 se = {:.4} at alpha = {}",
            c.name(),
            r.replications,
            r.mode,
            r.worst_excess,
            r.worst_level
        );
    }
    Ok(table.to_bytes())
}
