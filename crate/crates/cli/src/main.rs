mod args;
mod error;
mod jobs;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use validim_core::decision::default_bracket;
use validim_core::model::{Model, ModelSpec};
use validim_core::oracle::ActionGrid;
use validim_core::validity::ExperimentConfig;

use args::{Cli, Command, ContourArgs, DecideArgs, RiskCurveArgs, ValidityArgs};
use error::{CliError, Result};
use jobs::{ContourJob, DecideJob, Job, RiskCurveJob};
use output::{absolute, write_file, RunManifest};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = cli.command.name();
    match configure_threads(cli.threads).and_then(|()| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match e.report(name) {
                Some(json) => eprintln!("{json}"),
                None => eprintln!("error: {e}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Usage("thread count must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Contour(a) => {
            let out = a.out.clone();
            execute(&Job::Contour(contour_job(a)?), &out)
        }
        Command::RiskCurve(a) => {
            let out = a.out.clone();
            execute(&Job::RiskCurve(risk_curve_job(a)), &out)
        }
        Command::Decide(a) => {
            let out = a.out.clone();
            execute(&Job::Decide(decide_job(a)?), &out)
        }
        Command::Validity(a) => {
            let out = a.out.clone();
            execute(&validity_job(a)?, &out)
        }
        Command::Replay(a) => {
            let manifest = RunManifest::read(&a.manifest)?;
            if manifest.version != validim_core::VERSION {
                eprintln!(
                    "warning: manifest written by version {}, running {}",
                    manifest.version,
                    validim_core::VERSION
                );
            }
            let job = Job::from_config(&manifest.command, manifest.config)?;
            match a.out {
                Some(out) => execute(&job, &out),
                None => {
                    let out =
                        manifest.outputs.first().ok_or_else(|| CliError::Usage("manifest lists no outputs".into()))?;
                    let bytes = job.run()?;
                    write_file(out, &bytes)?;
                    eprintln!("wrote {}", out.display());
                    Ok(())
                }
            }
        }
    }
}

/// Runs `job`, writes its output and the manifest beside it.
fn execute(job: &Job, out: &Path) -> Result<()> {
    let bytes = job.run()?;
    let out = absolute(out)?;
    write_file(&out, &bytes)?;
    if let Job::Decide(_) = job {
        print!("{}", String::from_utf8_lossy(&bytes));
    }
    let manifest = RunManifest {
        command: job.name().to_string(),
        version: validim_core::VERSION.to_string(),
        seed: job.seed(),
        config: job.config(),
        outputs: vec![out.clone()],
    };
    let path = manifest.write()?;
    eprintln!("wrote {} (manifest {})", out.display(), path.display());
    Ok(())
}

fn contour_job(a: ContourArgs) -> Result<ContourJob> {
    let model = a.model.spec();
    let (lo, hi) = match (a.lo, a.hi) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => match model {
            ModelSpec::Binomial { .. } => (0.0, 1.0),
            _ => default_bracket(&Model::new(model.clone())?.contour(a.model.y)?),
        },
    };
    Ok(ContourJob { model, y: a.model.y, lo, hi, points: a.points })
}

fn risk_curve_job(a: RiskCurveArgs) -> RiskCurveJob {
    let model = a.model.spec();
    let actions = match (a.actions, a.lo, a.hi) {
        (Some(actions), _, _) => ActionGrid::Explicit { actions },
        (None, Some(lo), Some(hi)) => ActionGrid::Uniform { lo, hi, points: a.points },
        _ => ActionGrid::DataCentered { points: a.points },
    };
    RiskCurveJob { loss: a.loss.spec(&model), model, y: a.model.y, actions, risk_tol: a.risk_tol }
}

fn decide_job(a: DecideArgs) -> Result<DecideJob> {
    let model = a.model.spec();
    let (lo, hi) = match (a.lo, a.hi) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => default_bracket(&Model::new(model.clone())?.contour(a.model.y)?),
    };
    Ok(DecideJob {
        loss: a.loss.spec(&model),
        model,
        y: a.model.y,
        lo,
        hi,
        tol: a.tol,
        starts: a.starts,
        risk_tol: a.risk_tol,
    })
}

fn validity_job(a: ValidityArgs) -> Result<Job> {
    let mut cfg = load_config(&a.config)?;
    if let Some(m) = a.replications {
        cfg.replications = m;
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(s) = a.sampling {
        cfg.sampling = s.into();
    }
    cfg.validate()?;
    Ok(Job::Validity(cfg))
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    toml::from_str(&text).map_err(|e| CliError::from_toml(PathBuf::from(path), &text, &e))
}
