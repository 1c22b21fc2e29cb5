use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use validim_core::decision::LossSpec;
use validim_core::model::ModelSpec;
use validim_core::validity::SamplingMode;

#[derive(Debug, Parser)]
#[command(name = "validim", version, about = "Valid possibilistic inference and decisions")]
pub struct Cli {
    /// Worker threads for parallel work.
    #[arg(long, global = true, env = "VALIDIM_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the possibility contour of an observation.
    #[command(allow_negative_numbers = true)]
    Contour(ContourArgs),
    /// Tabulate upper and fiducial expected loss over actions.
    #[command(allow_negative_numbers = true)]
    RiskCurve(RiskCurveArgs),
    /// Choose the actions minimizing upper and fiducial expected loss.
    #[command(allow_negative_numbers = true)]
    Decide(DecideArgs),
    /// Run a minimum-ratio validity experiment from a TOML config.
    Validity(ValidityArgs),
    /// Re-run a recorded manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Contour(_) => "contour",
            Command::RiskCurve(_) => "risk-curve",
            Command::Decide(_) => "decide",
            Command::Validity(_) => "validity",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    TLocation,
    NormalLocation,
    SkewNormal,
    Binomial,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Family,
    /// Degrees of freedom of the t law.
    #[arg(long, default_value_t = 3.0)]
    pub df: f64,
    /// Standard deviation of the normal law.
    #[arg(long, default_value_t = 1.0)]
    pub sd: f64,
    /// Slant of the skew-normal law.
    #[arg(long, default_value_t = 3.0)]
    pub slant: f64,
    /// Number of binomial trials.
    #[arg(long, required_if_eq("model", "binomial"))]
    pub n: Option<u64>,
    /// The observation: a real number, or a success count.
    #[arg(long)]
    pub y: f64,
}

impl ModelArgs {
    pub fn spec(&self) -> ModelSpec {
        match self.model {
            Family::TLocation => ModelSpec::TLocation { df: self.df },
            Family::NormalLocation => ModelSpec::NormalLocation { sd: self.sd },
            Family::SkewNormal => ModelSpec::SkewNormal { slant: self.slant },
            Family::Binomial => ModelSpec::Binomial { n: self.n.expect("clap requires --n") },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossKindArg {
    SquaredError,
    WeightedSquaredError,
    ZeroOne,
    GroupInvariant,
    Constant,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    /// Defaults to weighted squared error for binomial models and squared
    /// error otherwise.
    #[arg(long, value_enum)]
    pub loss: Option<LossKindArg>,
    /// Lower end of the zero-one acceptance interval.
    #[arg(long, required_if_eq("loss", "zero-one"))]
    pub loss_lo: Option<f64>,
    /// Upper end of the zero-one acceptance interval.
    #[arg(long, required_if_eq("loss", "zero-one"))]
    pub loss_hi: Option<f64>,
    /// Scale of the group-invariant loss.
    #[arg(long, default_value_t = 1.0)]
    pub loss_c: f64,
    #[arg(long, required_if_eq("loss", "constant"))]
    pub loss_value: Option<f64>,
}

impl LossArgs {
    pub fn spec(&self, model: &ModelSpec) -> LossSpec {
        let kind = self.loss.unwrap_or(match model {
            ModelSpec::Binomial { .. } => LossKindArg::WeightedSquaredError,
            _ => LossKindArg::SquaredError,
        });
        match kind {
            LossKindArg::SquaredError => LossSpec::SquaredError,
            LossKindArg::WeightedSquaredError => LossSpec::WeightedSquaredError,
            LossKindArg::ZeroOne => LossSpec::ZeroOne {
                lo: self.loss_lo.expect("clap requires --loss-lo"),
                hi: self.loss_hi.expect("clap requires --loss-hi"),
            },
            LossKindArg::GroupInvariant => LossSpec::GroupInvariant { c: self.loss_c },
            LossKindArg::Constant => LossSpec::Constant { value: self.loss_value.expect("clap requires --loss-value") },
        }
    }
}

#[derive(Debug, Args)]
pub struct ContourArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Smallest parameter value; defaults to the model's usual range.
    #[arg(long, requires = "hi")]
    pub lo: Option<f64>,
    #[arg(long, requires = "lo")]
    pub hi: Option<f64>,
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    #[arg(short, long, default_value = "contour.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RiskCurveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub loss: LossArgs,
    /// Explicit comma-separated actions.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["lo", "hi"])]
    pub actions: Option<Vec<f64>>,
    /// Smallest action; defaults to a range around the data.
    #[arg(long, requires = "hi")]
    pub lo: Option<f64>,
    #[arg(long, requires = "lo")]
    pub hi: Option<f64>,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub risk_tol: f64,
    #[arg(short, long, default_value = "risk_curve.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecideArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub loss: LossArgs,
    /// Lower end of the action bracket; defaults to a range around the data.
    #[arg(long, requires = "hi")]
    pub lo: Option<f64>,
    #[arg(long, requires = "lo")]
    pub hi: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 5)]
    pub starts: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub risk_tol: f64,
    #[arg(short, long, default_value = "decision.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    Auto,
    MonteCarlo,
    Exact,
}

impl From<SamplingArg> for SamplingMode {
    fn from(s: SamplingArg) -> Self {
        match s {
            SamplingArg::Auto => SamplingMode::Auto,
            SamplingArg::MonteCarlo => SamplingMode::MonteCarlo,
            SamplingArg::Exact => SamplingMode::Exact,
        }
    }
}

#[derive(Debug, Args)]
pub struct ValidityArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config file.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Overrides the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config file.
    #[arg(long, value_enum)]
    pub sampling: Option<SamplingArg>,
    #[arg(short, long, default_value = "validity.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write here instead of the recorded output path.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}
