use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// One fully resolved run; serialized verbatim into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Subcommand)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum RunConfig {
    /// Print the KdV hierarchy flows X_1 … X_n.
    Hierarchy(HierarchyConfig),
    /// Fractional powers L^{m/2} of L = ∂² + u.
    Psdo(PsdoConfig),
    /// Evolve a closed loop under the isometric mKdV flow.
    Flow(FlowConfig),
    /// Periods, σ and ℘ of a hyperelliptic curve.
    Curve(CurveConfig),
    /// Floquet discriminant scan and band edges of Hill's equation.
    Spectrum(SpectrumConfig),
    /// Cross-module identity suites with a pass/fail table.
    Verify(VerifyConfig),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Hierarchy(_) => "hierarchy",
            Self::Psdo(_) => "psdo",
            Self::Flow(_) => "flow",
            Self::Curve(_) => "curve",
            Self::Spectrum(_) => "spectrum",
            Self::Verify(_) => "verify",
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            Self::Hierarchy(c) => c.validate(),
            Self::Psdo(c) => c.validate(),
            Self::Flow(c) => c.validate(),
            Self::Curve(c) => c.validate(),
            Self::Spectrum(c) => c.validate().map(|_| ()),
            Self::Verify(c) => c.validate(),
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct HierarchyConfig {
    /// Highest flow index.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Lowest flow index.
    #[arg(long, default_value_t = 1)]
    pub from: usize,
}

impl HierarchyConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.from == 0 || self.from > self.n {
            return Err(config_err(format!("need 1 ≤ from ≤ n, got from = {}, n = {}", self.from, self.n)));
        }
        if self.n > 8 {
            return Err(config_err("n > 8 is not supported (exact expansion grows quickly)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct PsdoConfig {
    /// Odd numerator m of L^{m/2}.
    #[arg(long, default_value_t = 1)]
    pub power: u32,
    /// Number of negative-order terms kept.
    #[arg(long, default_value_t = 4)]
    pub depth: i32,
}

impl PsdoConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.power % 2 == 0 {
            return Err(config_err(format!("power must be odd, got {}", self.power)));
        }
        if !(0..=12).contains(&self.depth) {
            return Err(config_err(format!("depth must lie in 0..=12, got {}", self.depth)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum LoopKind {
    Circle,
    Random,
    FigureEight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    Rk4,
    IntegratingFactor,
    Etdrk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct FlowConfig {
    #[arg(long = "loop", value_enum, default_value_t = LoopKind::Circle)]
    pub loop_kind: LoopKind,
    /// Grid points along the loop.
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub dt: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = SchemeArg::IntegratingFactor)]
    pub scheme: SchemeArg,
    /// Diagnostics and frames every this many steps (0: first and last only).
    #[arg(long, default_value_t = 0)]
    pub save_every: usize,
    /// Fourier modes of the random loop curvature.
    #[arg(long, default_value_t = 8)]
    pub modes: usize,
    /// Coefficient bound of the random loop curvature.
    #[arg(long, default_value_t = 0.3)]
    pub amplitude: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Also write loop coordinates of every saved frame.
    #[arg(long, default_value_t = false)]
    pub frames: bool,
}

impl FlowConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.n < 16 || !self.n.is_power_of_two() {
            return Err(config_err(format!("n must be a power of two ≥ 16, got {}", self.n)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(config_err("dt must be positive"));
        }
        if self.loop_kind == LoopKind::Random && !(0.0..1.0).contains(&self.amplitude) {
            return Err(config_err("amplitude must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct CurveConfig {
    /// Curve JSON: {"genus": g, "branch_points": [[re, im], …]}.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    /// Real branch points, comma separated (alternative to --curve).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub branch_points: Vec<f64>,
    /// Evaluation point t as re,im pairs: 2g numbers.
    #[arg(long = "point", allow_hyphen_values = true, value_parser = parse_point)]
    pub points: Vec<Vec<f64>>,
    /// Additional random evaluation points in the box |Re|, |Im| ≤ 0.5.
    #[arg(long, default_value_t = 0)]
    pub random_points: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

fn parse_point(text: &str) -> Result<Vec<f64>, String> {
    text.split(',').map(|s| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"))).collect()
}

impl CurveConfig {
    fn validate(&self) -> Result<(), CliError> {
        match (&self.curve, self.branch_points.is_empty()) {
            (Some(_), false) => return Err(config_err("give either --curve or --branch-points, not both")),
            (None, true) => return Err(config_err("a curve is required: --curve FILE or --branch-points")),
            (None, false) if self.branch_points.len() % 2 == 0 || self.branch_points.len() < 3 => {
                return Err(config_err("need an odd number ≥ 3 of branch points"))
            }
            _ => {}
        }
        if self.points.iter().any(|p| p.is_empty() || p.len() % 2 != 0) {
            return Err(config_err("each --point needs re,im pairs"));
        }
        Ok(())
    }
}

/// Where the potential of a spectrum run comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSource {
    Zero,
    /// `−2℘₁₁` on the default real genus-one curve.
    Lame,
    File(PathBuf),
    FromCurve(PathBuf),
}

impl PotentialSource {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        match text {
            "builtin:zero" => Ok(Self::Zero),
            "builtin:lame" => Ok(Self::Lame),
            _ => {
                if let Some(p) = text.strip_prefix("file:") {
                    Ok(Self::File(PathBuf::from(p)))
                } else if let Some(p) = text.strip_prefix("from-curve:") {
                    Ok(Self::FromCurve(PathBuf::from(p)))
                } else {
                    Err(config_err(format!(
                        "unknown potential source {text:?}; use builtin:zero, builtin:lame, file:PATH or from-curve:PATH"
                    )))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct SpectrumConfig {
    /// builtin:zero | builtin:lame | file:PATH | from-curve:PATH
    #[arg(long, default_value = "builtin:zero")]
    pub potential: String,
    /// Period for builtin:zero and file potentials.
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    pub period: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
    pub from: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 10.0)]
    pub to: f64,
    /// Scan grid size.
    #[arg(long, default_value_t = 441)]
    pub points: usize,
    /// Also locate and classify band edges in [from, to].
    #[arg(long, default_value_t = false)]
    pub edges: bool,
    #[arg(long, default_value_t = 64)]
    pub max_edges: usize,
    /// Samples of ℘ for curve-derived potentials.
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
}

impl SpectrumConfig {
    pub fn validate(&self) -> Result<PotentialSource, CliError> {
        let src = PotentialSource::parse(&self.potential)?;
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(config_err("period must be positive"));
        }
        if !(self.from < self.to) || !self.from.is_finite() || !self.to.is_finite() {
            return Err(config_err("need a finite interval with from < to"));
        }
        if self.points < 2 {
            return Err(config_err("scan needs at least 2 points"));
        }
        if self.samples < elastica_core::hillspec::MIN_SAMPLES {
            return Err(config_err(format!("samples must be ≥ {}", elastica_core::hillspec::MIN_SAMPLES)));
        }
        Ok(src)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lax,
    Miura,
    Genus3,
    FiniteGap,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct VerifyConfig {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Seed for sampled points and random loops.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Evaluation points for the genus-three relations.
    #[arg(long, default_value_t = 10)]
    pub points: usize,
    /// Flow time of the Miura suite.
    #[arg(long, default_value_t = 0.05)]
    pub time: f64,
}

impl VerifyConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.points == 0 {
            return Err(config_err("points must be positive"));
        }
        if !(self.time > 0.0 && self.time <= 10.0) {
            return Err(config_err("time must lie in (0, 10]"));
        }
        Ok(())
    }
}
