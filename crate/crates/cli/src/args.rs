use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dicke_pdc::model::ModelParams;
use dicke_pdc::spectral::{Growth, TruncationConfig};
use dicke_pdc::sweep::{AxisMode, GridPreset};

#[derive(Debug, Parser)]
#[command(name = "dicke-pdc", version, about = "Ground-state phase diagram of the Dicke model with parametric down-conversion")]
pub struct Cli {
    /// Log filter (error, warn, info, debug, trace). RUST_LOG takes precedence.
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ground state, observables and entanglement at one parameter point.
    Point(PointArgs),
    /// Phase-diagram sweep over a (coupling, kappa) grid.
    Sweep(SweepArgs),
    /// Closed-form weak- and strong-coupling predictions.
    Analytic(AnalyticArgs),
    /// Regression against the built-in marker panel.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// Number of two-level atoms N.
    #[arg(long)]
    pub n_atoms: usize,
    /// Coupling lambda.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Down-conversion strength kappa.
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: f64,
    /// Atomic transition frequency.
    #[arg(long, default_value_t = 1.0)]
    pub omega_a: f64,
    /// Field frequency.
    #[arg(long, default_value_t = 1.0)]
    pub omega_f: f64,
}

impl ModelArgs {
    pub fn params(&self) -> dicke_pdc::Result<ModelParams> {
        ModelParams::new(self.omega_a, self.omega_f, self.kappa, self.lambda, self.n_atoms)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TruncationArgs {
    /// Photon cutoff of the first diagonalization.
    #[arg(long, default_value_t = 40)]
    pub n_start: usize,
    /// Largest photon cutoff tried before giving up on the residual target.
    #[arg(long, default_value_t = 200)]
    pub n_max_cap: usize,
    /// Target for the residual of the ground state in a basis with two more photons.
    #[arg(long, default_value_t = 1e-10)]
    pub epsilon: f64,
    /// Relative gap below which the two lowest levels count as degenerate.
    #[arg(long, default_value_t = 1e-10)]
    pub epsilon_d: f64,
    /// Grow the cutoff by this many photons per stage instead of doubling it.
    #[arg(long)]
    pub n_step: Option<usize>,
}

impl TruncationArgs {
    pub fn config(&self) -> dicke_pdc::Result<TruncationConfig> {
        let config = TruncationConfig {
            n_start: self.n_start,
            n_cap: self.n_max_cap,
            epsilon: self.epsilon,
            epsilon_d: self.epsilon_d,
            growth: self.n_step.map_or(Growth::Double, Growth::Add),
            ..TruncationConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub truncation: TruncationArgs,
    /// Print the result as JSON.
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    /// Print the result as a CSV header and row.
    #[arg(long)]
    pub csv: bool,
    /// Write the ground-state vector as JSON to this file.
    #[arg(long)]
    pub dump_state: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    /// 21 x 21 points.
    Desk,
    /// 51 x 51 points.
    Full,
}

impl From<PresetArg> for GridPreset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Desk => GridPreset::Desk,
            PresetArg::Full => GridPreset::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    /// Coupling axis values are lambda.
    Lambda,
    /// Coupling axis values are lambda/sqrt(N).
    LambdaOverSqrtN,
}

impl From<AxisArg> for AxisMode {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Lambda => AxisMode::Lambda,
            AxisArg::LambdaOverSqrtN => AxisMode::LambdaOverSqrtN,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Number of two-level atoms N.
    #[arg(long, default_value_t = 2)]
    pub n_atoms: usize,
    /// Built-in grid over [0, 5] x [0, 5] with lambda/sqrt(N) on the coupling axis.
    #[arg(long, value_enum, default_value_t = PresetArg::Desk)]
    pub grid: PresetArg,
    /// Coupling axis as start:stop:step (replaces the preset axis).
    #[arg(long)]
    pub lambda_range: Option<String>,
    /// Kappa axis as start:stop:step (replaces the preset axis).
    #[arg(long)]
    pub kappa_range: Option<String>,
    /// Meaning of the coupling axis values. Defaults to the preset's
    /// lambda/sqrt(N), or to lambda when --lambda-range is given.
    #[arg(long, value_enum)]
    pub axis: Option<AxisArg>,
    #[arg(long, default_value_t = 1.0)]
    pub omega_a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub omega_f: f64,
    #[command(flatten)]
    pub truncation: TruncationArgs,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Keep points already in the output directory and compute the rest.
    #[arg(long)]
    pub resume: bool,
    /// Output directory. The DICKE_PDC_OUT_DIR environment variable overrides it.
    #[arg(long, default_value = "sweep-out")]
    pub out_dir: PathBuf,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Print the table as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub truncation: TruncationArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
    /// Replace the coupling of every column (negative control).
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
}
