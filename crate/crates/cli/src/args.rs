use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "subwarrant", version, about = "Subdiffusive fractional short-rate model: paths, bonds, equity warrants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one asset and short-rate trajectory under the subdiffusive clock.
    Simulate(SimulateArgs),
    /// Price a zero-coupon bond, or sweep maturities with --sweep.
    PriceBond(BondArgs),
    /// Price an equity warrant, or sweep maturities with --sweep.
    PriceWarrant(WarrantArgs),
    /// Maturity sweep for bonds or warrants (same as `price-* --sweep`).
    Sweep(SweepArgs),
    /// Run the cross-oracle validation suite.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Tsv,
}

impl Format {
    pub fn delimiter(self) -> char {
        match self {
            Format::Csv => ',',
            Format::Tsv => '\t',
        }
    }
}

/// Model flags shared by every command. Unset flags fall back to the
/// `--config` file, then to the built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub hurst: Option<f64>,
    #[arg(long = "mu-v", allow_hyphen_values = true)]
    pub mu_v: Option<f64>,
    #[arg(long = "sigma-v")]
    pub sigma_v: Option<f64>,
    #[arg(long = "mu-r", allow_hyphen_values = true)]
    pub mu_r: Option<f64>,
    #[arg(long = "sigma-r")]
    pub sigma_r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub v0: Option<f64>,
    /// Maturity (or simulation horizon).
    #[arg(short = 'T', long = "T", visible_alias = "maturity")]
    pub maturity: Option<f64>,
    /// Valuation time.
    #[arg(long = "t")]
    pub t: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Pricing variant: derivation-consistent | paper-literal for warrants,
    /// derivation | theorem-statement for bonds.
    #[arg(long)]
    pub variant: Option<String>,
    /// `key=value` file with defaults for any of these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TermsArgs {
    #[arg(long = "shares-N", visible_alias = "shares")]
    pub shares: Option<f64>,
    #[arg(long = "warrants-M", visible_alias = "warrants")]
    pub warrants: Option<f64>,
    #[arg(long = "ratio-k", visible_alias = "ratio")]
    pub ratio: Option<f64>,
    #[arg(long = "strike-X", visible_alias = "strike")]
    pub strike: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepOptions {
    /// Sweep maturities instead of pricing one contract.
    #[arg(long)]
    pub sweep: bool,
    /// Number of maturities after the boundary row.
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Largest maturity offset from the valuation time.
    #[arg(long = "T-max", default_value_t = 2.0)]
    pub maturity_max: f64,
    /// Hurst exponents, one curve each.
    #[arg(long = "hurst-values", value_delimiter = ',', default_values_t = vec![0.5, 0.6, 0.7, 0.8, 0.9])]
    pub hurst_values: Vec<f64>,
    /// Also write a matplotlib script that plots the output file.
    #[arg(long = "plot-script")]
    pub plot_script: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Calendar-time steps.
    #[arg(short = 'n', long = "steps")]
    pub steps: Option<usize>,
    /// Drop the Itô correction from the asset exponent.
    #[arg(long)]
    pub pathwise: bool,
    #[arg(long = "plot-script")]
    pub plot_script: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BondArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub sweep: SweepOptions,
}

#[derive(Debug, Clone, Args)]
pub struct WarrantArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub terms: TermsArgs,
    #[command(flatten)]
    pub sweep: SweepOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepTarget {
    Bond,
    Warrant,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    pub target: SweepTarget,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub terms: TermsArgs,
    #[command(flatten)]
    pub sweep: SweepOptions,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Smaller grids and sample sizes.
    #[arg(long)]
    pub quick: bool,
    /// Warrant variant fed to the residual check; `paper-literal` is expected to fail.
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
