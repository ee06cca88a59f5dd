use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "oscphase",
    version,
    about = "Solve y'' + omega^2 q(t, omega) y = 0 with nonoscillatory phase functions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a phase function, fit side conditions and tabulate the solution.
    Solve(SolveArgs),
    /// Run one of the accuracy and timing experiments and print a CSV table.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolverFlags {
    /// Chebyshev grid size.
    #[arg(long, default_value_t = 16)]
    pub k: usize,
    /// Target precision.
    #[arg(long, default_value_t = 1e-12)]
    pub eps: f64,
    /// High-frequency threshold.
    #[arg(long, default_value_t = 10.0)]
    pub thresh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CatalogName {
    Legendre,
    Gegenbauer,
    Bvp,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("coefficient").required(true).args(["q", "catalog"]))]
#[command(group = clap::ArgGroup::new("conditions").required(true).args(["ivp", "bvp"]))]
pub struct SolveArgs {
    /// Coefficient expression in t and omega, e.g. "1 + t^2/2".
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
    /// Built-in coefficient.
    #[arg(long, value_enum)]
    pub catalog: Option<CatalogName>,
    /// Catalog parameter as key=value (n, order).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    /// Initial values: t0 y(t0) y'(t0).
    #[arg(long, num_args = 3, value_names = ["T0", "Y0", "YP0"], allow_hyphen_values = true)]
    pub ivp: Option<Vec<f64>>,
    /// Boundary values: y(a) y(b).
    #[arg(long, num_args = 2, value_names = ["YA", "YB"], allow_hyphen_values = true)]
    pub bvp: Option<Vec<f64>>,
    /// Number of equispaced evaluation points on [a, b].
    #[arg(long, default_value_t = 1000, conflicts_with = "eval_file")]
    pub eval_points: usize,
    /// File with evaluation points separated by whitespace or commas.
    #[arg(long)]
    pub eval_file: Option<PathBuf>,
    /// Write the phase function in OSCPHASE format.
    #[arg(long)]
    pub out_phase: Option<PathBuf>,
    /// Write the evaluation table here instead of standard output.
    #[arg(long)]
    pub out_csv: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentName {
    LegendreEval,
    PhaseAccuracy,
    Gegenbauer,
    Bvp,
    FreqSweep,
}

impl ExperimentName {
    /// Default range of base-2 exponents for n or omega.
    pub fn default_exponents(self) -> (u32, u32) {
        match self {
            ExperimentName::LegendreEval => (6, 14),
            ExperimentName::PhaseAccuracy => (7, 14),
            ExperimentName::Gegenbauer => (6, 12),
            ExperimentName::Bvp => (6, 8),
            ExperimentName::FreqSweep => (8, 14),
        }
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub name: ExperimentName,
    /// Builds averaged per timing.
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    /// Smallest base-2 exponent of n or omega.
    #[arg(long)]
    pub min_exp: Option<u32>,
    /// Largest base-2 exponent of n or omega.
    #[arg(long)]
    pub max_exp: Option<u32>,
    /// Explicit comma-separated n or omega values; overrides the exponents.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<u64>>,
    /// Gegenbauer orders.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-0.499,0.25,1")]
    pub orders: Vec<f64>,
    /// Coefficient for freq-sweep.
    #[arg(long, default_value = "1 + t^2/2", allow_hyphen_values = true)]
    pub q: String,
    /// Domain for freq-sweep.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub b: f64,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverFlags,
}
