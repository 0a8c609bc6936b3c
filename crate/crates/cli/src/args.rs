use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::report::Format;

/// Solve and verify two-group games that are zero-sum within each group.
#[derive(Debug, Clone, Parser)]
#[command(name = "twogroup", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Nash equilibrium by damped best response, then the maximin/minimax equalities.
    Solve,
    /// Best-response residuals of the profile given with --profile.
    Verify,
    /// Symmetric and asymmetric maximin fixed points and the Nash check at the fixed point.
    Fixedpoint,
    /// Closed-form equilibrium table of the six-firm oligopoly.
    Oligopoly,
    /// Full oligopoly reproduction report against the closed form.
    Repro,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Fixedpoint => "fixedpoint",
            Command::Oligopoly => "oligopoly",
            Command::Repro => "repro",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Game config file. Without it the oligopoly given by --a/--b/--ca/--cc is used.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Demand intercept.
    #[arg(long, global = true, default_value_t = 10.0, allow_negative_numbers = true)]
    pub a: f64,
    /// Cross-group substitution, in (0, 1).
    #[arg(long, global = true, default_value_t = 0.5, allow_negative_numbers = true)]
    pub b: f64,
    /// Marginal cost of firms A, B, E.
    #[arg(long, global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    pub ca: f64,
    /// Marginal cost of firms C, D, F.
    #[arg(long, global = true, default_value_t = 2.0, allow_negative_numbers = true)]
    pub cc: f64,

    /// Comma-separated strategies for `verify`: player order for config
    /// games, firm order A..F for the oligopoly.
    #[arg(long, global = true, value_name = "LIST", allow_hyphen_values = true)]
    pub profile: Option<String>,

    /// Value tolerance.
    #[arg(long, global = true, value_name = "R")]
    pub tol: Option<f64>,
    /// Argument tolerance.
    #[arg(long = "arg-tol", global = true, value_name = "R")]
    pub arg_tol: Option<f64>,
    #[arg(long = "max-iter", global = true, value_name = "N")]
    pub max_iter: Option<usize>,
    /// Damping factor in (0, 1].
    #[arg(long, global = true, value_name = "R")]
    pub damping: Option<f64>,
    /// Pre-scan grid points for one-dimensional searches.
    #[arg(long, global = true, value_name = "N")]
    pub grid: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Seed for all sampled checks.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Treat a nonzero group payoff sum in a config as an error.
    #[arg(long, global = true)]
    pub strict: bool,
}
