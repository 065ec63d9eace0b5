//! Command-line surface for the delayed-market pricing library.

mod commands;
mod config;
mod history_io;
mod output;

use clap::{Parser, ValueEnum};
use config::{ConfigError, Overrides};
use output::OutputFormat;
use sddequant::Measure;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CODES: &str = "\
exit codes
   0  success (validate: every check passed)
   1  validate: at least one check failed
   2  command-line usage error
   3  config file syntax error
   4  invalid input: config value, history file, or model constraint
   5  a delay, the maturity, or t0 is not commensurable with the grid
   6  supplied history does not cover the window the valuation needs
   7  valuation time on the wrong side of its usable range
   8  volatility evaluated to zero; market price of risk undefined
   9  measure-change density left its numeric band
  10  integrated variance degenerate over the remaining window
  11  file I/O error
  12  argument outside a function's mathematical domain
";

/// A diagnostic plus the process exit code it maps to.
pub(crate) struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn io(message: String) -> Self {
        Failure { code: 11, message }
    }

    pub fn input(message: String) -> Self {
        Failure { code: 4, message }
    }

    pub fn usage(message: &str) -> Self {
        Failure { code: 2, message: message.to_string() }
    }
}

impl From<sddequant::Error> for Failure {
    fn from(e: sddequant::Error) -> Self {
        use sddequant::Error::*;
        let code = match e {
            InvalidInput(_) => 4,
            IncommensurableDelays { .. } => 5,
            WindowNotCovered { .. } => 6,
            OutOfWindow { .. } => 7,
            ZeroVolatility { .. } => 8,
            Overflow { .. } => 9,
            DegenerateVariance { .. } => 10,
            DomainError(_) => 12,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Syntax { .. } => Failure { code: 3, message: e.to_string() },
            ConfigError::Invalid { .. } => Failure { code: 4, message: e.to_string() },
            ConfigError::Model(inner) => {
                let mut f = Failure::from(inner);
                f.message = format!("config: {}", f.message);
                f
            }
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CommandName {
    Simulate,
    Price,
    Hedge,
    Validate,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    #[value(alias = "P")]
    P,
    #[value(alias = "Q")]
    Q,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Delay-aware option pricing: simulate paths, price calls in closed form or
/// by Monte Carlo, backtest the hedge, and validate a model setup.
#[derive(Parser)]
#[command(name = "sddequant", version, after_help = "Run --schema for the config grammar and exit codes.")]
struct Cli {
    /// Command to run
    #[arg(long, value_enum)]
    command: Option<CommandName>,

    /// INI-style run configuration file
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override [run] n_paths
    #[arg(long)]
    paths: Option<u64>,

    /// Override [run] seed
    #[arg(long)]
    seed: Option<u64>,

    /// Override [run] t0, the valuation time
    #[arg(long)]
    t0: Option<f64>,

    /// CSV file (columns t,S): observed history for price, initial segment
    /// for simulate and hedge
    #[arg(long)]
    history: Option<PathBuf>,

    /// Measure driving the simulate command
    #[arg(long, value_enum, default_value = "p")]
    measure: MeasureArg,

    /// Write the main artifact here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override [run] format for price and validate artifacts
    #[arg(long, value_enum)]
    format: Option<FormatArg>,

    /// Pair each Monte Carlo path with its sign-flipped twin
    #[arg(long)]
    antithetic: bool,

    /// Print the config grammar and exit-code map, then exit
    #[arg(long)]
    schema: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.schema {
        // A closed pipe (e.g. piping into head) is not an error here.
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), "{}\n{EXIT_CODES}", config::GRAMMAR);
        return ExitCode::SUCCESS;
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let command = cli
        .command
        .ok_or_else(|| Failure::usage("--command is required: simulate, price, hedge, or validate"))?;
    let config_path = cli
        .config
        .ok_or_else(|| Failure::usage("--config PATH is required"))?;
    let text = std::fs::read_to_string(&config_path)
        .map_err(|e| Failure::io(format!("{}: {e}", config_path.display())))?;
    let over = Overrides {
        n_paths: cli.paths,
        seed: cli.seed,
        t0: cli.t0,
        antithetic: cli.antithetic,
        format: cli.format.map(|f| match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }),
    };
    let cfg = config::parse_config(&text, &over)?;
    let history = cli.history.as_deref();
    let out = cli.out.as_deref();
    match command {
        CommandName::Simulate => {
            let measure = match cli.measure {
                MeasureArg::P => Measure::P,
                MeasureArg::Q => Measure::Q,
            };
            commands::simulate(&cfg, measure, history, out)?;
            Ok(0)
        }
        CommandName::Price => {
            commands::price(&cfg, history, out)?;
            Ok(0)
        }
        CommandName::Hedge => {
            commands::hedge(&cfg, history, out)?;
            Ok(0)
        }
        CommandName::Validate => commands::validate(&cfg, out),
    }
}
