//! `mevcost`: exact cost-of-MEV computations, spectral tables, and bound-verification
//! suites with machine-readable reports.
//!
//! Exit codes: 0 when every certificate passes, 1 when any fails, 2 on a
//! configuration error.

mod commands;
mod config;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{Output, SamplingArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Library(#[from] mevcost::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "mevcost", version, about = "Cost of MEV over transaction orderings")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for every random choice; recorded in the report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct Sampling {
    /// Monte Carlo draws for the supremum estimate.
    #[arg(long, default_value_t = 1000)]
    samples: usize,

    /// Best samples used as ascent starting points.
    #[arg(long, default_value_t = 8)]
    ascent_starts: usize,

    /// Proposals per ascent run.
    #[arg(long, default_value_t = 100)]
    ascent_steps: usize,
}

impl Sampling {
    fn args(&self) -> SamplingArgs {
        SamplingArgs {
            samples: self.samples,
            ascent_starts: self.ascent_starts,
            ascent_steps: self.ascent_steps,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact cost of a configured payoff at a list.
    Cost {
        #[arg(long)]
        n: Option<usize>,
        /// Payoff config as inline JSON or a path to a JSON file.
        #[arg(long)]
        payoff: String,
    },
    /// Laplacian spectrum and coherence of a permutation graph.
    Spectrum {
        #[arg(long)]
        n: usize,
        /// complete, transposition or custom:<path>
        #[arg(long, default_value = "transposition")]
        graph: String,
        /// Permit n = 8 (very large dense solve).
        #[arg(long)]
        allow_n8: bool,
    },
    /// Coherence of the transposition and complete graphs for n = 1..=n-max.
    CoherenceTable {
        #[arg(long, default_value_t = 7)]
        n_max: usize,
    },
    /// Every bound certificate on fixtures and random payoffs and signals.
    BoundsSuite {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Adds a corrupted signal that must be reported as a failure.
        #[arg(long, hide = true)]
        inject_failure: bool,
    },
    /// Sampled worst-case cost of frontrunning against its analytic bound.
    Frontrun {
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// Trader volume cap M.
        #[arg(long = "volume-cap", default_value_t = 10.0)]
        volume_cap: f64,
        /// Validator trade.
        #[arg(long, default_value_t = 5.0)]
        delta: f64,
        /// power:<exponent>[:<scale>], or exchange-function JSON (inline or path).
        #[arg(long, default_value = "power:0.5")]
        exchange: String,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Sampled worst-case cost of sandwiching against its analytic bounds.
    Sandwich {
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long = "volume-cap", default_value_t = 10.0)]
        volume_cap: f64,
        #[arg(long, default_value = "power:0.5")]
        exchange: String,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Cost before and after wrapping random payoffs in a uniform shuffle.
    FairDemo {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    let seed = cli.seed;
    match &cli.command {
        Command::Cost { n, payoff } => commands::cost_command(*n, payoff, seed),
        Command::Spectrum { n, graph, allow_n8 } => commands::spectrum_command(*n, graph, *allow_n8, seed),
        Command::CoherenceTable { n_max } => commands::coherence_table_command(*n_max, seed),
        Command::BoundsSuite {
            n,
            trials,
            inject_failure,
        } => commands::bounds_suite_command(*n, *trials, seed, *inject_failure),
        Command::Frontrun {
            n,
            volume_cap,
            delta,
            exchange,
            sampling,
        } => commands::frontrun_command(*n, *volume_cap, *delta, exchange, sampling.args(), seed),
        Command::Sandwich {
            n,
            volume_cap,
            exchange,
            sampling,
        } => commands::sandwich_command(*n, *volume_cap, exchange, sampling.args(), seed),
        Command::FairDemo { n, trials } => commands::fair_demo_command(*n, *trials, seed),
    }
}

fn emit(cli: &Cli, output: &Output) -> Result<(), CliError> {
    let text = match cli.format {
        Format::Json => output.report.to_json(),
        Format::Csv => output.csv.clone(),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let output = match run(&cli) {
        Ok(output) => output,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&cli, &output) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if output.report.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("{}: one or more checks failed", output.report.command);
        ExitCode::from(1)
    }
}
