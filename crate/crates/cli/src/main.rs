//! `chebyrace` command-line front end.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Debug, Parser)]
#[command(name = "chebyrace", version, about = "Logarithmic densities of prime number races")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Locate and verify zeros, one file per primitive character.
    Zeros(commands::zeros::ZerosArgs),
    /// Density of the non-residue versus residue race.
    Density(commands::density::DensityArgs),
    /// Densities for products of the first k odd primes.
    Table(commands::density::TableArgs),
    /// Sieve the race and estimate its log density.
    Race(commands::race::RaceArgs),
    /// Bias criteria for a weighted race.
    Criteria(commands::criteria::CriteriaArgs),
}

/// Zero sources and heights shared by the density commands.
#[derive(Debug, Clone, Args)]
pub struct HeightArgs {
    /// Initial zero height.
    #[arg(long = "height", short = 'T', default_value_t = 200.0)]
    height: f64,

    /// Largest height the automatic search may use.
    #[arg(long, default_value_t = 1000.0)]
    max_height: f64,

    /// Zero files to use before computing (checked against the argument
    /// principle).
    #[arg(long = "zeros", value_parser = existing_file)]
    zero_files: Vec<PathBuf>,
}

fn existing_file(s: &str) -> Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("no such file: {s}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let out = cli.output.as_deref();
    match &cli.command {
        Command::Zeros(a) => commands::zeros::run(a, cli.format, out),
        Command::Density(a) => commands::density::run(a, cli.format, out),
        Command::Table(a) => commands::density::run_table(a, cli.format, out),
        Command::Race(a) => commands::race::run(a, cli.format, out),
        Command::Criteria(a) => commands::criteria::run(a, cli.format, out),
    }
}
