use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chebyrace::empirical::{log_density_estimate, race_holds, race_not_lost, race_scan, trace_moments, MAX_SIEVE};
use clap::Args;
use serde_json::json;

use super::{emit_report, parse_count, Failure, INPUT};
use crate::output::{emit, Format};

#[derive(Debug, Args)]
pub struct RaceArgs {
    #[arg(short = 'q', long)]
    q: u64,

    /// Sieve limit; scientific notation such as 1e8 is accepted.
    #[arg(long, value_parser = parse_limit)]
    xmax: u64,

    /// Ratio of consecutive checkpoints, in (1, 1.01].
    #[arg(long, default_value_t = 1.001)]
    ratio: f64,

    /// Also write the trace as CSV to this file.
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Start of the log-scale averages.
    #[arg(long, default_value_t = 2)]
    x_min: u64,
}

fn parse_limit(s: &str) -> Result<u64, String> {
    match parse_count(s) {
        Ok(n) if n <= MAX_SIEVE => Ok(n),
        _ => Err(format!("{s} is not an integer in [0, {MAX_SIEVE}]")),
    }
}

pub fn run(args: &RaceArgs, format: Format, out: Option<&Path>) -> Result<()> {
    if args.xmax < 3 {
        bail!(Failure {
            code: INPUT,
            message: "--xmax must be at least 3".into(),
        });
    }
    let (trace, crossings) = race_scan(args.q, args.xmax, args.ratio)?;
    if let Some(path) = &args.csv {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        trace.write_csv(BufWriter::new(f))?;
    }
    if format == Format::Csv {
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        return emit(&String::from_utf8(buf)?, out);
    }
    let last = trace.checkpoints.len() - 1;
    let body = json!({
        "q": trace.q,
        "rho": trace.rho,
        "x_max": args.xmax,
        "ratio": args.ratio,
        "checkpoints": trace.checkpoints.len(),
        "crossings": crossings,
        "log_density": {
            "strict": log_density_estimate(&trace, race_holds),
            "non_strict": log_density_estimate(&trace, race_not_lost),
        },
        "moments": trace_moments(&trace, args.x_min),
        "x_min": args.x_min,
        "final": {
            "x": trace.checkpoints[last],
            "non_residues": trace.non_residues[last],
            "residues": trace.residues[last],
            "e": trace.e_values[last],
        },
    });
    emit_report("race", body, format, out)
}
