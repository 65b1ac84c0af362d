pub mod criteria;
pub mod density;
pub mod race;
pub mod zeros;

use std::path::Path;

use anyhow::{bail, Result};
use chebyrace::lfunc::load_zeros;
use chebyrace::pipeline::{HeightPolicy, ZeroCache};
use chebyrace::Error;
use serde_json::Value;

use crate::output::{emit, flatten, report, to_json, Format};
use crate::HeightArgs;

/// A failure the library did not raise, with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

pub const INPUT: u8 = 2;
pub const SCALE: u8 = 3;
pub const VERIFICATION: u8 = 4;

pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.code;
        }
        if let Some(lib) = cause.downcast_ref::<Error>() {
            return match lib {
                Error::AccuracyUnreachable { .. }
                | Error::InsufficientHeight { .. }
                | Error::IntervalExceedsRange { .. }
                | Error::NoPrimeInInterval { .. }
                | Error::Numerical(_) => SCALE,
                Error::Unverified { .. } => VERIFICATION,
                _ => INPUT,
            };
        }
    }
    INPUT
}

/// Zero cache from the environment, with any files given on the command
/// line loaded and verified first.
pub fn zero_cache(args: &HeightArgs) -> Result<ZeroCache> {
    let mut sets = Vec::new();
    for path in &args.zero_files {
        let zs = load_zeros(path).map_err(|e| anyhow::Error::new(e).context(format!("reading {}", path.display())))?;
        sets.push(zs);
    }
    Ok(ZeroCache::from_env().with_sets(sets)?)
}

pub fn height_policy(args: &HeightArgs) -> Result<HeightPolicy> {
    if !(args.height > 0.0 && args.max_height.is_finite()) {
        bail!(Failure {
            code: INPUT,
            message: "heights must be positive and finite".into(),
        });
    }
    Ok(HeightPolicy {
        initial: args.height,
        max: args.max_height.max(args.height),
    })
}

/// Renders a report in JSON or as `key = value` text.
pub fn emit_report(command: &str, body: Value, format: Format, out: Option<&Path>) -> Result<()> {
    let v = report(command, body);
    match format {
        Format::Json => emit(&to_json(&v), out),
        Format::Text => emit(&flatten(&v), out),
        Format::Csv => bail!(Failure {
            code: INPUT,
            message: format!("{command} has no CSV output"),
        }),
    }
}

pub fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        bail!(Failure {
            code: INPUT,
            message: format!("{name} must be positive, got {v}"),
        })
    }
}

/// Parses a non-negative integer, also in scientific notation such as `1e8`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if !(x >= 0.0 && x.fract() == 0.0 && x < u64::MAX as f64) {
        return Err(format!("{s} is not a non-negative integer"));
    }
    Ok(x as u64)
}
