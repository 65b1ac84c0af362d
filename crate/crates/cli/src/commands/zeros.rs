use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chebyrace::arith::Modulus;
use chebyrace::dist::model::required_discriminants;
use chebyrace::lfunc::zerofile::format_zeros;
use chebyrace::lfunc::{find_zeros, CharacterKey, PrimitiveCharacter, ZeroSet};
use chebyrace::pipeline::ZeroCache;
use clap::Args;
use rayon::prelude::*;
use serde_json::json;

use super::{emit_report, positive, Failure, VERIFICATION};
use crate::output::Format;

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("target").required(true).args(["q", "d"])))]
pub struct ZerosArgs {
    /// Every primitive character behind a real character mod q.
    #[arg(short = 'q', long)]
    q: Option<u64>,

    /// One fundamental discriminant (1 for zeta).
    #[arg(short = 'd', long, allow_hyphen_values = true)]
    d: Option<i64>,

    #[arg(short = 'T', long)]
    height: f64,

    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

/// Fails early, before any zero is computed, if `dir` cannot take files.
fn check_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let probe = dir.join(".chebyrace-write-probe");
    fs::write(&probe, b"").with_context(|| format!("{} is not writable", dir.display()))?;
    fs::remove_file(&probe)?;
    Ok(())
}

pub fn run(args: &ZerosArgs, format: Format, out: Option<&Path>) -> Result<()> {
    let height = positive("height", args.height)?;
    let discriminants = match (args.q, args.d) {
        (Some(q), _) => required_discriminants(&Modulus::new(q)?),
        (_, Some(d)) => vec![d],
        _ => unreachable!("clap requires one target"),
    };
    let characters = discriminants
        .iter()
        .map(|&d| PrimitiveCharacter::from_discriminant(d))
        .collect::<chebyrace::Result<Vec<_>>>()?;
    check_writable(&args.out)?;

    let sets: Vec<ZeroSet> = characters
        .par_iter()
        .map(|chi| find_zeros(chi, height))
        .collect::<chebyrace::Result<_>>()?;

    // write everything to temporaries first so a failure leaves no files
    let mut staged = Vec::new();
    for zs in &sets {
        let path = args.out.join(ZeroCache::file_name(zs.key, height));
        let tmp = path.with_extension("tmp");
        if let Err(e) = fs::write(&tmp, format_zeros(zs)) {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            let _ = fs::remove_file(&tmp);
            return Err(e).with_context(|| format!("writing {}", tmp.display()));
        }
        staged.push((tmp, path));
    }
    for (tmp, path) in &staged {
        fs::rename(tmp, path)?;
    }

    let files: Vec<_> = sets
        .iter()
        .zip(&staged)
        .map(|(zs, (_, path))| {
            let d = match zs.key {
                CharacterKey::Real(d) => d,
                CharacterKey::Complex { .. } => unreachable!("only real characters are written"),
            };
            json!({
                "discriminant": d,
                "path": path.display().to_string(),
                "count": zs.len(),
                "expected_count": zs.expected_count,
                "verified": zs.verified,
                "diagnostics": zs.diagnostics,
            })
        })
        .collect();
    emit_report("zeros", json!({ "height": height, "files": files }), format, out)?;

    let failed: Vec<String> = sets
        .iter()
        .filter(|zs| !zs.verified)
        .map(|zs| format!("{}: {}", zs.key, zs.diagnostics.join("; ")))
        .collect();
    if !failed.is_empty() {
        bail!(Failure {
            code: VERIFICATION,
            message: format!("unverified zero sets: {}", failed.join(" | ")),
        });
    }
    Ok(())
}
