//! Plain-text zero files.
//!
//! ```text
//! # d -4
//! # T 1000
//! # verified true
//! # count 1196
//! 6.0209489046975966e0
//! ...
//! ```
//!
//! Complex characters use `# chi q=13:5` in place of the `d` line.

use std::fs;
use std::path::Path;

use super::character::{CharacterKey, DirichletGroup, PrimitiveCharacter};
use super::zeros::{verify, ZeroSet, ZeroSource};
use crate::error::{Error, Result};

/// Serializes a zero set. Ordinates carry 17 significant digits, so the text
/// round-trips bit-exactly.
pub fn format_zeros(zs: &ZeroSet) -> String {
    let mut out = String::new();
    match zs.key {
        CharacterKey::Real(d) => out.push_str(&format!("# d {d}\n")),
        key => out.push_str(&format!("# chi {key}\n")),
    }
    out.push_str(&format!("# T {:?}\n", zs.height));
    out.push_str(&format!("# verified {}\n", zs.verified));
    if let Some(n) = zs.expected_count {
        out.push_str(&format!("# count {n}\n"));
    }
    for g in &zs.gammas {
        out.push_str(&format!("{g:.16e}\n"));
    }
    out
}

pub fn save_zeros(zs: &ZeroSet, path: &Path) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, format_zeros(zs))?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn parse_key(text: &str, line: usize) -> Result<CharacterKey> {
    let bad = || Error::Parse {
        line,
        msg: format!("bad character label {text:?}"),
    };
    let rest = text.strip_prefix("q=").ok_or_else(bad)?;
    let (q, idx) = rest.split_once(':').ok_or_else(bad)?;
    Ok(CharacterKey::Complex {
        conductor: q.parse().map_err(|_| bad())?,
        index: idx.parse().map_err(|_| bad())?,
    })
}

/// Parses zero-file text. Unsorted input is sorted with a diagnostic;
/// repeated ordinates are an error, since they would be a multiple zero.
pub fn parse_zeros(text: &str) -> Result<ZeroSet> {
    let mut key = None;
    let mut height = None;
    let mut gammas = Vec::new();
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() {
            continue;
        }
        if let Some(c) = s.strip_prefix('#') {
            let mut parts = c.split_whitespace();
            match (parts.next(), parts.next()) {
                (Some("d"), Some(v)) => {
                    let d: i64 = v.parse().map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad discriminant {v:?}"),
                    })?;
                    key = Some(CharacterKey::Real(d));
                }
                (Some("chi"), Some(v)) => key = Some(parse_key(v, line)?),
                (Some("T"), Some(v)) => {
                    let t: f64 = v.parse().map_err(|_| Error::Parse {
                        line,
                        msg: format!("bad height {v:?}"),
                    })?;
                    height = Some(t);
                }
                _ => {}
            }
            continue;
        }
        let g: f64 = s.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("not a number: {s:?}"),
        })?;
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Parse {
                line,
                msg: format!("ordinate must be positive, got {g}"),
            });
        }
        gammas.push(g);
        lines.push(line);
    }
    let key = key.ok_or(Error::Parse {
        line: 0,
        msg: "missing '# d' header".into(),
    })?;
    let mut diagnostics = Vec::new();
    let mut order: Vec<usize> = (0..gammas.len()).collect();
    if gammas.windows(2).any(|w| w[0] > w[1]) {
        diagnostics.push("input was not sorted; sorted on load".to_string());
        order.sort_by(|&a, &b| gammas[a].total_cmp(&gammas[b]));
    }
    let sorted: Vec<f64> = order.iter().map(|&i| gammas[i]).collect();
    for (k, w) in sorted.windows(2).enumerate() {
        if w[0] == w[1] {
            return Err(Error::DuplicateZero {
                gamma: w[1],
                line: lines[order[k + 1]],
            });
        }
    }
    let max = sorted.last().copied().unwrap_or(0.0);
    let height = height.unwrap_or(max);
    if max > height {
        return Err(Error::Parse {
            line: 0,
            msg: format!("ordinate {max} above the declared height {height}"),
        });
    }
    Ok(ZeroSet {
        key,
        height,
        gammas: sorted,
        source: ZeroSource::File,
        verified: false,
        expected_count: None,
        diagnostics,
    })
}

/// The primitive character a key names.
pub fn character_for_key(key: CharacterKey) -> Result<PrimitiveCharacter> {
    match key {
        CharacterKey::Real(d) => PrimitiveCharacter::from_discriminant(d),
        CharacterKey::Complex { conductor, index } => {
            let g = DirichletGroup::new(conductor)?;
            if index >= g.order() {
                return Err(Error::InvalidInput(format!("no character {key}")));
            }
            let chi = g.character(index);
            if chi.conductor != conductor {
                return Err(Error::InvalidInput(format!("{key} is not primitive")));
            }
            chi.to_primitive()
        }
    }
}

/// Reads a zero file and checks its count against the argument principle.
pub fn load_zeros(path: &Path) -> Result<ZeroSet> {
    let text = fs::read_to_string(path)?;
    let mut zs = parse_zeros(&text)?;
    let chi = character_for_key(zs.key)?;
    verify(&chi, &mut zs)?;
    Ok(zs)
}

/// Like [`load_zeros`], also rejecting a file whose header names a different
/// character.
pub fn load_zeros_for(path: &Path, expected: CharacterKey) -> Result<ZeroSet> {
    let text = fs::read_to_string(path)?;
    let mut zs = parse_zeros(&text)?;
    if zs.key != expected {
        return Err(Error::Parse {
            line: 1,
            msg: format!("header names {} but {} was expected", zs.key, expected),
        });
    }
    let chi = character_for_key(zs.key)?;
    verify(&chi, &mut zs)?;
    Ok(zs)
}
