//! Zero acquisition through an on-disk cache, and densities with automatic
//! choice of the zero height.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{rho, Modulus};
use crate::dist::approx::{
    chebyshev_lower_bound, density_gaussian_model, montgomery_odlyzko_bounds, subgaussian_lower_bound, TailBounds,
};
use crate::dist::model::{
    build_model_nr_r, log_derivatives_for, required_discriminants, RaceModel, TailPart, ZeroMap,
};
use crate::dist::{density_fourier, DensityResult};
use crate::error::{Error, Result};
use crate::general::{build_general_model, required_characters, RaceSpec, COMPLEX_ZERO_LIMIT};
use crate::lfunc::sums::closed_form_from_log_derivative;
use crate::lfunc::zerofile::{character_for_key, load_zeros_for, save_zeros};
use crate::lfunc::{enumerate_real_characters, extend_zeros, CharacterKey, ZeroSet};

/// Environment variable naming the zero cache directory.
pub const CACHE_ENV: &str = "CHEBYRACE_CACHE";

pub const DEFAULT_ACCURACY: f64 = 1e-6;

/// Where zero sets are stored between runs. A disabled cache computes
/// everything afresh.
#[derive(Debug, Clone, Default)]
pub struct ZeroCache {
    dir: Option<PathBuf>,
    /// Sets supplied by the caller, consulted before the directory.
    given: BTreeMap<CharacterKey, ZeroSet>,
}

impl ZeroCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: Some(dir.into()),
            given: BTreeMap::new(),
        }
    }

    pub fn disabled() -> Self {
        Self::default()
    }

    /// Adds zero sets, for instance read from files. They must be verified.
    pub fn with_sets(mut self, sets: impl IntoIterator<Item = ZeroSet>) -> Result<Self> {
        for zs in sets {
            if !zs.verified {
                return Err(Error::Unverified {
                    key: zs.key,
                    reason: zs.diagnostics.join("; "),
                });
            }
            self.given.insert(zs.key, zs);
        }
        Ok(self)
    }

    /// The directory named by [`CACHE_ENV`], or a disabled cache when it is
    /// unset or empty.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::new(d),
            _ => Self::disabled(),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// `dm4_T200.zeros` for `d = -4` at height 200, `c13_5_T50.zeros` for
    /// a complex character.
    pub fn file_name(key: CharacterKey, height: f64) -> String {
        format!("{}_T{height}.zeros", stem(key))
    }

    /// Cached files for `key` with their heights, lowest first.
    fn entries(&self, key: CharacterKey) -> Vec<(f64, PathBuf)> {
        let Some(dir) = &self.dir else {
            return Vec::new();
        };
        let Ok(read) = fs::read_dir(dir) else {
            return Vec::new();
        };
        let prefix = format!("{}_T", stem(key));
        let mut out: Vec<(f64, PathBuf)> = read
            .filter_map(|e| e.ok())
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                let h: f64 = name.strip_prefix(&prefix)?.strip_suffix(".zeros")?.parse().ok()?;
                (h > 0.0).then(|| (h, e.path()))
            })
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    fn load(path: &Path, key: CharacterKey) -> Option<ZeroSet> {
        load_zeros_for(path, key).ok().filter(|zs| zs.verified)
    }

    /// Verified zeros of one character up to `height`. A cached set that
    /// reaches `height` is truncated; a lower one is extended. New sets are
    /// written back.
    pub fn acquire(&self, key: CharacterKey, height: f64) -> Result<ZeroSet> {
        let given = self.given.get(&key);
        if let Some(zs) = given.filter(|zs| zs.height >= height) {
            return Ok(zs.truncated(height));
        }
        let entries = self.entries(key);
        for (h, path) in entries.iter().filter(|(h, _)| *h >= height) {
            if let Some(zs) = Self::load(path, key) {
                return Ok(if *h > height { zs.truncated(height) } else { zs });
            }
        }
        let known = entries
            .iter()
            .rev()
            .filter(|(h, _)| *h < height)
            .find_map(|(_, path)| Self::load(path, key))
            .into_iter()
            .chain(given.cloned())
            .max_by(|a, b| a.height.total_cmp(&b.height));
        let chi = character_for_key(key)?;
        let zs = extend_zeros(&chi, known.as_ref(), height)?;
        if !zs.verified {
            return Err(Error::Unverified {
                key,
                reason: zs.diagnostics.join("; "),
            });
        }
        if let Some(dir) = &self.dir {
            fs::create_dir_all(dir)?;
            save_zeros(&zs, &dir.join(Self::file_name(key, height)))?;
        }
        Ok(zs)
    }

    pub fn acquire_all(&self, keys: &[CharacterKey], height: f64) -> Result<ZeroMap> {
        keys.par_iter().map(|&k| Ok((k, self.acquire(k, height)?))).collect()
    }
}

fn stem(key: CharacterKey) -> String {
    match key {
        CharacterKey::Real(d) => format!("d{}{}", if d < 0 { "m" } else { "p" }, d.unsigned_abs()),
        CharacterKey::Complex { conductor, index } => format!("c{conductor}_{index}"),
    }
}

/// Starting height and the largest height the search may raise it to.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HeightPolicy {
    pub initial: f64,
    pub max: f64,
}

impl Default for HeightPolicy {
    fn default() -> Self {
        Self {
            initial: 200.0,
            max: 1000.0,
        }
    }
}

impl HeightPolicy {
    /// Both ends pinned to one height.
    pub fn fixed(height: f64) -> Self {
        Self {
            initial: height,
            max: height,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.initial > 0.0 && self.initial.is_finite() && self.max >= self.initial && self.max.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "heights must satisfy 0 < initial <= max, got {} and {}",
                self.initial, self.max
            )));
        }
        Ok(())
    }
}

/// Non-residue versus residue model with zeros up to `height`.
pub fn nr_r_model(q: &Modulus, cache: &ZeroCache, height: f64) -> Result<RaceModel> {
    let keys: Vec<CharacterKey> = required_discriminants(q).into_iter().map(CharacterKey::Real).collect();
    let zeros = cache.acquire_all(&keys, height)?;
    build_model_nr_r(q, &zeros)
}

/// Model of a general race with zeros up to `height`.
pub fn general_model(spec: &RaceSpec, cache: &ZeroCache, height: f64) -> Result<RaceModel> {
    let keys: Vec<CharacterKey> = required_characters(spec, COMPLEX_ZERO_LIMIT)?
        .iter()
        .map(|c| c.key)
        .collect();
    let zeros = cache.acquire_all(&keys, height)?;
    build_general_model(spec, &zeros)
}

/// Fourier density of the model `build(h)`, raising `h` within `policy`
/// until the error budget fits `accuracy`.
pub fn density_adaptive<F>(accuracy: f64, policy: HeightPolicy, build: F) -> Result<(DensityResult, RaceModel)>
where
    F: Fn(f64) -> Result<RaceModel>,
{
    policy.validate()?;
    let mut height = policy.initial;
    loop {
        let model = build(height)?;
        match density_fourier(&model, accuracy) {
            Ok(r) => return Ok((r, model)),
            Err(Error::AccuracyUnreachable { required_height, .. }) if height < policy.max => {
                height = required_height.max(1.25 * height).min(policy.max).ceil();
            }
            Err(e) => return Err(e),
        }
    }
}

pub fn density_nr_r(
    q: &Modulus,
    accuracy: f64,
    policy: HeightPolicy,
    cache: &ZeroCache,
) -> Result<(DensityResult, RaceModel)> {
    density_adaptive(accuracy, policy, |h| nr_r_model(q, cache, h))
}

/// Non-residue versus residue model with no located zeros: every term is
/// folded into the Gaussian part, with the variance from `L'/L(1)`.
pub fn closed_form_model(q: &Modulus) -> Result<RaceModel> {
    let log_derivatives = log_derivatives_for(q)?;
    let mut tails = Vec::new();
    for chi in enumerate_real_characters(q) {
        if chi.is_principal {
            continue;
        }
        let lp = log_derivatives[&chi.discriminant];
        let parity = if chi.parity < 0 { 1 } else { 0 };
        tails.push(TailPart {
            keys: vec![CharacterKey::Real(chi.discriminant)],
            coefficient: 1.0,
            conductor: chi.conductor,
            height: 0.0,
            variance: closed_form_from_log_derivative(chi.conductor, parity, lp),
            fourth: f64::INFINITY,
        });
    }
    Ok(RaceModel {
        q: q.q,
        mean: (rho(q) - 1) as f64,
        amplitudes: Vec::new(),
        tails,
        diagnostics: vec!["no zeros located; all terms treated as Gaussian".into()],
    })
}

/// Estimates and rigorous lower bounds for moduli too large for the
/// Fourier method at full accuracy.
#[derive(Debug, Clone, Serialize)]
pub struct ScaleDiagnostics {
    pub q: u64,
    pub mean: f64,
    pub variance: f64,
    /// `Φ(mean/sd)`.
    pub gaussian: f64,
    pub chebyshev_lower: f64,
    pub subgaussian_lower: f64,
    /// Bounds at `V = mean` with the split at 1.
    pub montgomery_odlyzko: TailBounds,
    /// `1 - upper` when the upper tail bound applies.
    pub montgomery_odlyzko_lower: Option<f64>,
    /// Largest of the lower bounds.
    pub lower: f64,
}

pub fn scale_diagnostics(model: &RaceModel) -> Result<ScaleDiagnostics> {
    let variance = model.total_variance();
    if !(variance > 0.0) {
        return Err(Error::InvalidInput("the model has zero variance".into()));
    }
    let chebyshev_lower = chebyshev_lower_bound(model);
    let subgaussian_lower = subgaussian_lower_bound(model);
    let mo = montgomery_odlyzko_bounds(model, model.mean.abs().max(f64::MIN_POSITIVE), 1.0)?;
    let mo_lower = mo.upper.map(|u| 1.0 - u);
    let lower = chebyshev_lower
        .max(subgaussian_lower)
        .max(mo_lower.unwrap_or(0.0));
    Ok(ScaleDiagnostics {
        q: model.q,
        mean: model.mean,
        variance,
        gaussian: density_gaussian_model(model).delta,
        chebyshev_lower,
        subgaussian_lower,
        montgomery_odlyzko: mo,
        montgomery_odlyzko_lower: mo_lower,
        lower,
    })
}
