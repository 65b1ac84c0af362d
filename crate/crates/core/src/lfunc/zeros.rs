//! Zeros on the critical line: sign changes of the Hardy function, Brent
//! refinement, and an exact count from the argument principle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::afe::{self, hardy_z, theta};
use super::character::{CharacterKey, PrimitiveCharacter, RealCharacter};
use super::euler_maclaurin;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroSource {
    Computed,
    File,
}

/// Positive ordinates of zeros of one primitive L-function up to a height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    pub key: CharacterKey,
    pub height: f64,
    pub gammas: Vec<f64>,
    pub source: ZeroSource,
    pub verified: bool,
    /// Argument-principle count at `height`, when it was computed.
    pub expected_count: Option<u64>,
    pub diagnostics: Vec<String>,
}

impl ZeroSet {
    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    /// The zeros up to a lower height.
    pub fn truncated(&self, height: f64) -> Self {
        let mut out = self.clone();
        out.gammas.retain(|&g| g <= height);
        out.height = height.min(self.height);
        out.expected_count = None;
        out
    }

    /// Ordinates closer together than `tol`, reported as possible violations
    /// of simplicity.
    pub fn close_pairs(&self, tol: f64) -> Vec<(f64, f64)> {
        self.gammas
            .windows(2)
            .filter(|w| w[1] - w[0] < tol)
            .map(|w| (w[0], w[1]))
            .collect()
    }
}

/// Result of the argument-principle count.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ZeroCount {
    pub value: f64,
    pub rounded: u64,
}

const SIGMA_RIGHT: f64 = 3.0;

fn wrap_diff(new: Complex64, old: Complex64) -> f64 {
    (new * old.conj()).arg()
}

/// `Δ arg L` along the horizontal segment from `3 + iT` to `1/2 + iT`,
/// starting from the principal argument at the right end.
fn horizontal_argument(chi: &PrimitiveCharacter, t: f64) -> Result<f64> {
    let mut sigma = SIGMA_RIGHT;
    let mut prev = afe::l_value(chi, Complex64::new(sigma, t))?;
    let mut total = prev.arg();
    let mut h = 0.25;
    while sigma > 0.5 {
        let next_sigma = (sigma - h).max(0.5);
        let val = afe::l_value(chi, Complex64::new(next_sigma, t))?;
        let d = wrap_diff(val, prev);
        let ratio = val.norm() / prev.norm();
        if d.abs() > PI / 8.0 || !(0.2..5.0).contains(&ratio) {
            h *= 0.5;
            if h < 1e-9 {
                return Err(Error::Numerical(format!(
                    "argument tracking stalled at sigma={sigma}, t={t} (zero near the contour)"
                )));
            }
            continue;
        }
        total += d;
        sigma = next_sigma;
        prev = val;
        h = (h * 1.5).min(0.25);
    }
    Ok(total)
}

/// `Δ arg L` along the real segment from `1/2` to `3`.
fn real_segment_argument(chi: &PrimitiveCharacter) -> Result<f64> {
    if chi.is_real {
        let at_half = euler_maclaurin::l_value(chi, Complex64::new(0.5, 0.0))?;
        if at_half.re <= 0.0 {
            return Err(Error::Numerical(format!(
                "L(1/2) = {} <= 0 for {}: a real zero in (1/2, 1) is present",
                at_half.re, chi.key
            )));
        }
        return Ok(0.0);
    }
    let mut sigma = 0.5;
    let mut prev = euler_maclaurin::l_value(chi, Complex64::new(sigma, 0.0))?;
    let mut total = 0.0;
    let mut h = 0.1;
    while sigma < SIGMA_RIGHT {
        let next_sigma = (sigma + h).min(SIGMA_RIGHT);
        let val = euler_maclaurin::l_value(chi, Complex64::new(next_sigma, 0.0))?;
        let d = wrap_diff(val, prev);
        if d.abs() > PI / 8.0 {
            h *= 0.5;
            if h < 1e-9 {
                return Err(Error::Numerical("argument tracking stalled on the real axis".into()));
            }
            continue;
        }
        total += d;
        sigma = next_sigma;
        prev = val;
        h = (h * 1.5).min(0.1);
    }
    // continue from the real axis up the line Re s = 3 with the principal
    // branch, which is valid there since |L - 1| < 1
    Ok(total - prev.arg())
}

/// Number of zeros with `0 < γ <= T` from the argument principle on the
/// right half of the critical strip.
pub fn zero_count(chi: &PrimitiveCharacter, height: f64) -> Result<ZeroCount> {
    if height <= 0.0 {
        return Ok(ZeroCount {
            value: 0.0,
            rounded: 0,
        });
    }
    let mut arg = horizontal_argument(chi, height)?;
    let mut value;
    if chi.is_zeta() {
        value = (theta(chi, height) + arg) / PI + 1.0;
    } else {
        arg += real_segment_argument(chi)?;
        value = (theta(chi, height) + arg) / PI;
    }
    if value.abs() < 1e-9 {
        value = 0.0;
    }
    let rounded = value.round();
    if (value - rounded).abs() > 0.1 || rounded < 0.0 {
        return Err(Error::Numerical(format!(
            "argument-principle count {value} is not near an integer for {} at T={height}",
            chi.key
        )));
    }
    Ok(ZeroCount {
        value,
        rounded: rounded as u64,
    })
}

/// Smooth zero-counting main term `ϑ(T)/π` (+1 for zeta).
pub fn smooth_count(chi: &PrimitiveCharacter, height: f64) -> f64 {
    theta(chi, height) / PI + if chi.is_zeta() { 1.0 } else { 0.0 }
}

fn mean_spacing(q: u64, t: f64) -> f64 {
    let x = (q as f64 * t.max(1.0) / (2.0 * PI)).max(4.0);
    (2.0 * PI / x.ln()).min(2.0)
}

/// Brent's method on a bracketing interval.
fn brent<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, tol: f64) -> Result<f64> {
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(Error::Numerical("root refinement did not converge".into()))
}

fn roots_on_grid<F: Fn(f64) -> Result<f64>>(z: &F, samples: &[(f64, f64)], out: &mut Vec<f64>) -> Result<()> {
    for w in samples.windows(2) {
        let ((t0, z0), (t1, z1)) = (w[0], w[1]);
        if z0 != 0.0 && z1 != 0.0 && z0.signum() != z1.signum() {
            let tol = 1e-11 * t1.max(1.0);
            out.push(brent(z, t0, t1, z0, z1, tol)?);
        } else if z1 == 0.0 {
            out.push(t1);
        }
    }
    Ok(())
}

/// Sign changes of `Z` on `[lo, hi]` with step `spacing * scale`. Where `|Z|`
/// dips without changing sign the grid is refined, since a close pair of
/// zeros may hide there.
fn scan_interval(chi: &PrimitiveCharacter, lo: f64, hi: f64, scale: f64) -> Result<Vec<f64>> {
    let z = |t: f64| hardy_z(chi, t);
    let mut samples = vec![(lo, z(lo)?)];
    let mut t = lo;
    while t < hi {
        let step = (mean_spacing(chi.conductor, t) * scale).max(1e-6);
        t = (t + step).min(hi);
        samples.push((t, z(t)?));
    }
    let mut out = Vec::new();
    roots_on_grid(&z, &samples, &mut out)?;
    for w in samples.windows(3) {
        let (a, b, c) = (w[0].1, w[1].1, w[2].1);
        let same = a.signum() == b.signum() && b.signum() == c.signum();
        if same && b.abs() < a.abs() && b.abs() < c.abs() {
            let (t0, t2) = (w[0].0, w[2].0);
            let mut fine = Vec::with_capacity(17);
            for k in 0..=16 {
                let tk = t0 + (t2 - t0) * k as f64 / 16.0;
                let zk = if k == 0 { a } else if k == 16 { c } else { z(tk)? };
                fine.push((tk, zk));
            }
            roots_on_grid(&z, &fine, &mut out)?;
        }
    }
    Ok(out)
}

fn scan(chi: &PrimitiveCharacter, lo: f64, hi: f64, scale: f64) -> Result<Vec<f64>> {
    let chunk = (hi - lo) / 8.0;
    let edges: Vec<(f64, f64)> = if chunk > 5.0 {
        (0..8)
            .map(|i| (lo + i as f64 * chunk, if i == 7 { hi } else { lo + (i + 1) as f64 * chunk }))
            .collect()
    } else {
        vec![(lo, hi)]
    };
    let parts: Vec<Result<Vec<f64>>> = edges
        .par_iter()
        .map(|&(a, b)| scan_interval(chi, a, b, scale))
        .collect();
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    out.retain(|&g| g > 0.0);
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

const SCALES: [f64; 3] = [0.25, 0.0625, 0.015625];

/// Locates all zeros with `0 < γ <= height` and verifies the count.
pub fn find_zeros(chi: &PrimitiveCharacter, height: f64) -> Result<ZeroSet> {
    extend_zeros(chi, None, height)
}

/// Like [`find_zeros`], reusing the zeros of `known` below its height.
pub fn extend_zeros(chi: &PrimitiveCharacter, known: Option<&ZeroSet>, height: f64) -> Result<ZeroSet> {
    if !(height > 0.0 && height.is_finite()) {
        return Err(Error::InvalidInput(format!("height must be positive, got {height}")));
    }
    let (start, base) = match known {
        Some(zs) if zs.key == chi.key && zs.verified && zs.height <= height => {
            (zs.height, zs.gammas.clone())
        }
        _ => (0.0, Vec::new()),
    };
    let count = zero_count(chi, height)?;
    let mut diagnostics = Vec::new();
    let mut gammas = Vec::new();
    let mut verified = false;
    for &scale in &SCALES {
        let mut found = base.clone();
        found.extend(scan(chi, start, height, scale)?);
        let n = found.len() as u64;
        gammas = found;
        if n == count.rounded {
            verified = true;
            break;
        }
        diagnostics.push(format!(
            "step scale {scale}: located {n}, argument principle gives {}",
            count.rounded
        ));
    }
    let mut zs = ZeroSet {
        key: chi.key,
        height,
        gammas,
        source: ZeroSource::Computed,
        verified,
        expected_count: Some(count.rounded),
        diagnostics,
    };
    for (a, b) in zs.close_pairs(1e-6) {
        zs.diagnostics.push(format!("near-degenerate pair {a} {b}"));
    }
    Ok(zs)
}

/// Zero search entry point for real characters; imprimitive characters are
/// rejected (their zeros are those of the inducing character).
pub fn find_zeros_real(chi: &RealCharacter, height: f64) -> Result<ZeroSet> {
    if chi.is_principal {
        return Err(Error::InvalidInput("the principal character has no zeros in any model".into()));
    }
    if !chi.is_primitive() {
        return Err(Error::NotPrimitive(chi.discriminant));
    }
    find_zeros(&PrimitiveCharacter::from_real(chi)?, height)
}

/// Checks a set against the argument-principle count at its height.
pub fn verify(chi: &PrimitiveCharacter, zs: &mut ZeroSet) -> Result<()> {
    let count = zero_count(chi, zs.height)?;
    zs.expected_count = Some(count.rounded);
    zs.verified = zs.gammas.len() as u64 == count.rounded;
    if !zs.verified {
        zs.diagnostics.push(format!(
            "holds {} zeros, argument principle gives {}",
            zs.gammas.len(),
            count.rounded
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_zeta_zero() {
        let zeta = PrimitiveCharacter::from_discriminant(1).unwrap();
        let zs = find_zeros(&zeta, 40.0).unwrap();
        assert!(zs.verified, "{:?}", zs.diagnostics);
        assert_eq!(zs.len(), 6);
        assert!((zs.gammas[0] - 14.134_725_141_734_694).abs() < 1e-9);
        assert!((zs.gammas[5] - 37.586_178_158_825_67).abs() < 1e-9);
    }

    #[test]
    fn beta_zeros_to_ten() {
        let chi = PrimitiveCharacter::from_discriminant(-4).unwrap();
        let zs = find_zeros(&chi, 10.0).unwrap();
        assert!(zs.verified);
        assert_eq!(zs.len(), 1);
        assert!((zs.gammas[0] - 6.020_948_904_697_597).abs() < 1e-9);
    }

    #[test]
    fn tiny_height_has_no_zeros() {
        for d in [-3i64, -4, 5, -7, 8] {
            let chi = PrimitiveCharacter::from_discriminant(d).unwrap();
            let zs = find_zeros(&chi, 0.5).unwrap();
            assert!(zs.verified && zs.is_empty(), "d={d}");
        }
    }

    #[test]
    fn extension_matches_direct() {
        let chi = PrimitiveCharacter::from_discriminant(-3).unwrap();
        let low = find_zeros(&chi, 30.0).unwrap();
        let ext = extend_zeros(&chi, Some(&low), 60.0).unwrap();
        let direct = find_zeros(&chi, 60.0).unwrap();
        assert!(ext.verified && direct.verified);
        assert_eq!(ext.len(), direct.len());
        for (a, b) in ext.gammas.iter().zip(&direct.gammas) {
            assert!((a - b).abs() < 2e-11 * a, "{a} {b}");
        }
    }

    #[test]
    fn complex_character_zeros() {
        let g = crate::lfunc::DirichletGroup::new(5).unwrap();
        let chi = g.characters().into_iter().find(|c| !c.is_real()).unwrap();
        let p = chi.to_primitive().unwrap();
        let zs = find_zeros(&p, 30.0).unwrap();
        assert!(zs.verified, "{:?}", zs.diagnostics);
        let zb = find_zeros(&p.conj(), 30.0).unwrap();
        assert!(zb.verified);
        assert_ne!(zs.key, zb.key);
        assert_eq!(p.conj().conj_key, p.key);
        assert_eq!(zb.key, g.character(g.conj_index(chi.index)).to_primitive().unwrap().key);
        // zeros of chi and its conjugate differ
        assert!(zs.gammas.iter().zip(&zb.gammas).any(|(a, b)| (a - b).abs() > 1e-3));
    }

    #[test]
    fn rejects_imprimitive() {
        let m = crate::arith::Modulus::new(12).unwrap();
        let chars = crate::lfunc::enumerate_real_characters(&m);
        let imprim = chars.iter().find(|c| c.conductor == 3).unwrap();
        assert!(matches!(find_zeros_real(imprim, 10.0), Err(Error::NotPrimitive(-3))));
        assert!(find_zeros_real(&chars[0], 10.0).is_err());
    }
}
