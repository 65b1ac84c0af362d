//! Smoothed approximate functional equation with a rotated theta contour.
//!
//! With `w = (s+a)/2`, `w' = (1-s+a)/2` and `delta = e^{i phi}`,
//!
//! ```text
//! Λ(s) = delta^w Σ chi(n) n^a G(w, π n² delta / q)
//!      + ε delta^{-w'} Σ conj(chi(n)) n^a G(w', π n² conj(delta) / q)
//! ```
//!
//! where `G` is the truncated Mellin integral from [`super::incgamma`]. The
//! rotation keeps the terms at size `e^{LOSS}` at worst, so the sum stays
//! accurate at large heights. Everything is normalized by `Γ(w) (q/π)^w`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::character::PrimitiveCharacter;
use super::gamma::ln_gamma;
use super::incgamma::{tail, Tail};
use crate::error::{Error, Result};

/// Largest tolerated term growth, as a natural log.
const LOSS: f64 = 7.0;
const CUTOFF: f64 = 1e-18;

fn rotation(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    FRAC_PI_2 - (2.0 * LOSS / t).min(FRAC_PI_2)
}

/// Phase `ϑ(t) = Im log Γ((1/2 + it + a)/2) + (t/2) log(q/π)`.
pub fn theta(chi: &PrimitiveCharacter, t: f64) -> f64 {
    let a = chi.parity as f64;
    let w = Complex64::new((0.5 + a) / 2.0, t / 2.0);
    ln_gamma(w).im + 0.5 * t * (chi.conductor as f64 / PI).ln()
}

/// `ϑ'(t) = Re ψ(w)/2 + log(q/π)/2`.
pub fn theta_derivative(chi: &PrimitiveCharacter, t: f64) -> f64 {
    let a = chi.parity as f64;
    let w = Complex64::new((0.5 + a) / 2.0, t / 2.0);
    0.5 * super::gamma::digamma(w).re + 0.5 * (chi.conductor as f64 / PI).ln()
}

struct Halves {
    first: Complex64,
    second: Complex64,
}

/// Both halves of the normalized functional equation at `s` with `Im s >= 0`.
fn halves(chi: &PrimitiveCharacter, s: Complex64, want_second: bool) -> Result<Halves> {
    debug_assert!(s.im >= 0.0);
    let a = chi.parity as f64;
    let q = chi.conductor as f64;
    let phi = rotation(s.im);
    let delta = Complex64::from_polar(1.0, phi);
    let iphi = Complex64::new(0.0, phi);
    let lqp = (q / PI).ln();
    let w = (s + a) / 2.0;
    let w2 = (1.0 - s + a) / 2.0;
    let lg_w = ln_gamma(w);
    let norm = -lg_w - w * lqp;
    let fe_factor = if want_second {
        (ln_gamma(w2) - lg_w + (w2 - w) * lqp).exp()
    } else {
        Complex64::new(0.0, 0.0)
    };

    let mut first = Complex64::new(0.0, 0.0);
    let mut second = Complex64::new(0.0, 0.0);
    let mut n: u64 = 0;
    loop {
        n += 1;
        if n > 50_000_000 {
            return Err(Error::Numerical(format!("series at s={s} failed to terminate")));
        }
        let x = PI * (n as f64) * (n as f64) / q;
        let ln_n = (n as f64).ln();
        let z = x * delta;
        let prefactor_re = a * ln_n - phi * w.im - x * phi.cos() + norm.re;
        let c = chi.value(n);
        let mut done = !super::incgamma::use_series(w, z);
        if want_second {
            done &= !super::incgamma::use_series(w2, z.conj());
        }
        if done && prefactor_re.exp() < CUTOFF * first.norm().max(second.norm()).max(1.0) {
            break;
        }
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let expo = a * ln_n + iphi * w - z + norm;
        first += c * match tail(w, z)? {
            Tail::Series(h) => (-s * ln_n).exp() + expo.exp() * h,
            Tail::Fraction(h) => expo.exp() * h,
        };
        if want_second {
            let zb = z.conj();
            let expo2 = a * ln_n - iphi * w2 - zb + norm;
            second += c.conj()
                * match tail(w2, zb)? {
                    Tail::Series(h) => fe_factor * ((s - 1.0) * ln_n).exp() + expo2.exp() * h,
                    Tail::Fraction(h) => expo2.exp() * h,
                };
        }
    }
    if chi.is_zeta() {
        first -= (iphi * w + norm).exp() / s;
        second += (-iphi * w2 + norm).exp() / (s - 1.0);
    }
    Ok(Halves {
        first,
        second: second * chi.root_number,
    })
}

/// `L(s, chi)` for `s` off the real axis (or on it away from `s = 1` and the
/// gamma poles), by the smoothed functional equation.
pub fn l_value(chi: &PrimitiveCharacter, s: Complex64) -> Result<Complex64> {
    if s.im < 0.0 {
        let c = chi.conj();
        return l_value(&c, s.conj()).map(|v| v.conj());
    }
    let h = halves(chi, s, true)?;
    Ok(h.first + h.second)
}

/// Real-valued Hardy function `Z(t) = e^{i(ϑ(t) - β/2)} L(1/2 + it)` with
/// `ε = e^{iβ}`, computed from the first half alone.
pub fn hardy_z(chi: &PrimitiveCharacter, t: f64) -> Result<f64> {
    if t < 0.0 {
        let c = chi.conj();
        return hardy_z(&c, -t);
    }
    let s = Complex64::new(0.5, t);
    let h = halves(chi, s, false)?;
    let phase = theta(chi, t) - 0.5 * chi.root_number.arg();
    Ok(2.0 * (Complex64::from_polar(1.0, phase) * h.first).re)
}

/// Imaginary part of the rotated full value on the critical line, which
/// vanishes exactly; a direct functional-equation residual.
pub fn critical_line_residual(chi: &PrimitiveCharacter, t: f64) -> Result<f64> {
    let s = Complex64::new(0.5, t);
    let l = l_value(chi, s)?;
    let phase = theta(chi, t) - 0.5 * chi.root_number.arg();
    Ok((Complex64::from_polar(1.0, phase) * l).im)
}
