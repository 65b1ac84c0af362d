//! Sums over zeros: `Σ 1/(1/4 + γ²)` in closed form and from zero lists,
//! `Σ 1/√(1/4 + γ²)`, and conductor bookkeeping.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::afe::{self, theta_derivative};
use super::character::{enumerate_real_characters, CharacterKey, PrimitiveCharacter};
use super::euler_maclaurin;
use super::zeros::{smooth_count, ZeroSet};
use crate::arith::Modulus;
use crate::error::{Error, Result};
use crate::quad;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Conductors up to this size use Euler–Maclaurin for `L'/L(1)`.
const EM_CONDUCTOR_LIMIT: u64 = 5000;

/// `Re L'/L(1, chi)`.
pub fn log_derivative_at_one(chi: &PrimitiveCharacter) -> Result<f64> {
    if chi.is_zeta() {
        return Err(Error::InvalidInput("zeta has a pole at s = 1".into()));
    }
    let one = Complex64::new(1.0, 0.0);
    if chi.conductor <= EM_CONDUCTOR_LIMIT {
        let (v, d) = euler_maclaurin::l_value_and_derivative(chi, one)?;
        return Ok((d / v).re);
    }
    // Cauchy integral on a small circle; L is entire here
    let n = 32;
    let r = 0.25;
    let mut value = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let u = Complex64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.5) / n as f64);
        let l = afe::l_value(chi, one + r * u)?;
        value += l;
        deriv += l / u;
    }
    value /= n as f64;
    deriv /= n as f64 * r;
    Ok((deriv / value).re)
}

/// `Σ_ρ 1/(1/4 + γ²)` over all nontrivial zeros, from `L'/L(1)`:
/// `log q - log π - γ_E - (1 + chi(-1)) log 2 + 2 Re L'/L(1, chi)`.
pub fn closed_form_quarter(chi: &PrimitiveCharacter) -> Result<f64> {
    let lp = log_derivative_at_one(chi)?;
    Ok(closed_form_from_log_derivative(chi.conductor, chi.parity, lp))
}

/// The closed form given `Re L'/L(1)`; `parity` is 0 for even characters.
pub fn closed_form_from_log_derivative(conductor: u64, parity: u8, log_derivative: f64) -> f64 {
    let even_term = if parity == 0 { 2.0 * 2f64.ln() } else { 0.0 };
    (conductor as f64).ln() - PI.ln() - EULER_GAMMA - even_term + 2.0 * log_derivative
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuarterSum {
    pub closed_form: f64,
    /// Sum over located zeros with `|γ| <= T`.
    pub truncated: f64,
    /// Estimate of the sum over `|γ| > T` from the zero density.
    pub tail: f64,
    /// Allowance for the tail estimate.
    pub tail_bound: f64,
    pub height: f64,
    pub consistent: bool,
}

impl QuarterSum {
    pub fn from_zeros(&self) -> f64 {
        self.truncated + self.tail
    }

    pub fn discrepancy(&self) -> f64 {
        (self.closed_form - self.from_zeros()).abs()
    }
}

fn weight(t: f64) -> f64 {
    1.0 / (0.25 + t * t)
}

/// `∫_T^∞ ϑ'(t) / (π (1/4 + t²)) dt`.
pub(crate) fn density_tail(chi: &PrimitiveCharacter, height: f64) -> f64 {
    let f = |v: f64| {
        let t = height * v.exp();
        t * weight(t) * theta_derivative(chi, t) / PI
    };
    quad::adaptive(f, 0.0, 45.0, 1.0, 1e-14).value
}

struct Side {
    truncated: f64,
    tail: f64,
    bound: f64,
}

/// One half-line of zeros. The tail is `∫ w dN` with `N = ϑ/π + S`, and the
/// boundary part of `∫ w dS` is kept using the observed `S(T)`.
fn side(chi: &PrimitiveCharacter, zeros: &ZeroSet) -> Side {
    let t = zeros.height;
    let truncated: f64 = zeros.gammas.iter().map(|&g| weight(g)).sum();
    let s_t = zeros.len() as f64 - smooth_count(chi, t);
    let tail = density_tail(chi, t) - weight(t) * s_t;
    Side {
        truncated,
        tail,
        bound: weight(t) * (s_t.abs() + 2.0),
    }
}

fn check_key(chi: &PrimitiveCharacter, zeros: &ZeroSet) -> Result<()> {
    if zeros.key != chi.key {
        return Err(Error::InvalidInput(format!(
            "zeros belong to {} but the character is {}",
            zeros.key, chi.key
        )));
    }
    Ok(())
}

/// Both evaluations of `Σ 1/(1/4 + γ²)` for a real character, counting
/// `±γ`.
pub fn zero_sum_quarter(chi: &PrimitiveCharacter, zeros: &ZeroSet) -> Result<QuarterSum> {
    if !chi.is_real {
        return Err(Error::InvalidInput(
            "complex characters need the zeros of the conjugate too".into(),
        ));
    }
    check_key(chi, zeros)?;
    let closed_form = closed_form_quarter(chi)?;
    let s = side(chi, zeros);
    Ok(assemble(closed_form, 2.0 * s.truncated, 2.0 * s.tail, 2.0 * s.bound, zeros.height))
}

/// As [`zero_sum_quarter`] for a complex character, whose zeros below the
/// real axis are the conjugates of those of `conj(chi)`.
pub fn zero_sum_quarter_pair(
    chi: &PrimitiveCharacter,
    zeros: &ZeroSet,
    conj_zeros: &ZeroSet,
) -> Result<QuarterSum> {
    let conj = chi.conj();
    check_key(chi, zeros)?;
    check_key(&conj, conj_zeros)?;
    let closed_form = closed_form_quarter(chi)?;
    let a = side(chi, zeros);
    let b = side(&conj, conj_zeros);
    Ok(assemble(
        closed_form,
        a.truncated + b.truncated,
        a.tail + b.tail,
        a.bound + b.bound,
        zeros.height.min(conj_zeros.height),
    ))
}

fn assemble(closed_form: f64, truncated: f64, tail: f64, tail_bound: f64, height: f64) -> QuarterSum {
    let consistent = (closed_form - truncated - tail).abs() <= tail_bound + 1e-9 * closed_form.abs();
    QuarterSum {
        closed_form,
        truncated,
        tail,
        tail_bound,
        height,
        consistent,
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InverseSqrtSum {
    /// `Σ_{|γ| < T} 1/√(1/4 + γ²)`, both signs.
    pub exact: f64,
    /// `(1/π) log(q* √T) log T`.
    pub main_term: f64,
    /// `(1/π) log(q* √T / 2π) log T`, which keeps the next-order term of
    /// the zero density.
    pub refined_main_term: f64,
    /// `log(q* T)`, the size of the error term.
    pub error_scale: f64,
}

/// Partial sums of `1/√(1/4 + γ²)` over the zeros of a real character.
pub fn partial_sum_inverse_sqrt(zeros: &ZeroSet, height: f64) -> Result<InverseSqrtSum> {
    if zeros.height < height {
        return Err(Error::InsufficientHeight {
            key: zeros.key,
            have: zeros.height,
            need: height,
        });
    }
    let conductor = match zeros.key {
        CharacterKey::Real(d) => d.unsigned_abs() as f64,
        CharacterKey::Complex { conductor, .. } => conductor as f64,
    };
    let exact = 2.0
        * zeros
            .gammas
            .iter()
            .take_while(|&&g| g < height)
            .map(|&g| weight(g).sqrt())
            .sum::<f64>();
    let (main_term, refined_main_term) = if height > 1.0 {
        let a = (conductor * height.sqrt()).ln();
        let b = height.ln() / PI;
        (a * b, (a - (2.0 * PI).ln()) * b)
    } else {
        (0.0, 0.0)
    };
    Ok(InverseSqrtSum {
        exact,
        main_term,
        refined_main_term,
        error_scale: (conductor * height.max(1.0)).ln(),
    })
}

/// `Σ log q*` over the non-principal real characters mod `q`, by
/// enumeration.
pub fn conductor_log_total(q: &Modulus) -> f64 {
    enumerate_real_characters(q)
        .iter()
        .filter(|c| !c.is_principal)
        .map(|c| (c.conductor as f64).ln())
        .sum()
}

/// Closed form of [`conductor_log_total`], with `ℓ` the odd part of the
/// radical and `ω` the number of prime factors of `q`.
pub fn conductor_log_total_closed(q: &Modulus) -> f64 {
    let omega = q.omega as i32;
    let odd_rad: u64 = q.odd_primes().product();
    let l = (odd_rad as f64).ln();
    let ln2 = 2f64.ln();
    match q.two_exponent() {
        0 => 2f64.powi(omega - 1) * l,
        1 => 2f64.powi(omega - 2) * l,
        2 => 2f64.powi(omega - 1) * (l + 2.0 * ln2),
        _ => 2f64.powi(omega) * (l + 4.0 * ln2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfunc::find_zeros;

    #[test]
    fn beta_closed_form_matches_difference_quotient() {
        let chi = PrimitiveCharacter::from_discriminant(-4).unwrap();
        let h = 1e-4;
        let l = |x: f64| afe::l_value(&chi, Complex64::new(x, 0.0)).unwrap().re;
        let lp = (l(1.0 + h) - l(1.0 - h)) / (2.0 * h) / l(1.0);
        assert!((log_derivative_at_one(&chi).unwrap() - lp).abs() < 1e-7);
        let v = closed_form_quarter(&chi).unwrap();
        let want = 4f64.ln() - PI.ln() - EULER_GAMMA + 2.0 * lp;
        assert!((v - want).abs() < 2e-7);
        assert!(v > 0.0);
    }

    #[test]
    fn cauchy_route_matches_euler_maclaurin() {
        for d in [-5003i64, 5009, -20011] {
            let chi = PrimitiveCharacter::from_discriminant(d).unwrap();
            let em = {
                let (v, dv) = euler_maclaurin::l_value_and_derivative(&chi, Complex64::new(1.0, 0.0)).unwrap();
                (dv / v).re
            };
            let ca = log_derivative_at_one(&chi).unwrap();
            assert!((em - ca).abs() < 1e-10, "d={d}: {em} vs {ca}");
        }
    }

    #[test]
    fn zero_sum_agrees_with_closed_form() {
        for d in [-3i64, -4, 5, -7, 8] {
            let chi = PrimitiveCharacter::from_discriminant(d).unwrap();
            let zs = find_zeros(&chi, 400.0).unwrap();
            let s = zero_sum_quarter(&chi, &zs).unwrap();
            assert!(s.consistent, "d={d}: {s:?}");
            assert!(s.discrepancy() < 1e-4 * s.closed_form, "d={d}: {s:?}");
            assert!(s.truncated > 0.0 && s.closed_form > 0.0);
        }
    }

    #[test]
    fn complex_pair_agrees() {
        let g = crate::lfunc::DirichletGroup::new(7).unwrap();
        let chi = g.characters().into_iter().find(|c| c.conductor == 7 && !c.is_real()).unwrap();
        let p = chi.to_primitive().unwrap();
        let a = find_zeros(&p, 200.0).unwrap();
        let b = find_zeros(&p.conj(), 200.0).unwrap();
        let s = zero_sum_quarter_pair(&p, &a, &b).unwrap();
        assert!(s.consistent, "{s:?}");
        assert!(zero_sum_quarter(&p, &a).is_err());
    }

    #[test]
    fn inverse_sqrt_sum() {
        let chi = PrimitiveCharacter::from_discriminant(-4).unwrap();
        let zs = find_zeros(&chi, 100.0).unwrap();
        assert_eq!(partial_sum_inverse_sqrt(&zs, 5.0).unwrap().exact, 0.0);
        let r = partial_sum_inverse_sqrt(&zs, 100.0).unwrap();
        // the leading term alone is only half the sum at this height
        assert!((r.exact - r.main_term).abs() < r.error_scale, "{r:?}");
        let ratio = r.exact / r.refined_main_term;
        assert!((ratio - 1.0).abs() < 0.35, "{ratio} {r:?}");
        let mut prev = 0.0;
        for t in [10.0, 20.0, 40.0, 80.0, 100.0] {
            let v = partial_sum_inverse_sqrt(&zs, t).unwrap().exact;
            assert!(v >= prev);
            prev = v;
        }
        assert!(partial_sum_inverse_sqrt(&zs, 101.0).is_err());
    }

    #[test]
    fn conductor_partition() {
        for q in 3..=10_000u64 {
            let m = Modulus::new(q).unwrap();
            let direct = conductor_log_total(&m);
            let closed = conductor_log_total_closed(&m);
            assert!((direct - closed).abs() < 1e-9 * closed.max(1.0), "q={q}: {direct} vs {closed}");
        }
        let m = Modulus::new(8).unwrap();
        assert!((conductor_log_total(&m) - 8.0 * 2f64.ln()).abs() < 1e-12);
    }
}
