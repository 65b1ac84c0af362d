//! Euler–Maclaurin evaluation of `L(s, chi)` through Hurwitz zeta sums,
//! with the analytic derivative in `s`.
//!
//! `L(s) = Σ_{n<=Mq} chi(n) n^{-s} + q^{-s} Σ_a chi(a) R(s, a/q + M)`, where
//! `R` is the Euler–Maclaurin remainder of the Hurwitz tail. The pole term
//! `y^{1-s}/(s-1)` is replaced by `(y^{1-s} - 1)/(s-1)`, which changes nothing
//! for non-principal characters (their values sum to zero) and is smooth at
//! `s = 1`.

use std::sync::OnceLock;

use num_complex::Complex64;

use super::character::PrimitiveCharacter;
use super::gamma::BERNOULLI_2K;
use crate::error::{Error, Result};

const TERMS: usize = 40;

/// `B_{2j} / (2j)!` for `j = 1..=TERMS`.
fn coefficients() -> &'static [f64; TERMS] {
    static C: OnceLock<[f64; TERMS]> = OnceLock::new();
    C.get_or_init(|| {
        let mut c = [0.0; TERMS];
        let mut fact = 1.0f64;
        for (j, slot) in c.iter_mut().enumerate() {
            let k = j + 1;
            fact *= ((2 * k - 1) * (2 * k)) as f64;
            *slot = if k <= BERNOULLI_2K.len() {
                BERNOULLI_2K[j] / fact
            } else {
                let zeta: f64 = (1..=30).map(|n| (n as f64).powi(-2 * k as i32)).sum();
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * 2.0 * zeta / (2.0 * std::f64::consts::PI).powi(2 * k as i32)
            };
        }
        c
    })
}

/// `(e^u - 1)/u` and its derivative.
fn expm1_over(u: Complex64) -> (Complex64, Complex64) {
    if u.norm() < 0.5 {
        let mut e = Complex64::new(0.0, 0.0);
        let mut de = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for k in 0..30 {
            fact *= (k + 1) as f64;
            e += pow / fact;
            if k + 1 < 30 {
                de += pow * ((k + 1) as f64) / (fact * (k + 2) as f64);
            }
            pow *= u;
        }
        (e, de)
    } else {
        let eu = u.exp();
        let e = (eu - 1.0) / u;
        let de = (u * eu - eu + 1.0) / (u * u);
        (e, de)
    }
}

/// Value and `s`-derivative of `L(s, chi)`.
pub fn l_value_and_derivative(chi: &PrimitiveCharacter, s: Complex64) -> Result<(Complex64, Complex64)> {
    let q = chi.conductor;
    if chi.is_zeta() && (s - 1.0).norm() < 1e-12 {
        return Err(Error::InvalidInput("zeta has a pole at s = 1".into()));
    }
    let m = ((s.norm() + 2.0 * TERMS as f64) / std::f64::consts::PI).ceil().max(8.0) as u64;
    let coeffs = coefficients();

    let mut value = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for n in 1..=m * q {
        let c = chi.value(n);
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let ln = (n as f64).ln();
        let p = (-s * ln).exp() * c;
        value += p;
        deriv -= p * ln;
    }

    let ln_q = (q as f64).ln();
    let q_pow = (-s * ln_q).exp();
    let mut rem = Complex64::new(0.0, 0.0);
    let mut drem = Complex64::new(0.0, 0.0);
    for a in 1..=q {
        let c = chi.value(a);
        if c.norm_sqr() == 0.0 {
            continue;
        }
        let y = a as f64 / q as f64 + m as f64;
        let ly = y.ln();
        let u = (1.0 - s) * ly;
        let (e1, de1) = expm1_over(u);
        let mut h = -ly * e1;
        let mut dh = ly * ly * de1;
        if chi.is_zeta() {
            // the constant part of y^{1-s}/(s-1)
            h += (s - 1.0).inv();
            dh -= (s - 1.0).inv() * (s - 1.0).inv();
        }
        let ys = (-s * ly).exp();
        h += 0.5 * ys;
        dh -= 0.5 * ly * ys;
        // Σ_j c_j (s)_{2j-1} y^{-s-2j+1}
        let mut poch = s; // (s)_{1}
        let mut dpoch = Complex64::new(1.0, 0.0);
        let mut ypow = ys / y; // y^{-s-1}
        let inv_y2 = 1.0 / (y * y);
        let mut converged = false;
        for (j, &cj) in coeffs.iter().enumerate() {
            let term = cj * poch * ypow;
            h += term;
            dh += cj * (dpoch - ly * poch) * ypow;
            if term.norm() < 1e-18 * h.norm().max(1e-300) {
                converged = true;
                break;
            }
            let k1 = s + (2 * j + 1) as f64;
            let k2 = s + (2 * j + 2) as f64;
            dpoch = dpoch * k1 * k2 + poch * (k1 + k2);
            poch = poch * k1 * k2;
            ypow *= inv_y2;
        }
        if !converged {
            return Err(Error::Numerical(format!(
                "Euler–Maclaurin tail did not converge at s={s}"
            )));
        }
        rem += c * h;
        drem += c * dh;
    }
    value += q_pow * rem;
    deriv += q_pow * (drem - ln_q * rem);
    Ok((value, deriv))
}

pub fn l_value(chi: &PrimitiveCharacter, s: Complex64) -> Result<Complex64> {
    l_value_and_derivative(chi, s).map(|v| v.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classical_values_at_one() {
        let m4 = PrimitiveCharacter::from_discriminant(-4).unwrap();
        let (v, _) = l_value_and_derivative(&m4, c(1.0, 0.0)).unwrap();
        assert!((v.re - PI / 4.0).abs() < 1e-14 && v.im.abs() < 1e-15);
        let m3 = PrimitiveCharacter::from_discriminant(-3).unwrap();
        let v = l_value(&m3, c(1.0, 0.0)).unwrap();
        assert!((v.re - PI / (3.0 * 3f64.sqrt())).abs() < 1e-14);
        let p5 = PrimitiveCharacter::from_discriminant(5).unwrap();
        let v = l_value(&p5, c(1.0, 0.0)).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((v.re - 2.0 * golden.ln() / 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn log_derivative_of_beta_at_one() {
        // L'/L(1, chi_{-4}) = gamma + 2 log 2 + 3 log pi - 4 log Gamma(1/4)
        let m4 = PrimitiveCharacter::from_discriminant(-4).unwrap();
        let (v, d) = l_value_and_derivative(&m4, c(1.0, 0.0)).unwrap();
        let euler = 0.577_215_664_901_532_9;
        let lg = 1.288_022_524_698_077_5;
        let want = euler + 2.0 * 2f64.ln() + 3.0 * PI.ln() - 4.0 * lg;
        assert!(((d / v).re - want).abs() < 1e-13, "{}", (d / v).re);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let chi = PrimitiveCharacter::from_discriminant(-23).unwrap();
        for s in [c(1.0, 0.0), c(0.5, 10.0), c(2.0, -3.0)] {
            let (_, d) = l_value_and_derivative(&chi, s).unwrap();
            let h = 1e-5;
            let fd = (l_value(&chi, s + h).unwrap() - l_value(&chi, s - h).unwrap()) / (2.0 * h);
            assert!((d - fd).norm() < 1e-8, "{s}: {d} vs {fd}");
        }
    }

    #[test]
    fn zeta_values() {
        let z = PrimitiveCharacter::from_discriminant(1).unwrap();
        let v = l_value(&z, c(2.0, 0.0)).unwrap();
        assert!((v.re - PI * PI / 6.0).abs() < 1e-14);
        let v = l_value(&z, c(0.5, 0.0)).unwrap();
        assert!((v.re + 1.460_354_508_809_586_8).abs() < 1e-13);
        assert!(l_value(&z, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn critical_line_reference() {
        // mpmath.dirichlet(s, chi)
        let m4 = PrimitiveCharacter::from_discriminant(-4).unwrap();
        let m3 = PrimitiveCharacter::from_discriminant(-3).unwrap();
        let cases = [
            (&m4, c(0.5, 20.0), c(2.851_065_154_483_346, -0.364_836_579_084_913_9)),
            (&m4, c(0.5, 200.0), c(-0.114_123_388_003_831_73, -0.507_559_013_818_458_3)),
            (&m3, c(0.7, 35.0), c(0.680_157_750_095_013_7, -0.434_936_827_316_426_3)),
        ];
        for (chi, s, want) in cases {
            let v = l_value(chi, s).unwrap();
            assert!((v - want).norm() < 1e-12, "{s}: {v}");
        }
    }
}
