//! The truncated Mellin integral `G(w, z) = ∫_1^∞ e^{-zy} y^{w-1} dy`.
//!
//! Callers work with the split `G = [z^{-w} Γ(w)] + e^{-z} h`, where the
//! bracket is present only in the series regime. Keeping the bracket
//! symbolic lets the approximate functional equation fold it into a plain
//! Dirichlet term `n^{-s}`.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) enum Tail {
    /// `G = z^{-w} Γ(w) + e^{-z} h`.
    Series(Complex64),
    /// `G = e^{-z} h`.
    Fraction(Complex64),
}

const TOL: f64 = 1e-17;
const MAX_ITER: usize = 20_000;

/// Regime switch: the power series is used while `|z|` stays below `|w|`
/// plus a margin.
pub(crate) fn use_series(w: Complex64, z: Complex64) -> bool {
    z.norm() <= w.norm() + 6.0
}

pub(crate) fn tail(w: Complex64, z: Complex64) -> Result<Tail> {
    if use_series(w, z) {
        series(w, z).map(Tail::Series)
    } else {
        fraction(w, z).map(Tail::Fraction)
    }
}

/// `h = -Σ_k z^k / (w)_{k+1}`.
fn series(w: Complex64, z: Complex64) -> Result<Complex64> {
    let mut term = w.inv();
    let mut sum = term;
    for k in 1..MAX_ITER {
        term *= z / (w + k as f64);
        sum += term;
        if term.norm() <= TOL * sum.norm() {
            return Ok(-sum);
        }
    }
    Err(Error::Numerical(format!(
        "incomplete gamma series did not converge at w={w}, z={z}"
    )))
}

/// Legendre continued fraction for `e^z z^{-w} Γ(w, z)` by modified Lentz.
fn fraction(w: Complex64, z: Complex64) -> Result<Complex64> {
    let tiny = Complex64::new(1e-300, 0.0);
    let mut b = z + 1.0 - w;
    let mut c = Complex64::new(1e300, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - w);
        b += 2.0;
        d = an * d + b;
        if d.norm() < 1e-300 {
            d = tiny;
        }
        c = b + an / c;
        if c.norm() < 1e-300 {
            c = tiny;
        }
        d = d.inv();
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).norm() < TOL {
            return Ok(h);
        }
    }
    Err(Error::Numerical(format!(
        "incomplete gamma continued fraction did not converge at w={w}, z={z}"
    )))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::lfunc::gamma::ln_gamma;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Full value of `G(w, z)`.
    pub(crate) fn g_value(w: Complex64, z: Complex64) -> Complex64 {
        match tail(w, z).unwrap() {
            Tail::Series(h) => (ln_gamma(w) - w * z.ln()).exp() + (-z).exp() * h,
            Tail::Fraction(h) => (-z).exp() * h,
        }
    }

    /// Independent quadrature: Gauss–Legendre on [1, Y] after the
    /// substitution y = e^u, with Y past the exponential decay.
    fn g_quadrature(w: Complex64, z: Complex64) -> Complex64 {
        let umax = ((60.0 + w.re.abs()) / z.re).ln().max(0.0) + 2.0;
        let panels = 4000;
        let h = umax / panels as f64;
        let rule = crate::quad::GaussLegendre::new(20);
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let a = p as f64 * h;
            for (x, wt) in rule.nodes(a, a + h) {
                let y = x.exp();
                acc += wt * (-z * y + w * x).exp();
            }
        }
        acc
    }

    #[test]
    fn matches_quadrature() {
        let cases = [
            (c(0.25, 0.0), c(0.5, 0.0)),
            (c(0.75, 3.0), c(2.0, 1.0)),
            (c(0.25, 25.0), c(20.0, 15.0)),
            (c(0.25, 25.0), c(30.0, 10.0)),
            (c(0.75, 100.0), c(5.0, 95.0)),
            (c(0.75, 100.0), c(8.0, 110.0)),
            (c(-0.5, -20.0), c(3.0, -18.0)),
            (c(0.25, 0.0), c(40.0, 0.0)),
        ];
        for (w, z) in cases {
            let got = g_value(w, z);
            let want = g_quadrature(w, z);
            let scale = want.norm().max(1e-30);
            assert!(
                (got - want).norm() < 1e-10 * scale.max(1e-12),
                "w={w} z={z}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn mpmath_reference() {
        // mpmath: gammainc(w, z) * z**(-w), i.e. G(w, z)
        let w = c(0.25, 250.0);
        let z = c(3.0, 240.0);
        let want = c(4.338_584_056_507_557e-4, -4.820_003_908_761_587e-3);
        let got = g_value(w, z);
        assert!((got - want).norm() < 1e-12, "{got}");
    }
}
