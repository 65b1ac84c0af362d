//! Complex log-gamma and digamma by recurrence plus Stirling series.

use num_complex::Complex64;

/// `B_{2k}` for `k = 1..=10`.
pub(crate) const BERNOULLI_2K: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn shift_count(z: Complex64) -> usize {
    if z.im.abs() >= 15.0 && z.re > -5.0 {
        0
    } else {
        (15.0 - z.re).max(0.0).ceil() as usize
    }
}

/// Principal branch of `log Gamma(z)`, continuous off the negative real axis.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    let n = shift_count(z);
    let mut shift = Complex64::new(0.0, 0.0);
    for k in 0..n {
        shift += (z + k as f64).ln();
    }
    let w = z + n as f64;
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for (k, b) in BERNOULLI_2K.iter().enumerate().take(8) {
        let k = (k + 1) as f64;
        series += pow * (b / (2.0 * k * (2.0 * k - 1.0)));
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + HALF_LN_2PI + series - shift
}

/// Digamma function `Gamma'/Gamma`.
pub fn digamma(z: Complex64) -> Complex64 {
    let n = shift_count(z);
    let mut shift = Complex64::new(0.0, 0.0);
    for k in 0..n {
        shift += (z + k as f64).inv();
    }
    let w = z + n as f64;
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv2;
    for (k, b) in BERNOULLI_2K.iter().enumerate().take(8) {
        let k = (k + 1) as f64;
        series += pow * (b / (2.0 * k));
        pow *= inv2;
    }
    w.ln() - 0.5 * inv - series - shift
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn real_values() {
        assert!(ln_gamma(c(1.0, 0.0)).norm() < 1e-14);
        assert!(ln_gamma(c(2.0, 0.0)).norm() < 1e-14);
        let half = ln_gamma(c(0.5, 0.0));
        assert!((half.re - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-14);
        assert!((ln_gamma(c(0.25, 0.0)).re - 1.288_022_524_698_077_5).abs() < 1e-14);
        assert!((digamma(c(1.0, 0.0)).re + 0.577_215_664_901_532_9).abs() < 1e-14);
    }

    #[test]
    fn complex_values() {
        // mpmath.loggamma(0.25 + 50j), loggamma(0.75 + 500j), loggamma(-1.2 - 3j)
        let cases = [
            (c(0.25, 50.0), c(-78.598_880_432_701_84, 145.208_659_524_257_23)),
            (c(0.75, 500.0), c(-782.925_572_870_888_1, 2607.696_769_126_129)),
            (c(-1.2, -3.0), c(-5.738_423_084_367_799, 2.822_727_463_196_266)),
        ];
        for (z, want) in cases {
            let got = ln_gamma(z);
            assert!((got - want).norm() < 1e-11 * want.norm().max(1.0), "{z}: {got} vs {want}");
        }
        let psi = digamma(c(0.25, 30.0));
        let want = c(3.401_185_807_025_37, 1.579_130_239_033_043);
        assert!((psi - want).norm() < 1e-13, "{psi}");
    }

    #[test]
    fn recurrence() {
        for z in [c(0.3, 7.0), c(2.5, -40.0), c(0.01, 0.5)] {
            let lhs = ln_gamma(z + 1.0);
            let rhs = ln_gamma(z) + z.ln();
            let d = lhs - rhs;
            let tau = 2.0 * std::f64::consts::PI;
            let k = (d.im / tau).round();
            assert!((d - c(0.0, k * tau)).norm() < 1e-12);
        }
    }
}
