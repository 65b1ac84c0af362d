//! Gauss–Legendre rules and a panel-bisection adaptive integrator.

use std::sync::OnceLock;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule on `[-1, 1]`, nodes by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { z } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
                let dz = pn / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            x[i] = -z;
            x[n - 1 - i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
            w[n - 1 - i] = w[i];
        }
        Self { x, w }
    }

    /// Shared 20-point rule.
    pub fn standard() -> &'static Self {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| Self::new(20))
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn nodes(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.x
            .iter()
            .zip(&self.w)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.nodes(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Integral {
    pub value: f64,
    /// Sum of per-panel error estimates.
    pub error: f64,
    pub panels: usize,
}

/// Integrates over `[a, b]` starting from panels of width at most
/// `width`. Each panel is compared with its two halves and bisected until
/// the difference is below `tol * panel_width / (b - a)`.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, width: f64, tol: f64) -> Integral {
    let rule = GaussLegendre::standard();
    let n0 = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / n0 as f64;
    let density = tol / (b - a);
    let mut out = Integral::default();
    let mut stack: Vec<(f64, f64, f64, u32)> = (0..n0)
        .rev()
        .map(|i| {
            let lo = a + i as f64 * h;
            let hi = if i + 1 == n0 { b } else { lo + h };
            (lo, hi, rule.integrate(lo, hi, &f), 0)
        })
        .collect();
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &f);
        let right = rule.integrate(mid, hi, &f);
        let err = (left + right - whole).abs();
        if err <= density * (hi - lo) || depth >= 30 {
            out.value += left + right;
            out.error += err;
            out.panels += 1;
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        let rule = GaussLegendre::new(20);
        // degree 39 integrates exactly
        let v = rule.integrate(0.0, 1.0, |x| x.powi(39));
        assert!((v - 1.0 / 40.0).abs() < 1e-15);
        let w: f64 = GaussLegendre::new(7).nodes(-1.0, 1.0).map(|(_, w)| w).sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_oscillatory() {
        let r = adaptive(|x| (50.0 * x).sin() / (1.0 + x), 0.0, 10.0, 1.0, 1e-12);
        // mpmath.quad(lambda x: sin(50x)/(1+x), [0, 10])
        assert!((r.value - 0.021_592_610_275_346_4).abs() < 1e-11, "{}", r.value);
    }
}
