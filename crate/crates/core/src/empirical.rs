//! Prime races counted directly: a segmented sieve, traces of
//! `E_q(x) = (π(x;q,NR) - (ρ(q)-1) π(x;q,R)) / (√x/log x)` on a geometric
//! grid, first crossings, and comparison with the explicit formula.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{classify_residue, rho, Modulus};
use crate::dist::model::{require_zeros, ZeroMap};
use crate::error::{Error, Result};
use crate::lfunc::{enumerate_real_characters, CharacterKey};

/// Largest supported sieve bound.
pub const MAX_SIEVE: u64 = 10_000_000_000;
/// Numbers covered by one sieve segment.
const SEGMENT: u64 = 1 << 21;

/// Odd primes below `n` by a plain sieve.
fn small_primes(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            if i > 2 {
                out.push(i as u64);
            }
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Odd primes in `[lo, hi)`, `lo` odd, from the odd base primes.
fn sieve_segment(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let len = (hi - lo).div_ceil(2) as usize;
    let mut composite = vec![false; len];
    for &p in base {
        if p * p >= hi {
            break;
        }
        let mut start = (lo.div_ceil(p) * p).max(p * p);
        if start % 2 == 0 {
            start += p;
        }
        let mut i = ((start - lo) / 2) as usize;
        while i < len {
            composite[i] = true;
            i += p as usize;
        }
    }
    composite
        .iter()
        .enumerate()
        .filter(|(i, &c)| !c && lo + 2 * *i as u64 > 1)
        .map(|(i, _)| lo + 2 * i as u64)
        .collect()
}

/// Calls `visit` on every prime up to `x_max` in increasing order.
/// Segments are sieved in parallel waves and visited in order.
pub fn for_each_prime<F: FnMut(u64)>(x_max: u64, mut visit: F) -> Result<()> {
    if x_max > MAX_SIEVE {
        return Err(Error::InvalidInput(format!("sieve bound {x_max} exceeds {MAX_SIEVE}")));
    }
    if x_max < 2 {
        return Ok(());
    }
    visit(2);
    let base = small_primes((x_max as f64).sqrt() as u64 + 1);
    let end = x_max + 1;
    let wave = (rayon::current_num_threads() * 4) as u64;
    let mut lo = 1;
    while lo < end {
        let starts: Vec<u64> = (0..wave).map(|k| lo + k * SEGMENT).take_while(|&s| s < end).collect();
        let segments: Vec<Vec<u64>> = starts
            .par_iter()
            .map(|&s| sieve_segment(s, (s + SEGMENT).min(end), &base))
            .collect();
        for p in segments.into_iter().flatten() {
            visit(p);
        }
        lo = starts.last().unwrap() + SEGMENT;
    }
    Ok(())
}

/// Residue bookkeeping for one modulus.
struct Classes {
    q: u64,
    units: Vec<u64>,
    eps: Vec<u8>,
    /// `index[a]` is the position of `a` in `units`, or `u32::MAX`.
    index: Vec<u32>,
    rho: u64,
}

impl Classes {
    fn new(q: u64) -> Result<Self> {
        let m = Modulus::new(q)?;
        let units = m.units();
        let mut index = vec![u32::MAX; q as usize];
        let mut eps = Vec::with_capacity(units.len());
        for (i, &a) in units.iter().enumerate() {
            index[a as usize] = i as u32;
            eps.push(classify_residue(a as i64, &m)?);
        }
        Ok(Self {
            q,
            units,
            eps,
            index,
            rho: rho(&m),
        })
    }

    fn class_of(&self, p: u64) -> Option<usize> {
        let i = self.index[(p % self.q) as usize];
        (i != u32::MAX).then_some(i as usize)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RaceTrace {
    pub q: u64,
    pub rho: u64,
    pub classes: Vec<u64>,
    /// 1 for residue classes.
    pub eps: Vec<u8>,
    pub checkpoints: Vec<u64>,
    /// `counts[k][i]` is `π(checkpoints[k]; q, classes[i])`.
    pub counts: Vec<Vec<u64>>,
    pub non_residues: Vec<u64>,
    pub residues: Vec<u64>,
    pub e_values: Vec<f64>,
}

/// Integer checkpoints `⌊2 r^k⌋` up to `x_max`, deduplicated, ending at
/// `x_max`.
pub fn geometric_grid(x_max: u64, ratio: f64) -> Result<Vec<u64>> {
    if !(ratio > 1.0 && ratio <= 1.01) {
        return Err(Error::InvalidInput(format!("grid ratio {ratio} outside (1, 1.01]")));
    }
    let mut out = Vec::new();
    let mut x = 2.0f64;
    while (x as u64) < x_max {
        let v = x as u64;
        if out.last() != Some(&v) {
            out.push(v);
        }
        x *= ratio;
    }
    if x_max >= 2 {
        out.push(x_max);
    }
    Ok(out)
}

/// `E_q(x)` from the two class totals.
pub fn normalized_error(x: u64, non_residues: u64, residues: u64, rho: u64) -> f64 {
    let x = x as f64;
    let diff = non_residues as f64 - (rho - 1) as f64 * residues as f64;
    diff * x.ln() / x.sqrt()
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Crossings {
    /// First prime `x` with `π(x;q,NR) < (ρ(q)-1) π(x;q,R)`: the race
    /// normalization used by `E_q`.
    pub race_form: Option<u64>,
    /// First prime `x` with `(ρ(q)-1) π(x;q,NR) < π(x;q,R)`.
    pub weighted_form: Option<u64>,
}

/// Sieves once up to `x_max`, recording the trace at the checkpoints and
/// the first crossings at prime resolution.
pub fn race_scan(q: u64, x_max: u64, ratio: f64) -> Result<(RaceTrace, Crossings)> {
    let cls = Classes::new(q)?;
    let grid = geometric_grid(x_max, ratio)?;
    let w = cls.rho - 1;
    let mut counts = vec![0u64; cls.units.len()];
    let (mut nr, mut r) = (0u64, 0u64);
    let mut trace = RaceTrace {
        q,
        rho: cls.rho,
        classes: cls.units.clone(),
        eps: cls.eps.clone(),
        checkpoints: Vec::with_capacity(grid.len()),
        counts: Vec::with_capacity(grid.len()),
        non_residues: Vec::with_capacity(grid.len()),
        residues: Vec::with_capacity(grid.len()),
        e_values: Vec::with_capacity(grid.len()),
    };
    let mut crossings = Crossings::default();
    let mut next = 0;
    let record = |x: u64, counts: &[u64], nr: u64, r: u64, trace: &mut RaceTrace| {
        trace.checkpoints.push(x);
        trace.counts.push(counts.to_vec());
        trace.non_residues.push(nr);
        trace.residues.push(r);
        trace.e_values.push(normalized_error(x, nr, r, cls.rho));
    };
    for_each_prime(x_max, |p| {
        while next < grid.len() && grid[next] < p {
            record(grid[next], &counts, nr, r, &mut trace);
            next += 1;
        }
        if let Some(i) = cls.class_of(p) {
            counts[i] += 1;
            if cls.eps[i] == 1 {
                r += 1;
            } else {
                nr += 1;
            }
            if crossings.race_form.is_none() && (nr as u128) < w as u128 * r as u128 {
                crossings.race_form = Some(p);
            }
            if crossings.weighted_form.is_none() && (w as u128 * nr as u128) < r as u128 {
                crossings.weighted_form = Some(p);
            }
        }
    })?;
    while next < grid.len() {
        record(grid[next], &counts, nr, r, &mut trace);
        next += 1;
    }
    Ok((trace, crossings))
}

/// Class counts of all primes up to `x_max` on a geometric grid.
pub fn sieve_race(q: u64, x_max: u64, ratio: f64) -> Result<RaceTrace> {
    race_scan(q, x_max, ratio).map(|(t, _)| t)
}

/// First crossings of the race up to `x_max`, located at the prime where
/// the inequality first holds.
pub fn skewes_search(q: u64, x_max: u64) -> Result<Crossings> {
    race_scan(q, x_max, 1.01).map(|(_, c)| c)
}

impl RaceTrace {
    /// Log-measure weights of the intervals `[x_k, x_{k+1})` in
    /// `[2, x_max]`, attributed to the left checkpoint.
    fn log_weights(&self) -> Vec<f64> {
        let n = self.checkpoints.len();
        (0..n)
            .map(|k| {
                if k + 1 < n {
                    (self.checkpoints[k + 1] as f64 / self.checkpoints[k] as f64).ln()
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Writes `x`, the per-class counts and `E_q(x)` as CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "x")?;
        for a in &self.classes {
            write!(out, ",pi_{a}")?;
        }
        writeln!(out, ",e")?;
        for k in 0..self.checkpoints.len() {
            write!(out, "{}", self.checkpoints[k])?;
            for c in &self.counts[k] {
                write!(out, ",{c}")?;
            }
            writeln!(out, ",{:.12e}", self.e_values[k])?;
        }
        Ok(())
    }

    /// Writes `x, E_q(x)` pairs for plotting.
    pub fn write_plot_data<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,e")?;
        for (x, e) in self.checkpoints.iter().zip(&self.e_values) {
            writeln!(out, "{x},{e:.12e}")?;
        }
        Ok(())
    }
}

/// Share of the log-measure of `[2, x_max]` on which `predicate(x, E_q(x))`
/// holds, the state at each checkpoint standing for the interval up to
/// the next one.
pub fn log_density_estimate<P: Fn(u64, f64) -> bool>(trace: &RaceTrace, predicate: P) -> f64 {
    let w = trace.log_weights();
    let total: f64 = w.iter().sum();
    if total == 0.0 {
        return if trace.checkpoints.first().is_some_and(|&x| predicate(x, trace.e_values[0])) {
            1.0
        } else {
            0.0
        };
    }
    let hit: f64 = w
        .iter()
        .zip(trace.checkpoints.iter().zip(&trace.e_values))
        .filter(|(_, (&x, &e))| predicate(x, e))
        .map(|(w, _)| w)
        .sum();
    hit / total
}

/// The race predicate `E_q(x) > 0`.
pub fn race_holds(_x: u64, e: f64) -> bool {
    e > 0.0
}

/// `E_q(x) >= 0`: the residues are not strictly ahead.
pub fn race_not_lost(_x: u64, e: f64) -> bool {
    e >= 0.0
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceMoments {
    /// `(1/Y) ∫_0^Y E_q(e^y) dy` over the trace.
    pub mean: f64,
    pub variance: f64,
}

/// Log-scale moments of `E_q` over `[x_min, x_max]`, the time averages
/// whose limits are the mean and variance of the limiting distribution.
pub fn trace_moments(trace: &RaceTrace, x_min: u64) -> TraceMoments {
    let w: Vec<f64> = trace
        .log_weights()
        .into_iter()
        .zip(&trace.checkpoints)
        .map(|(w, &x)| if x >= x_min { w } else { 0.0 })
        .collect();
    let total: f64 = w.iter().sum();
    let mean = w.iter().zip(&trace.e_values).map(|(w, e)| w * e).sum::<f64>() / total;
    let second = w.iter().zip(&trace.e_values).map(|(w, e)| w * e * e).sum::<f64>() / total;
    TraceMoments {
        mean,
        variance: second - mean * mean,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExplicitFormulaReport {
    pub height: f64,
    pub max_deviation: f64,
    pub mean_deviation: f64,
    /// The same with zeros up to twice the height.
    pub max_deviation_double: f64,
    pub mean_deviation_double: f64,
    /// Checkpoints used (those above `x_min`).
    pub points: usize,
}

/// `ρ(q) - 1 + Σ_χ 2 Re Σ_{0 < γ <= T} x^{iγ}/(1/2 + iγ)`.
pub fn explicit_formula(rho_q: u64, gammas: &[f64], x: f64) -> f64 {
    let l = x.ln();
    let s: f64 = gammas
        .iter()
        .map(|&g| (Complex64::from_polar(1.0, g * l) / Complex64::new(0.5, g)).re)
        .sum();
    (rho_q - 1) as f64 + 2.0 * s
}

/// Compares `E_q` with the truncated explicit formula at the checkpoints
/// above `x_min`, for zeros up to `height` and `2 height`.
pub fn explicit_formula_check(trace: &RaceTrace, zeros: &ZeroMap, height: f64, x_min: u64) -> Result<ExplicitFormulaReport> {
    let m = Modulus::new(trace.q)?;
    let mut low = Vec::new();
    let mut high = Vec::new();
    for chi in enumerate_real_characters(&m) {
        if chi.is_principal {
            continue;
        }
        let key = CharacterKey::Real(chi.discriminant);
        let zs = require_zeros(zeros, key)?;
        if zs.height < 2.0 * height {
            return Err(Error::InsufficientHeight {
                key,
                have: zs.height,
                need: 2.0 * height,
            });
        }
        low.extend(zs.gammas.iter().filter(|&&g| g <= height));
        high.extend(zs.gammas.iter().filter(|&&g| g <= 2.0 * height));
    }
    let points: Vec<(f64, f64)> = trace
        .checkpoints
        .iter()
        .zip(&trace.e_values)
        .filter(|(&x, _)| x >= x_min)
        .map(|(&x, &e)| (x as f64, e))
        .collect();
    if points.is_empty() {
        return Err(Error::InvalidInput(format!("no checkpoints above {x_min}")));
    }
    let deviations = |g: &[f64]| -> (f64, f64) {
        let d: Vec<f64> = points
            .par_iter()
            .map(|&(x, e)| (explicit_formula(trace.rho, g, x) - e).abs())
            .collect();
        (d.iter().copied().fold(0.0, f64::max), d.iter().sum::<f64>() / d.len() as f64)
    };
    let (max_deviation, mean_deviation) = deviations(&low);
    let (max_deviation_double, mean_deviation_double) = deviations(&high);
    Ok(ExplicitFormulaReport {
        height,
        max_deviation,
        mean_deviation,
        max_deviation_double,
        mean_deviation_double,
        points: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::is_prime;

    #[test]
    fn prime_count_at_one_million() {
        let mut n = 0;
        let mut last = 0;
        for_each_prime(1_000_000, |p| {
            assert!(p > last);
            last = p;
            n += 1;
        })
        .unwrap();
        assert_eq!(n, 78498);
        let direct = (2..=1_000_000u64).filter(|&k| is_prime(k)).count();
        assert_eq!(direct, 78498);
    }

    #[test]
    fn segment_edges() {
        // bounds straddling a segment boundary
        for x in [SEGMENT - 1, SEGMENT, SEGMENT + 1, 3 * SEGMENT + 7] {
            let mut n = 0u64;
            for_each_prime(x, |_| n += 1).unwrap();
            let direct = (2..=x).filter(|&k| is_prime(k)).count() as u64;
            assert_eq!(n, direct, "x={x}");
        }
        for x in [0u64, 1, 2, 3, 10] {
            let mut v = Vec::new();
            for_each_prime(x, |p| v.push(p)).unwrap();
            assert_eq!(v, (2..=x).filter(|&k| is_prime(k)).collect::<Vec<_>>());
        }
        assert!(for_each_prime(MAX_SIEVE + 1, |_| ()).is_err());
    }

    #[test]
    fn counts_mod_four_at_twenty() {
        let t = sieve_race(4, 20, 1.01).unwrap();
        assert_eq!(*t.checkpoints.last().unwrap(), 20);
        let last = t.counts.last().unwrap();
        assert_eq!(t.classes, vec![1, 3]);
        assert_eq!(last, &vec![3, 4]);
    }

    #[test]
    fn class_counts_match_trial_division() {
        let x = 1_000_000;
        for q in [3u64, 4, 5, 8, 12] {
            let t = sieve_race(q, x, 1.01).unwrap();
            let last = t.counts.last().unwrap();
            for (i, &a) in t.classes.iter().enumerate() {
                let direct = (2..=x).filter(|&p| p % q == a && is_prime(p)).count() as u64;
                assert_eq!(last[i], direct, "q={q} a={a}");
            }
            let excluded = (2..=x).filter(|&p| q % p == 0 && is_prime(p)).count() as u64;
            assert_eq!(last.iter().sum::<u64>() + excluded, 78498);
            for k in 1..t.checkpoints.len() {
                assert!(t.counts[k].iter().zip(&t.counts[k - 1]).all(|(a, b)| a >= b));
                let e = normalized_error(t.checkpoints[k], t.non_residues[k], t.residues[k], t.rho);
                assert_eq!(e, t.e_values[k]);
            }
        }
    }

    #[test]
    fn grid_rules() {
        assert!(geometric_grid(100, 1.02).is_err());
        assert!(geometric_grid(100, 1.0).is_err());
        let g = geometric_grid(1000, 1.01).unwrap();
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*g.last().unwrap(), 1000);
        let t = sieve_race(7, 1, 1.01).unwrap();
        assert!(t.checkpoints.is_empty());
        // 2 and 3 divide 6, so nothing is counted below 5
        let t = sieve_race(6, 4, 1.01).unwrap();
        assert!(t.counts.iter().all(|c| c == &vec![0, 0]));
    }

    #[test]
    fn log_density_identities() {
        let t = sieve_race(4, 100_000, 1.001).unwrap();
        assert_eq!(log_density_estimate(&t, |_, _| true), 1.0);
        let d = log_density_estimate(&t, race_holds);
        let c = log_density_estimate(&t, |x, e| !race_holds(x, e));
        assert!((d + c - 1.0).abs() < 1e-12);
        assert!(d > 0.9 && d <= 1.0, "{d}");
    }

    #[test]
    fn first_crossing_mod_four() {
        let c = skewes_search(4, 100_000).unwrap();
        assert_eq!(c.race_form, Some(26861));
        assert_eq!(c.weighted_form, Some(26861));
        assert_eq!(skewes_search(4, 26860).unwrap().race_form, None);
        assert_eq!(skewes_search(4, 26861).unwrap().race_form, Some(26861));
        // naive oracle
        let (mut a, mut b) = (0u64, 0u64);
        let mut first = None;
        for p in (3..100_000u64).filter(|&p| is_prime(p)) {
            if p % 4 == 1 { a += 1 } else { b += 1 }
            if a > b {
                first = Some(p);
                break;
            }
        }
        assert_eq!(first, Some(26861));
    }

    #[test]
    fn no_crossing_mod_three_at_small_scale() {
        assert_eq!(skewes_search(3, 10_000_000).unwrap().race_form, None);
    }

    #[test]
    fn streaming_and_trace_agree() {
        let (t, c) = race_scan(4, 200_000, 1.001).unwrap();
        let first = c.race_form.unwrap();
        for (k, &x) in t.checkpoints.iter().enumerate() {
            if x < first {
                assert!(t.e_values[k] >= 0.0, "x={x}");
            }
            assert_eq!(t.e_values[k] < 0.0, t.non_residues[k] < t.residues[k]);
        }
    }

    #[test]
    fn csv_layout() {
        let t = sieve_race(4, 30, 1.01).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,pi_1,pi_3,e"));
        assert!(text.lines().last().unwrap().starts_with("30,4,5,"));
        let mut buf = Vec::new();
        t.write_plot_data(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), t.checkpoints.len() + 1);
    }

    #[test]
    fn explicit_formula_improves_with_height() {
        use crate::lfunc::{find_zeros, PrimitiveCharacter};
        let t = sieve_race(4, 1_000_000, 1.001).unwrap();
        let chi = PrimitiveCharacter::from_discriminant(-4).unwrap();
        let mut zeros = ZeroMap::new();
        zeros.insert(CharacterKey::Real(-4), find_zeros(&chi, 400.0).unwrap());
        let r = explicit_formula_check(&t, &zeros, 200.0, 100_000).unwrap();
        assert!(r.max_deviation_double < r.max_deviation, "{r:?}");
        assert!(r.mean_deviation_double < r.mean_deviation, "{r:?}");
        assert!(explicit_formula_check(&t, &zeros, 300.0, 100_000).is_err());
    }
}
