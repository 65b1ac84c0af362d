//! Elementary arithmetic on moduli: factorization, the index of squares,
//! residue classification and a few constructive moduli families.

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};

/// Deterministic Miller–Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mod_mul(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, m);
        }
        base = mod_mul(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inv(a: u64, m: u64) -> Option<u64> {
    let g = (a as i128).extended_gcd(&(m as i128));
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m as i128) as u64)
}

/// Smallest prime strictly greater than `n`, or `None` past `u64::MAX`.
pub fn next_prime(n: u64) -> Option<u64> {
    let mut c = n.checked_add(1)?;
    while !is_prime(c) {
        c = c.checked_add(1)?;
    }
    Some(c)
}

/// Prime factorization with strictly increasing primes. `factorize(1)` is empty.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1, "factorize requires n >= 1");
    let mut out = Vec::new();
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut n);
    push(3, &mut n);
    let mut p = 5u64;
    let mut checked = 0;
    while n > 1 {
        if p.saturating_mul(p) > n {
            out.push((n, 1));
            break;
        }
        if n != checked {
            if is_prime(n) {
                out.push((n, 1));
                break;
            }
            checked = n;
        }
        push(p, &mut n);
        push(p + 2, &mut n);
        p += 6;
    }
    out
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .iter()
        .fold(1, |acc, &(p, e)| acc * (p - 1) * p.pow(e - 1))
}

/// Von Mangoldt function.
pub fn von_mangoldt(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let f = factorize(n);
    if f.len() == 1 {
        (f[0].0 as f64).ln()
    } else {
        0.0
    }
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, e) in factorize(n) {
        let len = divs.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                divs.push(divs[i] * pk);
            }
        }
    }
    divs.sort_unstable();
    divs
}

/// Kronecker symbol `(a/n)` for `n >= 1`.
pub fn kronecker(a: i64, n: u64) -> i8 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut n = n;
    let mut a = a as i128;
    let mut t = 1i8;
    let v = n.trailing_zeros();
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if v % 2 == 1 && (a.rem_euclid(8) == 3 || a.rem_euclid(8) == 5) {
            t = -t;
        }
        n >>= v;
    }
    // Jacobi symbol (a/n) with n odd.
    let mut n = n as i128;
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// A modulus `q >= 3` together with the multiplicative data used throughout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Modulus {
    pub q: u64,
    pub factors: Vec<(u64, u32)>,
    pub omega: u32,
    pub radical: u64,
    pub rho: u64,
    pub reduced: u64,
    pub euler_phi: u64,
}

impl Modulus {
    pub fn new(q: u64) -> Result<Self> {
        if q < 3 {
            return Err(Error::InvalidInput(format!(
                "modulus {q} has a trivial group of squares; need q >= 3"
            )));
        }
        let factors = factorize(q);
        let omega = factors.len() as u32;
        let radical = factors.iter().map(|&(p, _)| p).product();
        let two_exp = two_exponent(&factors);
        let odd_radical: u64 = factors.iter().filter(|f| f.0 != 2).map(|f| f.0).product();
        let reduced = odd_radical << two_exp.min(3);
        let euler_phi = factors
            .iter()
            .fold(1, |acc, &(p, e)| acc * (p - 1) * p.pow(e - 1));
        let rho = rho_from_factors(&factors);
        Ok(Self {
            q,
            factors,
            omega,
            radical,
            rho,
            reduced,
            euler_phi,
        })
    }

    /// Exponent of 2 in `q`.
    pub fn two_exponent(&self) -> u32 {
        two_exponent(&self.factors)
    }

    /// `1` when `q` is even, else `0`.
    pub fn parity_flag(&self) -> u32 {
        u32::from(self.q.is_multiple_of(2))
    }

    pub fn log_radical(&self) -> f64 {
        (self.radical as f64).ln()
    }

    pub fn odd_primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|f| f.0).filter(|&p| p != 2)
    }

    pub fn is_coprime(&self, a: i64) -> bool {
        (a.rem_euclid(self.q as i64) as u64).gcd(&self.q) == 1
    }

    /// Invertible residues in increasing order.
    pub fn units(&self) -> Vec<u64> {
        (1..self.q).filter(|a| a.gcd(&self.q) == 1).collect()
    }
}

fn two_exponent(factors: &[(u64, u32)]) -> u32 {
    factors
        .iter()
        .find(|f| f.0 == 2)
        .map(|f| f.1)
        .unwrap_or(0)
}

fn rho_from_factors(factors: &[(u64, u32)]) -> u64 {
    let omega = factors.len() as u32;
    match two_exponent(factors) {
        0 => 1 << omega,
        1 => 1 << (omega - 1),
        2 => 1 << omega,
        _ => 1 << (omega + 1),
    }
}

/// Index of the squares in `(Z/qZ)^×`.
pub fn rho(q: &Modulus) -> u64 {
    q.rho
}

/// Returns 1 if `a` is a square modulo `q`, else 0.
///
/// Decided locally: `a` must be a quadratic residue modulo every odd prime
/// factor, `1 mod 4` when `4 || q` and `1 mod 8` when `8 | q`.
pub fn classify_residue(a: i64, q: &Modulus) -> Result<u8> {
    if !q.is_coprime(a) {
        return Err(Error::NotCoprime { a, q: q.q });
    }
    let r = a.rem_euclid(q.q as i64);
    for p in q.odd_primes() {
        if kronecker(r, p) != 1 {
            return Ok(0);
        }
    }
    let ok = match q.two_exponent() {
        0 | 1 => true,
        2 => r % 4 == 1,
        _ => r % 8 == 1,
    };
    Ok(u8::from(ok))
}

/// Squares in `(Z/qZ)^×` by direct enumeration.
pub fn squares_mod(q: u64) -> Vec<u64> {
    let mut seen = vec![false; q as usize];
    for a in 1..q {
        if a.gcd(&q) == 1 {
            seen[mod_mul(a, a, q) as usize] = true;
        }
    }
    (0..q).filter(|&a| seen[a as usize]).collect()
}

pub fn ratio_rho_logradical(q: &Modulus) -> f64 {
    q.rho as f64 / q.log_radical()
}

/// Product of the first `k` odd primes.
pub fn half_primorial(k: usize) -> Result<Modulus> {
    if k == 0 {
        return Err(Error::InvalidInput("half_primorial needs k >= 1".into()));
    }
    let mut q = 1u64;
    let mut p = 2u64;
    for _ in 0..k {
        p = next_prime(p).expect("small primes");
        q = q
            .checked_mul(p)
            .ok_or_else(|| Error::Overflow(format!("product of the first {k} odd primes")))?;
    }
    Modulus::new(q)
}

/// `1 - (1 + log log 2) / log 2`.
pub fn lambda_density_exponent() -> f64 {
    let l2 = std::f64::consts::LN_2;
    1.0 - (1.0 + l2.ln()) / l2
}

/// Largest admissible value of `2^l / c_1` for the interval construction.
pub const MAX_INTERVAL_LOG: f64 = 62.0 * std::f64::consts::LN_2;

#[derive(Debug, Clone, Serialize)]
pub struct ModuliSequence {
    pub c: f64,
    pub e_c: u32,
    pub c1: f64,
    /// Primes taken from the `J_l` intervals, `l = 1..=e_c`.
    pub j_primes: Vec<u64>,
    /// Primes taken from the `I_l` intervals, `l = 1..=n`.
    pub i_primes: Vec<u64>,
    pub moduli: Vec<Modulus>,
    /// `2^(omega+1) / log q_n` for each modulus.
    pub ratios: Vec<f64>,
}

fn prime_in(lo: f64, hi: f64) -> Result<u64> {
    if hi >= u64::MAX as f64 / 2.0 {
        return Err(Error::IntervalExceedsRange { lo, hi });
    }
    let start = lo.floor() as u64;
    let upper = hi.ceil() as u64;
    match next_prime(start) {
        Some(p) if (p as f64) < hi => Ok(p),
        _ => Err(Error::NoPrimeInInterval {
            lo: start,
            hi: upper,
        }),
    }
}

/// Squarefree odd moduli `q_n` with `2^(omega(q_n)+1) / log q_n -> c`.
///
/// Picks the smallest prime in each interval `I_l = (e^x, 2e^x)` and
/// `J_l = (2e^x, 4e^x)` with `x = 2^l / c_1`.
pub fn construct_moduli_sequence(c: f64, n: usize) -> Result<ModuliSequence> {
    if !(c > 0.0 && c.is_finite()) || n == 0 {
        return Err(Error::InvalidInput(format!(
            "need 0 < c < inf and n >= 1, got c={c}, n={n}"
        )));
    }
    let limit = 2.0 / 4f64.ln();
    let mut e_c = 1u32;
    while c / 2f64.powi(e_c as i32) >= limit {
        e_c += 1;
    }
    let c1 = c / 2f64.powi(e_c as i32);
    let x = |l: u32| 2f64.powi(l as i32) / c1;
    let check = |l: u32| -> Result<f64> {
        let xl = x(l);
        if xl > MAX_INTERVAL_LOG {
            Err(Error::IntervalExceedsRange {
                lo: xl.exp(),
                hi: 4.0 * xl.exp(),
            })
        } else {
            Ok(xl)
        }
    };

    for l in 1..=e_c.max(n as u32) {
        check(l)?;
    }
    let mut j_primes = Vec::new();
    for l in 1..=e_c {
        let xl = check(l)?;
        j_primes.push(prime_in(2.0 * xl.exp(), 4.0 * xl.exp())?);
    }
    let base: u128 = j_primes.iter().map(|&p| p as u128).product();

    let mut i_primes = Vec::new();
    let mut moduli = Vec::new();
    let mut ratios = Vec::new();
    let mut prod = base;
    for l in 1..=n as u32 {
        let xl = check(l)?;
        let p = prime_in(xl.exp(), 2.0 * xl.exp())?;
        i_primes.push(p);
        prod = prod
            .checked_mul(p as u128)
            .filter(|&v| v <= u64::MAX as u128)
            .ok_or_else(|| Error::Overflow(format!("q_{l} exceeds 64-bit range")))?;
        let m = Modulus::new(prod as u64)?;
        ratios.push(2f64.powi(m.omega as i32 + 1) / (m.q as f64).ln());
        moduli.push(m);
    }
    Ok(ModuliSequence {
        c,
        e_c,
        c1,
        j_primes,
        i_primes,
        moduli,
        ratios,
    })
}
