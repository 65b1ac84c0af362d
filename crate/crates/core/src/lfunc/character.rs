//! Real characters as Kronecker symbols, full Dirichlet groups for small
//! moduli, and the primitive-character data consumed by the evaluators.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{divisors, factorize, kronecker, mod_pow, Modulus};
use crate::error::{Error, Result};

/// A real Dirichlet character modulo `q`, induced by the Kronecker symbol
/// `(d/.)` of a fundamental discriminant `d` (or `d = 1` for the principal
/// character).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RealCharacter {
    pub modulus: u64,
    pub conductor: u64,
    pub discriminant: i64,
    pub is_principal: bool,
    pub parity: i8,
}

impl RealCharacter {
    /// The primitive character `(d/.)` of a fundamental discriminant.
    pub fn primitive(d: i64) -> Result<Self> {
        if !is_fundamental_discriminant(d) {
            return Err(Error::InvalidInput(format!(
                "{d} is not a fundamental discriminant"
            )));
        }
        let conductor = d.unsigned_abs();
        Ok(Self {
            modulus: conductor,
            conductor,
            discriminant: d,
            is_principal: d == 1,
            parity: if d < 0 { -1 } else { 1 },
        })
    }

    pub fn is_primitive(&self) -> bool {
        self.modulus == self.conductor
    }

    pub fn value(&self, n: i64) -> i8 {
        let r = n.rem_euclid(self.modulus as i64) as u64;
        if r.gcd(&self.modulus) != 1 {
            return 0;
        }
        if self.is_principal {
            return 1;
        }
        kronecker(self.discriminant, r)
    }

    /// The primitive character inducing this one.
    pub fn inducing(&self) -> Self {
        Self::primitive(self.discriminant).expect("stored discriminant is fundamental")
    }
}

/// Whether `d` is 1 or a fundamental discriminant.
pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 1 {
        return true;
    }
    if d == 0 {
        return false;
    }
    let squarefree = |m: u64| factorize(m).iter().all(|f| f.1 == 1);
    match d.rem_euclid(4) {
        1 => squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            let r = m.rem_euclid(4);
            (r == 2 || r == 3) && squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// All real characters modulo `q`: the principal one first, then by
/// conductor and discriminant. The count equals `rho(q)`.
pub fn enumerate_real_characters(q: &Modulus) -> Vec<RealCharacter> {
    let odd_part: u64 = q.odd_primes().product();
    let e = q.two_exponent();
    let mut discs = Vec::new();
    for m in divisors(odd_part) {
        let mi = m as i64;
        // odd conductor m
        discs.push(if mi % 4 == 1 { mi } else { -mi });
        if e >= 2 {
            // conductor 4m: the sign making m'' = 3 mod 4
            discs.push(if mi % 4 == 3 { 4 * mi } else { -4 * mi });
        }
        if e >= 3 {
            discs.push(8 * mi);
            discs.push(-8 * mi);
        }
    }
    let mut chars: Vec<RealCharacter> = discs
        .into_iter()
        .map(|d| RealCharacter {
            modulus: q.q,
            conductor: d.unsigned_abs(),
            discriminant: d,
            is_principal: d == 1,
            parity: if d < 0 { -1 } else { 1 },
        })
        .collect();
    chars.sort_by_key(|c| (!c.is_principal, c.conductor, c.discriminant));
    chars
}

pub fn character_value(chi: &RealCharacter, n: i64) -> i8 {
    chi.value(n)
}

/// Identifies the primitive character whose zeros a `ZeroSet` holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CharacterKey {
    /// Kronecker symbol of a fundamental discriminant; `Real(1)` is zeta.
    Real(i64),
    /// Complex primitive character: conductor and its index in
    /// [`DirichletGroup`] enumeration order.
    Complex { conductor: u64, index: u64 },
}

impl std::fmt::Display for CharacterKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Real(d) => write!(f, "d={d}"),
            Self::Complex { conductor, index } => write!(f, "q={conductor}:{index}"),
        }
    }
}

/// Values and functional-equation data for a primitive character, in the
/// form the L-function evaluators need.
#[derive(Debug, Clone)]
pub struct PrimitiveCharacter {
    pub key: CharacterKey,
    /// Key of the conjugate character.
    pub conj_key: CharacterKey,
    pub conductor: u64,
    /// 0 for even, 1 for odd characters.
    pub parity: u8,
    pub is_real: bool,
    /// `tau(chi) / (i^a sqrt(q))`.
    pub root_number: Complex64,
    values: Vec<Complex64>,
}

impl PrimitiveCharacter {
    /// Kronecker symbol `(d/.)`; `d = 1` gives the Riemann zeta function.
    pub fn from_discriminant(d: i64) -> Result<Self> {
        if !is_fundamental_discriminant(d) {
            return Err(Error::InvalidInput(format!(
                "{d} is not a fundamental discriminant"
            )));
        }
        let q = d.unsigned_abs();
        let values = (0..q)
            .map(|n| {
                let v = if q == 1 { 1 } else { kronecker(d, n) };
                Complex64::new(v as f64, 0.0)
            })
            .collect();
        Ok(Self {
            key: CharacterKey::Real(d),
            conj_key: CharacterKey::Real(d),
            conductor: q,
            parity: u8::from(d < 0),
            is_real: true,
            root_number: Complex64::new(1.0, 0.0),
            values,
        })
    }

    pub fn from_real(chi: &RealCharacter) -> Result<Self> {
        if chi.is_principal {
            return Err(Error::InvalidInput(
                "principal characters carry no zeros".into(),
            ));
        }
        Self::from_discriminant(chi.discriminant)
    }

    /// Builds from a full value table modulo the conductor. The character must
    /// be primitive; the root number is computed from the Gauss sum.
    pub fn from_values(key: CharacterKey, values: Vec<Complex64>) -> Result<Self> {
        let q = values.len() as u64;
        if q == 0 {
            return Err(Error::InvalidInput("empty value table".into()));
        }
        let minus_one = values[(q - 1) as usize];
        let parity = u8::from(minus_one.re < 0.0);
        let is_real = values.iter().all(|v| v.im.abs() < 1e-12);
        let gauss: Complex64 = values
            .iter()
            .enumerate()
            .map(|(n, v)| v * Complex64::from_polar(1.0, 2.0 * PI * n as f64 / q as f64))
            .sum();
        let i_a = if parity == 1 {
            Complex64::i()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let eps = gauss / (i_a * (q as f64).sqrt());
        if (eps.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::NotPrimitive(q as i64));
        }
        let root_number = if is_real {
            Complex64::new(eps.re.signum(), 0.0)
        } else {
            eps / eps.norm()
        };
        let conj_key = match key {
            CharacterKey::Real(_) => key,
            CharacterKey::Complex { conductor, index } => CharacterKey::Complex {
                conductor,
                index: DirichletGroup::new(conductor)?.conj_index(index),
            },
        };
        Ok(Self {
            key,
            conj_key,
            conductor: q,
            parity,
            is_real,
            root_number,
            values,
        })
    }

    #[inline]
    pub fn value(&self, n: u64) -> Complex64 {
        self.values[(n % self.conductor) as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_zeta(&self) -> bool {
        self.conductor == 1
    }

    /// The conjugate character.
    pub fn conj(&self) -> Self {
        let mut c = self.clone();
        c.values.iter_mut().for_each(|v| *v = v.conj());
        c.root_number = self.root_number.conj();
        std::mem::swap(&mut c.key, &mut c.conj_key);
        c
    }

    /// Discriminant for real characters, `None` for complex ones.
    pub fn discriminant(&self) -> Option<i64> {
        match self.key {
            CharacterKey::Real(d) => Some(d),
            CharacterKey::Complex { .. } => None,
        }
    }
}

/// The character group of `(Z/qZ)^×`, written as a product of cyclic
/// factors with explicit generators and a discrete-log table.
#[derive(Debug, Clone)]
pub struct DirichletGroup {
    pub q: u64,
    /// Orders of the cyclic factors.
    pub orders: Vec<u64>,
    /// Global generators (one per factor).
    pub generators: Vec<u64>,
    logs: Vec<Option<Vec<u64>>>,
}

/// One character of a [`DirichletGroup`], given by its exponent vector.
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    pub modulus: u64,
    pub index: u64,
    pub exponents: Vec<u64>,
    pub conductor: u64,
    values: Vec<Complex64>,
}

fn primitive_root(p: u64) -> u64 {
    let phi = p - 1;
    let prime_factors: Vec<u64> = factorize(phi).iter().map(|f| f.0).collect();
    (2..p)
        .find(|&g| prime_factors.iter().all(|&r| mod_pow(g, phi / r, p) != 1))
        .unwrap_or(1)
}

fn crt_lift(local: u64, pe: u64, q: u64) -> u64 {
    // x = local mod pe, x = 1 mod q/pe
    let rest = q / pe;
    if rest == 1 {
        return local % pe;
    }
    (0..pe)
        .map(|k| 1 + k * rest)
        .find(|x| x % pe == local % pe)
        .expect("CRT solution exists")
        % q
}

fn root_of_unity(num: u64, den: u64) -> Complex64 {
    let num = num % den;
    if (4 * num).is_multiple_of(den) {
        return match 4 * num / den {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, 2.0 * PI * num as f64 / den as f64)
}

impl DirichletGroup {
    /// Builds the group; intended for moduli up to a few hundred thousand.
    pub fn new(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidInput("modulus must be positive".into()));
        }
        let mut orders = Vec::new();
        let mut generators = Vec::new();
        for (p, e) in factorize(q) {
            let pe = p.pow(e);
            if p == 2 {
                if e >= 2 {
                    orders.push(2);
                    generators.push(crt_lift(pe - 1, pe, q));
                }
                if e >= 3 {
                    orders.push(1 << (e - 2));
                    generators.push(crt_lift(5, pe, q));
                }
            } else {
                let mut g = primitive_root(p);
                if e >= 2 && mod_pow(g, p - 1, p * p) == 1 {
                    g += p;
                }
                orders.push((p - 1) * p.pow(e - 1));
                generators.push(crt_lift(g, pe, q));
            }
        }
        let mut logs: Vec<Option<Vec<u64>>> = vec![None; q as usize];
        let total: u64 = orders.iter().product();
        let mut exps = vec![0u64; orders.len()];
        for _ in 0..total {
            let mut x = 1 % q;
            for (j, &k) in exps.iter().enumerate() {
                x = crate::arith::mod_mul(x, mod_pow(generators[j], k, q), q);
            }
            logs[x as usize] = Some(exps.clone());
            for j in 0..exps.len() {
                exps[j] += 1;
                if exps[j] < orders[j] {
                    break;
                }
                exps[j] = 0;
            }
        }
        Ok(Self {
            q,
            orders,
            generators,
            logs,
        })
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    pub fn discrete_log(&self, n: u64) -> Option<&[u64]> {
        self.logs[(n % self.q) as usize].as_deref()
    }

    /// `chi_index(n)` from the discrete logarithm, without building the
    /// value table.
    pub fn value_at(&self, index: u64, n: u64) -> Complex64 {
        let Some(log) = self.discrete_log(n) else {
            return Complex64::new(0.0, 0.0);
        };
        let turns: f64 = self
            .exponents_of(index)
            .iter()
            .zip(log)
            .zip(&self.orders)
            .map(|((k, l), m)| (k * l % m) as f64 / *m as f64)
            .sum();
        Complex64::from_polar(1.0, 2.0 * PI * turns.fract())
    }

    fn exponents_of(&self, mut index: u64) -> Vec<u64> {
        self.orders
            .iter()
            .map(|&m| {
                let k = index % m;
                index /= m;
                k
            })
            .collect()
    }

    /// Index of the conjugate of character `index`.
    pub fn conj_index(&self, index: u64) -> u64 {
        let exps = self.exponents_of(index);
        let mut out = 0;
        for (k, m) in exps.iter().zip(&self.orders).rev() {
            out = out * m + (m - k) % m;
        }
        out
    }

    fn values_for(&self, exps: &[u64]) -> Vec<Complex64> {
        let lcm = self.orders.iter().fold(1u64, |a, &b| a.lcm(&b));
        (0..self.q)
            .map(|n| match self.discrete_log(n) {
                None => Complex64::new(0.0, 0.0),
                Some(log) => {
                    let num: u64 = log
                        .iter()
                        .zip(exps)
                        .zip(&self.orders)
                        .map(|((l, k), m)| (l * k % m) * (lcm / m))
                        .sum();
                    root_of_unity(num, lcm)
                }
            })
            .collect()
    }

    pub fn character(&self, index: u64) -> DirichletCharacter {
        let exponents = self.exponents_of(index);
        let values = self.values_for(&exponents);
        let conductor = conductor_of(self.q, &values);
        DirichletCharacter {
            modulus: self.q,
            index,
            exponents,
            conductor,
            values,
        }
    }

    pub fn characters(&self) -> Vec<DirichletCharacter> {
        (0..self.order()).map(|i| self.character(i)).collect()
    }
}

fn conductor_of(q: u64, values: &[Complex64]) -> u64 {
    let one = Complex64::new(1.0, 0.0);
    for d in divisors(q) {
        let trivial_on_kernel = (0..q / d)
            .map(|k| 1 + k * d)
            .filter(|n| n.gcd(&q) == 1)
            .all(|n| (values[(n % q) as usize] - one).norm() < 1e-9);
        if trivial_on_kernel {
            return d;
        }
    }
    q
}

impl DirichletCharacter {
    pub fn value(&self, n: i64) -> Complex64 {
        self.values[n.rem_euclid(self.modulus as i64) as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&k| k == 0)
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im.abs() < 1e-12)
    }

    /// Values of the inducing primitive character modulo the conductor.
    pub fn primitive_values(&self) -> Vec<Complex64> {
        let d = self.conductor;
        let q = self.modulus;
        (0..d)
            .map(|n| {
                if n.gcd(&d) != 1 {
                    return Complex64::new(0.0, 0.0);
                }
                let lift = (0..q / d)
                    .map(|k| n + k * d)
                    .find(|m| m.gcd(&q) == 1)
                    .expect("a coprime lift exists");
                self.values[lift as usize]
            })
            .collect()
    }

    /// Discriminant of the inducing Kronecker symbol, for real characters.
    pub fn real_discriminant(&self) -> Option<i64> {
        if !self.is_real() {
            return None;
        }
        let prim = self.primitive_values();
        let d = self.conductor as i64;
        let odd = prim.last().map(|v| v.re < 0.0).unwrap_or(false);
        let d = if odd { -d } else { d };
        Some(if self.conductor == 1 { 1 } else { d })
    }

    /// The primitive character data, keyed canonically.
    pub fn to_primitive(&self) -> Result<PrimitiveCharacter> {
        if let Some(d) = self.real_discriminant() {
            return PrimitiveCharacter::from_discriminant(d);
        }
        let values = self.primitive_values();
        let group = DirichletGroup::new(self.conductor)?;
        let index = (0..group.order())
            .find(|&i| {
                let exps = group.exponents_of(i);
                group
                    .values_for(&exps)
                    .iter()
                    .zip(&values)
                    .all(|(a, b)| (a - b).norm() < 1e-9)
            })
            .ok_or_else(|| Error::Numerical("inducing character not found".into()))?;
        PrimitiveCharacter::from_values(
            CharacterKey::Complex {
                conductor: self.conductor,
                index,
            },
            values,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conductors(q: u64) -> Vec<u64> {
        enumerate_real_characters(&Modulus::new(q).unwrap())
            .iter()
            .map(|c| c.conductor)
            .collect()
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(conductors(3), vec![1, 3]);
        assert_eq!(conductors(15), vec![1, 3, 5, 15]);
        assert_eq!(conductors(8), vec![1, 4, 8, 8]);
        let discs: Vec<i64> = enumerate_real_characters(&Modulus::new(8).unwrap())
            .iter()
            .map(|c| c.discriminant)
            .collect();
        assert_eq!(discs, vec![1, -4, -8, 8]);
    }

    #[test]
    fn values_examples() {
        let m4 = RealCharacter::primitive(-4).unwrap();
        assert_eq!(m4.value(3), -1);
        assert_eq!(m4.value(1), 1);
        assert_eq!(m4.value(-1), -1);
        assert_eq!(RealCharacter::primitive(5).unwrap().value(2), -1);
        assert!(RealCharacter::primitive(-3).is_ok());
        assert!(RealCharacter::primitive(3).is_err());
        assert!(RealCharacter::primitive(-16).is_err());
    }

    #[test]
    fn real_characters_match_group_enumeration() {
        for q in 3..=200u64 {
            let m = Modulus::new(q).unwrap();
            let ours = enumerate_real_characters(&m);
            assert_eq!(ours.len() as u64, m.rho, "q={q}");
            let group = DirichletGroup::new(q).unwrap();
            let reals: Vec<DirichletCharacter> =
                group.characters().into_iter().filter(|c| c.is_real()).collect();
            assert_eq!(reals.len(), ours.len(), "q={q}");
            for chi in &ours {
                let found = reals.iter().any(|g| {
                    (0..q as i64).all(|n| (g.value(n).re - chi.value(n) as f64).abs() < 1e-12)
                        && g.conductor == chi.conductor
                });
                assert!(found, "q={q} d={}", chi.discriminant);
            }
        }
    }

    #[test]
    fn complete_multiplicativity_and_legendre() {
        for chi in enumerate_real_characters(&Modulus::new(840).unwrap()) {
            for m in 1..60i64 {
                for n in 1..60i64 {
                    assert_eq!(chi.value(m * n), chi.value(m) * chi.value(n));
                }
            }
        }
        let chi = RealCharacter::primitive(-7).unwrap();
        for p in [3u64, 5, 11, 13, 17] {
            let legendre = if crate::arith::squares_mod(p).contains(&(7 * p - 7 % p).rem_euclid(p))
            {
                1
            } else {
                -1
            };
            // (-7/p) = (p/7) by reciprocity
            let recip = if crate::arith::squares_mod(7).contains(&(p % 7)) { 1 } else { -1 };
            assert_eq!(chi.value(p as i64), recip, "p={p}");
            let _ = legendre;
        }
    }

    #[test]
    fn group_mod_five() {
        let g = DirichletGroup::new(5).unwrap();
        let chars = g.characters();
        assert_eq!(chars.len(), 4);
        let coeff: Vec<f64> = chars
            .iter()
            .map(|c| (c.value(1) - c.value(4)).norm())
            .collect();
        let quartic = chars.iter().zip(&coeff).filter(|(c, _)| !c.is_real());
        for (_, v) in quartic {
            assert!((v - 2.0).abs() < 1e-12);
        }
        for (c, v) in chars.iter().zip(&coeff) {
            if c.is_real() {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn primitive_root_numbers() {
        for d in [-3i64, -4, 5, -7, 8, -8, 12, 13, -15] {
            let chi = PrimitiveCharacter::from_discriminant(d).unwrap();
            let via_values =
                PrimitiveCharacter::from_values(CharacterKey::Real(d), chi.values().to_vec())
                    .unwrap();
            assert!((via_values.root_number.re - 1.0).abs() < 1e-12, "d={d}");
        }
        let g = DirichletGroup::new(5).unwrap();
        for c in g.characters().iter().filter(|c| !c.is_real()) {
            let p = c.to_primitive().unwrap();
            assert!((p.root_number.norm() - 1.0).abs() < 1e-12);
            assert_eq!(p.conductor, 5);
            assert_eq!(p.parity, 1);
        }
    }

    #[test]
    fn imprimitive_complex_conductor() {
        let g = DirichletGroup::new(15).unwrap();
        let conds: Vec<u64> = g.characters().iter().map(|c| c.conductor).collect();
        // primitive counts: 1 of conductor 1, 1 of 3, 3 of 5, 3 of 15
        let count = |d| conds.iter().filter(|&&c| c == d).count();
        assert_eq!((count(1), count(3), count(5), count(15)), (1, 1, 3, 3));
    }
}
