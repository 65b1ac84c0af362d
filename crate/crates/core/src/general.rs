//! Weighted races `Σ α_i π(x; q, a_i) > 0` with `Σ α_i = 0`: the limiting
//! model, its variance in closed form, and the bias criteria.

use std::collections::{BTreeMap, HashMap};
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{classify_residue, divisors, euler_phi, rho, Modulus};
use crate::dist::model::{require_zeros, ModelPart, RaceModel, ZeroMap};
use crate::error::{Error, Result};
use crate::lfunc::sums::closed_form_quarter;
use crate::lfunc::{DirichletGroup, PrimitiveCharacter};

/// Exact race weight.
pub type Weight = Ratio<i128>;

/// Default bound on `q` for races that need zeros of complex characters.
pub const COMPLEX_ZERO_LIMIT: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// `Σ ε_i α_i < 0`: the race favours the left side.
    Biased,
    /// `Σ ε_i α_i > 0`.
    Reversed,
    /// `Σ ε_i α_i = 0`: density one half.
    Symmetric,
}

#[derive(Debug, Clone, Serialize)]
pub struct RaceSpec {
    pub q: u64,
    pub classes: Vec<u64>,
    #[serde(serialize_with = "serialize_weights")]
    pub weights: Vec<Weight>,
    /// 1 for quadratic residues.
    pub eps: Vec<u8>,
    pub k_r: usize,
    pub orientation: Orientation,
    #[serde(skip)]
    modulus: Modulus,
}

fn serialize_weights<S: serde::Serializer>(w: &[Weight], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(w.iter().map(|x| x.to_string()))
}

/// A weight in a spec file: an integer or a string `"p/q"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum WeightRepr {
    Int(i64),
    Text(String),
}

impl WeightRepr {
    pub fn to_weight(&self) -> Result<Weight> {
        match self {
            Self::Int(n) => Ok(Weight::from_integer(*n as i128)),
            Self::Text(t) => Weight::from_str(t.trim())
                .map_err(|_| Error::InvalidInput(format!("weight {t:?} is not an integer or a fraction p/q"))),
        }
    }
}

/// The JSON layout `{q, classes: [...], weights: [...]}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaceSpecFile {
    pub q: u64,
    pub classes: Vec<i64>,
    pub weights: Vec<WeightRepr>,
}

impl TryFrom<RaceSpecFile> for RaceSpec {
    type Error = Error;

    fn try_from(f: RaceSpecFile) -> Result<Self> {
        let weights = f
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                w.to_weight().map_err(|e| match e {
                    Error::InvalidInput(msg) => Error::InvalidInput(format!("weights[{i}]: {msg}")),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        RaceSpec::new(f.q, f.classes, weights)
    }
}

impl RaceSpec {
    pub fn new(q: u64, classes: Vec<i64>, weights: Vec<Weight>) -> Result<Self> {
        let modulus = Modulus::new(q)?;
        if classes.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} classes but {} weights",
                classes.len(),
                weights.len()
            )));
        }
        if classes.len() < 2 {
            return Err(Error::InvalidInput("a race needs at least two classes".into()));
        }
        let mut seen = BTreeMap::new();
        let mut reduced = Vec::with_capacity(classes.len());
        let mut eps = Vec::with_capacity(classes.len());
        for (i, &a) in classes.iter().enumerate() {
            let r = a.rem_euclid(q as i64) as u64;
            if let Some(j) = seen.insert(r, i) {
                return Err(Error::InvalidInput(format!("classes {} and {} agree modulo {q}", classes[j], a)));
            }
            eps.push(classify_residue(a, &modulus)?);
            reduced.push(r);
        }
        let total: Weight = weights.iter().sum();
        if !total.is_zero() {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 0")));
        }
        if weights.iter().all(Zero::is_zero) {
            return Err(Error::InvalidInput("all weights are zero".into()));
        }
        let k_r = eps.iter().filter(|&&e| e == 1).count();
        let mut spec = Self {
            q,
            classes: reduced,
            weights,
            eps,
            k_r,
            orientation: Orientation::Symmetric,
            modulus,
        };
        let s = spec.residue_weight();
        spec.orientation = if s.is_negative() {
            Orientation::Biased
        } else if s.is_positive() {
            Orientation::Reversed
        } else {
            Orientation::Symmetric
        };
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: RaceSpecFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        file.try_into()
    }

    /// Non-residues against residues: weight `1/φ(q)` on each non-residue
    /// and `(1 - ρ(q))/φ(q)` on each residue.
    pub fn nr_r(q: u64) -> Result<Self> {
        let m = Modulus::new(q)?;
        let phi = m.euler_phi as i128;
        let r = rho(&m) as i128;
        let mut classes = Vec::new();
        let mut weights = Vec::new();
        for a in m.units() {
            classes.push(a as i64);
            let w = if classify_residue(a as i64, &m)? == 1 { 1 - r } else { 1 };
            weights.push(Weight::new(w, phi));
        }
        Self::new(q, classes, weights)
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn k_n(&self) -> usize {
        self.k() - self.k_r
    }

    /// `Σ ε_i α_i`.
    pub fn residue_weight(&self) -> Weight {
        self.weights
            .iter()
            .zip(&self.eps)
            .filter(|(_, &e)| e == 1)
            .map(|(w, _)| *w)
            .sum()
    }

    /// `Σ α_i²`.
    pub fn square_norm(&self) -> Weight {
        self.weights.iter().map(|w| w * w).sum()
    }

    /// `Σ_{i≠j} α_i α_j`, which equals `-Σ α_i²` when the weights sum to 0.
    pub fn cross_sum(&self) -> Weight {
        let s: Weight = self.weights.iter().sum();
        s * s - self.square_norm()
    }

    /// The same race with every weight multiplied by `c > 0`.
    pub fn scaled(&self, c: Weight) -> Result<Self> {
        if !c.is_positive() {
            return Err(Error::InvalidInput("scale must be positive".into()));
        }
        let mut out = self.clone();
        out.weights.iter_mut().for_each(|w| *w *= c);
        Ok(out)
    }

    /// `-ρ(q) Σ ε_i α_i`.
    pub fn mean(&self) -> f64 {
        -(rho(&self.modulus) as f64) * to_f64(self.residue_weight())
    }

    fn float_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| to_f64(*w)).collect()
    }

    /// `|Σ α_i chi(a_i)|` for every character of `group`, by index.
    fn coefficients(&self, group: &DirichletGroup) -> Vec<f64> {
        let w = self.float_weights();
        (0..group.order())
            .into_par_iter()
            .map(|idx| {
                let s: Complex64 = self
                    .classes
                    .iter()
                    .zip(&w)
                    .map(|(&a, &x)| group.value_at(idx, a) * x)
                    .sum();
                s.norm()
            })
            .collect()
    }

    fn coefficient_floor(&self) -> f64 {
        1e-12 * self.float_weights().iter().map(|w| w.abs()).sum::<f64>()
    }
}

fn to_f64(w: Weight) -> f64 {
    w.to_f64().unwrap_or(f64::NAN)
}

/// A group of characters feeding one part of the model: a real character,
/// or a complex character with its conjugate.
#[derive(Debug, Clone)]
pub struct CharacterTerm {
    pub coefficient: f64,
    pub characters: Vec<PrimitiveCharacter>,
}

/// The non-principal characters whose coefficient in the race is nonzero,
/// conjugates grouped together.
pub fn contributing_characters(spec: &RaceSpec) -> Result<Vec<CharacterTerm>> {
    let group = DirichletGroup::new(spec.q)?;
    let coefficients = spec.coefficients(&group);
    let floor = spec.coefficient_floor();
    let mut out = Vec::new();
    for (idx, &c) in coefficients.iter().enumerate().skip(1) {
        if c <= floor {
            continue;
        }
        let idx = idx as u64;
        let conj = group.conj_index(idx);
        if conj < idx {
            continue;
        }
        let prim = group.character(idx).to_primitive()?;
        let characters = if conj == idx {
            vec![prim]
        } else {
            let other = prim.conj();
            vec![prim, other]
        };
        out.push(CharacterTerm {
            coefficient: c,
            characters,
        });
    }
    Ok(out)
}

/// Characters whose zeros the race model needs. Complex characters are
/// only allowed up to `complex_limit`.
pub fn required_characters(spec: &RaceSpec, complex_limit: u64) -> Result<Vec<PrimitiveCharacter>> {
    let terms = contributing_characters(spec)?;
    let out: Vec<PrimitiveCharacter> = terms.into_iter().flat_map(|t| t.characters).collect();
    if spec.q > complex_limit && out.iter().any(|c| !c.is_real) {
        return Err(Error::InvalidInput(format!(
            "race modulo {} needs zeros of complex characters; supported up to q = {complex_limit}",
            spec.q
        )));
    }
    Ok(out)
}

/// `X = -ρ(q) Σ ε_i α_i + Σ_χ |Σ α_i χ(a_i)| Σ_γ 2 Re Z_γ/√(1/4 + γ²)`.
pub fn build_general_model(spec: &RaceSpec, zeros: &ZeroMap) -> Result<RaceModel> {
    let mut parts = Vec::new();
    for term in contributing_characters(spec)? {
        let mut gammas = Vec::new();
        let mut height = f64::INFINITY;
        let mut keys = Vec::new();
        for chi in &term.characters {
            let zs = require_zeros(zeros, chi.key)?;
            gammas.extend_from_slice(&zs.gammas);
            height = height.min(zs.height);
            keys.push(chi.key);
        }
        let lead = &term.characters[0];
        parts.push(ModelPart {
            keys,
            coefficient: term.coefficient,
            conductor: lead.conductor,
            height,
            gammas,
            closed_form: closed_form_quarter(lead)?,
        });
    }
    Ok(RaceModel::from_parts(spec.q, spec.mean(), parts))
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactVariance {
    /// `Σ_χ |Σ α_i χ(a_i)|² log q*` from the arithmetic formula.
    pub conductor_weighted: f64,
    /// `Σ_χ |Σ α_i χ(a_i)|² Σ_γ 1/(1/4 + γ²)`, the variance of the model.
    pub zero_sum: Option<f64>,
}

/// `φ(q)‖α‖²(log q - Σ_{p|q} log p/(p-1)) - φ(q) Σ_{i≠j} α_i α_j Λ(m)/φ(m)`
/// with `m = q/(q, a_i a_j⁻¹ - 1)`.
pub fn conductor_weighted_variance(spec: &RaceSpec) -> f64 {
    let q = spec.q;
    let phi = spec.modulus.euler_phi as f64;
    let local: f64 = spec
        .modulus
        .factors
        .iter()
        .map(|&(p, _)| (p as f64).ln() / (p - 1) as f64)
        .sum();
    let diagonal = phi * to_f64(spec.square_norm()) * ((q as f64).ln() - local);
    diagonal - phi * cross_von_mangoldt(spec)
}

/// `Σ_{i≠j} α_i α_j Λ(m)/φ(m)`. Only `m = p^e` counts, and `m = p^e`
/// exactly when `a_i ≡ a_j` modulo `q/p^e` but not modulo `q/p^{e-1}`, so
/// the sum reduces to [`collision_sum`] at the divisors `q/p^e`.
fn cross_von_mangoldt(spec: &RaceSpec) -> f64 {
    let q = spec.q;
    let w = spec.float_weights();
    let mut total = 0.0;
    for &(p, v) in &spec.modulus.factors {
        let mut finer = collision_sum(&spec.classes, &w, q);
        for e in 1..=v {
            let d = q / p.pow(e);
            let coarser = collision_sum(&spec.classes, &w, d);
            total += (p as f64).ln() / euler_phi(p.pow(e)) as f64 * (coarser - finer);
            finer = coarser;
        }
    }
    total
}

/// `Σ_{i,j : a_i ≡ a_j mod d} α_i α_j`.
fn collision_sum(classes: &[u64], w: &[f64], d: u64) -> f64 {
    let mut sums: HashMap<u64, f64> = HashMap::new();
    for (&a, &x) in classes.iter().zip(w) {
        *sums.entry(a % d).or_insert(0.0) += x;
    }
    sums.values().map(|s| s * s).sum()
}

/// `Σ_χ |Σ α_i χ(a_i)|² log q*` by enumerating the characters.
pub fn character_sum_variance(spec: &RaceSpec) -> Result<f64> {
    let group = DirichletGroup::new(spec.q)?;
    let coefficients = spec.coefficients(&group);
    Ok(coefficients
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| **c > 0.0)
        .map(|(i, c)| c * c * (group.character(i as u64).conductor as f64).ln())
        .sum())
}

/// `Σ_χ |Σ α_i χ(a_i)|² Σ_γ 1/(1/4 + γ²)` from `L'/L(1, χ)`.
pub fn zero_sum_variance(spec: &RaceSpec) -> Result<f64> {
    let mut total = 0.0;
    for term in contributing_characters(spec)? {
        let cf = closed_form_quarter(&term.characters[0])?;
        total += term.coefficient * term.coefficient * term.characters.len() as f64 * cf;
    }
    Ok(total)
}

/// Both variances. The zero sum needs `L'/L(1)` for every contributing
/// character and is skipped above `complex_limit`.
pub fn exact_variance(spec: &RaceSpec, complex_limit: u64) -> Result<ExactVariance> {
    let zero_sum = if spec.q <= complex_limit {
        Some(zero_sum_variance(spec)?)
    } else {
        None
    };
    Ok(ExactVariance {
        conductor_weighted: conductor_weighted_variance(spec),
        zero_sum,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceBounds {
    /// `φ(q)‖α‖² log(3φ(q)/k)`.
    pub lower_shape: f64,
    /// `φ(q)‖α‖² log q`.
    pub upper_shape: f64,
    pub conductor_weighted: f64,
    /// `conductor_weighted / lower_shape`.
    pub lower_ratio: f64,
    /// `conductor_weighted / upper_shape`.
    pub upper_ratio: f64,
    /// `min(1, k² log q / (φ(q) log(3φ(q)/k)))`, the size of the error in
    /// the Gaussian approximation for general races.
    pub clt_error_shape: f64,
}

/// The two expressions bracketing the variance up to constants, with the
/// constants realized by this race.
pub fn variance_bounds(spec: &RaceSpec) -> VarianceBounds {
    let phi = spec.modulus.euler_phi as f64;
    let k = spec.k() as f64;
    let norm = to_f64(spec.square_norm());
    let log_q = (spec.q as f64).ln();
    let spread = (3.0 * phi / k).ln();
    let lower_shape = phi * norm * spread;
    let upper_shape = phi * norm * log_q;
    let v = conductor_weighted_variance(spec);
    VarianceBounds {
        lower_shape,
        upper_shape,
        conductor_weighted: v,
        lower_ratio: v / lower_shape,
        upper_ratio: v / upper_shape,
        clt_error_shape: (k * k * log_q / (phi * spread)).min(1.0),
    }
}

/// `ρ(q)²/(φ(q) log q)`.
fn arithmetic_scale(m: &Modulus) -> f64 {
    let r = rho(m) as f64;
    r * r / (m.euler_phi as f64 * (m.q as f64).ln())
}

#[derive(Debug, Clone, Serialize)]
pub struct BiasVerdict {
    /// `Σ α_i² / (Σ ε_i α_i)²`.
    pub lhs: f64,
    /// `ε ρ(q)²/(φ(q) log q)`.
    pub rhs: f64,
    pub satisfied: bool,
    pub margin: f64,
    /// Cauchy–Schwarz floor `1/k_R` of the left side.
    pub floor: f64,
    /// Smallest `ε` for which the inequality holds.
    pub critical_epsilon: f64,
    /// `1 - c ε` with the caller's shape constant `c`, when satisfied.
    pub density_lower_shape: Option<f64>,
}

/// Sufficient condition for a race to be biased to within `c ε` of 1.
pub fn check_bias_criterion(spec: &RaceSpec, epsilon: f64, c: f64) -> Result<BiasVerdict> {
    let s = spec.residue_weight();
    if s.is_zero() {
        return Err(Error::InvalidInput("symmetric race: Σ ε_i α_i = 0".into()));
    }
    let lhs = to_f64(spec.square_norm() / (s * s));
    let scale = arithmetic_scale(&spec.modulus);
    let rhs = epsilon * scale;
    let satisfied = lhs < rhs;
    Ok(BiasVerdict {
        lhs,
        rhs,
        satisfied,
        margin: rhs - lhs,
        floor: 1.0 / spec.k_r as f64,
        critical_epsilon: lhs / scale,
        density_lower_shape: satisfied.then_some(1.0 - c * epsilon),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantRaceVerdict {
    pub k_n: u64,
    pub k_r: u64,
    /// `1/k_N + 1/k_R`.
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// Number of admissible `(k_N, k_R)` satisfying the inequality.
    pub admissible_pairs: u64,
    pub spec: RaceSpec,
}

/// The race with weight `k_R` on the first `k_N` non-residues and `-k_N`
/// on the first `k_R` residues.
pub fn constant_coefficient_spec(q: u64, k_n: u64, k_r: u64) -> Result<RaceSpec> {
    let m = Modulus::new(q)?;
    let phi = m.euler_phi;
    let r = rho(&m);
    if k_r == 0 || k_r > phi / r {
        return Err(Error::InvalidInput(format!("k_R must lie in [1, {}]", phi / r)));
    }
    if k_n == 0 || k_n > phi - phi / r {
        return Err(Error::InvalidInput(format!("k_N must lie in [1, {}]", phi - phi / r)));
    }
    let mut res = Vec::new();
    let mut non = Vec::new();
    for a in m.units() {
        if classify_residue(a as i64, &m)? == 1 {
            res.push(a);
        } else {
            non.push(a);
        }
    }
    let mut classes = Vec::new();
    let mut weights = Vec::new();
    for &a in &non[..k_n as usize] {
        classes.push(a as i64);
        weights.push(Weight::from_integer(k_r as i128));
    }
    for &a in &res[..k_r as usize] {
        classes.push(a as i64);
        weights.push(Weight::from_integer(-(k_n as i128)));
    }
    RaceSpec::new(q, classes, weights)
}

/// `1/k_N + 1/k_R < ε ρ(q)²/(φ(q) log q)`, with the count of all
/// admissible pairs that satisfy it.
pub fn check_constant_coefficient_race(q: u64, k_n: u64, k_r: u64, epsilon: f64) -> Result<ConstantRaceVerdict> {
    let spec = constant_coefficient_spec(q, k_n, k_r)?;
    let m = spec.modulus.clone();
    let rhs = epsilon * arithmetic_scale(&m);
    let lhs = 1.0 / k_n as f64 + 1.0 / k_r as f64;
    let r = rho(&m);
    let (max_r, max_n) = (m.euler_phi / r, m.euler_phi - m.euler_phi / r);
    let mut admissible_pairs = 0;
    for kr in 1..=max_r {
        let room = rhs - 1.0 / kr as f64;
        if room <= 0.0 {
            continue;
        }
        // smallest k_N with 1/k_N < room
        let mut start = (1.0 / room).floor() as u64;
        while start == 0 || 1.0 / start as f64 >= room {
            start += 1;
        }
        if start <= max_n {
            admissible_pairs += max_n - start + 1;
        }
    }
    Ok(ConstantRaceVerdict {
        k_n,
        k_r,
        lhs,
        rhs,
        satisfied: lhs < rhs,
        admissible_pairs,
        spec,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitationVerdict {
    /// `(Σ ε_i α_i)² / Σ α_i²`.
    pub lhs: f64,
    /// `K₂ φ(q) log(3φ(q)/k) / ρ(q)²`.
    pub rhs: f64,
    /// When true the race cannot be highly biased.
    pub hypothesis_holds: bool,
    /// `k_R ρ(q)²/φ(q)`; a highly biased race needs this to be large.
    pub residue_count_ratio: f64,
}

/// Sufficient condition for a race to stay bounded away from density 1.
pub fn check_limitation(spec: &RaceSpec, k1: f64, k2: f64) -> Result<LimitationVerdict> {
    let phi = spec.modulus.euler_phi as f64;
    let k = spec.k() as f64;
    if k > k1 * phi {
        return Err(Error::InvalidInput(format!("k = {k} exceeds K1 φ(q) = {}", k1 * phi)));
    }
    let s = spec.residue_weight();
    let lhs = to_f64(s * s / spec.square_norm());
    let r = rho(&spec.modulus) as f64;
    let rhs = k2 * phi * (3.0 * phi / k).ln() / (r * r);
    Ok(LimitationVerdict {
        lhs,
        rhs,
        hypothesis_holds: lhs <= rhs,
        residue_count_ratio: spec.k_r as f64 * r * r / phi,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SmallConductors {
    pub count: u64,
    /// `min(L τ(q), L²)`.
    pub bound: u64,
}

/// Number of primitive characters modulo `d`.
fn primitive_count(d: u64) -> u64 {
    crate::arith::factorize(d)
        .iter()
        .map(|&(p, e)| match e {
            1 => p - 2,
            _ => p.pow(e - 2) * (p - 1) * (p - 1),
        })
        .product()
}

/// `#{χ mod q : q* <= L}`, counted through the conductors `d | q`.
pub fn small_conductor_count(q: u64, limit: u64) -> Result<SmallConductors> {
    let m = Modulus::new(q)?;
    if limit == 0 || limit > m.euler_phi {
        return Err(Error::InvalidInput(format!("L must lie in [1, φ(q) = {}]", m.euler_phi)));
    }
    let divs = divisors(q);
    let count = divs.iter().filter(|&&d| d <= limit).map(|&d| primitive_count(d)).sum();
    let tau = divs.len() as u64;
    Ok(SmallConductors {
        count,
        bound: (limit * tau).min(limit * limit),
    })
}
