//! Boolean predicates, their Fourier spectra, and the mixture polynomial
//! `ξ(s) = Stab_s(f) - f̂(∅)²` of the associated spin glass.
//!
//! Truth tables are indexed lexicographically: the first variable is the most
//! significant bit of the index, and a bit value `b` encodes the spin `1 - 2b`.
//! A literal is satisfied by spin `+1`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Largest arity accepted for a truth table (`2^20` entries).
pub const MAX_ARITY: usize = 20;

const PARSEVAL_TOL: f64 = 1e-12;

/// A `k`-ary function `{±1}^k -> [-1, 1]` stored as a truth table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    arity: usize,
    table: Vec<f64>,
    name: Option<String>,
}

impl Predicate {
    pub fn new(arity: usize, table: Vec<f64>, name: Option<String>) -> Result<Self> {
        if arity == 0 || arity > MAX_ARITY {
            return Err(Error::Validation(format!(
                "arity must lie in 1..={MAX_ARITY}, got {arity}"
            )));
        }
        let expected = 1usize << arity;
        if table.len() != expected {
            return Err(Error::Validation(format!(
                "truth table for k={arity} must have 2^{arity} = {expected} entries, got {}",
                table.len()
            )));
        }
        if let Some((i, v)) = table
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || v.abs() > 1.0)
        {
            return Err(Error::Validation(format!(
                "truth table entry {i} = {v} lies outside [-1, 1]"
            )));
        }
        Ok(Self { arity, table, name })
    }

    /// Builds a predicate by evaluating `f` on every spin vector.
    pub fn from_fn(arity: usize, name: &str, f: impl Fn(&[i8]) -> f64) -> Result<Self> {
        if arity == 0 || arity > MAX_ARITY {
            return Err(Error::Validation(format!(
                "arity must lie in 1..={MAX_ARITY}, got {arity}"
            )));
        }
        let table = (0..1usize << arity)
            .map(|idx| f(&index_to_spins(idx, arity)))
            .collect();
        Self::new(arity, table, Some(name.to_string()))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Looks up the predicate value on a spin vector.
    pub fn eval(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.arity {
            return param(format!(
                "predicate has arity {} but {} spins were given",
                self.arity,
                spins.len()
            ));
        }
        let mut idx = 0usize;
        for &s in spins {
            idx <<= 1;
            match s {
                1 => {}
                -1 => idx |= 1,
                other => return param(format!("spin values must be ±1, got {other}")),
            }
        }
        Ok(self.table[idx])
    }

    /// Table lookup with literal signs applied, without validation.
    #[inline]
    pub(crate) fn eval_signed(&self, spins: impl Iterator<Item = i8>) -> f64 {
        let mut idx = 0usize;
        for s in spins {
            idx = (idx << 1) | usize::from(s < 0);
        }
        self.table[idx]
    }

    /// Extends the predicate to `arity` inputs; the extra trailing inputs are ignored.
    pub fn padded(&self, arity: usize) -> Result<Self> {
        if arity < self.arity {
            return param(format!(
                "cannot pad arity {} down to {arity}",
                self.arity
            ));
        }
        let shift = arity - self.arity;
        let table = (0..1usize << arity)
            .map(|idx| self.table[idx >> shift])
            .collect();
        Self::new(arity, table, self.name.clone())
    }

    /// Returns `true` when every entry is 0 or 1.
    pub fn is_boolean(&self) -> bool {
        self.table.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn spectrum(&self) -> FourierSpectrum {
        walsh_transform(self)
    }

    pub fn mixture(&self) -> MixturePolynomial {
        mixture_of(self)
    }
}

/// Spin vector for a table index.
pub fn index_to_spins(idx: usize, arity: usize) -> Vec<i8> {
    (0..arity)
        .map(|i| {
            if (idx >> (arity - 1 - i)) & 1 == 1 {
                -1
            } else {
                1
            }
        })
        .collect()
}

/// Parity-basis coefficients `f̂(S)` of a predicate.
///
/// Subsets are stored as bit masks using the same bit order as the truth
/// table: variable `i` is bit `k - 1 - i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSpectrum {
    arity: usize,
    coefficients: Vec<f64>,
}

impl FourierSpectrum {
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Coefficients indexed by subset mask.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn mean(&self) -> f64 {
        self.coefficients[0]
    }

    fn mask_of(&self, subset: &[usize]) -> Result<usize> {
        let mut mask = 0usize;
        for &i in subset {
            if i >= self.arity {
                return param(format!("variable {i} out of range for arity {}", self.arity));
            }
            mask |= 1 << (self.arity - 1 - i);
        }
        Ok(mask)
    }

    /// `f̂(S)` for a subset of zero-based variable positions.
    pub fn coefficient(&self, subset: &[usize]) -> Result<f64> {
        Ok(self.coefficients[self.mask_of(subset)?])
    }

    /// Iterates over `(subset, f̂(S))` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let k = self.arity;
        self.coefficients.iter().enumerate().map(move |(mask, &c)| {
            let subset = (0..k).filter(|i| (mask >> (k - 1 - i)) & 1 == 1).collect();
            (subset, c)
        })
    }

    /// `‖f^{=j}‖²`, the Fourier weight on level `j`.
    pub fn level_weight(&self, level: usize) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(mask, _)| mask.count_ones() as usize == level)
            .map(|(_, c)| c * c)
            .sum()
    }

    pub fn level_weights(&self) -> Vec<f64> {
        (0..=self.arity).map(|j| self.level_weight(j)).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }

    /// Reconstructs the truth table.
    pub fn inverse(&self) -> Vec<f64> {
        let mut values = self.coefficients.clone();
        butterfly(&mut values);
        values
    }

    /// `Stab_ρ[f] = Σ_S ρ^|S| f̂(S)²`.
    pub fn noise_stability(&self, rho: f64) -> f64 {
        self.level_weights()
            .iter()
            .enumerate()
            .map(|(j, w)| rho.powi(j as i32) * w)
            .sum()
    }
}

fn butterfly(values: &mut [f64]) {
    let len = values.len();
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (values[i], values[i + h]);
                values[i] = a + b;
                values[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Fast Walsh–Hadamard transform, `O(k 2^k)`.
pub fn walsh_transform(p: &Predicate) -> FourierSpectrum {
    let mut coefficients = p.table.clone();
    butterfly(&mut coefficients);
    let scale = 1.0 / coefficients.len() as f64;
    coefficients.iter_mut().for_each(|c| *c *= scale);
    FourierSpectrum {
        arity: p.arity,
        coefficients,
    }
}

pub fn noise_stability(s: &FourierSpectrum, rho: f64) -> f64 {
    s.noise_stability(rho)
}

/// Mixture polynomial `ξ(s) = Σ_{p≥1} c_p² s^p` together with the mean term `f̂(∅)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixturePolynomial {
    /// `coefficients[p - 1]` is `c_p²`.
    coefficients: Vec<f64>,
    mean_term: f64,
}

impl MixturePolynomial {
    pub fn new(coefficients: Vec<f64>, mean_term: f64) -> Result<Self> {
        if let Some((i, c)) = coefficients
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_finite() || **c < 0.0)
        {
            return param(format!(
                "mixture coefficient of degree {} must be nonnegative, got {c}",
                i + 1
            ));
        }
        if !mean_term.is_finite() {
            return param("mean term must be finite");
        }
        let mut coefficients = coefficients;
        while coefficients.last() == Some(&0.0) {
            coefficients.pop();
        }
        Ok(Self {
            coefficients,
            mean_term,
        })
    }

    /// Builds `ξ` from `(degree, c_p²)` pairs; repeated degrees add up.
    pub fn from_terms(terms: &[(usize, f64)], mean_term: f64) -> Result<Self> {
        let degree = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let mut coefficients = vec![0.0; degree];
        for &(p, c2) in terms {
            if p == 0 {
                return param("mixture polynomials have no degree-0 term");
            }
            coefficients[p - 1] += c2;
        }
        Self::new(coefficients, mean_term)
    }

    pub fn max_degree(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `c_p²` for degree `p` (zero outside the stored range).
    pub fn coefficient(&self, degree: usize) -> f64 {
        if degree == 0 {
            0.0
        } else {
            self.coefficients.get(degree - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn mean_term(&self) -> f64 {
        self.mean_term
    }

    /// Degrees with a nonzero coefficient.
    pub fn active_degrees(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0.0)
            .map(|(i, c)| (i + 1, *c))
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|c| *c == 0.0)
    }

    pub fn value(&self, s: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| (acc + c) * s)
    }

    pub fn derivative(&self, s: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (i, c)| acc * s + (i + 1) as f64 * c)
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, c)| acc * s + ((i + 1) * i) as f64 * c)
    }

    /// `∫_a^b s ξ''(s) ds = Σ_p c_p² (p - 1)(b^p - a^p)`.
    pub fn integral_s_second_derivative(&self, a: f64, b: f64) -> f64 {
        self.active_degrees()
            .map(|(p, c)| c * (p - 1) as f64 * (b.powi(p as i32) - a.powi(p as i32)))
            .sum()
    }

    /// The mixture `s -> factor · ξ(s)`; the mean term is scaled too.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return param(format!("scale factor must be nonnegative, got {factor}"));
        }
        Self::new(
            self.coefficients.iter().map(|c| c * factor).collect(),
            self.mean_term * factor,
        )
    }
}

impl fmt::Display for MixturePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .active_degrees()
            .map(|(p, c)| match p {
                1 => format!("{c}·s"),
                _ => format!("{c}·s^{p}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

/// Level weights of `p` as a mixture polynomial, with mean term `f̂(∅)`.
pub fn mixture_of(p: &Predicate) -> MixturePolynomial {
    let spectrum = walsh_transform(p);
    let weights = spectrum.level_weights();
    MixturePolynomial::new(weights[1..].to_vec(), spectrum.mean())
        .expect("level weights are nonnegative")
}

/// A finite distribution over predicates, padded to a common arity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateDistribution {
    entries: Vec<(Predicate, f64)>,
}

impl PredicateDistribution {
    /// Validates the weights and pads every predicate to the largest arity.
    pub fn new(entries: Vec<(Predicate, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Validation("distribution has no predicates".into()));
        }
        if entries.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Validation("weights must be nonnegative".into()));
        }
        let total: f64 = entries.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "weights must sum to 1, got {total}"
            )));
        }
        let arity = entries.iter().map(|(p, _)| p.arity()).max().unwrap_or(1);
        let entries = entries
            .into_iter()
            .map(|(p, w)| Ok((p.padded(arity)?, w)))
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }

    pub fn point_mass(p: Predicate) -> Self {
        Self {
            entries: vec![(p, 1.0)],
        }
    }

    pub fn entries(&self) -> &[(Predicate, f64)] {
        &self.entries
    }

    pub fn arity(&self) -> usize {
        self.entries[0].0.arity()
    }

    /// Index of the predicate selected by a uniform draw `u ∈ [0, 1)`.
    pub(crate) fn select(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, (_, w)) in self.entries.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        self.entries.len() - 1
    }

    /// `E_{f∼Λ}[f̂(∅)]`.
    pub fn mean_term(&self) -> f64 {
        self.entries
            .iter()
            .map(|(p, w)| w * walsh_transform(p).mean())
            .sum()
    }
}

/// Mixture polynomial of a predicate distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionMixture {
    pub mixture: MixturePolynomial,
    /// Weighted variance of `f̂(∅)` across the distribution. It cannot be
    /// represented in `ξ` (there is no degree-0 term) and is dropped.
    pub mean_term_variance: f64,
}

impl DistributionMixture {
    pub fn mean_term_fluctuates(&self) -> bool {
        self.mean_term_variance > PARSEVAL_TOL
    }
}

/// Weighted level weights and mean term over `Λ`.
pub fn mixture_of_distribution(dist: &PredicateDistribution) -> DistributionMixture {
    let k = dist.arity();
    let mut levels = vec![0.0; k];
    let mut mean = 0.0;
    let mut mean_sq = 0.0;
    for (p, w) in dist.entries() {
        let spectrum = walsh_transform(p);
        for (j, level) in levels.iter_mut().enumerate() {
            *level += w * spectrum.level_weight(j + 1);
        }
        mean += w * spectrum.mean();
        mean_sq += w * spectrum.mean() * spectrum.mean();
    }
    DistributionMixture {
        mixture: MixturePolynomial::new(levels, mean).expect("weighted level weights are nonnegative"),
        mean_term_variance: (mean_sq - mean * mean).max(0.0),
    }
}

/// Named predicate families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PredicateFamily {
    /// Satisfied when the product of the spins is `-1`.
    #[serde(rename = "kXOR")]
    KXor,
    /// Satisfied when at least one spin is `+1`.
    #[serde(rename = "kSAT")]
    KSat,
    /// Satisfied unless all spins are equal.
    #[serde(rename = "kNAE")]
    KNae,
    /// Satisfied when exactly one spin is `+1`.
    #[serde(rename = "oneInK")]
    OneInK,
}

impl PredicateFamily {
    pub const ALL: [PredicateFamily; 4] = [
        PredicateFamily::OneInK,
        PredicateFamily::KNae,
        PredicateFamily::KSat,
        PredicateFamily::KXor,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PredicateFamily::KXor => "kXOR",
            PredicateFamily::KSat => "kSAT",
            PredicateFamily::KNae => "kNAE",
            PredicateFamily::OneInK => "oneInK",
        }
    }
}

impl fmt::Display for PredicateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PredicateFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kxor" | "xor" => Ok(PredicateFamily::KXor),
            "ksat" | "sat" | "or" => Ok(PredicateFamily::KSat),
            "knae" | "nae" | "naesat" => Ok(PredicateFamily::KNae),
            "oneink" | "1ink" | "1-in-k" => Ok(PredicateFamily::OneInK),
            _ => param(format!(
                "unknown predicate family '{s}' (expected kXOR, kSAT, kNAE or oneInK)"
            )),
        }
    }
}

/// The 0/1 truth table of a named family.
pub fn builtin_predicate(family: PredicateFamily, k: usize) -> Result<Predicate> {
    if k == 0 || k > MAX_ARITY {
        return param(format!("{family} needs 1 <= k <= {MAX_ARITY}, got k={k}"));
    }
    if family == PredicateFamily::KNae && k < 2 {
        return param(format!("{family} needs k >= 2, got k={k}"));
    }
    let name = format!("{family}{k}");
    let indicator = |b: bool| if b { 1.0 } else { 0.0 };
    Predicate::from_fn(k, &name, |x| {
        let true_literals = x.iter().filter(|&&s| s == 1).count();
        indicator(match family {
            PredicateFamily::KXor => (k - true_literals) % 2 == 1,
            PredicateFamily::KSat => true_literals > 0,
            PredicateFamily::KNae => true_literals > 0 && true_literals < k,
            PredicateFamily::OneInK => true_literals == 1,
        })
    })
}

pub fn eval_predicate(p: &Predicate, spins: &[i8]) -> Result<f64> {
    p.eval(spins)
}

/// JSON predicate file: either an explicit table or a named family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PredicateSpec {
    Family {
        family: String,
        k: usize,
    },
    Table {
        #[serde(alias = "arity")]
        k: usize,
        table: Vec<f64>,
        #[serde(default)]
        name: Option<String>,
    },
}

impl PredicateSpec {
    pub fn resolve(&self) -> Result<Predicate> {
        match self {
            PredicateSpec::Family { family, k } => builtin_predicate(family.parse()?, *k),
            PredicateSpec::Table { k, table, name } => {
                Predicate::new(*k, table.clone(), name.clone())
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Predicate> {
        let spec: PredicateSpec = serde_json::from_str(text)?;
        spec.resolve()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Predicate> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl From<&Predicate> for PredicateSpec {
    fn from(p: &Predicate) -> Self {
        PredicateSpec::Table {
            k: p.arity(),
            table: p.table().to_vec(),
            name: p.name().map(str::to_string),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn or2() -> Predicate {
        builtin_predicate(PredicateFamily::KSat, 2).unwrap()
    }

    fn xor2() -> Predicate {
        builtin_predicate(PredicateFamily::KXor, 2).unwrap()
    }

    /// Direct inner products with every parity, independent of the butterfly.
    fn naive_spectrum(p: &Predicate) -> Vec<(Vec<usize>, f64)> {
        let k = p.arity();
        (0..1usize << k)
            .map(|mask| {
                let subset: Vec<usize> =
                    (0..k).filter(|i| (mask >> (k - 1 - i)) & 1 == 1).collect();
                let avg = (0..1usize << k)
                    .map(|idx| {
                        let x = index_to_spins(idx, k);
                        let chi: i32 = subset.iter().map(|&i| x[i] as i32).product();
                        p.table()[idx] * chi as f64
                    })
                    .sum::<f64>()
                    / (1usize << k) as f64;
                (subset, avg)
            })
            .collect()
    }

    #[test]
    fn xor2_spectrum() {
        let s = xor2().spectrum();
        assert_abs_diff_eq!(s.coefficient(&[]).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coefficient(&[0, 1]).unwrap(), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coefficient(&[0]).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coefficient(&[1]).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn constant_spectrum() {
        let p = Predicate::new(3, vec![1.0; 8], None).unwrap();
        let s = p.spectrum();
        assert_eq!(s.mean(), 1.0);
        assert!(s.coefficients()[1..].iter().all(|c| *c == 0.0));
    }

    #[test]
    fn or2_spectrum_matches_inner_products() {
        let p = or2();
        let s = p.spectrum();
        for (subset, c) in naive_spectrum(&p) {
            assert_abs_diff_eq!(s.coefficient(&subset).unwrap(), c, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(s.mean(), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coefficient(&[0]).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coefficient(&[1]).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coefficient(&[0, 1]).unwrap(), -0.25, epsilon = 1e-15);
    }

    #[test]
    fn stability_special_cases() {
        let s = or2().spectrum();
        assert_abs_diff_eq!(s.noise_stability(1.0), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(s.noise_stability(0.0), 0.5625, epsilon = 1e-15);
        assert_abs_diff_eq!(s.noise_stability(0.5), 9.0 / 16.0 + 0.125 * 0.5 + 0.0625 * 0.25, epsilon = 1e-15);
    }

    #[test]
    fn stability_matches_correlated_flip_average() {
        let p = or2();
        let rho: f64 = 0.5;
        let keep = (1.0 + rho) / 2.0;
        let mut total = 0.0;
        for x in 0..4 {
            for y in 0..4 {
                let same = 2 - ((x ^ y) as u32).count_ones() as i32;
                let w = keep.powi(same) * (1.0 - keep).powi(2 - same) / 4.0;
                total += w * p.table()[x] * p.table()[y];
            }
        }
        assert_abs_diff_eq!(p.spectrum().noise_stability(rho), total, epsilon = 1e-15);
    }

    #[test]
    fn mixtures_of_small_predicates() {
        let m = xor2().mixture();
        assert_eq!(m.coefficients(), &[0.0, 0.25]);
        assert_eq!(m.mean_term(), 0.5);

        let xor4 = builtin_predicate(PredicateFamily::KXor, 4).unwrap().mixture();
        assert_abs_diff_eq!(xor4.coefficient(4), 0.25, epsilon = 1e-15);
        assert_eq!(xor4.max_degree(), 4);
        assert_eq!(xor4.coefficient(1) + xor4.coefficient(2) + xor4.coefficient(3), 0.0);

        let or3 = builtin_predicate(PredicateFamily::KSat, 3).unwrap().mixture();
        assert_abs_diff_eq!(or3.coefficient(1), 3.0 / 64.0, epsilon = 1e-15);
        assert_abs_diff_eq!(or3.coefficient(2), 3.0 / 64.0, epsilon = 1e-15);
        assert_abs_diff_eq!(or3.coefficient(3), 1.0 / 64.0, epsilon = 1e-15);
        assert_eq!(or3.mean_term(), 0.875);
    }

    #[test]
    fn distribution_mixtures() {
        let point = mixture_of_distribution(&PredicateDistribution::point_mass(xor2()));
        assert_eq!(point.mixture, xor2().mixture());
        assert!(!point.mean_term_fluctuates());

        let neg = Predicate::new(2, xor2().table().iter().map(|v| 1.0 - v).collect(), None)
            .unwrap();
        let d = PredicateDistribution::new(vec![(xor2(), 0.5), (neg, 0.5)]).unwrap();
        let m = mixture_of_distribution(&d);
        assert_abs_diff_eq!(m.mixture.coefficient(2), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(m.mixture.mean_term(), 0.5, epsilon = 1e-15);

        let d = PredicateDistribution::new(vec![(or2(), 0.5), (xor2(), 0.5)]).unwrap();
        let m = mixture_of_distribution(&d);
        assert_abs_diff_eq!(m.mixture.coefficient(1), 1.0 / 16.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.mixture.coefficient(2), 1.0 / 32.0 + 1.0 / 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.mixture.mean_term(), 0.625, epsilon = 1e-15);
        assert!(m.mean_term_fluctuates());
    }

    #[test]
    fn mixed_arity_padding_keeps_levels() {
        let d = PredicateDistribution::new(vec![
            (xor2(), 0.5),
            (builtin_predicate(PredicateFamily::KSat, 3).unwrap(), 0.5),
        ])
        .unwrap();
        assert_eq!(d.arity(), 3);
        let padded = &d.entries()[0].0;
        assert_eq!(padded.spectrum().level_weights(), xor2().spectrum().level_weights().into_iter().chain([0.0]).collect::<Vec<_>>());
    }

    #[test]
    fn builtin_tables() {
        let one_in_two = builtin_predicate(PredicateFamily::OneInK, 2).unwrap();
        assert_eq!(one_in_two.table(), xor2().table());
        let nae2 = builtin_predicate(PredicateFamily::KNae, 2).unwrap();
        assert_eq!(nae2.table(), xor2().table());
        assert_eq!(or2().table(), &[1.0, 1.0, 1.0, 0.0]);
        let xor3 = builtin_predicate(PredicateFamily::KXor, 3).unwrap().spectrum();
        assert_eq!(xor3.mean(), 0.5);
        assert_abs_diff_eq!(xor3.level_weight(3), 0.25, epsilon = 1e-15);
        assert_eq!(xor3.level_weight(1) + xor3.level_weight(2), 0.0);
        assert!(builtin_predicate(PredicateFamily::KNae, 1).is_err());
        assert!(builtin_predicate(PredicateFamily::KSat, 0).is_err());
    }

    #[test]
    fn evaluation() {
        assert_eq!(or2().eval(&[1, -1]).unwrap(), 1.0);
        assert_eq!(xor2().eval(&[1, 1]).unwrap(), 0.0);
        let one_in_three = builtin_predicate(PredicateFamily::OneInK, 3).unwrap();
        assert_eq!(one_in_three.eval(&[1, 1, -1]).unwrap(), 0.0);
        assert_eq!(one_in_three.eval(&[1, -1, -1]).unwrap(), 1.0);
        assert!(matches!(or2().eval(&[1]), Err(Error::Parameter(_))));
    }

    #[test]
    fn table_validation() {
        let err = Predicate::new(2, vec![0.0; 3], None).unwrap_err();
        assert!(err.to_string().contains("2^2 = 4"), "{err}");
        assert!(Predicate::new(1, vec![0.0, 1.5], None).is_err());
    }

    #[test]
    fn predicate_files() {
        let p = PredicateSpec::from_json(r#"{"family": "kSAT", "k": 3}"#).unwrap();
        assert_eq!(p.spectrum().mean(), 0.875);
        let p = PredicateSpec::from_json(r#"{"k": 1, "table": [0.5, -0.5], "name": "dict"}"#)
            .unwrap();
        assert_eq!(p.name(), Some("dict"));
        let err = PredicateSpec::from_json(r#"{"k": 3, "table": [0, 1]}"#).unwrap_err();
        assert!(err.to_string().contains("2^3 = 8"));
        assert!(matches!(
            PredicateSpec::from_json(r#"{"k": 3, "table": [0, 1"#),
            Err(Error::Json(_))
        ));
    }

    #[test]
    fn mixture_calculus() {
        let xi = MixturePolynomial::from_terms(&[(2, 0.25), (3, 0.25)], 0.0).unwrap();
        assert_abs_diff_eq!(xi.value(0.5), 0.25 * 0.25 + 0.25 * 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(xi.derivative(0.5), 0.25 + 0.75 * 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(xi.second_derivative(0.5), 0.5 + 1.5 * 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            xi.integral_s_second_derivative(0.0, 1.0),
            0.25 + 0.5,
            epsilon = 1e-15
        );
        assert!(MixturePolynomial::new(vec![-0.1], 0.0).is_err());
    }
}
