//! Energy functions on the hypercube `{±1}^n`.
//!
//! Every instance can be expanded into a multilinear polynomial in the spins
//! ([`SpinPolynomial`]). The polynomial form drives exhaustive enumeration
//! (Gray-code order, one flip per state) and single-spin Monte Carlo, both of
//! which only need the energy change of a single flip.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// An energy function `H : {±1}^n -> ℝ`.
pub trait Hamiltonian: Send + Sync {
    fn n(&self) -> usize;

    /// Direct evaluation; `sigma` must have length `n` and entries ±1.
    fn energy(&self, sigma: &[i8]) -> Result<f64>;

    /// Multilinear expansion of the energy.
    fn polynomial(&self) -> SpinPolynomial;
}

pub(crate) fn check_assignment(sigma: &[i8], n: usize) -> Result<()> {
    if sigma.len() != n {
        return param(format!(
            "assignment has length {} but the instance has n = {n}",
            sigma.len()
        ));
    }
    if let Some(s) = sigma.iter().find(|s| **s != 1 && **s != -1) {
        return param(format!("spins must be ±1, got {s}"));
    }
    Ok(())
}

/// `H(σ) = c + Σ_T w_T ∏_{i∈T} σ_i` over distinct variable sets `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinPolynomial {
    n: usize,
    constant: f64,
    terms: Vec<(Vec<u32>, f64)>,
}

/// Accumulates monomials, cancelling repeated variables (`σ_i² = 1`).
#[derive(Debug, Default)]
pub struct PolynomialBuilder {
    n: usize,
    constant: f64,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl PolynomialBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            ..Default::default()
        }
    }

    /// Adds `coef · ∏ σ_{vars}`; `vars` may contain repeats.
    pub fn add(&mut self, vars: &[u32], coef: f64) {
        if coef == 0.0 {
            return;
        }
        let mut key = vars.to_vec();
        key.sort_unstable();
        let mut reduced: Vec<u32> = Vec::with_capacity(key.len());
        for v in key {
            if reduced.last() == Some(&v) {
                reduced.pop();
            } else {
                reduced.push(v);
            }
        }
        if reduced.is_empty() {
            self.constant += coef;
        } else {
            *self.terms.entry(reduced).or_insert(0.0) += coef;
        }
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn build(self) -> SpinPolynomial {
        SpinPolynomial {
            n: self.n,
            constant: self.constant,
            terms: self.terms.into_iter().filter(|(_, c)| *c != 0.0).collect(),
        }
    }
}

impl SpinPolynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            constant: 0.0,
            terms: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &[(Vec<u32>, f64)] {
        &self.terms
    }

    pub fn evaluate(&self, sigma: &[i8]) -> f64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|(vars, c)| {
                    let sign: i32 = vars.iter().map(|&v| sigma[v as usize] as i32).product();
                    c * sign as f64
                })
                .sum::<f64>()
    }

    /// Sum of two polynomials on the same variables.
    pub fn plus(&self, other: &SpinPolynomial) -> SpinPolynomial {
        let mut b = PolynomialBuilder::new(self.n.max(other.n));
        b.add_constant(self.constant + other.constant);
        for (vars, c) in self.terms.iter().chain(&other.terms) {
            b.add(vars, *c);
        }
        b.build()
    }

    /// Energies of all `2^n` assignments, indexed by the bit mask whose bit
    /// `i` is set when `σ_i = -1`.
    pub fn energy_table(&self) -> Result<Vec<f64>> {
        if self.n > 30 {
            return param(format!("energy table needs n <= 30, got {}", self.n));
        }
        let mut state = FlipState::new(self, &vec![1; self.n]);
        let size = 1usize << self.n;
        let mut table = vec![0.0; size];
        table[0] = state.energy();
        for step in 1..size {
            let bit = step.trailing_zeros() as usize;
            state.flip(bit);
            table[step ^ (step >> 1)] = state.energy();
        }
        Ok(table)
    }
}

/// Incremental evaluation under single-spin flips.
#[derive(Debug, Clone)]
pub struct FlipState {
    sigma: Vec<i8>,
    /// Current value `w_T ∏ σ` of every term.
    term_values: Vec<f64>,
    incidence: Vec<Vec<u32>>,
    energy: f64,
    constant: f64,
    flips_since_refresh: usize,
}

const REFRESH_INTERVAL: usize = 1 << 16;

impl FlipState {
    pub fn new(poly: &SpinPolynomial, sigma: &[i8]) -> Self {
        let mut incidence = vec![Vec::new(); poly.n];
        for (t, (vars, _)) in poly.terms.iter().enumerate() {
            for &v in vars {
                incidence[v as usize].push(t as u32);
            }
        }
        let term_values: Vec<f64> = poly
            .terms
            .iter()
            .map(|(vars, c)| {
                let sign: i32 = vars.iter().map(|&v| sigma[v as usize] as i32).product();
                c * sign as f64
            })
            .collect();
        let energy = poly.constant + term_values.iter().sum::<f64>();
        Self {
            sigma: sigma.to_vec(),
            term_values,
            incidence,
            energy,
            constant: poly.constant,
            flips_since_refresh: 0,
        }
    }

    pub fn sigma(&self) -> &[i8] {
        &self.sigma
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Energy change if spin `i` were flipped.
    #[inline]
    pub fn delta(&self, i: usize) -> f64 {
        -2.0 * self.incidence[i]
            .iter()
            .map(|&t| self.term_values[t as usize])
            .sum::<f64>()
    }

    pub fn flip(&mut self, i: usize) {
        let mut change = 0.0;
        for &t in &self.incidence[i] {
            let v = &mut self.term_values[t as usize];
            change -= 2.0 * *v;
            *v = -*v;
        }
        self.sigma[i] = -self.sigma[i];
        self.energy += change;
        self.flips_since_refresh += 1;
        if self.flips_since_refresh >= REFRESH_INTERVAL {
            self.energy = self.constant + self.term_values.iter().sum::<f64>();
            self.flips_since_refresh = 0;
        }
    }
}

/// Assignment for a bit mask (bit `i` set means `σ_i = -1`).
pub fn mask_to_spins(mask: u64, n: usize) -> Vec<i8> {
    (0..n).map(|i| if (mask >> i) & 1 == 1 { -1 } else { 1 }).collect()
}

pub fn spins_to_mask(sigma: &[i8]) -> u64 {
    sigma
        .iter()
        .enumerate()
        .filter(|(_, s)| **s < 0)
        .fold(0u64, |m, (i, _)| m | (1 << i))
}

/// The identically zero energy.
#[derive(Debug, Clone, Copy)]
pub struct ZeroHamiltonian(pub usize);

impl Hamiltonian for ZeroHamiltonian {
    fn n(&self) -> usize {
        self.0
    }

    fn energy(&self, sigma: &[i8]) -> Result<f64> {
        check_assignment(sigma, self.0)?;
        Ok(0.0)
    }

    fn polynomial(&self) -> SpinPolynomial {
        SpinPolynomial::zero(self.0)
    }
}

impl Hamiltonian for SpinPolynomial {
    fn n(&self) -> usize {
        self.n
    }

    fn energy(&self, sigma: &[i8]) -> Result<f64> {
        check_assignment(sigma, self.n)?;
        Ok(self.evaluate(sigma))
    }

    fn polynomial(&self) -> SpinPolynomial {
        self.clone()
    }
}
