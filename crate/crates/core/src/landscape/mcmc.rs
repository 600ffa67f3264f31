//! Single-site Metropolis dynamics for sampling and annealing.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::hamiltonian::{FlipState, SpinPolynomial};
use crate::rng::{SeedTree, StreamRng};

use super::{EnergyOracle, Maximum};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsConfig {
    pub beta: f64,
    pub sweeps: usize,
    pub seed: SeedTree,
}

impl GibbsConfig {
    pub fn new(beta: f64, sweeps: usize, seed: SeedTree) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return param(format!("β must be finite and nonnegative, got {beta}"));
        }
        Ok(Self { beta, sweeps, seed })
    }
}

fn random_state(len: usize, rng: &mut StreamRng) -> Vec<i8> {
    (0..len).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

/// One sequential sweep at inverse temperature `beta` (targeting `e^{βH}`).
fn sweep(state: &mut FlipState, beta: f64, rng: &mut StreamRng) {
    for i in 0..state.sigma().len() {
        let d = state.delta(i);
        if d >= 0.0 || rng.random::<f64>() < (beta * d).exp() {
            state.flip(i);
        }
    }
}

pub(crate) fn metropolis(poly: &SpinPolynomial, config: &GibbsConfig) -> Vec<i8> {
    let mut rng = config.seed.rng();
    let start = random_state(poly.n(), &mut rng);
    let mut state = FlipState::new(poly, &start);
    for _ in 0..config.sweeps {
        sweep(&mut state, config.beta, &mut rng);
    }
    state.sigma().to_vec()
}

/// Final state of a Metropolis chain on the grand energy, started from a
/// uniform random tuple.
pub fn gibbs_sample(oracle: &EnergyOracle, config: &GibbsConfig) -> Result<Vec<Vec<i8>>> {
    GibbsConfig::new(config.beta, config.sweeps, config.seed)?;
    let poly = oracle.grand_polynomial();
    Ok(oracle.split(&metropolis(&poly, config)))
}

/// Geometric inverse-temperature ramp with independent restarts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub beta_start: f64,
    pub beta_end: f64,
    pub sweeps: usize,
    pub restarts: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            beta_start: 0.1,
            beta_end: 10.0,
            sweeps: 200,
            restarts: 4,
        }
    }
}

impl AnnealSchedule {
    fn validate(&self) -> Result<()> {
        if !(self.beta_start > 0.0 && self.beta_end >= self.beta_start && self.beta_end.is_finite()) {
            return param("anneal schedule needs 0 < beta_start <= beta_end < ∞");
        }
        if self.sweeps == 0 || self.restarts == 0 {
            return param("anneal schedule needs at least one sweep and one restart");
        }
        Ok(())
    }

    fn beta(&self, sweep: usize) -> f64 {
        if self.sweeps == 1 {
            return self.beta_end;
        }
        let x = sweep as f64 / (self.sweeps - 1) as f64;
        self.beta_start * (self.beta_end / self.beta_start).powf(x)
    }
}

/// Best state seen over all restarts.
pub(crate) fn anneal_polynomial(poly: &SpinPolynomial, schedule: &AnnealSchedule, seed: SeedTree) -> (Vec<i8>, f64) {
    let mut best: Option<(Vec<i8>, f64)> = None;
    for r in 0..schedule.restarts {
        let mut rng = seed.child(r as u64).rng();
        let start = random_state(poly.n(), &mut rng);
        let mut state = FlipState::new(poly, &start);
        let mut local = (state.sigma().to_vec(), state.energy());
        for s in 0..schedule.sweeps {
            sweep(&mut state, schedule.beta(s), &mut rng);
            if state.energy() > local.1 {
                local = (state.sigma().to_vec(), state.energy());
            }
        }
        // Finish with greedy ascent from the best state.
        let mut state = FlipState::new(poly, &local.0);
        loop {
            let improving = (0..poly.n()).find(|&i| state.delta(i) > 1e-12);
            match improving {
                Some(i) => state.flip(i),
                None => break,
            }
        }
        let candidate = (state.sigma().to_vec(), poly.evaluate(state.sigma()));
        if best.as_ref().is_none_or(|b| candidate.1 > b.1) {
            best = Some(candidate);
        }
    }
    best.expect("at least one restart")
}

pub fn anneal_max(oracle: &EnergyOracle, schedule: &AnnealSchedule, seed: SeedTree) -> Result<Maximum> {
    schedule.validate()?;
    let poly = oracle.grand_polynomial();
    let (sigma, value) = anneal_polynomial(&poly, schedule, seed);
    Ok(Maximum {
        assignments: oracle.split(&sigma),
        value,
        density: value / poly.n() as f64,
    })
}
