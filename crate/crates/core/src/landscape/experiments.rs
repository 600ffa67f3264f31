//! Replicated enumeration experiments: optimal values, the CSP/spin-glass
//! interpolation, and the Poisson/exact free-energy gap.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{sample_csp, sample_spin_glass, CountMode, CspModel};
use crate::error::{param, Result};
use crate::predicates::{mixture_of_distribution, PredicateDistribution};
use crate::rng::SeedTree;

use super::chi::mean_and_stderr;
use super::{brute_force_max, restricted_log_partition, EnergyOracle, OverlapRegion};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let (mean, stderr) = mean_and_stderr(xs);
        Self {
            mean,
            stderr,
            count: xs.len(),
        }
    }
}

fn check_reps(reps: usize) -> Result<()> {
    if reps == 0 {
        return param("reps must be positive");
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VmaxResult {
    /// `max H / n` per instance.
    pub values: Vec<f64>,
    pub summary: Summary,
}

/// Exact optimal values of `reps` instances; instance `r` uses seed child `r`.
pub fn vmax(model: &CspModel, reps: usize, seed: SeedTree) -> Result<VmaxResult> {
    check_reps(reps)?;
    let values = (0..reps)
        .into_par_iter()
        .map(|r| {
            let inst = sample_csp(model, seed.child(r as u64));
            let max = brute_force_max(&EnergyOracle::single(inst), None)?;
            Ok(max.expect("the full cube is nonempty").density)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VmaxResult {
        summary: Summary::of(&values),
        values,
    })
}

fn free_energy(oracle: &EnergyOracle, beta: f64) -> Result<f64> {
    Ok(restricted_log_partition(oracle, beta, &OverlapRegion::full(oracle.tuple_size()))?.free_energy_density())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationRow {
    pub alpha: f64,
    /// `(1/βn) log Z` of the CSP at `β`.
    pub phi_csp: Summary,
    /// `(1/β'n) log Z` of the spin glass at `β' = β/√α`.
    pub phi_sg: Summary,
    /// `f̂(∅) + φ_SG / √α`.
    pub predicted: f64,
    pub delta: f64,
    pub delta_stderr: f64,
}

/// `Δ(α) = |φ_CSP(β) - f̂(∅) - φ_SG(β/√α)/√α|` from independent CSP (exact
/// count) and spin-glass instances. Cell `(a, r)` uses seeds `(a, r, 0)` and
/// `(a, r, 1)`.
pub fn interpolate(
    distribution: &PredicateDistribution,
    n: usize,
    beta: f64,
    alphas: &[f64],
    reps: usize,
    seed: SeedTree,
) -> Result<Vec<InterpolationRow>> {
    check_reps(reps)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return param(format!("β must be positive, got {beta}"));
    }
    let mixture = mixture_of_distribution(distribution).mixture;
    let mean_term = distribution.mean_term();
    alphas
        .iter()
        .enumerate()
        .map(|(a, &alpha)| {
            let model = CspModel::new(distribution.clone(), alpha, n, CountMode::Exact)?;
            let beta_sg = beta / alpha.sqrt();
            let pairs = (0..reps)
                .into_par_iter()
                .map(|r| {
                    let cell = seed.at(&[a as u64, r as u64]);
                    let csp = sample_csp(&model, cell.child(0));
                    let sg = sample_spin_glass(&mixture, n, cell.child(1))?;
                    Ok((
                        free_energy(&EnergyOracle::single(csp), beta)?,
                        free_energy(&EnergyOracle::single(sg), beta_sg)?,
                    ))
                })
                .collect::<Result<Vec<(f64, f64)>>>()?;
            let (c, s): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let phi_csp = Summary::of(&c);
            let phi_sg = Summary::of(&s);
            let predicted = mean_term + phi_sg.mean / alpha.sqrt();
            Ok(InterpolationRow {
                alpha,
                phi_csp,
                phi_sg,
                predicted,
                delta: (phi_csp.mean - predicted).abs(),
                delta_stderr: (phi_csp.stderr.powi(2) + phi_sg.stderr.powi(2) / alpha).sqrt(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonGap {
    pub exact: Summary,
    pub poisson: Summary,
    /// Paired differences `φ_poisson - φ_exact`.
    pub difference: Summary,
    /// `1/√(αn)`.
    pub scale: f64,
}

/// Free energies of exact and Poisson instances drawn from the same seed
/// (and hence sharing a clause prefix).
pub fn poisson_gap(model: &CspModel, beta: f64, reps: usize, seed: SeedTree) -> Result<PoissonGap> {
    check_reps(reps)?;
    if !(beta > 0.0 && beta.is_finite()) {
        return param(format!("β must be positive, got {beta}"));
    }
    let exact_model = model.with_mode(CountMode::Exact)?;
    let poisson_model = model.with_mode(CountMode::Poisson)?;
    let pairs = (0..reps)
        .into_par_iter()
        .map(|r| {
            let s = seed.child(r as u64);
            Ok((
                free_energy(&EnergyOracle::single(sample_csp(&exact_model, s)), beta)?,
                free_energy(&EnergyOracle::single(sample_csp(&poisson_model, s)), beta)?,
            ))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let diffs: Vec<f64> = pairs.iter().map(|(e, p)| p - e).collect();
    let (e, p): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    Ok(PoissonGap {
        exact: Summary::of(&e),
        poisson: Summary::of(&p),
        difference: Summary::of(&diffs),
        scale: 1.0 / model.expected_clauses().sqrt(),
    })
}
