//! Correlation function `χ(t) = E R(A(H¹_t), A(H²_t))` on `t`-correlated pairs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{t_correlated_pair, CspInstance, CspModel};
use crate::error::{param, Result};
use crate::rng::SeedTree;

use super::debias::{debias, CspAlgorithm};
use super::overlap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSettings {
    pub reps: usize,
    /// Wrap the algorithm with the sign-extraction debiaser.
    pub debias: bool,
}

impl Default for ChiSettings {
    fn default() -> Self {
        Self { reps: 200, debias: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCurve {
    pub t: Vec<f64>,
    pub chi: Vec<f64>,
    pub stderr: Vec<f64>,
    pub reps: usize,
}

pub(crate) fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Replicate `r` at grid point `t_j` uses instance seed `(j, r)`; both runs
/// share the algorithm seed `(r)`, so `χ(1) = 1` exactly.
pub fn chi_curve(
    model: &CspModel,
    algorithm: &dyn CspAlgorithm,
    t_grid: &[f64],
    settings: &ChiSettings,
    seed: SeedTree,
) -> Result<CorrelationCurve> {
    if settings.reps == 0 {
        return param("reps must be positive");
    }
    if let Some(t) = t_grid.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return param(format!("t must lie in [0, 1], got {t}"));
    }
    let instances = seed.child(0);
    let runs = seed.child(1);
    let run = |inst: &CspInstance, s: SeedTree| {
        if settings.debias {
            debias(algorithm, inst, s)
        } else {
            algorithm.run(inst, s)
        }
    };
    let mut chi = Vec::with_capacity(t_grid.len());
    let mut stderr = Vec::with_capacity(t_grid.len());
    for (j, &t) in t_grid.iter().enumerate() {
        let overlaps = (0..settings.reps)
            .into_par_iter()
            .map(|r| {
                let (a, b) = t_correlated_pair(model, t, instances.at(&[j as u64, r as u64]))?;
                let s = runs.child(r as u64);
                overlap(&run(&a, s)?, &run(&b, s)?)
            })
            .collect::<Result<Vec<f64>>>()?;
        let (m, se) = mean_and_stderr(&overlaps);
        chi.push(m);
        stderr.push(se);
    }
    Ok(CorrelationCurve {
        t: t_grid.to_vec(),
        chi,
        stderr,
        reps: settings.reps,
    })
}
