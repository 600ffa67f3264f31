//! Overlaps, restricted partition functions, exhaustive and heuristic
//! maximization, overlap-gap scans and correlation curves on desk-scale
//! instances.

mod chi;
mod debias;
mod experiments;
mod mcmc;
mod ogp;
mod oracle;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ensembles::TreeEnsembleSpec;
use crate::error::{param, Error, Result};

pub use chi::{chi_curve, ChiSettings, CorrelationCurve};
pub use debias::{debias, debias_prefix, AnnealAlgorithm, ConstantAlgorithm, CspAlgorithm, Debiased};
pub use experiments::{
    interpolate, poisson_gap, vmax, InterpolationRow, PoissonGap, Summary, VmaxResult,
};
pub use mcmc::{anneal_max, gibbs_sample, AnnealSchedule, GibbsConfig};
pub use ogp::{ogp_scan, OgpHistogram, OgpMode};
pub use oracle::{
    brute_force_max, restricted_log_partition, verify_maximum, EnergyOracle, LogPartition, Maximum,
    MAX_ENUMERATED_SPINS,
};

/// Largest tuple size accepted by [`overlap_vector`].
pub const MAX_TUPLE: usize = 12;

/// `⟨σ₁, σ₂⟩ / n`.
pub fn overlap(a: &[i8], b: &[i8]) -> Result<f64> {
    if a.len() != b.len() {
        return param(format!("assignments have lengths {} and {}", a.len(), b.len()));
    }
    if a.is_empty() {
        return param("assignments are empty");
    }
    let dot: i64 = a.iter().zip(b).map(|(&x, &y)| (x * y) as i64).sum();
    Ok(dot as f64 / a.len() as f64)
}

/// A nonempty subset of `{0, …, ℓ-1}` as a bit mask.
pub type Subset = u32;

/// All `I`-overlaps of an `ℓ`-tuple, indexed by subset mask (entry 0 unused).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapVector {
    tuple: usize,
    entries: Vec<f64>,
}

impl OverlapVector {
    pub fn tuple_size(&self) -> usize {
        self.tuple
    }

    /// `R_I` for a subset given by its members.
    pub fn get(&self, members: &[usize]) -> Result<f64> {
        let mask = subset_mask(members, self.tuple)?;
        if mask == 0 {
            return param("subset must be nonempty");
        }
        Ok(self.entries[mask as usize])
    }

    pub fn by_mask(&self, mask: Subset) -> f64 {
        self.entries[mask as usize]
    }

    /// `(mask, R_I)` over every nonempty subset.
    pub fn iter(&self) -> impl Iterator<Item = (Subset, f64)> + '_ {
        self.entries.iter().enumerate().skip(1).map(|(m, &v)| (m as Subset, v))
    }
}

fn subset_mask(members: &[usize], tuple: usize) -> Result<Subset> {
    members.iter().try_fold(0, |m, &i| {
        if i >= tuple {
            param(format!("member {i} out of range for a {tuple}-tuple"))
        } else {
            Ok(m | 1 << i)
        }
    })
}

pub fn overlap_vector(tuple: &[Vec<i8>]) -> Result<OverlapVector> {
    let l = tuple.len();
    if l == 0 {
        return param("tuple is empty");
    }
    if l > MAX_TUPLE {
        return Err(Error::Resource(format!("tuple size {l} exceeds {MAX_TUPLE}")));
    }
    let n = tuple[0].len();
    if n == 0 || tuple.iter().any(|s| s.len() != n) {
        return param("assignments must be nonempty and of equal length");
    }
    let mut entries = vec![0.0; 1 << l];
    let mut column = vec![0i8; 1 << l];
    for j in 0..n {
        column[0] = 1;
        for mask in 1usize..1 << l {
            let low = mask.trailing_zeros() as usize;
            column[mask] = column[mask & (mask - 1)] * tuple[low][j];
            entries[mask] += column[mask] as f64;
        }
    }
    entries.iter_mut().skip(1).for_each(|e| *e /= n as f64);
    Ok(OverlapVector { tuple: l, entries })
}

/// Open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return param(format!("interval ({lo}, {hi}) is empty"));
        }
        Ok(Self { lo, hi })
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }
}

/// Box constraints on overlap vectors. Unconstrained subsets are free, so
/// the empty region is the full polytope.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OverlapRegion {
    tuple: usize,
    constraints: BTreeMap<Subset, Interval>,
}

impl OverlapRegion {
    pub fn full(tuple: usize) -> Self {
        Self {
            tuple,
            constraints: BTreeMap::new(),
        }
    }

    pub fn tuple_size(&self) -> usize {
        self.tuple
    }

    pub fn constrain(mut self, members: &[usize], interval: Interval) -> Result<Self> {
        let mask = subset_mask(members, self.tuple)?;
        if mask == 0 {
            return param("subset must be nonempty");
        }
        self.constraints.insert(mask, interval);
        Ok(self)
    }

    /// Pairwise gap region: `R(σ_i, σ_j) ∈ (s, t)`.
    pub fn pairwise(tuple: usize, i: usize, j: usize, s: f64, t: f64) -> Result<Self> {
        if i == j {
            return param("a pairwise constraint needs two distinct members");
        }
        Self::full(tuple).constrain(&[i, j], Interval::new(s, t)?)
    }

    /// Branching pattern: for leaves `u ≠ v` of the tree,
    /// `|R(σ_u, σ_v) - q_{depth(lca(u,v))}| < η`.
    pub fn branching(tree: &TreeEnsembleSpec, q: &[f64], eta: f64) -> Result<Self> {
        if q.len() != tree.depth() + 1 {
            return param(format!("q needs D + 1 = {} entries", tree.depth() + 1));
        }
        if !(eta > 0.0) {
            return param("η must be positive");
        }
        let leaves = tree.leaves();
        let mut region = Self::full(leaves);
        for u in 0..leaves {
            for v in u + 1..leaves {
                let target = q[tree.lca_depth(u, v)];
                region = region.constrain(&[u, v], Interval::new(target - eta, target + eta)?)?;
            }
        }
        Ok(region)
    }

    pub fn constraints(&self) -> impl Iterator<Item = (Subset, Interval)> + '_ {
        self.constraints.iter().map(|(m, i)| (*m, *i))
    }

    pub fn is_full(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn contains(&self, v: &OverlapVector) -> bool {
        v.tuple == self.tuple && self.constraints.iter().all(|(m, i)| i.contains(v.by_mask(*m)))
    }
}
