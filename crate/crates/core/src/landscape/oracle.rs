//! Grand Hamiltonians over assignment tuples and their exhaustive
//! enumeration.
//!
//! A tuple of `ℓ` assignments on `n` spins is encoded as one integer whose
//! `i`-th block of `n` bits is the mask of slot `i`. Each slot's energies are
//! tabulated once, so a tuple costs `ℓ` lookups plus one popcount per
//! overlap constraint. The index range is cut into fixed chunks that are
//! reduced in index order, which keeps results independent of scheduling.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::Instance;
use crate::error::{param, Error, Result};
use crate::hamiltonian::{check_assignment, mask_to_spins, Hamiltonian, PolynomialBuilder, SpinPolynomial};

use super::{Interval, OverlapRegion};

/// Enumeration guard on `ℓ · n`.
pub const MAX_ENUMERATED_SPINS: usize = 24;

const CHUNK_BITS: usize = 16;

/// `ℓ` energy slots on a common number of spins; the grand energy of a tuple
/// is the sum of slot energies.
#[derive(Clone)]
pub struct EnergyOracle {
    n: usize,
    slots: Vec<Arc<dyn Hamiltonian>>,
}

impl std::fmt::Debug for EnergyOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EnergyOracle")
            .field("n", &self.n)
            .field("slots", &self.slots.len())
            .finish()
    }
}

impl EnergyOracle {
    pub fn single(h: impl Hamiltonian + 'static) -> Self {
        Self {
            n: h.n(),
            slots: vec![Arc::new(h)],
        }
    }

    pub fn grand(slots: Vec<Arc<dyn Hamiltonian>>) -> Result<Self> {
        let Some(first) = slots.first() else {
            return param("an oracle needs at least one slot");
        };
        let n = first.n();
        if slots.iter().any(|s| s.n() != n) {
            return param("all slots must have the same number of spins");
        }
        Ok(Self { n, slots })
    }

    pub fn from_instances(instances: Vec<Instance>) -> Result<Self> {
        Self::grand(
            instances
                .into_iter()
                .map(|i| Arc::new(i) as Arc<dyn Hamiltonian>)
                .collect(),
        )
    }

    /// The same Hamiltonian in `copies` slots.
    pub fn replicated(h: Arc<dyn Hamiltonian>, copies: usize) -> Result<Self> {
        Self::grand(vec![h; copies])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tuple_size(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Arc<dyn Hamiltonian>] {
        &self.slots
    }

    pub fn slot_energies(&self, tuple: &[Vec<i8>]) -> Result<Vec<f64>> {
        if tuple.len() != self.slots.len() {
            return param(format!(
                "expected {} assignments, got {}",
                self.slots.len(),
                tuple.len()
            ));
        }
        self.slots.iter().zip(tuple).map(|(h, s)| h.energy(s)).collect()
    }

    pub fn energy(&self, tuple: &[Vec<i8>]) -> Result<f64> {
        Ok(self.slot_energies(tuple)?.iter().sum())
    }

    /// Grand energy as one polynomial on `ℓ · n` spins; slot `i` owns spins
    /// `i·n .. (i+1)·n`.
    pub fn grand_polynomial(&self) -> SpinPolynomial {
        let mut b = PolynomialBuilder::new(self.n * self.slots.len());
        for (i, slot) in self.slots.iter().enumerate() {
            let poly = slot.polynomial();
            b.add_constant(poly.constant());
            let offset = (i * self.n) as u32;
            for (vars, c) in poly.terms() {
                let shifted: Vec<u32> = vars.iter().map(|v| v + offset).collect();
                b.add(&shifted, *c);
            }
        }
        b.build()
    }

    pub(crate) fn split(&self, flat: &[i8]) -> Vec<Vec<i8>> {
        flat.chunks(self.n).map(<[i8]>::to_vec).collect()
    }

    pub(crate) fn prepare(&self, region: Option<&OverlapRegion>) -> Result<Prepared> {
        let l = self.slots.len();
        let spins = l * self.n;
        if spins > MAX_ENUMERATED_SPINS {
            return Err(Error::Resource(format!(
                "enumeration over ℓ·n = {spins} spins exceeds the limit of {MAX_ENUMERATED_SPINS}"
            )));
        }
        let mut checks = Vec::new();
        if let Some(region) = region {
            if region.tuple_size() != l {
                return param(format!(
                    "region is for {}-tuples but the oracle has {l} slots",
                    region.tuple_size()
                ));
            }
            for (mask, interval) in region.constraints() {
                let members = (0..l).filter(|i| mask >> i & 1 == 1).collect();
                checks.push((members, interval));
            }
        }
        // Identical slots share one table.
        let mut tables: Vec<Arc<Vec<f64>>> = Vec::with_capacity(l);
        for (i, slot) in self.slots.iter().enumerate() {
            let shared = (0..i).find(|&j| Arc::ptr_eq(&self.slots[j], slot));
            let table = match shared {
                Some(j) => tables[j].clone(),
                None => Arc::new(slot.polynomial().energy_table()?),
            };
            tables.push(table);
        }
        Ok(Prepared {
            n: self.n,
            tables,
            checks,
        })
    }
}

pub(crate) struct Prepared {
    pub n: usize,
    pub tables: Vec<Arc<Vec<f64>>>,
    checks: Vec<(Vec<usize>, Interval)>,
}

/// Per-tuple view handed to enumeration visitors.
pub(crate) struct TupleView<'a> {
    pub index: u64,
    pub masks: &'a [u64],
    pub energies: &'a [f64],
}

impl TupleView<'_> {
    pub fn total(&self) -> f64 {
        self.energies.iter().sum()
    }
}

impl Prepared {
    pub fn tuple_size(&self) -> usize {
        self.tables.len()
    }

    pub fn spins(&self) -> usize {
        self.n * self.tables.len()
    }

    fn admits(&self, masks: &[u64]) -> bool {
        self.checks.iter().all(|(members, interval)| {
            let x = members.iter().fold(0u64, |acc, &i| acc ^ masks[i]);
            interval.contains((self.n as f64 - 2.0 * x.count_ones() as f64) / self.n as f64)
        })
    }

    /// Visits every admitted tuple in chunks; chunk results are merged in
    /// index order.
    pub fn scan<A, M, V, C>(&self, make: M, visit: V, merge: C) -> A
    where
        A: Send,
        M: Fn() -> A + Sync,
        V: Fn(&mut A, &TupleView) + Sync,
        C: Fn(A, A) -> A,
    {
        let l = self.tables.len();
        let n = self.n;
        let total_bits = self.spins();
        let chunk_bits = CHUNK_BITS.min(total_bits);
        let chunks = 1u64 << (total_bits - chunk_bits);
        let slot_mask = (1u64 << n) - 1;
        let partial: Vec<A> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = make();
                let mut masks = vec![0u64; l];
                let mut energies = vec![0.0; l];
                let start = c << chunk_bits;
                for index in start..start + (1u64 << chunk_bits) {
                    for i in 0..l {
                        masks[i] = (index >> (i * n)) & slot_mask;
                    }
                    if !self.admits(&masks) {
                        continue;
                    }
                    for i in 0..l {
                        energies[i] = self.tables[i][masks[i] as usize];
                    }
                    visit(
                        &mut acc,
                        &TupleView {
                            index,
                            masks: &masks,
                            energies: &energies,
                        },
                    );
                }
                acc
            })
            .collect();
        let mut iter = partial.into_iter();
        let first = iter.next().expect("at least one chunk");
        iter.fold(first, merge)
    }

    pub fn tuple(&self, index: u64) -> Vec<Vec<i8>> {
        let slot_mask = (1u64 << self.n) - 1;
        (0..self.tables.len())
            .map(|i| mask_to_spins((index >> (i * self.n)) & slot_mask, self.n))
            .collect()
    }
}

/// `log Σ exp(β · H(x))` over the admitted tuples, stored as
/// `β · max + log_sum` with `log_sum = log Σ exp(β (H - max))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogPartition {
    pub beta: f64,
    /// `ℓ · n`.
    pub spins: usize,
    /// Number of admitted tuples; zero means the region is empty at this `n`.
    pub states: u64,
    pub max_energy: f64,
    pub log_sum: f64,
}

impl LogPartition {
    pub fn is_empty(&self) -> bool {
        self.states == 0
    }

    /// `log Z`, or `-∞` for an empty region.
    pub fn log_z(&self) -> f64 {
        if self.is_empty() {
            f64::NEG_INFINITY
        } else {
            self.beta * self.max_energy + self.log_sum
        }
    }

    /// `log Z / (β ℓ n)`, written as `max/(ℓn) + log_sum/(βℓn)` so that
    /// `max/(ℓn) ≤ F` holds exactly in floating point.
    pub fn free_energy_density(&self) -> f64 {
        if self.is_empty() {
            return f64::NEG_INFINITY;
        }
        let ln = self.spins as f64;
        self.max_energy / ln + self.log_sum / (self.beta * ln)
    }
}

#[derive(Clone, Copy)]
struct Accumulator {
    max: f64,
    sum: f64,
    count: u64,
}

pub fn restricted_log_partition(
    oracle: &EnergyOracle,
    beta: f64,
    region: &OverlapRegion,
) -> Result<LogPartition> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return param(format!("β must be finite and nonnegative, got {beta}"));
    }
    let prepared = oracle.prepare(Some(region))?;
    let empty = Accumulator {
        max: f64::NEG_INFINITY,
        sum: 0.0,
        count: 0,
    };
    let acc = prepared.scan(
        || empty,
        |acc, t| {
            let e = t.total();
            if e > acc.max {
                acc.sum = acc.sum * (beta * (acc.max - e)).exp() + 1.0;
                acc.max = e;
            } else {
                acc.sum += (beta * (e - acc.max)).exp();
            }
            acc.count += 1;
        },
        |a, b| {
            if a.count == 0 {
                return b;
            }
            if b.count == 0 {
                return a;
            }
            let max = a.max.max(b.max);
            Accumulator {
                max,
                sum: a.sum * (beta * (a.max - max)).exp() + b.sum * (beta * (b.max - max)).exp(),
                count: a.count + b.count,
            }
        },
    );
    Ok(LogPartition {
        beta,
        spins: prepared.spins(),
        states: acc.count,
        max_energy: acc.max,
        log_sum: if acc.count == 0 { f64::NEG_INFINITY } else { acc.sum.ln() },
    })
}

/// An exact maximizer of the grand energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Maximum {
    pub assignments: Vec<Vec<i8>>,
    pub value: f64,
    /// `value / (ℓ n)`.
    pub density: f64,
}

/// Exhaustive maximum over the region (the whole cube when `None`). Ties go
/// to the first tuple in enumeration order. `Ok(None)` means the region
/// admits no tuple at this `n`.
pub fn brute_force_max(oracle: &EnergyOracle, region: Option<&OverlapRegion>) -> Result<Option<Maximum>> {
    let prepared = oracle.prepare(region)?;
    let best = prepared.scan(
        || None::<(f64, u64)>,
        |best, t| {
            let e = t.total();
            if best.is_none_or(|(v, _)| e > v) {
                *best = Some((e, t.index));
            }
        },
        |a, b| match (a, b) {
            (Some(x), Some(y)) => Some(if y.0 > x.0 { y } else { x }),
            (x, None) => x,
            (None, y) => y,
        },
    );
    Ok(best.map(|(value, index)| Maximum {
        assignments: prepared.tuple(index),
        value,
        density: value / prepared.spins() as f64,
    }))
}

/// Checks a certificate: the assignments have the stated grand energy.
pub fn verify_maximum(oracle: &EnergyOracle, m: &Maximum) -> Result<bool> {
    for s in &m.assignments {
        check_assignment(s, oracle.n())?;
    }
    Ok((oracle.energy(&m.assignments)? - m.value).abs() <= 1e-9 * (1.0 + m.value.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::ZeroHamiltonian;

    #[test]
    fn zero_oracle_counts_the_cube() {
        let o = EnergyOracle::replicated(Arc::new(ZeroHamiltonian(5)), 2).unwrap();
        let lp = restricted_log_partition(&o, 1.0, &OverlapRegion::full(2)).unwrap();
        assert_eq!(lp.states, 1 << 10);
        assert!((lp.log_z() - 10.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn guard_and_empty_region() {
        let o = EnergyOracle::replicated(Arc::new(ZeroHamiltonian(13)), 2).unwrap();
        assert!(matches!(
            restricted_log_partition(&o, 1.0, &OverlapRegion::full(2)),
            Err(Error::Resource(_))
        ));
        let o = EnergyOracle::replicated(Arc::new(ZeroHamiltonian(4)), 2).unwrap();
        // Overlaps at n = 4 lie on the grid {-1, -1/2, 0, 1/2, 1}.
        let region = OverlapRegion::pairwise(2, 0, 1, 0.1, 0.4).unwrap();
        let lp = restricted_log_partition(&o, 1.0, &region).unwrap();
        assert!(lp.is_empty());
        assert_eq!(lp.log_z(), f64::NEG_INFINITY);
        assert_eq!(brute_force_max(&o, Some(&region)).unwrap(), None);
    }

    #[test]
    fn restricted_counts_match_binomials() {
        let o = EnergyOracle::replicated(Arc::new(ZeroHamiltonian(6)), 2).unwrap();
        // R = 1/3 means exactly two disagreements: 64 · C(6, 2) tuples.
        let region = OverlapRegion::pairwise(2, 0, 1, 0.2, 0.4).unwrap();
        let lp = restricted_log_partition(&o, 1.0, &region).unwrap();
        assert_eq!(lp.states, 64 * 15);
    }
}
