//! Overlap histograms of near-optimal tuples.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

use super::EnergyOracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OgpMode {
    /// The average energy density over the tuple must reach the threshold.
    #[default]
    Average,
    /// Every member's energy density must reach the threshold.
    Plain,
}

/// Pairwise-overlap counts for tuples above one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OgpHistogram {
    pub threshold: f64,
    pub mode: OgpMode,
    /// Bin edges over `[-1, 1]`, `bins + 1` entries.
    pub edges: Vec<f64>,
    /// Counts of `(tuple, pair)` incidences per bin.
    pub counts: Vec<u64>,
    /// Tuples that passed the threshold.
    pub tuples: u64,
}

impl OgpHistogram {
    /// Bins with no mass strictly inside the occupied range.
    pub fn gaps(&self) -> Vec<usize> {
        let occupied: Vec<usize> = (0..self.counts.len()).filter(|&b| self.counts[b] > 0).collect();
        match (occupied.first(), occupied.last()) {
            (Some(&lo), Some(&hi)) => (lo..=hi).filter(|&b| self.counts[b] == 0).collect(),
            _ => Vec::new(),
        }
    }
}

/// Bin of `R = (n - 2d)/n` for Hamming distance `d`, computed exactly so that
/// overlaps on an edge land in the upper bin.
fn bin_of(distance: u32, n: usize, bins: usize) -> usize {
    ((n - distance as usize) * bins / n).min(bins - 1)
}

/// For each threshold `v` (an energy density, `-∞` allowed), enumerates every
/// tuple passing the threshold and histograms all pairwise overlaps.
pub fn ogp_scan(oracle: &EnergyOracle, thresholds: &[f64], bins: usize, mode: OgpMode) -> Result<Vec<OgpHistogram>> {
    if bins == 0 {
        return param("bins must be positive");
    }
    if oracle.tuple_size() < 2 {
        return param("an overlap scan needs at least two slots");
    }
    let prepared = oracle.prepare(None)?;
    let l = prepared.tuple_size();
    let n = prepared.n as f64;
    let k = thresholds.len();
    let make = || (vec![0u64; k * bins], vec![0u64; k]);
    let (counts, tuples) = prepared.scan(
        make,
        |(counts, tuples), t| {
            let score = match mode {
                OgpMode::Average => t.total() / (l as f64 * n),
                OgpMode::Plain => t.energies.iter().cloned().fold(f64::INFINITY, f64::min) / n,
            };
            let mut pair_bins: Option<Vec<usize>> = None;
            for (ti, &v) in thresholds.iter().enumerate() {
                if score < v {
                    continue;
                }
                let pb = pair_bins.get_or_insert_with(|| {
                    let mut out = Vec::with_capacity(l * (l - 1) / 2);
                    for a in 0..l {
                        for b in a + 1..l {
                            out.push(bin_of((t.masks[a] ^ t.masks[b]).count_ones(), prepared.n, bins));
                        }
                    }
                    out
                });
                tuples[ti] += 1;
                for &b in pb.iter() {
                    counts[ti * bins + b] += 1;
                }
            }
        },
        |(mut c1, mut t1), (c2, t2)| {
            c1.iter_mut().zip(c2).for_each(|(a, b)| *a += b);
            t1.iter_mut().zip(t2).for_each(|(a, b)| *a += b);
            (c1, t1)
        },
    );
    let edges: Vec<f64> = (0..=bins).map(|b| -1.0 + 2.0 * b as f64 / bins as f64).collect();
    Ok(thresholds
        .iter()
        .enumerate()
        .map(|(ti, &threshold)| OgpHistogram {
            threshold,
            mode,
            edges: edges.clone(),
            counts: counts[ti * bins..(ti + 1) * bins].to_vec(),
            tuples: tuples[ti],
        })
        .collect())
}
