//! Minimisation of the Parisi functional over piecewise-constant order
//! parameters with a growing number of atoms.
//!
//! The search runs on a coarse grid and re-evaluates candidates on the final
//! grid. Each `m`-atom search starts from splits of the best `(m-1)`-atom
//! parameter, so the reported value never increases with `m`. Order
//! parameters are searched in unconstrained coordinates:
//!
//! * interval lengths are a softmax of `m - 1` free logits,
//! * values are `a_i²` (general class) or partial sums `Σ_{k≤i} a_k²`
//!   (monotone class), which is the monotone cone.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::predicates::MixturePolynomial;

use super::simplex::{nelder_mead, SimplexSettings};
use super::{evaluate_parisi, parisi_value, OrderClass, OrderParameter, ParisiEvaluation, ParisiGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSettings {
    pub max_atoms: usize,
    /// Points of the coarse grid used during the search.
    pub search_points: usize,
    /// Grid for the reported values; `None` selects [`ParisiGrid::for_mixture`].
    pub grid: Option<ParisiGrid>,
    /// Simplex budget per start.
    pub evaluations_per_start: usize,
    /// Relative improvement below which simplex restarts stop.
    pub tolerance: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            max_atoms: 8,
            search_points: 512,
            grid: None,
            evaluations_per_start: 1500,
            tolerance: 1e-7,
        }
    }
}

impl OptimizerSettings {
    pub fn with_atoms(self, max_atoms: usize) -> Self {
        Self { max_atoms, ..self }
    }

    pub fn with_grid(self, grid: ParisiGrid) -> Self {
        Self {
            grid: Some(grid),
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub atoms: usize,
    /// Best value so far on the reporting grid.
    pub value: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub order: OrderParameter,
    /// Value on the reporting grid; an upper bound on the infimum up to `evaluation.grid_delta`.
    pub value: f64,
    pub evaluation: ParisiEvaluation,
    pub history: Vec<AtomRecord>,
    /// `false` when some simplex run exhausted its budget.
    pub converged: bool,
    pub evaluations: usize,
}

struct Coordinates {
    atoms: usize,
    class: OrderClass,
}

const LOGIT_CLAMP: f64 = 30.0;

/// Smallest decrease accepted by the pattern search.
const COMPASS_GAIN: f64 = 1e-10;

impl Coordinates {
    fn decode(&self, theta: &[f64]) -> Option<OrderParameter> {
        let m = self.atoms;
        let mut gaps = Vec::with_capacity(m);
        gaps.push(1.0);
        for &l in &theta[..m - 1] {
            gaps.push(l.clamp(-LOGIT_CLAMP, LOGIT_CLAMP).exp());
        }
        let total: f64 = gaps.iter().sum();
        let mut breakpoints = Vec::with_capacity(m + 1);
        breakpoints.push(0.0);
        let mut acc = 0.0;
        for g in &gaps[..m - 1] {
            acc += g / total;
            breakpoints.push(acc);
        }
        breakpoints.push(1.0);
        let amplitudes = &theta[m - 1..];
        let values: Vec<f64> = match self.class {
            OrderClass::General => amplitudes.iter().map(|a| a * a).collect(),
            OrderClass::Monotone => amplitudes
                .iter()
                .scan(0.0, |s, a| {
                    *s += a * a;
                    Some(*s)
                })
                .collect(),
        };
        OrderParameter::new(breakpoints, values, self.class).ok()
    }

    fn encode(&self, order: &OrderParameter) -> Vec<f64> {
        let t = order.breakpoints();
        let first = t[1] - t[0];
        let mut theta: Vec<f64> = t
            .windows(2)
            .skip(1)
            .map(|w| ((w[1] - w[0]) / first).ln())
            .collect();
        let z = order.values();
        match self.class {
            OrderClass::General => theta.extend(z.iter().map(|v| v.sqrt())),
            OrderClass::Monotone => {
                theta.push(z[0].sqrt());
                theta.extend(z.windows(2).map(|w| (w[1] - w[0]).max(0.0).sqrt()));
            }
        }
        theta
    }
}

struct Search<'a> {
    xi: &'a MixturePolynomial,
    grid: ParisiGrid,
    settings: &'a OptimizerSettings,
    evaluations: usize,
    converged: bool,
}

impl Search<'_> {
    /// Simplex restarts from `start` until the improvement stalls. The flag
    /// is `false` when the restarts were still improving at the last one.
    fn descend(&mut self, coords: &Coordinates, start: &OrderParameter, budget: usize) -> (OrderParameter, f64, bool) {
        let xi = self.xi;
        let grid = self.grid;
        let objective = |theta: &[f64]| match coords.decode(theta) {
            Some(order) => parisi_value(xi, &order, &grid).unwrap_or(f64::INFINITY),
            None => f64::INFINITY,
        };
        let mut theta = coords.encode(start);
        let mut best = objective(&theta);
        self.evaluations += 1;
        let mut step = 0.3;
        let mut stalled = false;
        for _ in 0..4 {
            let out = nelder_mead(
                objective,
                &theta,
                &SimplexSettings {
                    max_evaluations: budget,
                    f_tolerance: self.settings.tolerance * 1e-2,
                    x_tolerance: 1e-6,
                    initial_step: step,
                },
            );
            self.evaluations += out.evaluations;
            let improvement = best - out.value;
            if out.value < best {
                best = out.value;
                theta = out.x;
            }
            if improvement <= self.settings.tolerance * best.abs().max(1.0) {
                stalled = true;
                break;
            }
            step *= 0.5;
        }
        let (theta, best) = self.compass(coords, theta, best, budget);
        (coords.decode(&theta).expect("accepted points decode"), best, stalled)
    }

    /// Coordinate-wise pattern search with a shrinking step and at most
    /// `budget` evaluations.
    fn compass(&mut self, coords: &Coordinates, mut theta: Vec<f64>, mut best: f64, budget: usize) -> (Vec<f64>, f64) {
        let stop = self.evaluations + budget;
        let mut step = 0.05;
        while step > 1e-4 && self.evaluations < stop {
            let mut moved = false;
            for i in 0..theta.len() {
                for sign in [1.0, -1.0] {
                    let mut trial = theta.clone();
                    trial[i] += sign * step;
                    let Some(order) = coords.decode(&trial) else { continue };
                    self.evaluations += 1;
                    let v = parisi_value(self.xi, &order, &self.grid).unwrap_or(f64::INFINITY);
                    if v < best - COMPASS_GAIN {
                        best = v;
                        theta = trial;
                        moved = true;
                        break;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        (theta, best)
    }
}

fn starts_from(prev: &OrderParameter, class: OrderClass) -> Vec<OrderParameter> {
    let t = prev.breakpoints();
    let mut starts: Vec<OrderParameter> = t
        .windows(2)
        .filter_map(|w| prev.split_at(0.5 * (w[0] + w[1])).ok())
        .collect();
    // A fresh top atom near t = 1 with a larger value.
    let last = *prev.values().last().unwrap();
    let cut = 0.5 * (t[t.len() - 2] + 1.0);
    if let Ok(split) = prev.split_at(cut) {
        let mut values = split.values().to_vec();
        *values.last_mut().unwrap() = 2.0 * last + 1.0;
        if let Ok(o) = OrderParameter::new(split.breakpoints().to_vec(), values, class) {
            starts.push(o);
        }
    }
    starts
}

/// Sweeps `m = 1..=max_atoms` for the given class.
pub fn minimize(
    xi: &MixturePolynomial,
    class: OrderClass,
    settings: &OptimizerSettings,
    warm: Option<&OrderParameter>,
) -> Result<MinimizeResult> {
    if xi.is_zero() {
        return param("mixture polynomial has no nonzero coefficient");
    }
    if settings.max_atoms == 0 {
        return param("max_atoms must be positive");
    }
    let report_grid = settings.grid.unwrap_or_else(|| ParisiGrid::for_mixture(xi));
    let mut search = Search {
        xi,
        grid: report_grid.with_points(settings.search_points.min(report_grid.spatial_points)),
        settings,
        evaluations: 0,
        converged: true,
    };
    // Check both grids up front so that errors are not swallowed by the search.
    parisi_value(xi, &OrderParameter::zero(), &search.grid)?;
    parisi_value(xi, &OrderParameter::zero(), &report_grid)?;

    let budget = settings.evaluations_per_start;
    let mut current = OrderParameter::new(vec![0.0, 1.0], vec![1.0], class)?;
    let mut current_value = f64::INFINITY;
    let mut best: Option<(OrderParameter, f64)> = None;
    let mut history = Vec::new();

    for atoms in 1..=settings.max_atoms {
        let coords = Coordinates { atoms, class };
        let mut candidates: Vec<OrderParameter> = if atoms == 1 {
            vec![current.clone()]
        } else {
            starts_from(&current, class)
        };
        if let Some(w) = warm.filter(|w| w.atoms() == atoms) {
            if let Ok(w) = w.clone().with_class(class) {
                candidates.push(w);
            }
        }
        // Short runs from every start, then a full run from the most promising.
        let mut scouted: Vec<(OrderParameter, f64)> = candidates
            .iter()
            .map(|c| {
                let (o, v, _) = search.descend(&coords, c, budget / 5);
                (o, v)
            })
            .collect();
        scouted.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (lead, _) = scouted.swap_remove(0);
        let (order, value, stalled) = search.descend(&coords, &lead, budget);
        search.converged &= stalled;
        if value < current_value {
            current = order;
            current_value = value;
        } else {
            current = current.split_at(0.5 * (current.breakpoints()[atoms - 2] + 1.0))
                .unwrap_or(current);
        }

        let reported = parisi_value(xi, &current, &report_grid)?;
        let improved = best.as_ref().map_or(true, |(_, v)| reported < *v);
        if improved {
            best = Some((current.clone(), reported));
        }
        history.push(AtomRecord {
            atoms,
            value: best.as_ref().unwrap().1,
            converged: search.converged,
        });
    }

    let (order, _) = best.expect("at least one atom count was searched");
    let evaluation = evaluate_parisi(xi, &order, &report_grid)?;
    Ok(MinimizeResult {
        value: evaluation.value,
        order: order.canonical(),
        evaluation,
        history,
        converged: search.converged,
        evaluations: search.evaluations,
    })
}

/// Ground-state energy density: the infimum over monotone order parameters.
pub fn minimize_gsed(xi: &MixturePolynomial, settings: &OptimizerSettings) -> Result<MinimizeResult> {
    minimize(xi, OrderClass::Monotone, settings, None)
}

/// Upper bound on ALG: the infimum over all nonnegative order parameters.
/// The search is seeded with the monotone optimum, so the result never
/// exceeds the ground-state value on the same grid.
pub fn minimize_alg(xi: &MixturePolynomial, settings: &OptimizerSettings) -> Result<MinimizeResult> {
    let gsed = minimize_gsed(xi, settings)?;
    let warm = gsed.order.clone().with_class(OrderClass::General)?;
    let alg = minimize(xi, OrderClass::General, settings, Some(&warm))?;
    Ok(if alg.value <= gsed.value {
        alg
    } else {
        MinimizeResult {
            order: warm,
            ..gsed
        }
    })
}

/// `v = f̂(∅) + GSED/√α`, the limiting optimal value of a random CSP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CspValue {
    pub mean_term: f64,
    pub gsed: f64,
    pub alpha: f64,
    pub value: f64,
    pub grid_delta: f64,
    pub converged: bool,
}

pub fn csp_value_formula(xi: &MixturePolynomial, alpha: f64, settings: &OptimizerSettings) -> Result<CspValue> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return param(format!("clause density must be positive, got {alpha}"));
    }
    let gsed = minimize_gsed(xi, settings)?;
    Ok(CspValue {
        mean_term: xi.mean_term(),
        gsed: gsed.value,
        alpha,
        value: xi.mean_term() + gsed.value / alpha.sqrt(),
        grid_delta: gsed.evaluation.grid_delta,
        converged: gsed.converged,
    })
}
