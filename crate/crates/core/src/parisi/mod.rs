//! Zero-temperature Parisi functional
//!
//! `P(ζ) = E Φ_ζ(h, 0) - ½ ∫₀¹ s ξ''(s) ζ(s) ds` with `h ~ N(0, ξ'(0))`, evaluated
//! for piecewise-constant order parameters and minimised over the monotone
//! class (ground-state energy) or the unconstrained class (algorithmic value).
//! When `ξ'(0) = 0` the field average is just `Φ_ζ(0, 0)`.

mod optimize;
mod simplex;
mod solver;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{param, Error, Result};
use crate::predicates::MixturePolynomial;

pub use optimize::{
    csp_value_formula, minimize, minimize_alg, minimize_gsed, AtomRecord, CspValue,
    MinimizeResult, OptimizerSettings,
};
pub use simplex::{nelder_mead, SimplexOutcome, SimplexSettings};

/// The two variational classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrderClass {
    /// Non-decreasing order parameters; the infimum is the ground-state energy density.
    Monotone,
    /// Any nonnegative piecewise-constant order parameter; the infimum is ALG.
    General,
}

/// Piecewise-constant `ζ : [0, 1) -> [0, ∞)`, equal to `values[i]` on
/// `[breakpoints[i], breakpoints[i + 1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderParameter {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    class: OrderClass,
}

impl OrderParameter {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, class: OrderClass) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return param(format!(
                "need m >= 1 values and m + 1 breakpoints, got {} and {}",
                values.len(),
                breakpoints.len()
            ));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return param("breakpoints must start at 0 and end at 1");
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return param("breakpoints must be strictly increasing");
        }
        if let Some(z) = values.iter().find(|z| !(z.is_finite() && **z >= 0.0)) {
            return param(format!("order parameter values must be nonnegative, got {z}"));
        }
        if class == OrderClass::Monotone && values.windows(2).any(|w| w[0] > w[1]) {
            return param("monotone order parameters must be non-decreasing");
        }
        Ok(Self {
            breakpoints,
            values,
            class,
        })
    }

    /// `ζ ≡ z` on `[0, 1)`.
    pub fn constant(z: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![z], OrderClass::Monotone)
    }

    pub fn zero() -> Self {
        Self::constant(0.0).expect("zero is a valid order parameter")
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn class(&self) -> OrderClass {
        self.class
    }

    pub fn atoms(&self) -> usize {
        self.values.len()
    }

    /// Relabels the class; fails when a `General` parameter is not monotone.
    pub fn with_class(self, class: OrderClass) -> Result<Self> {
        Self::new(self.breakpoints, self.values, class)
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let idx = self.breakpoints[1..]
            .iter()
            .position(|&b| t < b)
            .unwrap_or(self.values.len() - 1);
        self.values[idx]
    }

    /// Inserts a breakpoint at `t` without changing the function.
    pub fn split_at(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) || self.breakpoints.contains(&t) {
            return param(format!("cannot split at {t}"));
        }
        let idx = self.breakpoints.iter().position(|&b| b > t).unwrap();
        let mut breakpoints = self.breakpoints.clone();
        let mut values = self.values.clone();
        breakpoints.insert(idx, t);
        values.insert(idx, values[idx - 1]);
        Self::new(breakpoints, values, self.class)
    }

    /// Merges neighbouring intervals with equal values.
    pub fn canonical(&self) -> Self {
        let mut breakpoints = vec![0.0];
        let mut values: Vec<f64> = Vec::with_capacity(self.values.len());
        for (i, &z) in self.values.iter().enumerate() {
            if values.last() == Some(&z) {
                *breakpoints.last_mut().unwrap() = self.breakpoints[i + 1];
            } else {
                values.push(z);
                breakpoints.push(self.breakpoints[i + 1]);
            }
        }
        Self {
            breakpoints,
            values,
            class: self.class,
        }
    }

    /// `½ ∫₀¹ s ξ''(s) ζ(s) ds` in closed form.
    pub fn correction(&self, xi: &MixturePolynomial) -> f64 {
        0.5 * self
            .values
            .iter()
            .enumerate()
            .map(|(i, z)| {
                z * xi.integral_s_second_derivative(self.breakpoints[i], self.breakpoints[i + 1])
            })
            .sum::<f64>()
    }
}

/// Discretisation of `Φ_ζ(x, t)`: `spatial_points` nodes across `[-L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParisiGrid {
    pub half_width: f64,
    pub spatial_points: usize,
    /// Sub-steps per constant-`ζ` interval. The flow on an interval is exact,
    /// so this only matters for refinement diagnostics.
    pub time_steps_per_interval: usize,
}

pub const DEFAULT_SPATIAL_POINTS: usize = 1 << 12;
const BOUNDARY_TOLERANCE: f64 = 1e-8;

impl ParisiGrid {
    /// Default grid: `L = 8 √ξ'(1)` and `2^12` points.
    pub fn for_mixture(xi: &MixturePolynomial) -> Self {
        Self {
            half_width: 8.0 * xi.derivative(1.0).sqrt().max(1e-3),
            spatial_points: DEFAULT_SPATIAL_POINTS,
            time_steps_per_interval: 1,
        }
    }

    pub fn with_points(self, spatial_points: usize) -> Self {
        Self {
            spatial_points,
            ..self
        }
    }

    pub fn with_half_width(self, half_width: f64) -> Self {
        Self { half_width, ..self }
    }

    /// Twice the points and twice the sub-steps.
    pub fn refined(&self) -> Self {
        Self {
            half_width: self.half_width,
            spatial_points: self.spatial_points * 2,
            time_steps_per_interval: self.time_steps_per_interval * 2,
        }
    }

    fn check(&self, xi: &MixturePolynomial) -> Result<()> {
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return param(format!("grid half width must be positive, got {}", self.half_width));
        }
        if self.spatial_points < 16 {
            return param(format!(
                "grid needs at least 16 points, got {}",
                self.spatial_points
            ));
        }
        if self.time_steps_per_interval == 0 {
            return param("time steps per interval must be positive");
        }
        // Mass of the total diffusion that reaches the truncated region.
        let spread = xi.derivative(1.0).sqrt();
        let boundary = erfc(self.half_width / (spread * std::f64::consts::SQRT_2));
        if boundary > BOUNDARY_TOLERANCE {
            return Err(Error::Grid(format!(
                "half width {} is too small for ξ'(1) = {}: boundary mass {boundary:.2e}",
                self.half_width,
                xi.derivative(1.0)
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParisiEvaluation {
    pub phi_at_origin: f64,
    pub correction: f64,
    pub value: f64,
    /// Bound on the change of `value` under one grid refinement.
    pub grid_delta: f64,
}

/// Value of the functional on one grid, without diagnostics.
pub fn parisi_value(xi: &MixturePolynomial, zeta: &OrderParameter, grid: &ParisiGrid) -> Result<f64> {
    if xi.is_zero() {
        return param("mixture polynomial has no nonzero coefficient");
    }
    grid.check(xi)?;
    let zeta = zeta.canonical();
    Ok(solver::phi_at_origin(xi, &zeta, grid) - zeta.correction(xi))
}

/// Evaluates the functional, with a refinement diagnostic from a doubled grid.
pub fn evaluate_parisi(
    xi: &MixturePolynomial,
    zeta: &OrderParameter,
    grid: &ParisiGrid,
) -> Result<ParisiEvaluation> {
    if xi.is_zero() {
        return param("mixture polynomial has no nonzero coefficient");
    }
    grid.check(xi)?;
    let zeta = zeta.canonical();
    let correction = zeta.correction(xi);
    let phi_at_origin = solver::phi_at_origin(xi, &zeta, grid);
    let fine = solver::phi_at_origin(xi, &zeta, &grid.refined());
    let value = phi_at_origin - correction;
    Ok(ParisiEvaluation {
        phi_at_origin,
        correction,
        value,
        grid_delta: 2.0 * (phi_at_origin - fine).abs() + 1e-12 * (1.0 + value.abs()),
    })
}

/// The replica-symmetric value `√(2ξ'(1)/π)`, i.e. the functional at `ζ ≡ 0`.
pub fn rs_value(xi: &MixturePolynomial) -> f64 {
    (2.0 * xi.derivative(1.0) / std::f64::consts::PI).sqrt()
}
