//! Backward solution of the zero-temperature Parisi PDE
//!
//! ```text
//! ∂_t Φ + ξ''(t)/2 (∂_xx Φ + ζ(t) (∂_x Φ)²) = 0,   Φ(x, 1) = |x|
//! ```
//!
//! for piecewise-constant `ζ`. On an interval where `ζ = z > 0` the substitution
//! `u = exp(zΦ)` turns the equation into the backward heat equation, so one
//! interval is a single Gaussian convolution with variance `ξ'(b) - ξ'(a)`:
//!
//! ```text
//! Φ(x, a) = (1/z) log E exp(z Φ(x + √v G, b))
//! ```
//!
//! `Φ(·, t)` is even, convex and 1-Lipschitz, and we store only the remainder
//! `ψ(x) = Φ(x) - |x|` on the half line `x ≥ 0`. Writing `e^{z|y|}` against the
//! Gaussian density turns it into a shifted Gaussian on each half line, which
//! handles the kink of `|x|` analytically and keeps every exponential bounded:
//!
//! ```text
//! Φ(x, a) = x + zv/2 + (1/z) log( A(x) + e^{-2zx} B(x) )
//! A(x) = ∫_{u>0} e^{zψ(u)} N(u; x + zv, v) du
//! B(x) = ∫_{u>0} e^{zψ(u)} N(u; zv - x, v) du
//! ```
//!
//! The integrals use the exact Gaussian integral of the piecewise-linear
//! interpolant of the integrand, so the flow from `|x|` is exact and later
//! steps are second order in the grid spacing. Beyond the grid edge `ψ` is
//! held constant, i.e. `Φ` continues with slope ±1.

use statrs::function::erf::erfc;

use crate::predicates::MixturePolynomial;

use super::{OrderParameter, ParisiGrid};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
/// Kernel truncation, in standard deviations.
const KERNEL_SDS: f64 = 10.0;
/// Values of `ζ` at or below this are integrated as plain heat flow.
const ZETA_FLOOR: f64 = 1e-7;

#[inline]
fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

#[inline]
fn normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Interpolation weights of a Gaussian `X ~ N(mean, sd²)` against hat functions
/// on the lattice `d·dx`.
struct HatWeights {
    mean: f64,
    sd: f64,
    dx: f64,
    lo: i64,
    hi: i64,
    /// Full hat weights for `d ∈ [lo, hi]`; zero outside.
    interior: Vec<f64>,
}

impl HatWeights {
    fn new(mean: f64, sd: f64, dx: f64) -> Self {
        let lo = ((mean - KERNEL_SDS * sd) / dx).floor() as i64 - 1;
        let hi = ((mean + KERNEL_SDS * sd) / dx).ceil() as i64 + 1;
        let mut w = Self {
            mean,
            sd,
            dx,
            lo,
            hi,
            interior: Vec::new(),
        };
        let f: Vec<f64> = (lo - 1..=hi + 1).map(|d| w.excess(d)).collect();
        w.interior = (1..f.len() - 1)
            .map(|k| ((f[k - 1] - 2.0 * f[k] + f[k + 1]) / dx).max(0.0))
            .collect();
        w
    }

    /// `E (X - d·dx)_+`.
    fn excess(&self, d: i64) -> f64 {
        let gap = self.mean - d as f64 * self.dx;
        if self.sd == 0.0 {
            return gap.max(0.0);
        }
        let s = gap / self.sd;
        gap * (1.0 - normal_sf(s)) + self.sd * normal_pdf(s)
    }

    fn tail(&self, d: i64) -> f64 {
        let a = d as f64 * self.dx;
        if self.sd == 0.0 {
            return if self.mean >= a { 1.0 } else { 0.0 };
        }
        normal_sf((a - self.mean) / self.sd)
    }

    /// Weight of the right half hat at `d` (the node at `u = 0`).
    fn right_half(&self, d: i64) -> f64 {
        if d < self.lo || d > self.hi {
            return 0.0;
        }
        (self.tail(d) - (self.excess(d) - self.excess(d + 1)) / self.dx).max(0.0)
    }

    /// Weight of the left half hat at `d` plus all mass beyond it (the last
    /// node, continued as a constant).
    fn terminal(&self, d: i64) -> f64 {
        if d < self.lo {
            return 1.0;
        }
        if d > self.hi {
            return 0.0;
        }
        ((self.excess(d - 1) - self.excess(d)) / self.dx).max(0.0)
    }

    /// `∫_{u>0} f(u) N(u; mean + offset·dx, sd²) du` for `f` sampled on `0..=M`.
    fn half_line_integral(&self, f: &[f64], offset: i64) -> f64 {
        let m = (f.len() - 1) as i64;
        let mut acc = self.right_half(-offset) * f[0] + self.terminal(m - offset) * f[m as usize];
        let j_lo = (offset + self.lo).max(1);
        let j_hi = (offset + self.hi).min(m - 1);
        if j_lo <= j_hi {
            let base = (j_lo - offset - self.lo) as usize;
            let len = (j_hi - j_lo + 1) as usize;
            let w = &self.interior[base..base + len];
            let fs = &f[j_lo as usize..=j_hi as usize];
            acc += w.iter().zip(fs).map(|(a, b)| a * b).sum::<f64>();
        }
        acc
    }

    /// Same integral with the Gaussian mean reflected: `N(u; mean - offset·dx, sd²)`.
    fn reflected_integral(&self, f: &[f64], offset: i64) -> f64 {
        let m = (f.len() - 1) as i64;
        let mut acc = self.right_half(offset) * f[0] + self.terminal(m + offset) * f[m as usize];
        let j_lo = (self.lo - offset).max(1);
        let j_hi = (self.hi - offset).min(m - 1);
        if j_lo <= j_hi {
            let base = (j_lo + offset - self.lo) as usize;
            let len = (j_hi - j_lo + 1) as usize;
            let w = &self.interior[base..base + len];
            let fs = &f[j_lo as usize..=j_hi as usize];
            acc += w.iter().zip(fs).map(|(a, b)| a * b).sum::<f64>();
        }
        acc
    }
}

/// `E|x + σG|`.
fn mean_abs_shifted(x: f64, sd: f64) -> f64 {
    if sd == 0.0 {
        return x.abs();
    }
    let s = x / sd;
    x * (1.0 - 2.0 * normal_sf(s)) + 2.0 * sd * normal_pdf(s)
}

/// Half-line remainder `ψ = Φ - |x|` on the nodes `x_i = i·dx`.
pub(crate) struct HalfLine {
    pub dx: f64,
    pub psi: Vec<f64>,
}

impl HalfLine {
    pub fn new(grid: &ParisiGrid) -> Self {
        let nodes = grid.spatial_points / 2;
        Self {
            dx: grid.half_width / nodes as f64,
            psi: vec![0.0; nodes + 1],
        }
    }

    /// One backward interval with constant `ζ = z` and Gaussian variance `v`.
    pub fn step(&mut self, z: f64, v: f64) {
        if v <= 0.0 {
            return;
        }
        let sd = v.sqrt();
        if z <= ZETA_FLOOR {
            self.heat_step(sd);
        } else {
            self.hopf_cole_step(z, v, sd);
        }
    }

    fn heat_step(&mut self, sd: f64) {
        let w = HatWeights::new(0.0, sd, self.dx);
        let psi = &self.psi;
        let next: Vec<f64> = (0..psi.len())
            .map(|i| {
                let x = i as f64 * self.dx;
                let off = i as i64;
                mean_abs_shifted(x, sd) - x
                    + w.half_line_integral(psi, off)
                    + w.reflected_integral(psi, off)
            })
            .collect();
        self.psi = next;
    }

    fn hopf_cole_step(&mut self, z: f64, v: f64, sd: f64) {
        let w = HatWeights::new(z * v, sd, self.dx);
        let top = self.psi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let f: Vec<f64> = self.psi.iter().map(|p| (z * (p - top)).exp()).collect();
        let mut next = Vec::with_capacity(f.len());
        for i in 0..f.len() {
            let x = i as f64 * self.dx;
            let off = i as i64;
            let a = w.half_line_integral(&f, off);
            let damp = (-2.0 * z * x).exp();
            let b = if damp > 0.0 {
                w.reflected_integral(&f, off)
            } else {
                0.0
            };
            let total = a + damp * b;
            let value = if total > 1e-290 {
                top + total.ln() / z
            } else {
                self.local_shift_log(&w, z, i)
            };
            next.push(0.5 * z * v + value);
        }
        self.psi = next;
    }

    /// Recomputes `(1/z) log(A + e^{-2zx} B)` (without the global shift) for one
    /// output node whose sum underflowed, shifting by the local window maximum.
    fn local_shift_log(&self, w: &HatWeights, z: f64, i: usize) -> f64 {
        let m = self.psi.len() as i64 - 1;
        let off = i as i64;
        let lo = (off + w.lo).clamp(0, m) as usize;
        let hi = (off + w.hi).clamp(0, m) as usize;
        let top = self.psi[lo..=hi]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let f: Vec<f64> = self.psi.iter().map(|p| (z * (p - top)).exp()).collect();
        let x = i as f64 * self.dx;
        let total =
            w.half_line_integral(&f, off) + (-2.0 * z * x).exp() * w.reflected_integral(&f, off);
        top + total.max(f64::MIN_POSITIVE).ln() / z
    }

    /// `E Φ(hG)` for `G ~ N(0, 1)`.
    pub fn field_average(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return self.psi[0];
        }
        let w = HatWeights::new(0.0, h, self.dx);
        h * (2.0 / std::f64::consts::PI).sqrt() + 2.0 * w.half_line_integral(&self.psi, 0)
    }

    /// `Φ(x)` at a grid node.
    #[cfg(test)]
    pub fn phi(&self, i: usize) -> f64 {
        i as f64 * self.dx + self.psi[i]
    }
}

/// Solves the PDE backward and returns the field-averaged `Φ(·, 0)`.
pub(crate) fn phi_at_origin(xi: &MixturePolynomial, zeta: &OrderParameter, grid: &ParisiGrid) -> f64 {
    let mut state = HalfLine::new(grid);
    let steps = grid.time_steps_per_interval.max(1);
    let t = zeta.breakpoints();
    for (idx, &z) in zeta.values().iter().enumerate().rev() {
        let v = xi.derivative(t[idx + 1]) - xi.derivative(t[idx]);
        let sub = v / steps as f64;
        for _ in 0..steps {
            state.step(z, sub);
        }
    }
    state.field_average(xi.derivative(0.0).sqrt())
}
