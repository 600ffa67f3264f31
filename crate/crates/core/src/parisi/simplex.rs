//! Derivative-free downhill simplex (Nelder–Mead) with dimension-adaptive
//! coefficients.

#[derive(Debug, Clone, Copy)]
pub struct SimplexSettings {
    pub max_evaluations: usize,
    /// Stop when the spread of function values across the simplex drops below this.
    pub f_tolerance: f64,
    /// Stop when every vertex lies within this distance of the best one.
    pub x_tolerance: f64,
    pub initial_step: f64,
}

impl Default for SimplexSettings {
    fn default() -> Self {
        Self {
            max_evaluations: 2000,
            f_tolerance: 1e-9,
            x_tolerance: 1e-7,
            initial_step: 0.25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

pub fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    settings: &SimplexSettings,
) -> SimplexOutcome {
    let dim = start.len();
    if dim == 0 {
        let value = f(start);
        return SimplexOutcome {
            x: Vec::new(),
            value,
            evaluations: 1,
            converged: true,
        };
    }
    let n = dim as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / n, 0.75 - 0.5 / n, 1.0 - 1.0 / n);
    let mut evaluations = 0;
    let mut eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((start.to_vec(), eval(start, &mut evaluations)));
    for i in 0..dim {
        let mut x = start.to_vec();
        x[i] += settings.initial_step;
        let v = eval(&x, &mut evaluations);
        simplex.push((x, v));
    }

    let mut converged = false;
    while evaluations < settings.max_evaluations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        let spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if (worst - best).abs() <= settings.f_tolerance && spread <= settings.x_tolerance {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / n)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(alpha);
        let fr = eval(&reflected, &mut evaluations);
        if fr < best {
            let expanded = along(beta);
            let fe = eval(&expanded, &mut evaluations);
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst {
            let x = along(gamma);
            let v = eval(&x, &mut evaluations);
            (x, v)
        } else {
            let x = along(-gamma);
            let v = eval(&x, &mut evaluations);
            (x, v)
        };
        if fc < fr.min(worst) {
            simplex[dim] = (contracted, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = anchor
                .iter()
                .zip(&vertex.0)
                .map(|(a, v)| a + delta * (v - a))
                .collect();
            let v = eval(&x, &mut evaluations);
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    SimplexOutcome {
        x,
        value,
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let out = nelder_mead(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &SimplexSettings {
                max_evaluations: 5000,
                f_tolerance: 1e-14,
                x_tolerance: 1e-10,
                initial_step: 0.5,
            },
        );
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-4 && (out.x[1] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let out = nelder_mead(
            |x| x.iter().map(|v| v * v).sum(),
            &[3.0; 6],
            &SimplexSettings {
                max_evaluations: 20,
                ..Default::default()
            },
        );
        assert!(!out.converged);
    }
}
