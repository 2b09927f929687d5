//! Nelder–Mead simplex minimization for small unconstrained problems.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Converged when the spread of simplex values falls below
    /// `f_tol * (1 + |f_best|)` and the simplex diameter below `x_tol`.
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_evals: usize,
    /// Initial step along each coordinate.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            f_tol: 1e-12,
            x_tol: 1e-8,
            max_evals: 4000,
            initial_step: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` starting from `x0`. Non-finite objective values are treated
/// as `+∞`, which lets callers encode infeasible regions.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(p, &mut evals)).collect();

    let (alpha, gamma, rho, shrink) = (1.0, 2.0, 0.5, 0.5);
    let mut converged = false;

    while evals < opts.max_evals {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let best = values[0];
        let worst = values[dim];
        let diameter = simplex[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if best.is_finite()
            && (worst - best) <= opts.f_tol * (1.0 + best.abs())
            && diameter <= opts.x_tol
        {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; dim];
        for p in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / dim as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let reflected = along(-alpha);
        let f_r = eval(&reflected, &mut evals);
        if f_r < values[0] {
            let expanded = along(-alpha * gamma);
            let f_e = eval(&expanded, &mut evals);
            if f_e < f_r {
                simplex[dim] = expanded;
                values[dim] = f_e;
            } else {
                simplex[dim] = reflected;
                values[dim] = f_r;
            }
            continue;
        }
        if f_r < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = f_r;
            continue;
        }
        let (contracted, f_c) = if f_r < values[dim] {
            let c = along(-alpha * rho);
            let fc = eval(&c, &mut evals);
            (c, fc)
        } else {
            let c = along(rho);
            let fc = eval(&c, &mut evals);
            (c, fc)
        };
        if f_c < values[dim].min(f_r) {
            simplex[dim] = contracted;
            values[dim] = f_c;
            continue;
        }
        let anchor = simplex[0].clone();
        for i in 1..=dim {
            for (x, a) in simplex[i].iter_mut().zip(&anchor) {
                *x = a + shrink * (*x - a);
            }
            values[i] = eval(&simplex[i], &mut evals);
        }
    }

    let (best_idx, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("simplex is nonempty");
    Minimum {
        x: simplex[best_idx].clone(),
        value: values[best_idx],
        evaluations: evals,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(f, &[-1.2, 1.0], &NelderMeadOptions::default());
        assert!(m.converged);
        assert!(
            (m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6,
            "{m:?}"
        );
    }

    #[test]
    fn infeasible_region_is_avoided() {
        // Minimum of (x-2)^2 restricted to x < 1 via +inf outside.
        let f = |x: &[f64]| {
            if x[0] >= 1.0 {
                f64::INFINITY
            } else {
                (x[0] - 2.0).powi(2)
            }
        };
        let m = nelder_mead(f, &[0.0], &NelderMeadOptions::default());
        assert!(m.x[0] < 1.0 && m.x[0] > 0.999, "{m:?}");
    }

    #[test]
    fn eval_budget_is_respected() {
        let opts = NelderMeadOptions {
            max_evals: 20,
            ..Default::default()
        };
        let m = nelder_mead(|x: &[f64]| x[0].powi(2) + x[1].powi(2), &[5.0, 5.0], &opts);
        assert!(!m.converged);
        assert!(m.evaluations <= 20 + 3);
    }
}
