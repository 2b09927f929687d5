//! GPD maximum likelihood on exceedances.
//!
//! The search runs on data divided by its mean, over unconstrained
//! coordinates (a, b) with ξ = −1/2 + δ + softplus(a) and σ = e^b.

use crate::error::{BestIterate, Error, Result};
use crate::gpd::{GpdParams, XI_MIN, XI_SWITCH};
use crate::optimize::{nelder_mead, NelderMeadOptions};

pub const XI_MARGIN: f64 = 1e-3;
pub const DEFAULT_MIN_EXCEEDANCES: usize = 30;

#[derive(Debug, Clone, Copy)]
pub struct MleOptions {
    pub min_exceedances: usize,
    pub search: NelderMeadOptions,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            min_exceedances: DEFAULT_MIN_EXCEEDANCES,
            search: NelderMeadOptions {
                f_tol: 1e-11,
                x_tol: 1e-7,
                max_evals: 3000,
                initial_step: 0.3,
            },
        }
    }
}

impl MleOptions {
    /// Looser settings for refits started next to a known optimum.
    pub fn warm() -> Self {
        Self {
            search: NelderMeadOptions {
                f_tol: 1e-9,
                x_tol: 1e-5,
                max_evals: 1500,
                initial_step: 0.05,
            },
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleFit {
    pub gpd: GpdParams,
    pub loglik: f64,
    pub evaluations: usize,
}

fn softplus(a: f64) -> f64 {
    if a > 30.0 {
        a
    } else {
        a.exp().ln_1p()
    }
}

fn softplus_inv(t: f64) -> f64 {
    if t > 30.0 {
        t
    } else {
        t.exp_m1().ln()
    }
}

fn to_xi(a: f64) -> f64 {
    XI_MIN + XI_MARGIN + softplus(a)
}

fn from_xi(xi: f64) -> f64 {
    softplus_inv(xi - XI_MIN - XI_MARGIN)
}

/// Negative log-likelihood of GPD(ξ, σ) on `y`; +∞ outside the support.
fn neg_loglik(y: &[f64], xi: f64, sigma: f64) -> f64 {
    let n = y.len() as f64;
    if xi.abs() < XI_SWITCH {
        return n * sigma.ln() + y.iter().sum::<f64>() / sigma;
    }
    let k = xi / sigma;
    let mut acc = 0.0;
    for &v in y {
        let t = k * v;
        if t <= -1.0 {
            return f64::INFINITY;
        }
        acc += t.ln_1p();
    }
    n * sigma.ln() + (1.0 / xi + 1.0) * acc
}

/// Feasible point near (ξ, σ) for data with maximum `ymax`.
fn feasible(xi: f64, sigma: f64, ymax: f64) -> (f64, f64) {
    let xi = if xi.is_finite() {
        xi.clamp(-0.45, 2.0)
    } else {
        0.0
    };
    let mut sigma = if sigma.is_finite() && sigma > 0.0 {
        sigma
    } else {
        1.0
    };
    if xi < 0.0 {
        sigma = sigma.max(-xi * ymax * 1.05);
    }
    (xi, sigma)
}

fn starts(sorted: &[f64]) -> Vec<(f64, f64)> {
    let n = sorted.len() as f64;
    let ymax = sorted[sorted.len() - 1];
    let m = sorted.iter().sum::<f64>() / n;
    let v = sorted.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n - 1.0);
    let r = m * m / v;
    let mom = (0.5 * (1.0 - r), 0.5 * m * (1.0 + r));

    let a0 = m;
    let a1 = sorted
        .iter()
        .enumerate()
        .map(|(i, y)| (1.0 - (i as f64 + 1.0 - 0.35) / n) * y)
        .sum::<f64>()
        / n;
    let d = a0 - 2.0 * a1;
    let pwm = (2.0 - a0 / d, 2.0 * a0 * a1 / d);

    [mom, pwm, (0.0, m)]
        .into_iter()
        .map(|(x, s)| feasible(x, s, ymax))
        .collect()
}

fn validate(data: &[f64], min_exceedances: usize) -> Result<()> {
    if data.len() < min_exceedances {
        return Err(Error::TooFewExceedances {
            found: data.len(),
            required: min_exceedances,
        });
    }
    if let Some(bad) = data.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::domain(format!(
            "exceedances must be positive and finite, found {bad}"
        )));
    }
    Ok(())
}

pub fn mle_gpd(data: &[f64]) -> Result<MleFit> {
    mle_gpd_with(data, &MleOptions::default(), None)
}

/// MLE with optional warm start. Without one, three starts are tried
/// (moments, probability-weighted moments, exponential) and the best kept.
pub fn mle_gpd_with(data: &[f64], opts: &MleOptions, warm: Option<GpdParams>) -> Result<MleFit> {
    validate(data, opts.min_exceedances.max(2))?;
    let n = data.len() as f64;
    let scale = data.iter().sum::<f64>() / n;
    let mut y: Vec<f64> = data.iter().map(|x| x / scale).collect();
    y.sort_by(f64::total_cmp);
    let (ymin, ymax) = (y[0], y[y.len() - 1]);
    if ymax - ymin <= 1e-12 * ymax {
        return Err(Error::DegenerateData("all exceedances are equal".into()));
    }

    let start_points = match warm {
        Some(g) => vec![feasible(g.xi(), g.sigma() / scale, ymax)],
        None => starts(&y),
    };

    let objective = |p: &[f64]| neg_loglik(&y, to_xi(p[0]), p[1].exp());
    let mut best: Option<(f64, f64, f64, bool)> = None;
    let mut evaluations = 0;
    for (xi0, s0) in start_points {
        let m = nelder_mead(objective, &[from_xi(xi0), s0.ln()], &opts.search);
        evaluations += m.evaluations;
        let cand = (to_xi(m.x[0]), m.x[1].exp(), m.value, m.converged);
        if best.is_none_or(|b| cand.2 < b.2) {
            best = Some(cand);
        }
    }
    let (xi, sigma_y, nll, converged) = best.expect("at least one start");
    let sigma = sigma_y * scale;
    let loglik = -nll - n * scale.ln();
    if !converged || !loglik.is_finite() {
        return Err(Error::NotConverged {
            best: BestIterate {
                xi,
                sigma,
                loglik,
                evaluations,
            },
        });
    }
    Ok(MleFit {
        gpd: GpdParams::new(xi, sigma)?,
        loglik,
        evaluations,
    })
}
