//! Frequency estimators for β and γ.
//!
//! All counting happens on the survival PIT scale w = 1 − G(x), supplied as
//! one or more contiguous segments; transitions are never counted across a
//! segment boundary. In a censored series every zero maps to w = 1 − u*.
//!
//! `p_hat` is the frequency of strict decreases. `q_hat` targets
//! P(X̃_t > X̃_{t−1}, X̃_t ≠ f(X̃_{t−1})) = (1 − γ)(1 − u*²)/2 through jumps
//! above the curve f* + ε_f, each weighted by w_{t−1}/(w_f − ε_f) with w_f the
//! survival value of f(X̃_{t−1}). Only fresh innovations can land above the
//! curve, with probability (1 − γ)(w_f − ε_f), so each weighted term has mean
//! (1 − γ)w_{t−1}. `q_raw` is the plain event frequency, kept as a
//! diagnostic: ARGP steps with U_t = 0 and ε_t between X̃_{t−1} and f(X̃_{t−1})
//! are also stochastic increases, and censored-to-exceedance moves are
//! counted as well, so it overstates (1 − γ)(1 − u*²)/2.

use serde::Serialize;

use crate::dynamics::f_star_sf;
use crate::error::{Error, Result};
use crate::gpd::GpdParams;

/// Match tolerance for known-parameter use, where f is evaluated exactly.
pub const DEFAULT_EPS_F: f64 = 1e-6;

/// Survival PIT map of a possibly censored series: exceedances over u follow
/// GPD(ξ, σ(u)) and the censored mass is u*.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitModel {
    pub exceed: GpdParams,
    pub u_star: f64,
}

impl PitModel {
    pub fn uncensored(gpd: GpdParams) -> Self {
        Self {
            exceed: gpd,
            u_star: 0.0,
        }
    }

    pub fn survival(&self, v: f64) -> f64 {
        (1.0 - self.u_star) * self.exceed.sf(v.max(0.0))
    }

    pub fn survival_series(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|&v| self.survival(v)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreqStats {
    pub p_hat: f64,
    pub q_hat: f64,
    pub q_raw: f64,
    pub n_pairs: usize,
}

fn n_pairs(segments: &[&[f64]]) -> usize {
    segments.iter().map(|s| s.len().saturating_sub(1)).sum()
}

/// Frequency of strict decreases, X_t < X_{t−1}, read off either the
/// original scale or the (order-reversing) survival scale.
pub fn decrease_frequency(segments: &[&[f64]], survival_scale: bool) -> f64 {
    let mut count = 0usize;
    for seg in segments {
        for w in seg.windows(2) {
            let down = if survival_scale {
                w[1] > w[0]
            } else {
                w[1] < w[0]
            };
            count += usize::from(down);
        }
    }
    count as f64 / n_pairs(segments) as f64
}

/// p̂, q̂ and the raw q frequency from survival-scale segments, with f* at `beta`.
pub fn freq_stats(segments: &[&[f64]], beta: f64, eps_f: f64) -> Result<FreqStats> {
    let n = n_pairs(segments);
    if n == 0 {
        return Err(Error::EmptySample("need at least one transition".into()));
    }
    let (mut down, mut raw) = (0usize, 0usize);
    let mut weighted = 0.0;
    for seg in segments {
        for w in seg.windows(2) {
            let (prev, cur) = (w[0], w[1]);
            if cur > prev {
                down += 1;
            }
            let wf = f_star_sf(beta, prev);
            let off_curve = (cur - wf).abs() >= eps_f;
            if cur < prev && off_curve {
                raw += 1;
            }
            let edge = wf - eps_f;
            if edge > 0.0 && cur < edge {
                weighted += prev / edge;
            }
        }
    }
    let nf = n as f64;
    Ok(FreqStats {
        p_hat: down as f64 / nf,
        q_hat: weighted / nf,
        q_raw: raw as f64 / nf,
        n_pairs: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaGamma {
    pub beta: f64,
    pub gamma: f64,
    pub beta_raw: f64,
    pub gamma_raw: f64,
    pub beta_clipped: bool,
    pub gamma_clipped: bool,
}

fn clip(v: f64) -> (f64, bool) {
    let c = v.clamp(0.0, 1.0);
    (c, c != v)
}

/// γ = 1 − 2q/ū₂ and β = (ū₂ − 2p)/(ū₂ − 2q) with ū₂ = 1 − u*².
pub fn beta_gamma_from_freq(p: f64, q: f64, u_star: f64) -> Result<BetaGamma> {
    if !(0.0..1.0).contains(&u_star) {
        return Err(Error::invalid(format!(
            "u* must lie in [0, 1), got {u_star}"
        )));
    }
    let scale = 1.0 - u_star * u_star;
    let denom = scale - 2.0 * q;
    if !(denom > 0.0) {
        return Err(Error::UnstableDenominator { p, q, scale });
    }
    let gamma_raw = 1.0 - 2.0 * q / scale;
    let beta_raw = (scale - 2.0 * p) / denom;
    let (beta, beta_clipped) = clip(beta_raw);
    let (gamma, gamma_clipped) = clip(gamma_raw);
    Ok(BetaGamma {
        beta,
        gamma,
        beta_raw,
        gamma_raw,
        beta_clipped,
        gamma_clipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaEstimate {
    pub beta: f64,
    pub beta_raw: f64,
    pub clipped: bool,
    pub p_hat: f64,
}

pub fn beta_from_p(p: f64) -> BetaEstimate {
    let beta_raw = 1.0 - 2.0 * p;
    let (beta, clipped) = clip(beta_raw);
    BetaEstimate {
        beta,
        beta_raw,
        clipped,
        p_hat: p,
    }
}

/// β̂ = 1 − 2p̂ from an ARGP series on its original scale.
pub fn estimate_beta_argp(values: &[f64]) -> Result<BetaEstimate> {
    if values.len() < 2 {
        return Err(Error::EmptySample("need at least two observations".into()));
    }
    Ok(beta_from_p(decrease_frequency(&[values], false)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MargpEstimate {
    pub freq: FreqStats,
    pub params: BetaGamma,
}

/// Censored estimator on survival-scale segments; `beta_f` is the
/// preliminary β used to evaluate f.
pub fn estimate_targp_survival(
    segments: &[&[f64]],
    u_star: f64,
    beta_f: f64,
    eps_f: f64,
) -> Result<MargpEstimate> {
    if !(eps_f > 0.0) {
        return Err(Error::invalid(format!(
            "eps_f must be positive, got {eps_f}"
        )));
    }
    let freq = freq_stats(segments, beta_f, eps_f)?;
    let params = beta_gamma_from_freq(freq.p_hat, freq.q_hat, u_star)?;
    Ok(MargpEstimate { freq, params })
}

/// (β, γ) from an uncensored MARGP series on its original scale.
pub fn estimate_margp(
    values: &[f64],
    gpd: &GpdParams,
    beta_f: f64,
    eps_f: f64,
) -> Result<MargpEstimate> {
    let ws = PitModel::uncensored(*gpd).survival_series(values);
    estimate_targp_survival(&[&ws], 0.0, beta_f, eps_f)
}

/// (β, γ) from a censored series V_t = (X̃_t − u)₊ given the full-scale
/// marginal `gpd` and threshold `u`.
pub fn estimate_targp(
    values: &[f64],
    gpd: &GpdParams,
    u: f64,
    beta_f: f64,
    eps_f: f64,
) -> Result<MargpEstimate> {
    let model = censored_pit_model(gpd, u)?;
    let ws = model.survival_series(values);
    estimate_targp_survival(&[&ws], model.u_star, beta_f, eps_f)
}

/// Survival PIT map for a TARGP with full-scale marginal `gpd` censored at `u`.
pub fn censored_pit_model(gpd: &GpdParams, u: f64) -> Result<PitModel> {
    let spec = super::scale_at_threshold(gpd, u)?;
    Ok(PitModel {
        exceed: GpdParams::new(gpd.xi(), spec.sigma_u)?,
        u_star: gpd.cdf(u),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Beta0 {
    pub beta0: f64,
    pub count: usize,
    pub background: f64,
}

/// The default grid 0.01, 0.02, …, 1.00.
pub fn default_grid() -> Vec<f64> {
    (1..=100).map(|i| i as f64 / 100.0).collect()
}

/// Preliminary β: the grid value whose transition curve carries the most
/// matches |w_t − f*_sf(w_{t−1})| < ε among pairs of uncensored values.
/// Ties go to the larger β.
///
/// A curve is accepted only if its count exceeds the expected count for
/// independent consecutive values by at least five standard deviations;
/// otherwise the series shows no deterministic transitions.
pub fn estimate_beta0(
    segments: &[&[f64]],
    u_star: f64,
    grid: &[f64],
    eps_grid: f64,
) -> Result<Beta0> {
    if grid.is_empty() {
        return Err(Error::invalid("beta grid is empty"));
    }
    if let Some(b) = grid.iter().find(|&&b| !(b > 0.0 && b <= 1.0)) {
        return Err(Error::invalid(format!(
            "grid values must lie in (0, 1], got {b}"
        )));
    }
    if !(eps_grid > 0.0) {
        return Err(Error::invalid(format!(
            "eps_grid must be positive, got {eps_grid}"
        )));
    }
    let top = 1.0 - u_star;
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    let mut prev_uncensored = Vec::new();
    for seg in segments {
        for w in seg.windows(2) {
            if w[0] < top {
                prev_uncensored.push(w[0]);
                if w[1] < top {
                    pairs.push((w[0], w[1]));
                }
            }
        }
    }

    let mut best: Option<(f64, usize, f64, f64)> = None;
    for &beta in grid {
        let count = pairs
            .iter()
            .filter(|&&(a, b)| (b - f_star_sf(beta, a)).abs() < eps_grid)
            .count();
        // Chance matches: the band [c − ε, c + ε] intersected with (0, 1 − u*).
        let background: f64 = prev_uncensored
            .iter()
            .map(|&a| {
                let c = f_star_sf(beta, a);
                ((c + eps_grid).min(top) - (c - eps_grid).max(0.0)).max(0.0)
            })
            .sum();
        let z = (count as f64 - background) / background.max(1.0).sqrt();
        let better = match best {
            None => true,
            Some((b, c, _, _)) => count > c || (count == c && beta > b),
        };
        if better {
            best = Some((beta, count, background, z));
        }
    }
    let (beta0, count, background, z) = best.expect("grid is nonempty");
    if !(z >= 5.0) {
        return Err(Error::NoCurveMass {
            best_count: count,
            background,
        });
    }
    Ok(Beta0 {
        beta0,
        count,
        background,
    })
}
