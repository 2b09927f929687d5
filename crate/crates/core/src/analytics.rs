//! Conditional mean H₂, lag-one covariance of the ARGP, and marginal
//! goodness-of-fit summaries.
//!
//! Integrals of the quantile function are taken over the cumulative hazard
//! v = −ln(1 − s) instead of s, which removes the endpoint singularity of
//! G⁻¹ at s = 1 for ξ > 0.

use serde::Serialize;

use crate::dynamics::f_star_sf;
use crate::error::{Error, Result};
use crate::gpd::GpdParams;
use crate::quadrature::{integrate, integrate_to_infinity, QuadOptions};
use crate::summary::{five_number, ks_distance, FiveNumber};

pub const PIT_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagOneStats {
    pub cov: f64,
    pub cor: f64,
    pub m1: f64,
    pub m2: f64,
}

/// ∫_0^c G⁻¹(s) ds for c = 1 − w, as ∫_0^{−ln w} G⁻¹(1 − e^{−v}) e^{−v} dv.
fn partial_mean_sf(p: &GpdParams, w: f64, tol: f64) -> Result<f64> {
    if w >= 1.0 {
        return Ok(0.0);
    }
    let integrand = |v: f64| {
        let e = (-v).exp();
        if e == 0.0 {
            0.0
        } else {
            p.from_cum_hazard(v) * e
        }
    };
    if w <= 0.0 {
        return integrate_to_infinity(
            integrand,
            0.0,
            1.0 / (1.0 - p.xi().max(0.0)),
            QuadOptions::with_abs_tol(tol),
        )
        .map(|r| r.value);
    }
    integrate(integrand, 0.0, -w.ln(), QuadOptions::with_abs_tol(tol)).map(|r| r.value)
}

fn check_h2(p: &GpdParams) -> Result<()> {
    if p.xi() >= 1.0 {
        return Err(Error::InfiniteMoment { r: 1.0, xi: p.xi() });
    }
    Ok(())
}

fn h2_sf_unchecked(p: &GpdParams, beta: f64, w: f64, tol: f64) -> Result<f64> {
    let x = 1.0 - w;
    let wf = f_star_sf(beta, w);
    let weight = beta / ((1.0 - beta) * x + beta);
    let first = if weight == 0.0 {
        0.0
    } else {
        weight * p.quantile_sf(wf)
    };
    let second = if beta == 1.0 {
        0.0
    } else {
        (1.0 - beta) * partial_mean_sf(p, wf, tol)?
    };
    Ok(first + second)
}

/// H₂ at survival probability `w = 1 − x`; accurate for x near 1.
pub fn h2_sf(p: &GpdParams, beta: f64, w: f64) -> Result<f64> {
    check_h2(p)?;
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::domain(format!(
            "survival probability {w} outside [0, 1]"
        )));
    }
    if w == 0.0 && p.support().hi.is_infinite() {
        return Err(Error::UnboundedQuantile);
    }
    h2_sf_unchecked(p, beta, w, 1e-9 * p.sigma())
}

/// H₂(x) = E[X_t | G(X_{t−1}) = x]
///       = β/((1 − β)x + β) · G⁻¹(f*(x)) + (1 − β) ∫_0^{f*(x)} G⁻¹(s) ds.
pub fn h2(p: &GpdParams, beta: f64, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("probability {x} outside [0, 1]")));
    }
    h2_sf(p, beta, 1.0 - x)
}

/// Lag-one covariance ∫_0^1 G⁻¹(s) H₂(s) ds − m₁² and correlation, computed
/// at σ = 1 and rescaled.
pub fn lag_one_stats(p: &GpdParams, beta: f64) -> Result<LagOneStats> {
    if p.xi() >= 0.5 {
        return Err(Error::InfiniteMoment { r: 2.0, xi: p.xi() });
    }
    let unit = GpdParams::new(p.xi(), 1.0)?;
    let m1 = unit.moment(1.0)?;
    let m2 = unit.moment(2.0)?;
    let var = m2 - m1 * m1;
    let cov = if beta == 0.0 {
        0.0
    } else if beta == 1.0 {
        var
    } else {
        let failure = std::cell::Cell::new(None);
        let integrand = |v: f64| {
            let w = (-v).exp();
            if w == 0.0 {
                return 0.0;
            }
            match h2_sf_unchecked(&unit, beta, w, 1e-11) {
                Ok(h) => unit.from_cum_hazard(v) * h * w,
                Err(e) => {
                    failure.set(Some(e.to_string()));
                    f64::NAN
                }
            }
        };
        let scale = 1.0 / (1.0 - 2.0 * unit.xi().max(0.0));
        let outer = integrate_to_infinity(integrand, 0.0, scale, QuadOptions::with_abs_tol(1e-8));
        if let Some(msg) = failure.take() {
            return Err(Error::domain(format!("inner quadrature failed: {msg}")));
        }
        outer?.value - m1 * m1
    };
    let s = p.sigma();
    Ok(LagOneStats {
        cov: cov * s * s,
        cor: cov / var,
        m1: m1 * s,
        m2: m2 * s * s,
    })
}

/// Empirical lag-one covariance and correlation.
pub fn sample_lag_one(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let cov = values
        .windows(2)
        .map(|w| (w[0] - m) * (w[1] - m))
        .sum::<f64>()
        / (n - 1.0);
    (cov, cov / var)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport {
    pub ks: f64,
    pub n: usize,
    /// Counts of G(x) in 20 equal bins on [0, 1].
    pub pit_histogram: Vec<usize>,
}

/// Sup distance of the exceedance sample to `p` plus a PIT histogram. No
/// p-value is attached; serial dependence invalidates the i.i.d. tables.
pub fn gof_marginal(exceedances: &[f64], p: &GpdParams) -> Result<GofReport> {
    if exceedances.is_empty() {
        return Err(Error::EmptySample("no exceedances to compare".into()));
    }
    let mut hist = vec![0usize; PIT_BINS];
    for &x in exceedances {
        let u = p.cdf(x);
        let bin = ((u * PIT_BINS as f64) as usize).min(PIT_BINS - 1);
        hist[bin] += 1;
    }
    Ok(GofReport {
        ks: ks_distance(exceedances, |x| p.cdf(x)),
        n: exceedances.len(),
        pit_histogram: hist,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxSummary {
    pub summary: FiveNumber,
    pub log_scale: bool,
    pub excluded_zeros: usize,
}

/// Five-number summary and mean. On the log scale the statistics are taken
/// of log10 values over the positive entries and mapped back, so the mean is
/// the geometric mean.
pub fn box_summary(values: &[f64], log_scale: bool) -> Result<BoxSummary> {
    if !log_scale {
        return Ok(BoxSummary {
            summary: five_number(values)?,
            log_scale,
            excluded_zeros: 0,
        });
    }
    let positive: Vec<f64> = values
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|v| v.log10())
        .collect();
    let excluded_zeros = values.len() - positive.len();
    let s = five_number(&positive)?;
    let back = |v: f64| 10f64.powf(v);
    Ok(BoxSummary {
        summary: FiveNumber {
            min: back(s.min),
            q1: back(s.q1),
            median: back(s.median),
            q3: back(s.q3),
            max: back(s.max),
            mean: back(s.mean),
            count: s.count,
        },
        log_scale,
        excluded_zeros,
    })
}
