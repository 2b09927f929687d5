//! Full fit of a censored series V_t = (X̃_t − u)₊ at a known threshold u.
//!
//! Stage one fits GPD(ξ, σ(u)) to the positive values and maps the series to
//! the survival PIT scale. Stage two estimates β⁽⁰⁾ on the grid and then the
//! frequency estimators with f evaluated at β⁽⁰⁾.

use serde::{Deserialize, Serialize};

use super::bootstrap::{self, default_block_length, BootstrapOptions};
use super::freq::{
    beta_from_p, beta_gamma_from_freq, default_grid, estimate_beta0, freq_stats, FreqStats,
    PitModel,
};
use super::mle::{mle_gpd_with, MleOptions};
use crate::error::{Error, Result};
use crate::gpd::GpdParams;
use crate::simulate::{Model, ModelKind, Path};
use crate::summary::std_dev;

/// Curve tolerance used when f comes from a grid estimate of β.
pub const PIPELINE_EPS_F: f64 = 0.01;
pub const DEFAULT_EPS_GRID: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct FitOptions {
    pub model: ModelKind,
    pub eps_f: f64,
    pub eps_grid: f64,
    pub grid: Vec<f64>,
    pub mle: MleOptions,
    pub bootstrap: Option<BootstrapOptions>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            model: ModelKind::Targp,
            eps_f: PIPELINE_EPS_F,
            eps_grid: DEFAULT_EPS_GRID,
            grid: default_grid(),
            mle: MleOptions::default(),
            bootstrap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    pub xi: f64,
    pub sigma_u: f64,
    pub sigma0: Option<f64>,
    pub u_star: f64,
    pub beta: f64,
    pub gamma: f64,
    pub resamples: usize,
    pub failed: usize,
    pub block_length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: ModelKind,
    pub xi: f64,
    pub sigma_u: f64,
    /// σ(u) − ξu; absent when not positive.
    pub sigma0: Option<f64>,
    pub u: f64,
    pub u_star: f64,
    pub beta: f64,
    pub gamma: f64,
    pub beta0: f64,
    pub p_hat: f64,
    pub q_hat: f64,
    pub q_raw: f64,
    pub n: usize,
    pub n_exceed: usize,
    pub loglik: f64,
    pub se: Option<StandardErrors>,
    pub flags: Vec<String>,
}

impl FitReport {
    /// Full-scale marginal GPD(ξ, σ₀).
    pub fn gpd(&self) -> Result<GpdParams> {
        let sigma0 = self
            .sigma0
            .ok_or_else(|| Error::domain("fitted sigma0 is not positive"))?;
        GpdParams::new(self.xi, sigma0)
    }

    pub fn model_params(&self) -> Result<Model> {
        Model::build(self.model, self.gpd()?, self.beta, self.gamma, self.u)
    }

    /// 1.96 standard-error interval for a named parameter.
    pub fn interval(&self, name: &str) -> Option<(f64, f64)> {
        let se = self.se.as_ref()?;
        let (est, s) = match name {
            "xi" => (self.xi, se.xi),
            "sigma_u" => (self.sigma_u, se.sigma_u),
            "sigma0" => (self.sigma0?, se.sigma0?),
            "u_star" => (self.u_star, se.u_star),
            "beta" => (self.beta, se.beta),
            "gamma" => (self.gamma, se.gamma),
            _ => return None,
        };
        Some((est - 1.96 * s, est + 1.96 * s))
    }
}

#[derive(Debug, Clone)]
struct Stage {
    exceed: GpdParams,
    sigma0: Option<f64>,
    u_star: f64,
    beta: f64,
    gamma: f64,
    beta0: f64,
    freq: FreqStats,
    n: usize,
    n_exceed: usize,
    loglik: f64,
    flags: Vec<String>,
}

fn stage(segments: &[&[f64]], u: f64, opts: &FitOptions, warm: Option<GpdParams>) -> Result<Stage> {
    let n: usize = segments.iter().map(|s| s.len()).sum();
    let exceedances: Vec<f64> = segments
        .iter()
        .flat_map(|s| s.iter().copied())
        .filter(|&v| v > 0.0)
        .collect();
    let n_exceed = exceedances.len();
    let mut flags = Vec::new();

    let mle = mle_gpd_with(&exceedances, &opts.mle, warm)?;
    let exceed = mle.gpd;
    let (xi, sigma_u) = (exceed.xi(), exceed.sigma());

    let (sigma0, u_star) = match opts.model {
        ModelKind::Targp => {
            let s0 = sigma_u - xi * u;
            match GpdParams::new(xi, s0) {
                Ok(full) if s0 > 0.0 => (Some(s0), full.cdf(u)),
                _ => {
                    flags.push("u_star_empirical".to_string());
                    (None, (n - n_exceed) as f64 / n as f64)
                }
            }
        }
        _ => (Some(sigma_u), 0.0),
    };
    if u_star >= 1.0 {
        return Err(Error::TooFewExceedances {
            found: n_exceed,
            required: opts.mle.min_exceedances,
        });
    }

    let model = PitModel { exceed, u_star };
    let survival: Vec<Vec<f64>> = segments.iter().map(|s| model.survival_series(s)).collect();
    let views: Vec<&[f64]> = survival.iter().map(|s| s.as_slice()).collect();

    let beta0 = estimate_beta0(&views, u_star, &opts.grid, opts.eps_grid)?.beta0;
    let freq = freq_stats(&views, beta0, opts.eps_f)?;

    let (beta, gamma) = match opts.model {
        ModelKind::Argp => {
            let b = beta_from_p(freq.p_hat);
            if b.clipped {
                flags.push("beta_clipped".to_string());
            }
            flags.push("gamma_fixed".to_string());
            (b.beta, 1.0)
        }
        _ => {
            let bg = beta_gamma_from_freq(freq.p_hat, freq.q_hat, u_star)?;
            if bg.beta_clipped {
                flags.push("beta_clipped".to_string());
            }
            if bg.gamma_clipped {
                flags.push("gamma_clipped".to_string());
            }
            (bg.beta, bg.gamma)
        }
    };

    Ok(Stage {
        exceed,
        sigma0,
        u_star,
        beta,
        gamma,
        beta0,
        freq,
        n,
        n_exceed,
        loglik: mle.loglik,
        flags,
    })
}

/// Fits `values`, a series already censored at `u` (zeros are non-exceedance
/// days). For ARGP and MARGP fits the series is uncensored and `u` must be 0.
pub fn fit_pipeline(values: &[f64], u: f64, opts: &FitOptions) -> Result<FitReport> {
    if !(u >= 0.0 && u.is_finite()) {
        return Err(Error::invalid(format!(
            "threshold must be nonnegative, got {u}"
        )));
    }
    if opts.model != ModelKind::Targp && u != 0.0 {
        return Err(Error::invalid(format!(
            "a threshold only applies to TARGP fits, got u = {u}"
        )));
    }
    if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::domain(format!(
            "series values must be finite and nonnegative, found {bad}"
        )));
    }
    let full = stage(&[values], u, opts, None)?;

    let se = match &opts.bootstrap {
        Some(b) if b.resamples > 0 => Some(standard_errors(values, u, opts, b, full.exceed)),
        _ => None,
    };
    let mut flags = full.flags;
    if let Some(se) = &se {
        if se.failed > 0 {
            flags.push(format!("bootstrap_failures={}", se.failed));
        }
    }

    Ok(FitReport {
        model: opts.model,
        xi: full.exceed.xi(),
        sigma_u: full.exceed.sigma(),
        sigma0: full.sigma0,
        u,
        u_star: full.u_star,
        beta: full.beta,
        gamma: full.gamma,
        beta0: full.beta0,
        p_hat: full.freq.p_hat,
        q_hat: full.freq.q_hat,
        q_raw: full.freq.q_raw,
        n: full.n,
        n_exceed: full.n_exceed,
        loglik: full.loglik,
        se,
        flags,
    })
}

/// Censors a raw series at `u` and fits it.
pub fn fit_raw(raw: &[f64], u: f64, opts: &FitOptions) -> Result<FitReport> {
    let censored: Vec<f64> = raw.iter().map(|&x| (x - u).max(0.0)).collect();
    fit_pipeline(&censored, u, opts)
}

pub fn fit_path(path: &Path, opts: &FitOptions) -> Result<FitReport> {
    fit_pipeline(&path.values, path.threshold, opts)
}

fn standard_errors(
    values: &[f64],
    u: f64,
    opts: &FitOptions,
    boot: &BootstrapOptions,
    warm: GpdParams,
) -> StandardErrors {
    let refit = FitOptions {
        mle: MleOptions {
            min_exceedances: opts.mle.min_exceedances,
            ..MleOptions::warm()
        },
        bootstrap: None,
        ..opts.clone()
    };
    let results = bootstrap::run(values, boot, |segs| stage(segs, u, &refit, Some(warm)));
    let ok: Vec<&Stage> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
    let pick = |f: &dyn Fn(&Stage) -> f64| -> f64 {
        let v: Vec<f64> = ok.iter().map(|s| f(s)).collect();
        if v.len() < 2 {
            f64::NAN
        } else {
            std_dev(&v)
        }
    };
    let sigma0: Vec<f64> = ok.iter().filter_map(|s| s.sigma0).collect();
    StandardErrors {
        xi: pick(&|s| s.exceed.xi()),
        sigma_u: pick(&|s| s.exceed.sigma()),
        sigma0: (sigma0.len() >= 2).then(|| std_dev(&sigma0)),
        u_star: pick(&|s| s.u_star),
        beta: pick(&|s| s.beta),
        gamma: pick(&|s| s.gamma),
        resamples: ok.len(),
        failed: results.len() - ok.len(),
        block_length: boot
            .block_length
            .unwrap_or_else(|| default_block_length(values.len())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{ArgpParams, MargpParams, TargpParams, X0Mode};

    fn reference() -> TargpParams {
        let g = GpdParams::new(0.5538, 11488.0).unwrap();
        let m = MargpParams::new(ArgpParams::new(g, 0.8619).unwrap(), 0.5778).unwrap();
        TargpParams::new(m, 2168.0).unwrap()
    }

    #[test]
    fn all_zero_series_hits_the_floor() {
        let err = fit_pipeline(&[0.0; 500], 10.0, &FitOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            Error::TooFewExceedances {
                found: 0,
                required: 30
            }
        ));
    }

    #[test]
    fn threshold_only_for_targp() {
        let opts = FitOptions {
            model: ModelKind::Margp,
            ..FitOptions::default()
        };
        assert!(matches!(
            fit_pipeline(&[1.0; 50], 2.0, &opts),
            Err(Error::InvalidParams(_))
        ));
        assert!(fit_pipeline(&[-1.0; 50], 0.0, &FitOptions::default()).is_err());
    }

    #[test]
    fn recovers_reference_parameters() {
        let p = reference();
        let path = crate::simulate::simulate_targp(&p, 20_000, X0Mode::StationaryDraw, 77).unwrap();
        let r = fit_path(&path, &FitOptions::default()).unwrap();
        assert!((r.xi - 0.5538).abs() < 0.06, "{r:?}");
        assert!((r.beta - 0.8619).abs() < 0.04, "{r:?}");
        assert!((r.gamma - 0.5778).abs() < 0.04, "{r:?}");
        assert!((r.u_star - p.u_star()).abs() < 0.02, "{r:?}");
        assert!((r.beta0 - 0.86).abs() <= 0.02, "{r:?}");
        assert_eq!(r.n, 20_000);
    }

    #[test]
    fn bootstrap_is_reproducible() {
        let p = reference();
        let path = crate::simulate::simulate_targp(&p, 3888, X0Mode::StationaryDraw, 5).unwrap();
        let opts = FitOptions {
            bootstrap: Some(BootstrapOptions {
                resamples: 40,
                block_length: None,
                seed: 9,
            }),
            ..FitOptions::default()
        };
        let a = fit_path(&path, &opts).unwrap();
        let b = fit_path(&path, &opts).unwrap();
        assert_eq!(a, b);
        let se = a.se.unwrap();
        assert_eq!(se.block_length, 16);
        assert!(se.xi > 0.0 && se.beta > 0.0 && se.gamma > 0.0);
    }

    #[test]
    fn argp_fit_fixes_gamma() {
        let g = GpdParams::new(0.25, 1.0).unwrap();
        let a = ArgpParams::new(g, 0.7).unwrap();
        let path = crate::simulate::simulate_argp(&a, 20_000, X0Mode::StationaryDraw, 3).unwrap();
        let opts = FitOptions {
            model: ModelKind::Argp,
            ..FitOptions::default()
        };
        let r = fit_path(&path, &opts).unwrap();
        assert_eq!(r.gamma, 1.0);
        assert!(r.flags.iter().any(|f| f == "gamma_fixed"));
        assert!((r.beta - 0.7).abs() < 0.02);
        assert!((r.beta0 - 0.7).abs() <= 0.021, "{r:?}");
    }
}
