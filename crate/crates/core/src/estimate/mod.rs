//! Two-stage estimation: GPD maximum likelihood on exceedances, then
//! frequency estimators for the switching probabilities.

pub mod bootstrap;
pub mod freq;
pub mod mle;
pub mod pipeline;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gpd::GpdParams;

pub use freq::{
    beta_gamma_from_freq, censored_pit_model, default_grid, estimate_beta0, estimate_beta_argp,
    estimate_margp, estimate_targp, estimate_targp_survival, freq_stats, BetaGamma, FreqStats,
    PitModel, DEFAULT_EPS_F,
};
pub use mle::{mle_gpd, mle_gpd_with, MleFit, MleOptions};
pub use pipeline::{fit_pipeline, FitOptions, FitReport, StandardErrors};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdSpec {
    pub u: f64,
    pub sigma_u: f64,
}

/// σ(u) = σ + ξu, the scale of exceedances over u.
pub fn scale_at_threshold(p: &GpdParams, u: f64) -> Result<ThresholdSpec> {
    if !(u >= 0.0 && u.is_finite()) {
        return Err(Error::domain(format!(
            "threshold must be nonnegative, got {u}"
        )));
    }
    let sigma_u = p.sigma() + p.xi() * u;
    if !(sigma_u > 0.0) {
        return Err(Error::domain(format!(
            "sigma(u) = {sigma_u} is not positive at u = {u}"
        )));
    }
    Ok(ThresholdSpec { u, sigma_u })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_scale() {
        let p = GpdParams::new(0.0, 3.0).unwrap();
        assert_eq!(scale_at_threshold(&p, 7.0).unwrap().sigma_u, 3.0);
        let p = GpdParams::new(0.5538, 11488.0).unwrap();
        assert!((scale_at_threshold(&p, 2168.0).unwrap().sigma_u - 12688.6384).abs() < 1e-8);
        let p = GpdParams::new(-0.4, 1.0).unwrap();
        assert!(matches!(scale_at_threshold(&p, 3.0), Err(Error::Domain(_))));
    }

    #[test]
    fn exceedances_over_threshold_are_gpd() {
        // P(X > u + v | X > u) = sf_{ξ, σ(u)}(v)
        let p = GpdParams::new(0.3, 2.0).unwrap();
        let u = 1.7;
        let q = GpdParams::new(0.3, scale_at_threshold(&p, u).unwrap().sigma_u).unwrap();
        for v in [0.1, 1.0, 10.0] {
            assert!((p.sf(u + v) / p.sf(u) - q.sf(v)).abs() < 1e-14);
        }
    }
}
