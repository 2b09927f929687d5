//! Generalized Pareto distribution G_{ξ,σ}.
//!
//! Everything is evaluated through z = x/σ with `log1p`/`expm1`, switching to
//! the exponential law when |ξ| < [`XI_SWITCH`].

use rand::distributions::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_to_infinity, QuadOptions};

pub const XI_SWITCH: f64 = 1e-8;

/// Lower bound on ξ accepted at construction.
pub const XI_MIN: f64 = -0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdParams {
    xi: f64,
    sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lo: f64,
    pub hi: f64,
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub m1: Option<f64>,
    pub m2: Option<f64>,
}

impl Moments {
    pub fn variance(&self) -> Option<f64> {
        Some(self.m2? - self.m1?.powi(2))
    }
}

impl GpdParams {
    pub fn new(xi: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        if !(xi > XI_MIN && xi.is_finite()) {
            return Err(Error::invalid(format!("xi must exceed -1/2, got {xi}")));
        }
        Ok(Self { xi, sigma })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn is_exponential(&self) -> bool {
        self.xi.abs() < XI_SWITCH
    }

    pub fn support(&self) -> Support {
        let hi = if self.xi < 0.0 && !self.is_exponential() {
            -self.sigma / self.xi
        } else {
            f64::INFINITY
        };
        Support { lo: 0.0, hi }
    }

    /// Cumulative hazard −ln(1 − G(x)); +∞ at and beyond a finite right end.
    pub fn cum_hazard(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let z = x / self.sigma;
        if self.is_exponential() {
            return z;
        }
        let t = self.xi * z;
        if t <= -1.0 {
            return f64::INFINITY;
        }
        t.ln_1p() / self.xi
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        -(-self.cum_hazard(x)).exp_m1()
    }

    pub fn sf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        (-self.cum_hazard(x)).exp()
    }

    /// Inverse of [`Self::cum_hazard`]: the x with cumulative hazard `a ≥ 0`.
    pub fn from_cum_hazard(&self, a: f64) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        if a == f64::INFINITY {
            return self.support().hi;
        }
        let x = if self.is_exponential() {
            self.sigma * a
        } else {
            self.sigma * (self.xi * a).exp_m1() / self.xi
        };
        x.min(self.support().hi)
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::domain(format!("probability {q} outside [0, 1]")));
        }
        if q == 1.0 {
            return if self.xi < 0.0 && !self.is_exponential() {
                Ok(self.support().hi)
            } else {
                Err(Error::UnboundedQuantile)
            };
        }
        Ok(self.from_cum_hazard(-(-q).ln_1p()))
    }

    /// Quantile addressed by survival probability `w = 1 − q`, exact near
    /// the upper tail. `w = 0` maps to the right end of the support.
    pub fn quantile_sf(&self, w: f64) -> f64 {
        if w >= 1.0 {
            return 0.0;
        }
        if w <= 0.0 {
            return self.support().hi;
        }
        self.from_cum_hazard(-w.ln())
    }

    /// Log density; −∞ outside `[0, hi)`.
    pub fn log_density(&self, x: f64) -> f64 {
        let hi = self.support().hi;
        if !(x >= 0.0 && x < hi) {
            return f64::NEG_INFINITY;
        }
        let z = x / self.sigma;
        if self.is_exponential() {
            -self.sigma.ln() - z
        } else {
            -self.sigma.ln() - (1.0 / self.xi + 1.0) * (self.xi * z).ln_1p()
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }

    /// Inverse-transform draw from one uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let w: f64 = rng.sample(Open01);
        self.quantile_sf(w)
    }

    /// E[X^r]; closed forms for r = 1, 2 and quadrature otherwise.
    pub fn moment(&self, r: f64) -> Result<f64> {
        self.check_moment(r)?;
        let (xi, s) = (self.xi, self.sigma);
        if r == 1.0 {
            Ok(s / (1.0 - xi))
        } else if r == 2.0 {
            Ok(2.0 * s * s / ((1.0 - 2.0 * xi) * (1.0 - xi)))
        } else {
            self.moment_quadrature(r)
        }
    }

    /// E[X^r] = σ^r ∫_0^∞ (expm1(ξv)/ξ)^r e^{−v} dv, the image of
    /// ξ^{−r}∫_0^1 (y^{−ξ} − 1)^r dy under y = e^{−v}.
    pub fn moment_quadrature(&self, r: f64) -> Result<f64> {
        self.check_moment(r)?;
        let xi = self.xi;
        let unit = GpdParams { xi, sigma: 1.0 };
        let integrand = |v: f64| {
            let x = unit.from_cum_hazard(v);
            let w = (-v).exp();
            if w == 0.0 {
                0.0
            } else {
                x.powf(r) * w
            }
        };
        // The integrand decays like e^{−(1 − rξ)v}.
        let decay = 1.0 / (1.0 - r * xi.max(0.0));
        let res = integrate_to_infinity(integrand, 0.0, decay, QuadOptions::default())?;
        Ok(self.sigma.powf(r) * res.value)
    }

    fn check_moment(&self, r: f64) -> Result<()> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::domain(format!(
                "moment order must be positive, got {r}"
            )));
        }
        if r * self.xi >= 1.0 {
            return Err(Error::InfiniteMoment { r, xi: self.xi });
        }
        Ok(())
    }

    pub fn moments(&self) -> Moments {
        Moments {
            m1: self.moment(1.0).ok(),
            m2: self.moment(2.0).ok(),
        }
    }

    /// Sum of log densities; −∞ if any point falls outside the support.
    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        data.iter().map(|&x| self.log_density(x)).sum()
    }
}
