//! Transition maps preserving the GPD marginal: f* on [0, 1] and its image f
//! in the original scale.
//!
//! f* multiplies the odds u/(1 − u) by 1/β, so f is evaluated on log-odds and
//! k-fold iteration is a shift by −k ln β. This stays finite where repeated
//! x-space evaluation would overflow.

use crate::error::{Error, Result};
use crate::gpd::GpdParams;

pub fn check_prob(name: &str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::invalid(format!(
            "{name} must lie in [0, 1], got {v}"
        )))
    }
}

/// f*(u) = u / ((1 − β)u + β). At β = 0 this is the pointwise limit:
/// 0 at u = 0 and 1 elsewhere.
pub fn f_star(beta: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if beta == 0.0 {
        return 1.0;
    }
    (u / ((1.0 - beta) * u + beta)).min(1.0)
}

/// f* acting on survival probabilities w = 1 − u: w ↦ βw / (1 − (1 − β)w).
pub fn f_star_sf(beta: f64, w: f64) -> f64 {
    if w >= 1.0 {
        return 1.0;
    }
    if beta == 0.0 || w <= 0.0 {
        return 0.0;
    }
    beta * w / (1.0 - (1.0 - beta) * w)
}

/// (f*)⁻¹(u) = βu / (1 − (1 − β)u).
pub fn f_star_inv(beta: f64, u: f64) -> Result<f64> {
    if beta == 0.0 {
        return Err(Error::Inversion);
    }
    if u >= 1.0 {
        return Ok(1.0);
    }
    Ok(beta * u / (1.0 - (1.0 - beta) * u))
}

fn log_expm1(a: f64) -> f64 {
    if a > 30.0 {
        a + (-(-a).exp()).ln_1p()
    } else {
        a.exp_m1().ln()
    }
}

fn softplus(l: f64) -> f64 {
    if l > 30.0 {
        l + (-l).exp().ln_1p()
    } else {
        l.exp().ln_1p()
    }
}

/// f^k(x) for the GPD marginal `p`.
pub fn f_iterate(p: &GpdParams, beta: f64, x: f64, k: u32) -> Result<f64> {
    let support = p.support();
    if !(support.contains(x)) {
        return Err(Error::domain(format!(
            "{x} outside the support [0, {}]",
            support.hi
        )));
    }
    if k == 0 || x == 0.0 || beta == 1.0 {
        return Ok(x);
    }
    let logit = log_expm1(p.cum_hazard(x));
    let shifted = logit - k as f64 * beta.ln();
    Ok(p.from_cum_hazard(softplus(shifted)))
}

/// f(x) = G⁻¹(f*(G(x))).
pub fn f_gpd(p: &GpdParams, beta: f64, x: f64) -> Result<f64> {
    f_iterate(p, beta, x, 1)
}

/// G⁻¹ ∘ f* ∘ G for an arbitrary continuous marginal given by its survival
/// function and survival quantile.
pub fn conjugate<S, Q>(sf: S, quantile_sf: Q, beta: f64, x: f64) -> f64
where
    S: Fn(f64) -> f64,
    Q: Fn(f64) -> f64,
{
    quantile_sf(f_star_sf(beta, sf(x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    // Closed form of f for the GPD, written out directly.
    fn f_closed(xi: f64, sigma: f64, beta: f64, x: f64) -> f64 {
        let inner = (1.0 + xi * x / sigma).powf(1.0 / xi) - 1.0;
        sigma / xi * ((1.0 + inner / beta).powf(xi) - 1.0)
    }

    #[test]
    fn f_star_hand_values() {
        assert_eq!(f_star(1.0, 0.37), 0.37);
        assert!((f_star(0.5, 0.5) - 2.0 / 3.0).abs() < 1e-15);
        for beta in [0.0, 0.2, 1.0] {
            assert_eq!(f_star(beta, 0.0), 0.0);
            assert_eq!(f_star(beta, 1.0), 1.0);
        }
        assert_eq!(f_star(0.0, 1e-9), 1.0);
    }

    #[test]
    fn f_star_inv_hand_values() {
        assert_eq!(f_star_inv(1.0, 0.37).unwrap(), 0.37);
        assert!((f_star_inv(0.5, 2.0 / 3.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(f_star_inv(0.3, 1.0).unwrap(), 1.0);
        assert!(matches!(f_star_inv(0.0, 0.5), Err(Error::Inversion)));
    }

    #[test]
    fn survival_form_agrees() {
        for beta in [0.0, 0.1, 0.5, 0.9, 1.0] {
            for u in [0.0, 0.1, 0.5, 0.9, 0.999] {
                let w = f_star_sf(beta, 1.0 - u);
                assert!(
                    (1.0 - w - f_star(beta, u)).abs() < 1e-14,
                    "beta {beta} u {u}"
                );
            }
        }
    }

    #[test]
    fn f_gpd_left_endpoint() {
        let p = GpdParams::new(0.3, 2.0).unwrap();
        assert_eq!(f_gpd(&p, 0.4, 0.0).unwrap(), 0.0);
        assert!(f_gpd(&p, 0.4, -1.0).is_err());
    }

    #[test]
    fn f_gpd_matches_closed_form_at_reference_values() {
        let p = GpdParams::new(0.5538, 11488.0).unwrap();
        let f = f_gpd(&p, 0.8619, 1000.0).unwrap();
        let c = f_closed(0.5538, 11488.0, 0.8619, 1000.0);
        assert!(rel(f, c) < 1e-10, "{f} vs {c}");
    }

    #[test]
    fn f_gpd_matches_closed_form_on_grid() {
        for xi in [-0.4, -0.1, 0.05, 0.3, 0.5538, 0.9] {
            for sigma in [0.5, 1.0, 11488.0] {
                let p = GpdParams::new(xi, sigma).unwrap();
                for beta in [0.05, 0.3, 0.7, 0.99] {
                    for q in [0.01, 0.2, 0.5, 0.8, 0.99] {
                        let x = p.quantile(q).unwrap();
                        let f = f_gpd(&p, beta, x).unwrap();
                        let c = f_closed(xi, sigma, beta, x);
                        assert!(
                            rel(f, c) < 1e-10,
                            "xi {xi} sigma {sigma} beta {beta} q {q}: {f} vs {c}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn f_gpd_is_conjugation() {
        let p = GpdParams::new(0.25, 3.0).unwrap();
        for x in [0.01, 0.5, 4.0, 40.0] {
            let direct = p.quantile(f_star(0.6, p.cdf(x))).unwrap();
            assert!(rel(f_gpd(&p, 0.6, x).unwrap(), direct) < 1e-10);
        }
    }

    #[test]
    fn pareto_conjugation_is_linear() {
        let (xi, sigma, beta) = (0.4, 2.0, 0.35);
        let sf = |x: f64| 1.0 / (1.0 + (x / sigma).powf(1.0 / xi));
        let qsf = |w: f64| sigma * ((1.0 - w) / w).powf(xi);
        for x in [0.5, 1.0, 7.0, 25.0] {
            let f = conjugate(sf, qsf, beta, x);
            assert!(rel(f, beta.powf(-xi) * x) < 1e-10);
        }
    }

    #[test]
    fn iterate_hand_values() {
        let p = GpdParams::new(0.0, 1.0).unwrap();
        let x = p.quantile(0.5).unwrap();
        assert_eq!(f_iterate(&p, 0.5, x, 0).unwrap(), x);
        assert_eq!(f_iterate(&p, 1.0, x, 5).unwrap(), x);
        let y = f_iterate(&p, 0.5, x, 2).unwrap();
        assert!((p.cdf(y) - 0.8).abs() < 1e-14);
    }

    #[test]
    fn iterate_heavy_tail_stays_finite() {
        let p = GpdParams::new(0.5538, 11488.0).unwrap();
        let mut prev = 1000.0;
        for k in [1, 10, 100, 1000] {
            let y = f_iterate(&p, 0.8619, 1000.0, k).unwrap();
            assert!(y.is_finite() && y >= prev);
            prev = y;
        }
    }

    #[test]
    fn beta_zero_jumps_to_right_end() {
        let p = GpdParams::new(-0.25, 1.0).unwrap();
        assert_eq!(f_gpd(&p, 0.0, 0.5).unwrap(), 4.0);
        let q = GpdParams::new(0.25, 1.0).unwrap();
        assert_eq!(f_gpd(&q, 0.0, 0.5).unwrap(), f64::INFINITY);
    }
}
