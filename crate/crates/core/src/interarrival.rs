//! Interarrival times between TARGP exceedances.
//!
//! The exceedance indicator J_t = 𝕀(V_t > 0) is a two-state chain with stay
//! probabilities π₀ (censored) and π₁ (exceeding). The number L of censored
//! days between two exceedances is 0 with probability π₁ and otherwise
//! geometric with parameter 1 − π₀.

use serde::Serialize;

use crate::dynamics::check_prob;
use crate::error::{Error, Result};
use crate::simulate::{ModelKind, Path, TargpParams};
use crate::summary::{five_number, FiveNumber};

/// Burn-in offsets in trading days (one to five years).
pub const PRESET_OFFSETS: [usize; 6] = [0, 252, 504, 756, 1008, 1260];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterarrivalLaw {
    pub pi0: f64,
    pub pi1: f64,
}

impl InterarrivalLaw {
    pub fn new(pi0: f64, pi1: f64) -> Result<Self> {
        Ok(Self {
            pi0: check_prob("pi0", pi0)?,
            pi1: check_prob("pi1", pi1)?,
        })
    }

    pub fn from_params(p: &TargpParams) -> Self {
        Self::from_parts(p.beta(), p.gamma(), p.u_star())
    }

    /// π₁ = 1 − (1 − βγ)u*, π₀ = γ̄u* + γ(β + β̄²u*ū*)/(β + β̄ū*).
    pub fn from_parts(beta: f64, gamma: f64, u_star: f64) -> Self {
        let (bb, gb, ub) = (1.0 - beta, 1.0 - gamma, 1.0 - u_star);
        let pi1 = 1.0 - (1.0 - beta * gamma) * u_star;
        let denom = beta + bb * ub;
        // β = 0 and u* = 1 together censor every day.
        let stay = if denom == 0.0 {
            1.0
        } else {
            (beta + bb * bb * u_star * ub) / denom
        };
        let pi0 = gb * u_star + gamma * stay;
        Self {
            pi0: pi0.clamp(0.0, 1.0),
            pi1: pi1.clamp(0.0, 1.0),
        }
    }

    pub fn pmf(&self, k: u64) -> f64 {
        if k == 0 {
            self.pi1
        } else {
            (1.0 - self.pi1) * (1.0 - self.pi0) * self.pi0.powf((k - 1) as f64)
        }
    }

    /// P(L > k).
    pub fn tail(&self, k: u64) -> f64 {
        (1.0 - self.pi1) * self.pi0.powf(k as f64)
    }

    pub fn mean_var(&self) -> Result<(f64, f64)> {
        if self.pi1 == 1.0 {
            return Ok((0.0, 0.0));
        }
        if self.pi0 >= 1.0 {
            return Err(Error::InfiniteMean);
        }
        let d = 1.0 - self.pi0;
        let mean = (1.0 - self.pi1) / d;
        let var = (1.0 - self.pi1) * (self.pi0 + self.pi1) / (d * d);
        Ok((mean, var))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InterarrivalSample {
    pub gaps: Vec<u64>,
    pub offset: usize,
}

/// Zeros between consecutive exceedances in `values[offset..]`. A trailing
/// censored run without a closing exceedance is dropped.
pub fn gaps_from_values(values: &[f64], offset: usize) -> InterarrivalSample {
    let mut gaps = Vec::new();
    let mut last: Option<usize> = None;
    for (t, &v) in values.iter().enumerate().skip(offset) {
        if v > 0.0 {
            if let Some(prev) = last {
                gaps.push((t - prev - 1) as u64);
            }
            last = Some(t);
        }
    }
    InterarrivalSample { gaps, offset }
}

pub fn extract_gaps(path: &Path, offset: usize) -> Result<InterarrivalSample> {
    if path.kind != ModelKind::Targp {
        return Err(Error::invalid(format!(
            "interarrival gaps need a TARGP path, got {}",
            path.kind
        )));
    }
    if offset >= path.len() {
        return Err(Error::invalid(format!(
            "offset {offset} is not below the path length {}",
            path.len()
        )));
    }
    Ok(gaps_from_values(&path.values, offset))
}

pub fn gap_summary(s: &InterarrivalSample) -> Result<FiveNumber> {
    if s.gaps.is_empty() {
        return Err(Error::EmptySample(format!(
            "no interarrival gaps after offset {}",
            s.offset
        )));
    }
    let values: Vec<f64> = s.gaps.iter().map(|&g| g as f64).collect();
    five_number(&values)
}

pub fn empirical_pmf(gaps: &[u64]) -> Vec<f64> {
    let kmax = gaps.iter().copied().max().unwrap_or(0) as usize;
    let mut counts = vec![0.0; kmax + 1];
    for &g in gaps {
        counts[g as usize] += 1.0;
    }
    let n = gaps.len() as f64;
    counts.iter_mut().for_each(|c| *c /= n);
    counts
}

/// Total-variation distance between the empirical gap law and `law`.
pub fn total_variation(law: &InterarrivalLaw, gaps: &[u64]) -> f64 {
    let emp = empirical_pmf(gaps);
    let body: f64 = emp
        .iter()
        .enumerate()
        .map(|(k, e)| (e - law.pmf(k as u64)).abs())
        .sum();
    let beyond = law.tail(emp.len() as u64 - 1);
    0.5 * (body + beyond)
}

/// Empirical (π̂₀, π̂₁) from the indicator transitions of a censored series.
/// Returns NaN for a state that is never left from.
pub fn transition_frequencies(values: &[f64]) -> (f64, f64) {
    let (mut from0, mut stay0, mut from1, mut stay1) = (0usize, 0usize, 0usize, 0usize);
    for w in values.windows(2) {
        if w[0] > 0.0 {
            from1 += 1;
            stay1 += usize::from(w[1] > 0.0);
        } else {
            from0 += 1;
            stay0 += usize::from(w[1] == 0.0);
        }
    }
    (stay0 as f64 / from0 as f64, stay1 as f64 / from1 as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffsetRow {
    pub offset: usize,
    pub summary: Option<FiveNumber>,
}

pub fn summaries_by_offset(values: &[f64], offsets: &[usize]) -> Vec<OffsetRow> {
    offsets
        .iter()
        .map(|&offset| OffsetRow {
            offset,
            summary: gap_summary(&gaps_from_values(values, offset)).ok(),
        })
        .collect()
}
