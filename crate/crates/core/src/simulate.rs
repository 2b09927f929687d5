//! Exact simulation of ARGP, MARGP and TARGP paths.
//!
//! Paths are generated on the survival scale w = 1 − G(x), where the ARGP
//! `min` becomes a `max`, and mapped to the original scale once at the end.
//! Every step draws exactly three uniforms (W, U, innovation) after one
//! initial draw for X₀, whatever the model or branch. Paths of nested models
//! driven by the same seed therefore coincide exactly.

use std::fmt;
use std::str::FromStr;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{check_prob, f_star, f_star_sf};
use crate::error::{Error, Result};
use crate::gpd::GpdParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Argp,
    Margp,
    Targp,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Argp => "argp",
            ModelKind::Margp => "margp",
            ModelKind::Targp => "targp",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "argp" => Ok(ModelKind::Argp),
            "margp" => Ok(ModelKind::Margp),
            "targp" => Ok(ModelKind::Targp),
            other => Err(Error::invalid(format!("unknown model '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArgpParams {
    pub gpd: GpdParams,
    beta: f64,
}

impl ArgpParams {
    pub fn new(gpd: GpdParams, beta: f64) -> Result<Self> {
        Ok(Self {
            gpd,
            beta: check_prob("beta", beta)?,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MargpParams {
    pub argp: ArgpParams,
    gamma: f64,
}

impl MargpParams {
    pub fn new(argp: ArgpParams, gamma: f64) -> Result<Self> {
        Ok(Self {
            argp,
            gamma: check_prob("gamma", gamma)?,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn gpd(&self) -> &GpdParams {
        &self.argp.gpd
    }

    pub fn beta(&self) -> f64 {
        self.argp.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargpParams {
    pub margp: MargpParams,
    u: f64,
    u_star: f64,
}

impl TargpParams {
    pub fn new(margp: MargpParams, u: f64) -> Result<Self> {
        let hi = margp.gpd().support().hi;
        if !(u >= 0.0 && u <= hi) {
            return Err(Error::invalid(format!(
                "threshold u = {u} must lie in [0, {hi}]"
            )));
        }
        let u_star = margp.gpd().cdf(u);
        Ok(Self { margp, u, u_star })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn u_star(&self) -> f64 {
        self.u_star
    }

    pub fn gpd(&self) -> &GpdParams {
        self.margp.gpd()
    }

    pub fn beta(&self) -> f64 {
        self.margp.beta()
    }

    pub fn gamma(&self) -> f64 {
        self.margp.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum X0Mode {
    StationaryDraw,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    /// X₀, X₁, …; for TARGP the censored V_t with exact zeros.
    pub values: Vec<f64>,
    pub kind: ModelKind,
    pub seed: u64,
    pub x0_mode: X0Mode,
    /// Censoring threshold (0 for uncensored models).
    pub threshold: f64,
}

impl Path {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PitPath {
    pub values: Vec<f64>,
}

/// Survival-scale chain w_t = 1 − G(X̃_t) of a MARGP with switch
/// probabilities `beta`, `gamma`. `w0` replaces the stationary draw of X₀
/// when given; the draw is consumed either way.
pub fn survival_chain<R: Rng>(
    beta: f64,
    gamma: f64,
    w0: Option<f64>,
    n: usize,
    rng: &mut R,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let drawn: f64 = rng.sample(Open01);
    let mut w = w0.unwrap_or(drawn);
    out.push(w);
    for _ in 1..n {
        let switch_w: f64 = rng.gen();
        let switch_u: f64 = rng.gen();
        let innovation: f64 = rng.sample(Open01);
        let fw = f_star_sf(beta, w);
        let argp = if switch_u < beta {
            fw
        } else {
            fw.max(innovation)
        };
        w = if switch_w < gamma { argp } else { innovation };
        out.push(w);
    }
    out
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("path length n must be at least 1"));
    }
    Ok(())
}

fn start(gpd: &GpdParams, x0_mode: X0Mode) -> Result<Option<f64>> {
    match x0_mode {
        X0Mode::StationaryDraw => Ok(None),
        X0Mode::Fixed(x0) => {
            let support = gpd.support();
            if !support.contains(x0) {
                return Err(Error::domain(format!(
                    "x0 = {x0} outside the support [0, {}]",
                    support.hi
                )));
            }
            Ok(Some(gpd.sf(x0)))
        }
    }
}

fn run(
    gpd: &GpdParams,
    beta: f64,
    gamma: f64,
    n: usize,
    x0_mode: X0Mode,
    seed: u64,
) -> Result<Vec<f64>> {
    check_len(n)?;
    let w0 = start(gpd, x0_mode)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ws = survival_chain(beta, gamma, w0, n, &mut rng);
    let mut values: Vec<f64> = ws.iter().map(|&w| gpd.quantile_sf(w)).collect();
    if let X0Mode::Fixed(x0) = x0_mode {
        values[0] = x0;
    }
    Ok(values)
}

pub fn simulate_argp(p: &ArgpParams, n: usize, x0_mode: X0Mode, seed: u64) -> Result<Path> {
    let values = run(&p.gpd, p.beta, 1.0, n, x0_mode, seed)?;
    Ok(Path {
        values,
        kind: ModelKind::Argp,
        seed,
        x0_mode,
        threshold: 0.0,
    })
}

pub fn simulate_margp(p: &MargpParams, n: usize, x0_mode: X0Mode, seed: u64) -> Result<Path> {
    let values = run(p.gpd(), p.beta(), p.gamma, n, x0_mode, seed)?;
    Ok(Path {
        values,
        kind: ModelKind::Margp,
        seed,
        x0_mode,
        threshold: 0.0,
    })
}

pub fn simulate_targp(p: &TargpParams, n: usize, x0_mode: X0Mode, seed: u64) -> Result<Path> {
    let mut values = run(p.gpd(), p.beta(), p.gamma(), n, x0_mode, seed)?;
    for v in values.iter_mut() {
        *v = (*v - p.u).max(0.0);
    }
    Ok(Path {
        values,
        kind: ModelKind::Targp,
        seed,
        x0_mode,
        threshold: p.u,
    })
}

/// Model selector used by the command line and the acceptance runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Argp(ArgpParams),
    Margp(MargpParams),
    Targp(TargpParams),
}

impl Model {
    pub fn build(kind: ModelKind, gpd: GpdParams, beta: f64, gamma: f64, u: f64) -> Result<Self> {
        let argp = ArgpParams::new(gpd, beta)?;
        Ok(match kind {
            ModelKind::Argp => Model::Argp(argp),
            ModelKind::Margp => Model::Margp(MargpParams::new(argp, gamma)?),
            ModelKind::Targp => Model::Targp(TargpParams::new(MargpParams::new(argp, gamma)?, u)?),
        })
    }

    pub fn simulate(&self, n: usize, x0_mode: X0Mode, seed: u64) -> Result<Path> {
        match self {
            Model::Argp(p) => simulate_argp(p, n, x0_mode, seed),
            Model::Margp(p) => simulate_margp(p, n, x0_mode, seed),
            Model::Targp(p) => simulate_targp(p, n, x0_mode, seed),
        }
    }
}

/// Elementwise probability integral transform. Censored TARGP zeros map to
/// u* = G(u); exceedances v map to G(u + v).
pub fn pit(path: &Path, p: &GpdParams) -> PitPath {
    let u = path.threshold;
    let values = path
        .values
        .iter()
        .map(|&v| {
            if path.kind == ModelKind::Targp {
                p.cdf(u + v)
            } else {
                p.cdf(v)
            }
        })
        .collect();
    PitPath { values }
}

pub fn lagged_pairs(pit_path: &PitPath) -> Vec<(f64, f64)> {
    pit_path.values.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Count of pairs strictly above the curve v = f*(u) by more than `tol`.
pub fn pairs_above_curve(pairs: &[(f64, f64)], beta: f64, tol: f64) -> usize {
    pairs
        .iter()
        .filter(|&&(a, b)| b > f_star(beta, a) + tol)
        .count()
}
