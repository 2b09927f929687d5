//! `argp` command line: simulate, fit and diagnose.
//!
//! Exit codes: 0 ok, 1 I/O, 2 invalid configuration or parameters, 3 input
//! parse failure, 4 data insufficient for the requested fit.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analytics::{box_summary, gof_marginal, BoxSummary, GofReport, PIT_BINS};
use crate::error::{Error, Result};
use crate::estimate::bootstrap::BootstrapOptions;
use crate::estimate::freq::PitModel;
use crate::estimate::pipeline::{fit_pipeline, fit_raw, FitOptions, FitReport, PIPELINE_EPS_F};
use crate::gpd::GpdParams;
use crate::interarrival::{
    gaps_from_values, summaries_by_offset, transition_frequencies, InterarrivalLaw, OffsetRow,
    PRESET_OFFSETS,
};
use crate::io::{format_value, read_series, write_pairs_csv, write_path_csv, SeriesFile};
use crate::simulate::{Model, ModelKind, X0Mode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_DATA: i32 = 4;

pub const OUT_DIR_ENV: &str = "ARGP_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "argp",
    version,
    about = "Autoregressive generalized Pareto time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a path and write it as `t,value` CSV.
    Simulate(SimulateArgs),
    /// Fit a series and print the fit report as JSON.
    Fit(FitArgs),
    /// Interarrival summaries, marginal fit and PP pairs for a fitted series.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Flat TOML file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<ModelKind>,
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<f64>,
    /// Scale of the uncensored marginal GPD.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Censoring threshold (TARGP only).
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed starting value; drawn from the marginal when absent.
    #[arg(long)]
    x0: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// `date,cashflow` CSV of raw values or `t,value` CSV of a censored path.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    u: Option<f64>,
    #[arg(long)]
    model: Option<ModelKind>,
    /// Bootstrap resamples; 0 disables standard errors.
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    block_length: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eps_f: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    /// Fit report JSON written by `argp fit`.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Comma-separated burn-in offsets, or `preset` for 0,252,...,1260.
    /// Empty means 0.
    #[arg(long)]
    offsets: Option<String>,
    /// Seed of the comparison path simulated at the fitted parameters.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
}

/// Flat key-value configuration shared by all commands.
#[derive(Debug, Default, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelKind>,
    pub xi: Option<f64>,
    pub sigma: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub u: Option<f64>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub x0: Option<f64>,
    pub out: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub offsets: Option<String>,
    pub bootstrap: Option<usize>,
    pub block_length: Option<usize>,
    pub eps_f: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &FsPath) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| {
            Error::InvalidParams(format!("config {}: {}", path.display(), e.message()))
        })
    }

    fn load_opt(path: &Option<PathBuf>) -> Result<Self> {
        path.as_deref()
            .map_or_else(|| Ok(Self::default()), Self::load)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Parse { .. } => EXIT_PARSE,
        Error::EmptySample(_)
        | Error::DegenerateData(_)
        | Error::TooFewExceedances { .. }
        | Error::NotConverged { .. }
        | Error::UnstableDenominator { .. }
        | Error::NoCurveMass { .. } => EXIT_DATA,
        _ => EXIT_CONFIG,
    }
}

/// Runs the command line on `args` (including the program name) and
/// returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let res = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Diagnose(a) => cmd_diagnose(a),
    };
    match res {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("argp: {e}");
            exit_code(&e)
        }
    }
}

fn required<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidParams(format!("missing required setting '{name}'")))
}

fn with_output<F>(out: Option<&FsPath>, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let c = RunConfig::load_opt(&a.config)?;
    let kind = a.model.or(c.model).unwrap_or(ModelKind::Targp);
    let xi = required(a.xi.or(c.xi), "xi")?;
    let sigma = required(a.sigma.or(c.sigma), "sigma")?;
    let beta = required(a.beta.or(c.beta), "beta")?;
    let n = required(a.n.or(c.n), "n")?;
    let seed = required(a.seed.or(c.seed), "seed")?;
    let gamma = match kind {
        ModelKind::Argp => a.gamma.or(c.gamma).unwrap_or(1.0),
        _ => required(a.gamma.or(c.gamma), "gamma")?,
    };
    let u = match kind {
        ModelKind::Targp => required(a.u.or(c.u), "u")?,
        _ => a.u.or(c.u).unwrap_or(0.0),
    };
    if kind != ModelKind::Targp && u != 0.0 {
        return Err(Error::InvalidParams(format!(
            "--u only applies to targp, got {u}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParams(
            "path length n must be at least 1".into(),
        ));
    }
    let x0 = match a.x0.or(c.x0) {
        Some(x) => X0Mode::Fixed(x),
        None => X0Mode::StationaryDraw,
    };
    let model = Model::build(kind, GpdParams::new(xi, sigma)?, beta, gamma, u)?;
    let path = model.simulate(n, x0, seed)?;
    let out = a.out.or(c.out);
    with_output(out.as_deref(), |w| write_path_csv(w, &path.values))
}

fn read_input(path: &FsPath) -> Result<SeriesFile> {
    read_series(BufReader::new(File::open(path)?))
}

/// Series on the censored scale, as consumed by the estimators.
fn censored_values(series: &SeriesFile, u: f64) -> Vec<f64> {
    match series {
        SeriesFile::Cashflow(c) => c.values.iter().map(|&x| (x - u).max(0.0)).collect(),
        SeriesFile::Path(v) => v.clone(),
    }
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    let c = RunConfig::load_opt(&a.config)?;
    let input = required(a.input.or(c.input), "input")?;
    let model = a.model.or(c.model).unwrap_or(ModelKind::Targp);
    let u = match model {
        ModelKind::Targp => required(a.u.or(c.u), "u")?,
        _ => a.u.or(c.u).unwrap_or(0.0),
    };
    let eps_f = a.eps_f.or(c.eps_f).unwrap_or(PIPELINE_EPS_F);
    if !(eps_f.is_finite() && eps_f >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "eps_f must be nonnegative, got {eps_f}"
        )));
    }
    let resamples = a.bootstrap.or(c.bootstrap).unwrap_or(500);
    let bootstrap = (resamples > 0).then(|| BootstrapOptions {
        resamples,
        block_length: a.block_length.or(c.block_length),
        seed: a.seed.or(c.seed).unwrap_or(0),
    });
    let opts = FitOptions {
        model,
        eps_f,
        bootstrap,
        ..FitOptions::default()
    };
    let report = match read_input(&input)? {
        SeriesFile::Cashflow(s) => fit_raw(&s.values, u, &opts)?,
        SeriesFile::Path(v) => fit_pipeline(&v, u, &opts)?,
    };
    let out = a.out.or(c.out);
    with_output(out.as_deref(), |w| {
        serde_json::to_writer_pretty(&mut *w, &report).map_err(io::Error::from)?;
        writeln!(w)?;
        Ok(())
    })
}

pub fn parse_offsets(spec: Option<&str>) -> Result<Vec<usize>> {
    let s = spec.map(str::trim).unwrap_or("");
    if s.is_empty() {
        return Ok(vec![0]);
    }
    if s == "preset" {
        return Ok(PRESET_OFFSETS.to_vec());
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::InvalidParams(format!("bad offset '{t}': {e}")))
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct LawSummary {
    pi0: f64,
    pi1: f64,
    mean: Option<f64>,
    var: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SeriesDiagnostics {
    n: usize,
    zeros: usize,
    pi0_hat: f64,
    pi1_hat: f64,
    offsets: Vec<OffsetRow>,
}

#[derive(Debug, Serialize)]
struct Diagnostics {
    model: ModelKind,
    u: f64,
    gof: GofReport,
    law: Option<LawSummary>,
    data: SeriesDiagnostics,
    sim: Option<SeriesDiagnostics>,
    sim_seed: Option<u64>,
}

fn series_diagnostics(values: &[f64], offsets: &[usize]) -> SeriesDiagnostics {
    let (pi0_hat, pi1_hat) = transition_frequencies(values);
    SeriesDiagnostics {
        n: values.len(),
        zeros: values.iter().filter(|&&v| v == 0.0).count(),
        pi0_hat,
        pi1_hat,
        offsets: summaries_by_offset(values, offsets),
    }
}

fn write_offset_csv(path: &FsPath, rows: &[OffsetRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "offset,min,q1,median,q3,max,mean,count")?;
    for r in rows {
        match &r.summary {
            Some(s) => writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.offset,
                format_value(s.min),
                format_value(s.q1),
                format_value(s.median),
                format_value(s.q3),
                format_value(s.max),
                format_value(s.mean),
                s.count
            )?,
            None => writeln!(w, "{},,,,,,,0", r.offset)?,
        }
    }
    w.flush()?;
    Ok(())
}

fn write_box_csv(path: &FsPath, rows: &[(String, Option<BoxSummary>)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "series,log_scale,min,q1,median,q3,max,mean,count,excluded_zeros"
    )?;
    for (name, b) in rows {
        match b {
            Some(b) => {
                let s = &b.summary;
                writeln!(
                    w,
                    "{name},{},{},{},{},{},{},{},{},{}",
                    b.log_scale,
                    format_value(s.min),
                    format_value(s.q1),
                    format_value(s.median),
                    format_value(s.q3),
                    format_value(s.max),
                    format_value(s.mean),
                    s.count,
                    b.excluded_zeros
                )?
            }
            None => writeln!(w, "{name},,,,,,,,0,")?,
        }
    }
    w.flush()?;
    Ok(())
}

fn write_histogram_csv(path: &FsPath, gof: &GofReport) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "bin,lo,hi,count,expected")?;
    let expected = gof.n as f64 / PIT_BINS as f64;
    for (i, c) in gof.pit_histogram.iter().enumerate() {
        let lo = i as f64 / PIT_BINS as f64;
        let hi = (i + 1) as f64 / PIT_BINS as f64;
        writeln!(
            w,
            "{i},{},{},{c},{}",
            format_value(lo),
            format_value(hi),
            format_value(expected)
        )?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_diagnose(a: DiagnoseArgs) -> Result<()> {
    let c = RunConfig::load_opt(&a.config)?;
    let input = required(a.input.or(c.input), "input")?;
    let report_path = required(a.report.or(c.report), "report")?;
    let offsets = parse_offsets(a.offsets.as_deref().or(c.offsets.as_deref()))?;
    let out_dir = a
        .out_dir
        .or(c.out_dir)
        .unwrap_or_else(|| PathBuf::from("."));
    let seed = a.seed.or(c.seed).unwrap_or(1);

    let report: FitReport = serde_json::from_reader(BufReader::new(File::open(&report_path)?))
        .map_err(|e| Error::InvalidParams(format!("report {}: {e}", report_path.display())))?;
    let series = read_input(&input)?;
    let values = censored_values(&series, report.u);
    if values.is_empty() {
        return Err(Error::EmptySample("input series has no rows".into()));
    }
    if let Some(&bad) = offsets.iter().find(|&&o| o >= values.len()) {
        return Err(Error::InvalidParams(format!(
            "offset {bad} is not below the series length {}",
            values.len()
        )));
    }
    fs::create_dir_all(&out_dir)?;

    let exceed = GpdParams::new(report.xi, report.sigma_u)?;
    let pit_model = PitModel {
        exceed,
        u_star: report.u_star,
    };
    let positives: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    let gof = gof_marginal(&positives, &exceed)?;

    let cdf_scale: Vec<f64> = values
        .iter()
        .map(|&v| 1.0 - pit_model.survival(v))
        .collect();
    let pairs: Vec<(f64, f64)> = cdf_scale.windows(2).map(|w| (w[0], w[1])).collect();
    write_pairs_csv(
        BufWriter::new(File::create(out_dir.join("pp_pairs.csv"))?),
        &pairs,
    )?;
    write_histogram_csv(&out_dir.join("pit_histogram.csv"), &gof)?;

    let data = series_diagnostics(&values, &offsets);
    write_offset_csv(&out_dir.join("interarrival_summary.csv"), &data.offsets)?;

    let mut boxes = vec![
        (
            "data_gaps".to_string(),
            box_summary(&to_f64(&gaps_from_values(&values, 0).gaps), false).ok(),
        ),
        ("data_values".to_string(), box_summary(&values, true).ok()),
    ];

    let (law, sim, sim_seed) = if report.model == ModelKind::Targp {
        let law = InterarrivalLaw::from_parts(report.beta, report.gamma, report.u_star);
        let mv = law.mean_var().ok();
        let law = LawSummary {
            pi0: law.pi0,
            pi1: law.pi1,
            mean: mv.map(|m| m.0),
            var: mv.map(|m| m.1),
        };
        let model: Model = report.model_params()?;
        let path = model.simulate(values.len(), X0Mode::StationaryDraw, seed)?;
        let sim = series_diagnostics(&path.values, &offsets);
        write_offset_csv(&out_dir.join("interarrival_summary_sim.csv"), &sim.offsets)?;
        boxes.push((
            "sim_gaps".to_string(),
            box_summary(&to_f64(&gaps_from_values(&path.values, 0).gaps), false).ok(),
        ));
        boxes.push((
            "sim_values".to_string(),
            box_summary(&path.values, true).ok(),
        ));
        (Some(law), Some(sim), Some(seed))
    } else {
        (None, None, None)
    };
    write_box_csv(&out_dir.join("box_summary.csv"), &boxes)?;

    let diag = Diagnostics {
        model: report.model,
        u: report.u,
        gof,
        law,
        data,
        sim,
        sim_seed,
    };
    let mut w = BufWriter::new(File::create(out_dir.join("diagnostics.json"))?);
    serde_json::to_writer_pretty(&mut w, &diag).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn to_f64(gaps: &[u64]) -> Vec<f64> {
    gaps.iter().map(|&g| g as f64).collect()
}
