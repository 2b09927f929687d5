use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use argp::estimate::pipeline::FitReport;
use argp::simulate::ModelKind;
use serde_json::Value;

const PAPER_ARGS: [&str; 17] = [
    "simulate", "--model", "targp", "--xi", "0.5538", "--sigma", "11488", "--u", "2168", "--beta",
    "0.8619", "--gamma", "0.5778", "--n", "3888", "--seed", "1",
];

fn argp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_argp"))
        .args(args)
        .current_dir(dir)
        .env_remove("ARGP_OUT_DIR")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn with_out(base: &[&str], out: &str) -> Vec<String> {
    base.iter()
        .map(|s| s.to_string())
        .chain(["--out".into(), out.into()])
        .collect()
}

fn run(dir: &Path, args: &[String]) -> Output {
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    argp(dir, &refs)
}

#[test]
fn simulate_paper_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let o = argp(dir.path(), &PAPER_ARGS);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,value"));
    assert_eq!(lines.count(), 3888);
    assert_eq!(argp(dir.path(), &PAPER_ARGS).stdout, o.stdout);

    let o2 = run(dir.path(), &with_out(&PAPER_ARGS, "p.csv"));
    assert_eq!(code(&o2), 0);
    assert_eq!(fs::read(dir.path().join("p.csv")).unwrap(), o.stdout);
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "model = \"targp\"\nxi = 0.5538\nsigma = 11488.0\nu = 2168.0\nbeta = 0.8619\ngamma = 0.5778\nn = 3888\nseed = 1\n",
    )
    .unwrap();
    let a = argp(dir.path(), &["simulate", "--config", "run.toml"]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, argp(dir.path(), &PAPER_ARGS).stdout);
    // flags override the file
    let b = argp(
        dir.path(),
        &["simulate", "--config", "run.toml", "--n", "10"],
    );
    assert_eq!(String::from_utf8(b.stdout).unwrap().lines().count(), 11);

    fs::write(dir.path().join("bad.toml"), "xi = 0.5\ncolour = 3\n").unwrap();
    assert_eq!(
        code(&argp(dir.path(), &["simulate", "--config", "bad.toml"])),
        2
    );
}

#[test]
fn invalid_simulation_settings_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut zero: Vec<&str> = PAPER_ARGS.to_vec();
    zero[14] = "0";
    let o = argp(dir.path(), &zero);
    assert_eq!(code(&o), 2);
    assert!(
        stderr(&o).contains("n must be at least 1"),
        "{}",
        stderr(&o)
    );

    let mut beta: Vec<&str> = PAPER_ARGS.to_vec();
    beta[10] = "1.5";
    let o = argp(dir.path(), &beta);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("beta"), "{}", stderr(&o));

    let o = argp(
        dir.path(),
        &[
            "simulate", "--model", "argp", "--xi", "-0.7", "--sigma", "1", "--beta", "0.5", "--n",
            "5", "--seed", "1",
        ],
    );
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert_eq!(code(&argp(dir.path(), &["simulate", "--xi", "0.2"])), 2);
    assert_eq!(code(&argp(dir.path(), &["simulate", "--bogus"])), 2);
    assert_eq!(code(&argp(dir.path(), &["--help"])), 0);
}

#[test]
fn fit_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("bad_date.csv"),
        "date,cashflow\n2021-01-04,10\n2021-01-05,0\n2021-02-30,7\n",
    )
    .unwrap();
    let o = argp(d, &["fit", "--input", "bad_date.csv", "--u", "1"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    fs::write(d.join("sep.csv"), "date,cashflow\n2021-01-04,1,000.5\n").unwrap();
    assert_eq!(
        code(&argp(d, &["fit", "--input", "sep.csv", "--u", "1"])),
        3
    );
    fs::write(d.join("header.csv"), "day,amount\n2021-01-04,1\n").unwrap();
    assert_eq!(
        code(&argp(d, &["fit", "--input", "header.csv", "--u", "1"])),
        3
    );

    let zeros: String = std::iter::once("date,cashflow".to_string())
        .chain((1..=28).map(|day| format!("2021-02-{day:02},0")))
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(d.join("zeros.csv"), zeros + "\n").unwrap();
    let o = argp(d, &["fit", "--input", "zeros.csv", "--u", "1"]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(stderr(&o).contains("too few exceedances"));

    assert_eq!(
        code(&argp(d, &["fit", "--input", "missing.csv", "--u", "1"])),
        1
    );
    assert_eq!(
        code(&argp(d, &["fit", "--input", "zeros.csv", "--u", "-1"])),
        2
    );
}

#[test]
fn fit_recovers_simulation_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(d, &with_out(&PAPER_ARGS, "path.csv"))), 0);
    let o = argp(
        d,
        &[
            "fit",
            "--input",
            "path.csv",
            "--u",
            "2168",
            "--bootstrap",
            "300",
            "--seed",
            "4",
            "--out",
            "fit.json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: FitReport = serde_json::from_slice(&fs::read(d.join("fit.json")).unwrap()).unwrap();
    assert_eq!(report.model, ModelKind::Targp);
    assert_eq!(report.n, 3888);
    let u_star = argp::GpdParams::new(0.5538, 11488.0).unwrap().cdf(2168.0);
    for (name, truth) in [
        ("xi", 0.5538),
        ("sigma0", 11488.0),
        ("u_star", u_star),
        ("beta", 0.8619),
        ("gamma", 0.5778),
    ] {
        let (lo, hi) = report.interval(name).unwrap();
        assert!(
            lo <= truth && truth <= hi,
            "{name}: {truth} outside [{lo}, {hi}]"
        );
    }
}

#[test]
fn fit_reads_cashflows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let t = argp::simulate::Model::build(
        ModelKind::Margp,
        argp::GpdParams::new(0.4, 1000.0).unwrap(),
        0.8,
        0.6,
        0.0,
    )
    .unwrap();
    let path = t
        .simulate(2000, argp::simulate::X0Mode::StationaryDraw, 3)
        .unwrap();
    let start = chrono::NaiveDate::from_ymd_opt(2010, 1, 4).unwrap();
    let dates = (0..2000)
        .map(|i| start + chrono::Duration::days(i))
        .collect();
    let values = path
        .values
        .iter()
        .map(|v| (v * 100.0).round() / 100.0)
        .collect();
    let series = argp::io::CashflowSeries::new(dates, values).unwrap();
    let mut buf = Vec::new();
    argp::io::write_cashflow_csv(&mut buf, &series).unwrap();
    fs::write(d.join("flows.csv"), &buf).unwrap();

    let o = argp(
        d,
        &[
            "fit",
            "--input",
            "flows.csv",
            "--u",
            "300",
            "--bootstrap",
            "0",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["u"], 300.0);
    assert!(v["se"].is_null());
    let zeros = series.values.iter().filter(|&&x| x <= 300.0).count();
    assert_eq!(v["n_exceed"].as_u64().unwrap() as usize, 2000 - zeros);
}

fn write_report(d: &Path, beta: f64, gamma: f64) {
    let g = argp::GpdParams::new(0.5538, 11488.0).unwrap();
    let u = 2168.0;
    let report = FitReport {
        model: ModelKind::Targp,
        xi: g.xi(),
        sigma_u: g.sigma() + g.xi() * u,
        sigma0: Some(g.sigma()),
        u,
        u_star: g.cdf(u),
        beta,
        gamma,
        beta0: beta,
        p_hat: 0.0,
        q_hat: 0.0,
        q_raw: 0.0,
        n: 0,
        n_exceed: 0,
        loglik: 0.0,
        se: None,
        flags: vec![],
    };
    fs::write(d.join("truth.json"), serde_json::to_vec(&report).unwrap()).unwrap();
}

#[test]
fn diagnose_offsets_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(d, &with_out(&PAPER_ARGS, "path.csv"))), 0);
    write_report(d, 0.8619, 0.5778);

    let o = argp(
        d,
        &[
            "diagnose",
            "--input",
            "path.csv",
            "--report",
            "truth.json",
            "--offsets",
            "preset",
            "--out-dir",
            "out",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = fs::read_to_string(d.join("out/interarrival_summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows[0], "offset,min,q1,median,q3,max,mean,count");
    let offsets: Vec<&str> = rows[1..]
        .iter()
        .map(|r| r.split(',').next().unwrap())
        .collect();
    assert_eq!(offsets, ["0", "252", "504", "756", "1008", "1260"]);
    for f in [
        "interarrival_summary_sim.csv",
        "pp_pairs.csv",
        "pit_histogram.csv",
        "box_summary.csv",
        "diagnostics.json",
    ] {
        assert!(d.join("out").join(f).exists(), "{f}");
    }
    let pairs = fs::read_to_string(d.join("out/pp_pairs.csv")).unwrap();
    assert_eq!(pairs.lines().count(), 3888);
    assert_eq!(
        fs::read_to_string(d.join("out/pit_histogram.csv"))
            .unwrap()
            .lines()
            .count(),
        21
    );

    // empty offsets default to 0; the output directory comes from the environment
    let o = Command::new(env!("CARGO_BIN_EXE_argp"))
        .args([
            "diagnose",
            "--input",
            "path.csv",
            "--report",
            "truth.json",
            "--offsets",
            "",
        ])
        .current_dir(d)
        .env("ARGP_OUT_DIR", d.join("env_out"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = fs::read_to_string(d.join("env_out/interarrival_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.lines().nth(1).unwrap().starts_with("0,"));

    let o = argp(
        d,
        &[
            "diagnose",
            "--input",
            "path.csv",
            "--report",
            "truth.json",
            "--offsets",
            "5000",
        ],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn diagnose_reproduces_interarrival_mean() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut args: Vec<&str> = PAPER_ARGS.to_vec();
    args[14] = "200000";
    args[16] = "9";
    assert_eq!(code(&run(d, &with_out(&args, "long.csv"))), 0);
    write_report(d, 0.8619, 0.5778);
    let o = argp(
        d,
        &[
            "diagnose",
            "--input",
            "long.csv",
            "--report",
            "truth.json",
            "--out-dir",
            ".",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&fs::read(d.join("diagnostics.json")).unwrap()).unwrap();
    let mean = v["law"]["mean"].as_f64().unwrap();
    let var = v["law"]["var"].as_f64().unwrap();
    let row = &v["data"]["offsets"][0]["summary"];
    let (emp, count) = (
        row["mean"].as_f64().unwrap(),
        row["count"].as_f64().unwrap(),
    );
    let se = (var / count).sqrt();
    assert!((emp - mean).abs() < 3.0 * se, "{emp} vs {mean} (se {se})");
}
