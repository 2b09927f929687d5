//! CSV formats.
//!
//! * path files: `t,value`, values printed with 17 significant digits;
//! * lagged PIT pairs: `t,u_prev,u_curr`;
//! * cashflow files: `date,cashflow` with ISO dates strictly increasing and
//!   plain nonnegative decimals (no sign, exponent or thousands separator).

use std::io::{BufRead, Write};

use chrono::NaiveDate;

use crate::error::{Error, Result};

pub const PATH_HEADER: &str = "t,value";
pub const PAIRS_HEADER: &str = "t,u_prev,u_curr";
pub const CASHFLOW_HEADER: &str = "date,cashflow";

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_path_csv<W: Write>(mut w: W, values: &[f64]) -> Result<()> {
    writeln!(w, "{PATH_HEADER}")?;
    for (t, v) in values.iter().enumerate() {
        writeln!(w, "{t},{}", format_value(*v))?;
    }
    w.flush()?;
    Ok(())
}

/// Pairs are indexed by the time of their second component.
pub fn write_pairs_csv<W: Write>(mut w: W, pairs: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "{PAIRS_HEADER}")?;
    for (i, (a, b)) in pairs.iter().enumerate() {
        writeln!(w, "{},{},{}", i + 1, format_value(*a), format_value(*b))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CashflowSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl CashflowSeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::invalid("dates and values differ in length"));
        }
        if let Some(i) = dates.windows(2).position(|d| d[1] <= d[0]) {
            return Err(Error::invalid(format!(
                "dates not strictly increasing at {}",
                dates[i + 1]
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!(
                "cashflow {v} is not a finite nonnegative number"
            )));
        }
        Ok(Self { dates, values })
    }
}

pub fn write_cashflow_csv<W: Write>(mut w: W, s: &CashflowSeries) -> Result<()> {
    writeln!(w, "{CASHFLOW_HEADER}")?;
    for (d, v) in s.dates.iter().zip(&s.values) {
        writeln!(w, "{},{}", d.format("%Y-%m-%d"), v)?;
    }
    w.flush()?;
    Ok(())
}

/// Any series file accepted by `fit` and `diagnose`.
#[derive(Debug, Clone, PartialEq)]
pub enum SeriesFile {
    Cashflow(CashflowSeries),
    /// A `t,value` path, already censored for TARGP data.
    Path(Vec<f64>),
}

impl SeriesFile {
    pub fn values(&self) -> &[f64] {
        match self {
            SeriesFile::Cashflow(c) => &c.values,
            SeriesFile::Path(v) => v,
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn is_plain_decimal(s: &str) -> bool {
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (s, None),
    };
    let digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
    digits(int) && frac.is_none_or(digits)
}

fn split_row(line: &str, line_no: usize, width: usize) -> Result<Vec<&str>> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != width {
        return Err(parse_err(
            line_no,
            format!(
                "expected {width} fields, found {} in '{line}'",
                fields.len()
            ),
        ));
    }
    Ok(fields)
}

/// Reads a series file, choosing the schema from its header line.
pub fn read_series<R: BufRead>(reader: R) -> Result<SeriesFile> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(h) => h?,
        None => return Err(parse_err(1, "empty file")),
    };
    let header = header.trim_start_matches('\u{feff}').trim_end_matches('\r');
    match header {
        CASHFLOW_HEADER => read_cashflow_body(lines).map(SeriesFile::Cashflow),
        PATH_HEADER => read_path_body(lines).map(SeriesFile::Path),
        other => Err(parse_err(
            1,
            format!("unknown header '{other}', expected '{CASHFLOW_HEADER}' or '{PATH_HEADER}'"),
        )),
    }
}

pub fn read_cashflow_csv<R: BufRead>(reader: R) -> Result<CashflowSeries> {
    match read_series(reader)? {
        SeriesFile::Cashflow(c) => Ok(c),
        SeriesFile::Path(_) => Err(parse_err(1, format!("expected header '{CASHFLOW_HEADER}'"))),
    }
}

pub fn read_path_csv<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    match read_series(reader)? {
        SeriesFile::Path(v) => Ok(v),
        SeriesFile::Cashflow(_) => Err(parse_err(1, format!("expected header '{PATH_HEADER}'"))),
    }
}

fn read_cashflow_body<I>(lines: I) -> Result<CashflowSeries>
where
    I: Iterator<Item = std::io::Result<String>>,
{
    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let f = split_row(line, line_no, 2)?;
        let date = NaiveDate::parse_from_str(f[0], "%Y-%m-%d")
            .map_err(|e| parse_err(line_no, format!("bad date '{}': {e}", f[0])))?;
        if let Some(prev) = dates.last() {
            if date <= *prev {
                return Err(parse_err(
                    line_no,
                    format!("date {date} does not follow {prev}"),
                ));
            }
        }
        if !is_plain_decimal(f[1]) {
            return Err(parse_err(
                line_no,
                format!("cashflow '{}' is not a plain nonnegative decimal", f[1]),
            ));
        }
        let v: f64 = f[1]
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad cashflow '{}': {e}", f[1])))?;
        dates.push(date);
        values.push(v);
    }
    Ok(CashflowSeries { dates, values })
}

fn read_path_body<I>(lines: I) -> Result<Vec<f64>>
where
    I: Iterator<Item = std::io::Result<String>>,
{
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let f = split_row(line, line_no, 2)?;
        let t: usize = f[0]
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad index '{}': {e}", f[0])))?;
        if t != values.len() {
            return Err(parse_err(
                line_no,
                format!("index {t} out of sequence, expected {}", values.len()),
            ));
        }
        let v: f64 = f[1]
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad value '{}': {e}", f[1])))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(parse_err(
                line_no,
                format!("value {v} is not finite and nonnegative"),
            ));
        }
        values.push(v);
    }
    Ok(values)
}
