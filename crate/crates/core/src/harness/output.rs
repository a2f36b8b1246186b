//! Trace CSV and summary JSON emission.
//!
//! The trace CSV has exactly the columns in [`TRACE_HEADER`]. Arms are
//! 0-based, flags are `0`/`1`, absent statistics are empty cells and floats
//! use the shortest representation that parses back to the same value.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::episode::{RegretTrace, TraceRow};
use crate::error::{Error, Result};

pub const TRACE_HEADER: [&str; 10] = [
    "round", "model", "arm", "source", "inW", "forced", "gap_est", "alpha", "rS_cum", "rC_cum",
];

/// Shortest round-trip decimal form of `v`.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_trace_csv<W: Write>(trace: &RegretTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Parse(format!("csv: {e}"));
    w.write_record(TRACE_HEADER).map_err(csv_err)?;
    for r in &trace.rows {
        w.write_record([
            r.round.to_string(),
            r.model.to_string(),
            r.arm.to_string(),
            r.source.to_string(),
            flag(r.in_w).to_string(),
            flag(r.forced).to_string(),
            format_opt(r.gap_est),
            format_opt(r.alpha),
            format_float(r.rs_cum),
            format_float(r.rc_cum),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(format!("csv: {e}")))
}

pub fn trace_to_csv_string(trace: &RegretTrace) -> Result<String> {
    let mut buf = Vec::new();
    write_trace_csv(trace, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

fn parse_field<T: std::str::FromStr>(line: u64, column: &str, text: &str) -> Result<T> {
    text.parse()
        .map_err(|_| Error::Parse(format!("line {line}: bad {column} value {text:?}")))
}

fn parse_flag(line: u64, column: &str, text: &str) -> Result<bool> {
    match text {
        "1" => Ok(true),
        "0" => Ok(false),
        _ => Err(Error::Parse(format!("line {line}: bad {column} flag {text:?}"))),
    }
}

fn parse_opt(line: u64, column: &str, text: &str) -> Result<Option<f64>> {
    if text.is_empty() {
        Ok(None)
    } else {
        parse_field(line, column, text).map(Some)
    }
}

/// Parses a trace written by [`write_trace_csv`].
pub fn read_trace_csv<R: Read>(input: R) -> Result<RegretTrace> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("csv header: {e}")))?
        .clone();
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(Error::Parse(format!(
            "expected header {}, got {}",
            TRACE_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse(format!("csv: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line());
        let f = |i: usize| rec.get(i).unwrap_or("");
        rows.push(TraceRow {
            round: parse_field(line, "round", f(0))?,
            model: parse_field(line, "model", f(1))?,
            arm: parse_field(line, "arm", f(2))?,
            source: parse_field(line, "source", f(3))?,
            in_w: parse_flag(line, "inW", f(4))?,
            forced: parse_flag(line, "forced", f(5))?,
            gap_est: parse_opt(line, "gap_est", f(6))?,
            alpha: parse_opt(line, "alpha", f(7))?,
            rs_cum: parse_field(line, "rS_cum", f(8))?,
            rc_cum: parse_field(line, "rC_cum", f(9))?,
        });
    }
    Ok(RegretTrace::new(rows))
}

pub fn save_trace_csv(trace: &RegretTrace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_trace_csv(trace, &mut out)?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn load_trace_csv(path: impl AsRef<Path>) -> Result<RegretTrace> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_trace_csv(file)
}

/// Pretty-printed JSON.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))
}

pub fn save_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json_string(value)? + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Identifies the build that produced an artifact. A revision supplied via
/// `MODSEL_BUILD_REV` at compile time is appended.
pub fn build_id() -> String {
    let base = concat!("modsel-", env!("CARGO_PKG_VERSION"));
    match option_env!("MODSEL_BUILD_REV") {
        Some(rev) if !rev.is_empty() => format!("{base}+{rev}"),
        _ => base.to_string(),
    }
}
