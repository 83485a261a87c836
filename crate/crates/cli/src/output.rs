//! Report files: JSON envelopes and append-only CSV tables.

use std::fs::{self, OpenOptions};
use std::io::{Read, Write};
use std::path::Path;

use alpha_mst::SolveReport;
use anyhow::{bail, Context, Result};
use serde::Serialize;

pub const SOLVE_SCHEMA: &str = "alpha-mst/solve-report/v1";

pub const SOLVE_HEADER: [&str; 13] = [
    "instance", "n", "alpha", "kind", "status", "lb", "ub", "root_lb", "nodes", "sec_cuts", "lac_cuts",
    "cycle_cuts", "time_s",
];

pub const BOUNDS_HEADER: [&str; 16] = [
    "instance", "n", "alpha", "w_fx", "w_fx_plus", "w_fx_plusplus", "w_fxy_star", "w_fxy", "gap_pct",
    "plus_equals_star", "t_fx", "t_fx_plus", "t_fx_plusplus", "t_fxy_star", "t_fxy", "cuts",
];

pub const SUMMARY_HEADER: [&str; 9] = [
    "kind", "alpha", "runs", "optimal", "avg_gap_pct", "avg_root_gap_pct", "avg_nodes", "avg_time_s", "max_time_s",
];

#[derive(Serialize)]
struct Envelope<'a> {
    schema: &'static str,
    #[serde(flatten)]
    report: &'a SolveReport,
}

pub fn report_json(report: &SolveReport) -> Result<String> {
    let env = Envelope {
        schema: SOLVE_SCHEMA,
        report,
    };
    Ok(serde_json::to_string_pretty(&env)? + "\n")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Formats a float so that integers stay short and everything round-trips.
pub fn num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v}")
    }
}

pub fn solve_row(r: &SolveReport) -> Vec<String> {
    vec![
        r.instance.clone(),
        r.n.to_string(),
        r.alpha.clone(),
        r.kind.to_string(),
        r.status.as_str().to_string(),
        num(r.lower_bound),
        num(r.upper_bound),
        num(r.root_bound),
        r.nodes.to_string(),
        r.cuts.sec.to_string(),
        r.cuts.lac.to_string(),
        r.cuts.odd_cycle.to_string(),
        format!("{:.3}", r.time_s),
    ]
}

/// Appends rows to `path`, writing `header` first when the file is new or
/// empty and refusing to mix with a file that has a different header.
pub fn append_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut existing = String::new();
    if path.exists() {
        fs::File::open(path)
            .and_then(|mut f| f.read_to_string(&mut existing))
            .with_context(|| format!("cannot read {}", path.display()))?;
    }
    let mut buf = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    if existing.trim().is_empty() {
        buf.write_record(header)?;
    } else {
        let first = existing.lines().next().unwrap_or_default();
        if first != header.join(",") {
            bail!("{} has a different header: `{first}`", path.display());
        }
    }
    for row in rows {
        buf.write_record(row)?;
    }
    let mut bytes = buf.into_inner().context("csv buffer")?;
    if !existing.is_empty() && !existing.ends_with('\n') {
        bytes.insert(0, b'\n');
    }
    // one write per call keeps concurrent appenders from interleaving rows
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    f.write_all(&bytes)
        .with_context(|| format!("cannot append to {}", path.display()))
}
