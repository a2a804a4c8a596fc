//! Result rows, CSV/JSON files and the printed table.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;

use selfrepair_core::stats::{format_nines, space_overhead};
use selfrepair_core::{ReliabilityEstimate, SpareCount, Tally};
use serde::Serialize;

use crate::config::Resolved;
use crate::error::CliError;

/// One CSV row; the column names are the file's header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scheme: String,
    pub data: usize,
    pub parity: usize,
    pub spares: String,
    pub runs: u64,
    pub losses: u64,
    pub exhaustions: u64,
    #[serde(rename = "R")]
    pub reliability: f64,
    #[serde(rename = "CI-low")]
    pub ci_low: f64,
    #[serde(rename = "CI-high")]
    pub ci_high: f64,
    #[serde(rename = "nines-low")]
    pub nines_low: f64,
    #[serde(rename = "nines-high")]
    pub nines_high: f64,
    /// Seconds; empty when timing is disabled.
    #[serde(rename = "wall-time")]
    pub wall_time: Option<f64>,
}

impl ResultRow {
    pub fn new(cfg: &Resolved, e: &ReliabilityEstimate, wall_time: Option<f64>) -> Self {
        let layout = cfg.scheme.0;
        ResultRow {
            scheme: layout.to_string(),
            data: layout.data_disks(),
            parity: layout.parity_disks(),
            spares: cfg.spares.0.to_string(),
            runs: e.runs,
            losses: e.losses,
            exhaustions: e.exhaustions,
            reliability: e.reliability,
            ci_low: e.ci.0,
            ci_high: e.ci.1,
            nines_low: e.nines_ci.0,
            nines_high: e.nines_ci.1,
            wall_time,
        }
    }
}

/// One JSON record per campaign: the full configuration echo, the counters
/// and both interval methods.
#[derive(Debug, Clone, Serialize)]
pub struct CampaignRecord<'a> {
    pub config: &'a Resolved,
    pub data_disks: usize,
    pub parity_disks: usize,
    pub overhead: String,
    pub runs: u64,
    pub losses: u64,
    pub fatal_pattern_losses: u64,
    pub policy_losses: u64,
    pub exhaustions: u64,
    pub reliability: f64,
    pub ci: (f64, f64),
    pub nines: Option<f64>,
    pub nines_ci: (Option<f64>, Option<f64>),
    pub normal_ci: (f64, f64),
    pub mean_peak_concurrency: f64,
    pub peak_concurrency_max: u64,
    pub wall_time: Option<f64>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl<'a> CampaignRecord<'a> {
    pub fn new(cfg: &'a Resolved, tally: &Tally, e: &ReliabilityEstimate, wall_time: Option<f64>) -> Self {
        let layout = cfg.scheme.0;
        CampaignRecord {
            config: cfg,
            data_disks: layout.data_disks(),
            parity_disks: layout.parity_disks(),
            overhead: overhead_text(layout.data_disks(), layout.parity_disks(), cfg.spares.0),
            runs: e.runs,
            losses: e.losses,
            fatal_pattern_losses: tally.fatal_pattern_losses,
            policy_losses: tally.policy_losses,
            exhaustions: e.exhaustions,
            reliability: e.reliability,
            ci: e.ci,
            nines: finite(e.nines()),
            nines_ci: (finite(e.nines_ci.0), finite(e.nines_ci.1)),
            normal_ci: e.normal_ci,
            mean_peak_concurrency: e.mean_peak_concurrency,
            peak_concurrency_max: tally.peak_max,
            wall_time,
        }
    }
}

pub fn overhead_text(data: usize, parity: usize, spares: SpareCount) -> String {
    match space_overhead(data as u64, parity as u64, spares) {
        Ok(o) => o.to_string(),
        Err(_) => "-".into(),
    }
}

/// Appends one row, writing the header first if the file is new or empty.
pub fn append_csv(path: &Path, row: &ResultRow) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    w.serialize(row)?;
    w.flush()?;
    Ok(())
}

/// Appends one JSON record as a single line.
pub fn append_json<T: Serialize>(path: &Path, record: &T) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = serde_json::to_vec(record)?;
    line.push(b'\n');
    file.write_all(&line)?;
    Ok(())
}

/// Writes a whole file at once (profile dumps).
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut f = File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

pub const TABLE_HEADER: &str = "name                 data parity   spares  overhead         runs   losses  nines CI";

/// A printed row in the layout of the published tables.
pub fn table_line(out: &mut dyn Write, name: &str, row: &ResultRow) -> io::Result<()> {
    let spares = if row.spares == "unlimited" { "∞".to_string() } else { row.spares.clone() };
    let overhead = match row.spares.parse::<SpareCount>() {
        Ok(s) => overhead_text(row.data, row.parity, s),
        Err(_) => "-".into(),
    };
    writeln!(
        out,
        "{name:<20} {:>5} {:>6} {spares:>8} {overhead:>9} {:>12} {:>8}  ({}, {})",
        row.data,
        row.parity,
        row.runs,
        row.losses,
        format_nines(row.nines_low),
        format_nines(row.nines_high),
    )
}
