//! Command line front end.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use selfrepair_core::codes::SamplingPlan;
use selfrepair_core::sim::{min_spares_for_target, SpareSearch};
use selfrepair_core::stats::format_nines;
use selfrepair_core::{Layout, SimConfig, Simulator, SpareCount, SurvivalProfile};

use crate::analyze::analyze;
use crate::config::{
    default_bathtub, profile_of, CampaignConfig, ExhaustionChoice, InterpChoice, ModeChoice, Overrides, Resolved,
    SchemeSpec, SpareSpec, DEFAULT_RUNS,
};
use crate::error::CliError;
use crate::output::{append_csv, append_json, overhead_text, table_line, write_file, CampaignRecord, ResultRow, TABLE_HEADER};
use crate::runner::{worker_count, Runner, WORKERS_ENV};
use crate::tables;

/// Raised by the interrupt handler; checked between chunks of runs.
pub static CANCEL: AtomicBool = AtomicBool::new(false);

/// Makes Ctrl-C stop the current campaign after its in-flight chunks, so
/// completed rows are still written.
pub fn install_interrupt_handler() {
    let _ = ctrlc::set_handler(|| {
        if CANCEL.swap(true, Ordering::SeqCst) {
            std::process::exit(130);
        }
    });
}

#[derive(Debug, Parser)]
#[command(name = "selfrepair", version, about = "Reliability of self-repairing disk arrays")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the survival profile of an array (enumeration, and closed form for groups).
    Analyze(AnalyzeArgs),
    /// Run every configuration of a campaign file.
    Simulate(SimulateArgs),
    /// Find the smallest spare pool reaching a reliability target.
    Sweep(SweepArgs),
    /// Reproduce a published table (1, 2 or 3).
    Table(TableArgs),
}

#[derive(Debug, Args, Clone)]
#[group(required = true, multiple = false)]
pub struct SchemeArg {
    /// Complete two-dimensional array with N parity stripes.
    #[arg(long, value_name = "N")]
    pub twod: Option<usize>,
    /// M RAID-6 groups of N disks.
    #[arg(long, value_name = "MxN")]
    pub raid6: Option<String>,
    /// M triple-parity groups of N disks.
    #[arg(long, value_name = "MxN")]
    pub tp: Option<String>,
    /// Any layout as twod:N, raid6:MxN or tp:MxN.
    #[arg(long)]
    pub scheme: Option<String>,
}

impl SchemeArg {
    pub fn layout(&self) -> Result<Layout, CliError> {
        let text = if let Some(n) = self.twod {
            format!("twod:{n}")
        } else if let Some(g) = &self.raid6 {
            format!("raid6:{g}")
        } else if let Some(g) = &self.tp {
            format!("tp:{g}")
        } else {
            self.scheme.clone().unwrap_or_default()
        };
        let layout: Layout = text.parse().map_err(|e: selfrepair_core::Error| CliError::Config(e.to_string()))?;
        layout.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(layout)
    }
}

#[derive(Debug, Args, Clone, Default)]
pub struct RunFlags {
    /// Missions per configuration.
    #[arg(long)]
    pub runs: Option<u64>,
    /// Campaign seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: $SELFREPAIR_WORKERS, then all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Loss detection.
    #[arg(long, value_enum)]
    pub mode: Option<ModeChoice>,
    /// How the stated bathtub rates are read.
    #[arg(long, value_enum)]
    pub interp: Option<InterpChoice>,
    /// What happens when a repair finds no spare.
    #[arg(long, value_enum)]
    pub exhaustion: Option<ExhaustionChoice>,
    /// Directory receiving results.csv and results.jsonl.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Leave the wall-time column empty so output is byte-for-byte reproducible.
    #[arg(long)]
    pub no_timing: bool,
}

impl RunFlags {
    fn overrides(&self) -> Overrides {
        Overrides {
            runs: self.runs,
            seed: self.seed,
            mode: self.mode,
            interp: self.interp,
            exhaustion: self.exhaustion,
        }
    }

    /// A configuration built from flags alone.
    fn resolve(&self, name: String, layout: Layout, spares: SpareCount) -> Resolved {
        Resolved {
            name,
            scheme: SchemeSpec(layout),
            spares: SpareSpec(spares),
            runs: self.runs.unwrap_or(DEFAULT_RUNS),
            seed: self.seed.unwrap_or(0),
            mission_years: 4.0,
            repair_hours: 24.0,
            interp: self.interp.unwrap_or(InterpChoice::Hazard),
            mode: self.mode.unwrap_or(ModeChoice::Exact),
            exhaustion: self.exhaustion.unwrap_or(ExhaustionChoice::Continue),
            bathtub: default_bathtub(),
            csv: None,
            json: None,
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub scheme: SchemeArg,
    /// Estimate levels above the enumeration budget from N random patterns.
    #[arg(long, value_name = "N")]
    pub sample: Option<u64>,
    /// Seed for --sample.
    #[arg(long, default_value_t = 0)]
    pub sample_seed: u64,
    /// Worker threads for the enumeration.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Directory receiving profile.csv and profile.json.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Campaign file (TOML).
    pub config: PathBuf,
    #[command(flatten)]
    pub flags: RunFlags,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scheme: SchemeArg,
    /// Required lower confidence bound, in nines.
    #[arg(long)]
    pub target: f64,
    /// Largest finite pool to try.
    #[arg(long, default_value_t = 1000)]
    pub max_spares: u64,
    #[command(flatten)]
    pub flags: RunFlags,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// 1: two-dimensional arrays, 2: RAID-6 groups, 3: triple-parity groups.
    #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
    pub id: u8,
    #[command(flatten)]
    pub flags: RunFlags,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Help(e.to_string())
        }
        _ => CliError::Config(e.to_string()),
    })?;
    match cli.command {
        Command::Analyze(a) => cmd_analyze(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Table(a) => cmd_table(&a, out),
    }
}

pub fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let layout = args.scheme.layout()?;
    let runner = Runner::new(worker_count(args.workers, None)?)?;
    let sampling = args.sample.map(|samples| SamplingPlan { samples, seed: args.sample_seed });
    let report = runner.install(|| analyze(layout, sampling))?;
    out.write_all(report.render().as_bytes())?;
    if let Some(dir) = &args.out {
        write_file(&dir.join("profile.csv"), &report.to_csv()?)?;
        let mut json = serde_json::to_vec_pretty(&report)?;
        json.push(b'\n');
        write_file(&dir.join("profile.json"), &json)?;
    }
    Ok(())
}

/// A finished configuration.
struct Outcome {
    row: ResultRow,
}

fn run_one(
    runner: &Runner,
    cfg: &Resolved,
    profile: Option<SurvivalProfile>,
    flags: &RunFlags,
) -> Result<Outcome, CliError> {
    let sim_cfg: SimConfig = cfg.sim_config_with(profile)?;
    let sim = Simulator::new(sim_cfg).map_err(|e| CliError::Config(e.to_string()))?;
    let started = Instant::now();
    let tally = runner.tally(&sim, &CANCEL)?;
    let wall = (!flags.no_timing).then(|| started.elapsed().as_secs_f64());
    let estimate = tally.estimate()?;
    let row = ResultRow::new(cfg, &estimate, wall);
    let record = CampaignRecord::new(cfg, &tally, &estimate, wall);
    let mut csv_targets: Vec<PathBuf> = cfg.csv.iter().cloned().collect();
    let mut json_targets: Vec<PathBuf> = cfg.json.iter().cloned().collect();
    if let Some(dir) = &flags.out {
        csv_targets.push(dir.join("results.csv"));
        json_targets.push(dir.join("results.jsonl"));
    }
    for p in &csv_targets {
        append_csv(p, &row)?;
    }
    for p in &json_targets {
        append_json(p, &record)?;
    }
    Ok(Outcome { row })
}

/// Profiles are shared between configurations with the same layout.
struct ProfileCache(Vec<(Layout, SurvivalProfile)>);

impl ProfileCache {
    fn get(&mut self, runner: &Runner, cfg: &Resolved) -> Result<Option<SurvivalProfile>, CliError> {
        if cfg.mode != ModeChoice::Profile {
            return Ok(None);
        }
        let layout = cfg.scheme.0;
        if let Some((_, p)) = self.0.iter().find(|(l, _)| *l == layout) {
            return Ok(Some(p.clone()));
        }
        let p = runner.install(|| profile_of(layout))?;
        self.0.push((layout, p.clone()));
        Ok(Some(p))
    }
}

fn read_campaign(path: &Path) -> Result<CampaignConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    CampaignConfig::parse(&text)
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let campaign = read_campaign(&args.config)?;
    let configs = campaign.resolve(&args.flags.overrides())?;
    let runner = Runner::new(worker_count(args.flags.workers, campaign.workers)?)?;
    let mut cache = ProfileCache(Vec::new());
    writeln!(out, "{TABLE_HEADER}")?;
    for cfg in &configs {
        let profile = cache.get(&runner, cfg)?;
        let done = run_one(&runner, cfg, profile, &args.flags)?;
        table_line(out, &cfg.name, &done.row)?;
        out.flush()?;
    }
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let layout = args.scheme.layout()?;
    if !args.target.is_finite() || args.target < 0.0 {
        return Err(CliError::Config(format!("target must be a non-negative number of nines, got {}", args.target)));
    }
    let runner = Runner::new(worker_count(args.flags.workers, None)?)?;
    let base = args.flags.resolve(layout.to_string(), layout, SpareCount::Finite(0));
    let mut cache = ProfileCache(Vec::new());
    let profile = cache.get(&runner, &base)?;
    let template = base.sim_config_with(profile)?;
    writeln!(out, "sweep {layout}: target {} nines, {} runs per probe, seed {}", args.target, base.runs, base.seed)?;
    let mut evaluate = |cfg: &SimConfig| -> Result<_, selfrepair_core::Error> {
        let sim = Simulator::new(cfg.clone())?;
        let tally = runner.tally(&sim, &CANCEL).map_err(|e| selfrepair_core::Error::InvalidConfig(e.to_string()))?;
        let e = tally.estimate()?;
        let _ = writeln!(
            out,
            "  spares {:>9}  losses {:>8}  nines ({}, {})",
            cfg.spares.to_string(),
            e.losses,
            format_nines(e.nines_ci.0),
            format_nines(e.nines_ci.1)
        );
        Ok(e)
    };
    let result = min_spares_for_target(&template, args.target, args.max_spares, &mut evaluate);
    if CANCEL.load(Ordering::Relaxed) {
        return Err(CliError::Interrupted);
    }
    match result? {
        SpareSearch::Found { spares, .. } => {
            let overhead = overhead_text(layout.data_disks(), layout.parity_disks(), SpareCount::Finite(spares));
            writeln!(out, "verdict: {spares} spares reach {} nines (overhead {overhead})", args.target)?;
        }
        SpareSearch::Unreachable { limit: SpareCount::Unlimited, .. } => {
            writeln!(out, "verdict: unreachable; even unlimited spares miss {} nines", args.target)?;
        }
        SpareSearch::Unreachable { limit, .. } => {
            writeln!(out, "verdict: unreachable within {limit} spares (raise --max-spares)")?;
        }
    }
    Ok(())
}

pub fn cmd_table(args: &TableArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rows = tables::table(args.id).ok_or_else(|| CliError::Config(format!("no table {}", args.id)))?;
    let runner = Runner::new(worker_count(args.flags.workers, None)?)?;
    let mut cache = ProfileCache(Vec::new());
    writeln!(out, "table {}", args.id)?;
    writeln!(
        out,
        "{:<12} {:>5} {:>6} {:>8} {:>9} {:>9}  published CI     measured CI      verdict",
        "scheme", "data", "parity", "spares", "overhead", "(printed)"
    )?;
    for (i, r) in rows.iter().enumerate() {
        let cfg = args.flags.resolve(format!("table{}-row{}", args.id, i + 1), r.layout, r.spares);
        let profile = cache.get(&runner, &cfg)?;
        let done = run_one(&runner, &cfg, profile, &args.flags)?;
        let row = &done.row;
        let overhead = overhead_text(row.data, row.parity, r.spares);
        let overlap = row.nines_low <= r.nines.1 && row.nines_high >= r.nines.0;
        let spares = if r.spares == SpareCount::Unlimited { "∞".to_string() } else { r.spares.to_string() };
        writeln!(
            out,
            "{:<12} {:>5} {:>6} {:>8} {:>9} ({:>7})  ({:.2}, {:.2})     ({}, {})     {}{}",
            r.layout.to_string(),
            row.data,
            row.parity,
            spares,
            overhead,
            r.overhead,
            r.nines.0,
            r.nines.1,
            format_nines(row.nines_low),
            format_nines(row.nines_high),
            if overlap { "overlap" } else { "no-overlap" },
            if overhead == r.overhead { "" } else { ", overhead differs" },
        )?;
        out.flush()?;
    }
    writeln!(out, "{} runs per row; set --runs, --seed or {WORKERS_ENV} to change", rows_runs(&args.flags))?;
    Ok(())
}

fn rows_runs(flags: &RunFlags) -> u64 {
    flags.runs.unwrap_or(DEFAULT_RUNS)
}
