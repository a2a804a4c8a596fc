//! Event-driven Monte Carlo simulation of a self-repairing array.
//!
//! Every disk, active or spare, is new at commissioning and ages in wall-clock
//! time. A failed active disk is replaced at once by an idle spare which
//! rebuilds the lost contents for `repair_time`; the position stays erased
//! until the rebuild completes. Idle spares fail at the same rates and simply
//! leave the pool. When the pool is empty the failed position either stays
//! erased for the rest of the mission or counts as an immediate loss,
//! depending on [`ExhaustionPolicy`].

mod engine;
mod search;

pub use engine::{DiskRecord, DiskStatus, NoObserver, Observer, Snapshot, Workspace};
pub use search::{min_spares_for_target, Probe, SpareSearch};

use alloc::format;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use crate::codes::{ArrayScheme, Layout, SurvivalProfile};
use crate::error::{Error, Result};
use crate::failure_model::{BathtubProfile, FailureLaw, RateInterpretation};
use crate::stats::ReliabilityEstimate;
use crate::HOURS_PER_YEAR;

/// Size of the spare pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpareCount {
    Finite(u64),
    Unlimited,
}

impl fmt::Display for SpareCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpareCount::Finite(n) => write!(f, "{n}"),
            SpareCount::Unlimited => f.write_str("unlimited"),
        }
    }
}

impl FromStr for SpareCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "unlimited" | "inf" | "∞" => Ok(SpareCount::Unlimited),
            other => other
                .parse()
                .map(SpareCount::Finite)
                .map_err(|_| Error::InvalidConfig(format!("cannot parse spare count {s:?}"))),
        }
    }
}

/// How data loss is decided when a position is erased.
#[derive(Debug, Clone, PartialEq)]
pub enum LossMode {
    /// Exact decodability of the current erased set.
    Exact,
    /// Count-based: survive a rise to `n_f + j` concurrent erasures with
    /// probability `f_j / f_(j-1)`; more than `n_f + 3` is always fatal.
    Profile(SurvivalProfile),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExhaustionPolicy {
    /// Leave the position erased until the mission ends.
    #[default]
    ContinueUnrepaired,
    /// Count the run as lost as soon as a repair finds no spare.
    ImmediateLoss,
}

/// Parameters of one simulation campaign. Times are in years.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub layout: Layout,
    pub spares: SpareCount,
    pub mission: f64,
    pub repair_time: f64,
    pub bathtub: BathtubProfile,
    pub interp: RateInterpretation,
    pub loss_mode: LossMode,
    pub exhaustion: ExhaustionPolicy,
    pub runs: u64,
    pub seed: u64,
}

impl SimConfig {
    /// Four-year mission, 24-hour rebuilds, default bathtub rates, exact
    /// loss detection.
    pub fn new(layout: Layout, spares: SpareCount) -> Self {
        SimConfig {
            layout,
            spares,
            mission: 4.0,
            repair_time: 24.0 / HOURS_PER_YEAR,
            bathtub: BathtubProfile::backblaze(),
            interp: RateInterpretation::HazardRate,
            loss_mode: LossMode::Exact,
            exhaustion: ExhaustionPolicy::ContinueUnrepaired,
            runs: 1_000_000,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        if !(self.mission > 0.0) || !self.mission.is_finite() {
            return Err(Error::InvalidConfig(format!("mission must be positive, got {}", self.mission)));
        }
        if !(self.repair_time >= 0.0) || !self.repair_time.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "repair time must be non-negative, got {}",
                self.repair_time
            )));
        }
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be at least 1".into()));
        }
        if let LossMode::Profile(p) = &self.loss_mode {
            if p.size != self.layout.total_disks() {
                return Err(Error::InvalidConfig(format!(
                    "survival profile describes {} disks but the scheme has {}",
                    p.size,
                    self.layout.total_disks()
                )));
            }
        }
        if let SpareCount::Finite(s) = self.spares {
            if s > u32::MAX as u64 - self.layout.total_disks() as u64 {
                return Err(Error::InvalidConfig(format!("{s} spares is too many")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossTrigger {
    FatalPattern,
    PolicyExhaustion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fate {
    Survived,
    DataLoss { time: f64, trigger: LossTrigger },
}

/// What happened in one mission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    pub fate: Fate,
    /// First time a repair found the pool empty.
    pub spares_exhausted_at: Option<f64>,
    pub peak_concurrent_failures: usize,
}

impl RunOutcome {
    pub fn is_loss(&self) -> bool {
        matches!(self.fate, Fate::DataLoss { .. })
    }
}

/// Commutative run counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub runs: u64,
    pub losses: u64,
    pub fatal_pattern_losses: u64,
    pub policy_losses: u64,
    pub exhaustions: u64,
    pub peak_sum: u64,
    pub peak_max: u64,
}

impl Tally {
    pub fn record(&mut self, outcome: &RunOutcome) {
        self.runs += 1;
        if let Fate::DataLoss { trigger, .. } = outcome.fate {
            self.losses += 1;
            match trigger {
                LossTrigger::FatalPattern => self.fatal_pattern_losses += 1,
                LossTrigger::PolicyExhaustion => self.policy_losses += 1,
            }
        }
        if outcome.spares_exhausted_at.is_some() {
            self.exhaustions += 1;
        }
        let peak = outcome.peak_concurrent_failures as u64;
        self.peak_sum += peak;
        self.peak_max = self.peak_max.max(peak);
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.runs += other.runs;
        self.losses += other.losses;
        self.fatal_pattern_losses += other.fatal_pattern_losses;
        self.policy_losses += other.policy_losses;
        self.exhaustions += other.exhaustions;
        self.peak_sum += other.peak_sum;
        self.peak_max = self.peak_max.max(other.peak_max);
        self
    }

    pub fn estimate(&self) -> Result<ReliabilityEstimate> {
        ReliabilityEstimate::from_counts(self.runs, self.losses, self.exhaustions, self.peak_sum)
    }
}

/// A validated campaign, ready to run.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: SimConfig,
    scheme: ArrayScheme,
    law: FailureLaw,
    /// Probability that a new disk outlives the mission.
    survive_mission: f64,
    /// Conditional survival for each level beyond `n_f` (profile mode).
    step_survival: Option<[f64; 4]>,
}

impl Simulator {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let scheme = config.layout.build()?;
        let law = FailureLaw::new(&config.bathtub, config.interp)?;
        let survive_mission = law.survival(0.0, config.mission)?;
        let step_survival = match &config.loss_mode {
            LossMode::Exact => None,
            LossMode::Profile(p) => Some([
                1.0,
                p.conditional_survival(1),
                p.conditional_survival(2),
                p.conditional_survival(3),
            ]),
        };
        Ok(Simulator { config, scheme, law, survive_mission, step_survival })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn scheme(&self) -> &ArrayScheme {
        &self.scheme
    }

    pub fn law(&self) -> &FailureLaw {
        &self.law
    }

    /// Reusable per-worker state.
    pub fn workspace(&self) -> Workspace<'_> {
        Workspace::new(&self.scheme)
    }

    pub fn run(&self, run_index: u64, ws: &mut Workspace<'_>) -> RunOutcome {
        self.run_observed(run_index, ws, &mut NoObserver)
    }

    /// Runs `range` serially.
    pub fn tally_range(&self, range: Range<u64>) -> Tally {
        let mut ws = self.workspace();
        let mut tally = Tally::default();
        for i in range {
            tally.record(&self.run(i, &mut ws));
        }
        tally
    }

    /// Runs the whole campaign on the calling thread.
    pub fn simulate(&self) -> Result<ReliabilityEstimate> {
        self.tally_range(0..self.config.runs).estimate()
    }
}

/// One mission of `config`, identified by `run_index`.
pub fn simulate_run(config: &SimConfig, run_index: u64) -> Result<RunOutcome> {
    let sim = Simulator::new(config.clone())?;
    let mut ws = sim.workspace();
    Ok(sim.run(run_index, &mut ws))
}

/// The full campaign, serially.
pub fn simulate(config: &SimConfig) -> Result<ReliabilityEstimate> {
    Simulator::new(config.clone())?.simulate()
}
