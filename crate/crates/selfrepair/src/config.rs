//! Campaign files.
//!
//! A campaign is a TOML document with optional global keys and one
//! `[config.NAME]` table per configuration:
//!
//! ```toml
//! seed = 1
//! workers = 4
//!
//! [config.anchor]
//! scheme = "twod:10"        # twod:N, raid6:MxN or tp:MxN
//! spares = 33               # or "unlimited"
//! runs = 20000000
//! mission_years = 4.0
//! repair_hours = 24.0
//! interp = "hazard"         # hazard | afr
//! mode = "exact"            # exact | profile
//! exhaustion = "continue"   # continue | loss
//! csv = "anchor.csv"        # optional, appended
//! json = "anchor.jsonl"     # optional, one record per line, appended
//!
//! [[config.anchor.bathtub]]
//! start_age_years = 0.0
//! rate_per_year = 0.051
//! ```
//!
//! Every key except `scheme` and `spares` is optional; defaults are a
//! four-year mission, 24-hour repairs, the 5.1/1.4/11.8 %/yr bathtub, hazard
//! rates, exact mode, unrepaired positions on spare exhaustion and 2×10^7
//! runs. A configuration's `seed` overrides the global one. Unknown keys are
//! errors.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use indexmap::IndexMap;
use selfrepair_core::closed_form::profile_for_layout;
use selfrepair_core::{
    BathtubProfile, ExhaustionPolicy, Layout, LossMode, Phase, RateInterpretation, SimConfig, SpareCount,
    SurvivalProfile, HOURS_PER_YEAR,
};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::CliError;

pub const DEFAULT_RUNS: u64 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub config: IndexMap<String, RunSpec>,
}

/// One named configuration as written in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub scheme: SchemeSpec,
    pub spares: SpareSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mission_years: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repair_hours: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interp: Option<InterpChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exhaustion: Option<ExhaustionChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bathtub: Option<Vec<PhaseSpec>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    pub start_age_years: f64,
    pub rate_per_year: f64,
}

/// A layout written as `twod:N`, `raid6:MxN` or `tp:MxN`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeSpec(pub Layout);

impl Serialize for SchemeSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for SchemeSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map(SchemeSpec).map_err(serde::de::Error::custom)
    }
}

/// A spare count: an integer or the string `"unlimited"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpareSpec(pub SpareCount);

impl Serialize for SpareSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            SpareCount::Finite(n) => s.serialize_u64(n),
            SpareCount::Unlimited => s.serialize_str("unlimited"),
        }
    }
}

impl<'de> Deserialize<'de> for SpareSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) => Ok(SpareSpec(SpareCount::Finite(n))),
            Raw::Word(w) => match w.as_str() {
                "unlimited" => Ok(SpareSpec(SpareCount::Unlimited)),
                other => Err(serde::de::Error::custom(format!(
                    "spares must be a non-negative integer or \"unlimited\", got {other:?}"
                ))),
            },
        }
    }
}

macro_rules! choice {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
        #[serde(rename_all = "lowercase")]
        pub enum $name {
            $(#[value(name = $text)] #[serde(rename = $text)] $variant),+
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    other => Err(format!("unknown value {other:?}")),
                }
            }
        }
    };
}

choice!(InterpChoice { Hazard => "hazard", Afr => "afr" });
choice!(ModeChoice { Exact => "exact", Profile => "profile" });
choice!(ExhaustionChoice { Continue => "continue", Loss => "loss" });

impl From<InterpChoice> for RateInterpretation {
    fn from(c: InterpChoice) -> Self {
        match c {
            InterpChoice::Hazard => RateInterpretation::HazardRate,
            InterpChoice::Afr => RateInterpretation::AnnualizedProbability,
        }
    }
}

impl From<ExhaustionChoice> for ExhaustionPolicy {
    fn from(c: ExhaustionChoice) -> Self {
        match c {
            ExhaustionChoice::Continue => ExhaustionPolicy::ContinueUnrepaired,
            ExhaustionChoice::Loss => ExhaustionPolicy::ImmediateLoss,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub runs: Option<u64>,
    pub seed: Option<u64>,
    pub mode: Option<ModeChoice>,
    pub interp: Option<InterpChoice>,
    pub exhaustion: Option<ExhaustionChoice>,
}

/// A configuration with every default and override applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub name: String,
    pub scheme: SchemeSpec,
    pub spares: SpareSpec,
    pub runs: u64,
    pub seed: u64,
    pub mission_years: f64,
    pub repair_hours: f64,
    pub interp: InterpChoice,
    pub mode: ModeChoice,
    pub exhaustion: ExhaustionChoice,
    pub bathtub: Vec<PhaseSpec>,
    #[serde(skip)]
    pub csv: Option<PathBuf>,
    #[serde(skip)]
    pub json: Option<PathBuf>,
}

impl CampaignConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: CampaignConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if cfg.config.is_empty() {
            return Err(CliError::Config("a campaign needs at least one [config.NAME] section".into()));
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Applies defaults and overrides and validates every configuration
    /// before anything runs.
    pub fn resolve(&self, overrides: &Overrides) -> Result<Vec<Resolved>, CliError> {
        let mut out = Vec::with_capacity(self.config.len());
        for (name, spec) in &self.config {
            let r = Resolved {
                name: name.clone(),
                scheme: spec.scheme,
                spares: spec.spares,
                runs: overrides.runs.or(spec.runs).unwrap_or(DEFAULT_RUNS),
                seed: overrides.seed.or(spec.seed).or(self.seed).unwrap_or(0),
                mission_years: spec.mission_years.unwrap_or(4.0),
                repair_hours: spec.repair_hours.unwrap_or(24.0),
                interp: overrides.interp.or(spec.interp).unwrap_or(InterpChoice::Hazard),
                mode: overrides.mode.or(spec.mode).unwrap_or(ModeChoice::Exact),
                exhaustion: overrides.exhaustion.or(spec.exhaustion).unwrap_or(ExhaustionChoice::Continue),
                bathtub: spec.bathtub.clone().unwrap_or_else(default_bathtub),
                csv: spec.csv.clone(),
                json: spec.json.clone(),
            };
            // the profile (possibly expensive) is built at run time; its size
            // matches the scheme by construction
            let mut check = r.clone();
            check.mode = ModeChoice::Exact;
            check.sim_config().map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("[config.{name}]: {m}")),
                other => other,
            })?;
            out.push(r);
        }
        Ok(out)
    }
}

pub fn default_bathtub() -> Vec<PhaseSpec> {
    BathtubProfile::backblaze()
        .phases()
        .iter()
        .map(|p| PhaseSpec { start_age_years: p.start_age, rate_per_year: p.rate })
        .collect()
}

impl Resolved {
    /// Builds the engine configuration. In profile mode the survival profile
    /// is computed unless one is supplied.
    pub fn sim_config(&self) -> Result<SimConfig, CliError> {
        self.sim_config_with(None)
    }

    pub fn sim_config_with(&self, profile: Option<SurvivalProfile>) -> Result<SimConfig, CliError> {
        let layout = self.scheme.0;
        layout.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let phases = self
            .bathtub
            .iter()
            .map(|p| Phase { start_age: p.start_age_years, rate: p.rate_per_year })
            .collect();
        let mut cfg = SimConfig::new(layout, self.spares.0);
        cfg.bathtub = BathtubProfile::new(phases).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.mission = self.mission_years;
        cfg.repair_time = self.repair_hours / HOURS_PER_YEAR;
        cfg.interp = self.interp.into();
        cfg.exhaustion = self.exhaustion.into();
        cfg.runs = self.runs;
        cfg.seed = self.seed;
        if self.mode == ModeChoice::Profile {
            let profile = match profile {
                Some(p) => p,
                None => profile_of(layout)?,
            };
            cfg.loss_mode = LossMode::Profile(profile);
        }
        // rate conversion errors surface here too
        selfrepair_core::FailureLaw::new(&cfg.bathtub, cfg.interp).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

/// Survival profile of a layout: closed form for groups, enumeration for
/// two-dimensional arrays.
pub fn profile_of(layout: Layout) -> Result<SurvivalProfile, CliError> {
    if let Some(p) = profile_for_layout(layout) {
        return p.map_err(|e| CliError::Config(e.to_string()));
    }
    let scheme = layout.build().map_err(|e| CliError::Config(e.to_string()))?;
    crate::analyze::enumerate_profile(&scheme, None)
}
