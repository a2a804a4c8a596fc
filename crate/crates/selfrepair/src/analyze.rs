//! Survival profiles for the `analyze` command.

use std::fmt::Write as _;

use rayon::prelude::*;
use selfrepair_core::closed_form::profile_for_layout;
use selfrepair_core::codes::{EnumerationBudget, Fraction, SamplingPlan, DEFAULT_SUBSET_BUDGET};
use selfrepair_core::{ArrayScheme, Error, Layout, SurvivalProfile};
use serde::Serialize;

use crate::error::CliError;

/// Exhaustive profile, spreading each level over the rayon pool by smallest
/// erased index. Levels above the subset budget are sampled when `sampling`
/// is given and refused otherwise.
pub fn enumerate_profile(scheme: &ArrayScheme, sampling: Option<SamplingPlan>) -> Result<SurvivalProfile, CliError> {
    let budget = EnumerationBudget { max_subsets: DEFAULT_SUBSET_BUDGET, sampling };
    scheme
        .survival_profile_by(&budget, |s, k| {
            (0..s.len()).into_par_iter().map(|first| s.count_recoverable_from(k, first)).sum()
        })
        .map_err(|e| match e {
            Error::BudgetExceeded { level, subsets, budget } => CliError::Config(format!(
                "{subsets} subsets of {level} failures exceed the enumeration budget of {budget}; \
                 pass --sample N to estimate that level instead"
            )),
            other => CliError::Runtime(other.to_string()),
        })
}

/// One level of a profile, as dumped to CSV and JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRow {
    pub level: usize,
    pub failures: usize,
    /// Exact numerator and denominator when the level was enumerated.
    pub numerator: Option<String>,
    pub denominator: Option<String>,
    /// 12 significant digits.
    pub fraction: String,
    pub std_error: Option<f64>,
}

pub fn level_rows(p: &SurvivalProfile) -> Vec<LevelRow> {
    (0..3)
        .map(|j| {
            let exact = p.exact.as_ref().map(|f| &f[j]);
            LevelRow {
                level: j + 1,
                failures: p.tolerated + j + 1,
                numerator: exact.map(|f: &Fraction| f.numer().to_string()),
                denominator: exact.map(|f: &Fraction| f.denom().to_string()),
                fraction: sig12(p.fractions[j]),
                std_error: p.std_error.map(|s| s[j]),
            }
        })
        .collect()
}

/// `x` rounded to 12 significant digits.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = 11 - x.abs().log10().floor() as i32;
    if (0..=20).contains(&digits) {
        format!("{x:.*}", digits as usize)
    } else {
        format!("{x:.11e}")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileReport {
    pub scheme: String,
    pub size: usize,
    pub tolerated: usize,
    pub enumerated: Vec<LevelRow>,
    pub closed_form: Option<Vec<LevelRow>>,
    /// `Some(true)` when both methods give identical exact fractions.
    pub agree: Option<bool>,
}

pub fn analyze(layout: Layout, sampling: Option<SamplingPlan>) -> Result<ProfileReport, CliError> {
    let scheme = layout.build().map_err(|e| CliError::Config(e.to_string()))?;
    let enumerated = enumerate_profile(&scheme, sampling)?;
    let closed = profile_for_layout(layout).transpose().map_err(|e| CliError::Runtime(e.to_string()))?;
    let agree = closed.as_ref().and_then(|c| match (&c.exact, &enumerated.exact) {
        (Some(a), Some(b)) => Some(a == b),
        _ => None,
    });
    Ok(ProfileReport {
        scheme: layout.to_string(),
        size: enumerated.size,
        tolerated: enumerated.tolerated,
        enumerated: level_rows(&enumerated),
        closed_form: closed.as_ref().map(level_rows),
        agree,
    })
}

impl ProfileReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}: {} disks, tolerates any {} failures", self.scheme, self.size, self.tolerated);
        for (j, row) in self.enumerated.iter().enumerate() {
            let exact = match (&row.numerator, &row.denominator) {
                (Some(n), Some(d)) => format!("{n}/{d}"),
                _ => format!("sampled, std error {}", row.std_error.map_or("-".into(), sig12)),
            };
            let _ = write!(s, "  f{} ({} failures) = {}  [{}]", row.level, row.failures, row.fraction, exact);
            if let Some(c) = self.closed_form.as_ref().map(|c| &c[j]) {
                let _ = write!(
                    s,
                    "   closed form {}/{}",
                    c.numerator.as_deref().unwrap_or("?"),
                    c.denominator.as_deref().unwrap_or("?")
                );
            }
            s.push('\n');
        }
        match self.agree {
            Some(true) => s.push_str("verdict: closed-form = enumeration\n"),
            Some(false) => s.push_str("verdict: closed-form != enumeration\n"),
            None => {}
        }
        s
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["scheme", "method", "level", "failures", "numerator", "denominator", "fraction", "std_error"])?;
        let closed = self.closed_form.iter().flatten().map(|r| ("closed-form", r));
        for (method, r) in self.enumerated.iter().map(|r| ("enumeration", r)).chain(closed) {
            w.write_record([
                self.scheme.clone(),
                method.to_string(),
                r.level.to_string(),
                r.failures.to_string(),
                r.numerator.clone().unwrap_or_default(),
                r.denominator.clone().unwrap_or_default(),
                r.fraction.clone(),
                r.std_error.map(|e| e.to_string()).unwrap_or_default(),
            ])?;
        }
        w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
    }
}
