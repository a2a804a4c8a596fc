use alloc::vec::Vec;

use super::{SimConfig, SpareCount};
use crate::error::Result;
use crate::stats::ReliabilityEstimate;

/// One evaluated spare count.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub spares: SpareCount,
    pub estimate: ReliabilityEstimate,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpareSearch {
    Found { spares: u64, trace: Vec<Probe> },
    /// Even the largest pool tried misses the target.
    Unreachable { limit: SpareCount, trace: Vec<Probe> },
}

impl SpareSearch {
    pub fn trace(&self) -> &[Probe] {
        match self {
            SpareSearch::Found { trace, .. } | SpareSearch::Unreachable { trace, .. } => trace,
        }
    }

    pub fn spares(&self) -> Option<u64> {
        match self {
            SpareSearch::Found { spares, .. } => Some(*spares),
            SpareSearch::Unreachable { .. } => None,
        }
    }
}

/// Smallest spare count whose lower nines bound reaches `target_nines`.
///
/// Unlimited spares are probed first; if they miss, the target is
/// unreachable. Otherwise the search doubles from 1 spare until a count
/// passes (giving up past `max_spares`) and bisects the last bracket. Every
/// probe reuses the template's seed, so all probes share one random
/// schedule.
pub fn min_spares_for_target<F>(
    template: &SimConfig,
    target_nines: f64,
    max_spares: u64,
    mut evaluate: F,
) -> Result<SpareSearch>
where
    F: FnMut(&SimConfig) -> Result<ReliabilityEstimate>,
{
    let mut trace = Vec::new();
    let mut probe = |spares: SpareCount, trace: &mut Vec<Probe>| -> Result<bool> {
        let mut cfg = template.clone();
        cfg.spares = spares;
        let estimate = evaluate(&cfg)?;
        let passes = estimate.nines_ci.0 >= target_nines;
        trace.push(Probe { spares, estimate, passes });
        Ok(passes)
    };

    if !probe(SpareCount::Unlimited, &mut trace)? {
        return Ok(SpareSearch::Unreachable { limit: SpareCount::Unlimited, trace });
    }
    if probe(SpareCount::Finite(0), &mut trace)? {
        return Ok(SpareSearch::Found { spares: 0, trace });
    }
    let mut failing = 0u64;
    let mut passing = 1u64;
    loop {
        if passing > max_spares {
            return Ok(SpareSearch::Unreachable { limit: SpareCount::Finite(max_spares), trace });
        }
        if probe(SpareCount::Finite(passing), &mut trace)? {
            break;
        }
        failing = passing;
        passing = passing.saturating_mul(2).min(max_spares.max(passing + 1));
        if failing == max_spares {
            return Ok(SpareSearch::Unreachable { limit: SpareCount::Finite(max_spares), trace });
        }
    }
    while passing - failing > 1 {
        let mid = failing + (passing - failing) / 2;
        if probe(SpareCount::Finite(mid), &mut trace)? {
            passing = mid;
        } else {
            failing = mid;
        }
    }
    Ok(SpareSearch::Found { spares: passing, trace })
}
