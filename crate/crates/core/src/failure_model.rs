//! Age-dependent disk failures with piecewise-constant hazard rates.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One phase of a bathtub curve: from `start_age` (years) onward the disk
/// fails at `rate` per year, until the next phase begins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub start_age: f64,
    pub rate: f64,
}

/// Ordered phases, the first starting at age 0 and the last open-ended.
#[derive(Debug, Clone, PartialEq)]
pub struct BathtubProfile {
    phases: Vec<Phase>,
}

impl BathtubProfile {
    pub fn new(phases: Vec<Phase>) -> Result<Self> {
        let Some(first) = phases.first() else {
            return Err(Error::InvalidBathtub("at least one phase is required".into()));
        };
        if first.start_age != 0.0 {
            return Err(Error::InvalidBathtub(format!("first phase must start at age 0, got {}", first.start_age)));
        }
        for w in phases.windows(2) {
            if !(w[1].start_age > w[0].start_age) || !w[1].start_age.is_finite() {
                return Err(Error::InvalidBathtub("phase start ages must be strictly increasing".into()));
            }
        }
        if let Some(p) = phases.iter().find(|p| !(p.rate >= 0.0) || !p.rate.is_finite()) {
            return Err(Error::InvalidBathtub(format!("rates must be finite and non-negative, got {}", p.rate)));
        }
        Ok(BathtubProfile { phases })
    }

    /// 5.1 %/yr for the first 18 months, 1.4 %/yr for the next 18 months and
    /// 11.8 %/yr afterwards.
    pub fn backblaze() -> Self {
        BathtubProfile {
            phases: vec![
                Phase { start_age: 0.0, rate: 0.051 },
                Phase { start_age: 1.5, rate: 0.014 },
                Phase { start_age: 3.0, rate: 0.118 },
            ],
        }
    }

    /// A single phase with a constant rate.
    pub fn constant(rate: f64) -> Result<Self> {
        Self::new(vec![Phase { start_age: 0.0, rate }])
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }
}

impl Default for BathtubProfile {
    fn default() -> Self {
        Self::backblaze()
    }
}

/// How a stated per-year figure turns into a hazard rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateInterpretation {
    /// The stated value is the hazard rate itself.
    #[default]
    HazardRate,
    /// The stated value is a one-year failure probability `q`; the hazard
    /// rate is `-ln(1 - q)`.
    AnnualizedProbability,
}

impl RateInterpretation {
    pub fn convert(self, stated: f64) -> Result<f64> {
        match self {
            RateInterpretation::HazardRate => Ok(stated),
            RateInterpretation::AnnualizedProbability => {
                if !(0.0..1.0).contains(&stated) {
                    return Err(Error::InvalidBathtub(format!(
                        "an annualized failure probability must lie in [0, 1), got {stated}"
                    )));
                }
                Ok(-libm::log1p(-stated))
            }
        }
    }
}

/// A bathtub profile with its rates converted, ready for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureLaw {
    starts: Vec<f64>,
    rates: Vec<f64>,
}

impl FailureLaw {
    pub fn new(profile: &BathtubProfile, interp: RateInterpretation) -> Result<Self> {
        let mut starts = Vec::with_capacity(profile.phases.len());
        let mut rates = Vec::with_capacity(profile.phases.len());
        for p in &profile.phases {
            starts.push(p.start_age);
            rates.push(interp.convert(p.rate)?);
        }
        Ok(FailureLaw { starts, rates })
    }

    #[inline]
    fn phase_of(&self, age: f64) -> usize {
        // right-continuous: a boundary age belongs to the later phase
        self.starts.partition_point(|&s| s <= age).saturating_sub(1)
    }

    #[inline]
    fn phase_end(&self, i: usize) -> f64 {
        self.starts.get(i + 1).copied().unwrap_or(f64::INFINITY)
    }

    /// Hazard rate (per year) at `age`.
    pub fn hazard_at(&self, age: f64) -> Result<f64> {
        if !(age >= 0.0) {
            return Err(Error::NegativeAge(age));
        }
        Ok(self.rates[self.phase_of(age)])
    }

    /// Integrated hazard over `[from, to]`: the sum over overlapped phases of
    /// rate times overlap length.
    pub fn cumulative_hazard(&self, from: f64, to: f64) -> Result<f64> {
        if !(from >= 0.0) {
            return Err(Error::NegativeAge(from));
        }
        if !(to >= from) {
            return Err(Error::ReversedInterval { from, to });
        }
        Ok(self.integrate(from, to))
    }

    fn integrate(&self, from: f64, to: f64) -> f64 {
        let mut total = 0.0;
        let mut x = from;
        let mut i = self.phase_of(from);
        while x < to {
            let end = self.phase_end(i).min(to);
            if self.rates[i] > 0.0 {
                total += self.rates[i] * (end - x);
            }
            x = end;
            i += 1;
        }
        total
    }

    /// Probability that a disk alive at age `from` is still alive at `to`.
    pub fn survival(&self, from: f64, to: f64) -> Result<f64> {
        Ok(libm::exp(-self.cumulative_hazard(from, to)?))
    }

    /// Failure age of a disk alive at `current_age`, by inverse transform:
    /// the smallest `t > current_age` whose integrated hazard from
    /// `current_age` equals `-ln(u)`. Walks the phases exactly; returns
    /// infinity when the remaining phases cannot use up the hazard budget.
    pub fn sample_failure_time(&self, current_age: f64, u: f64) -> Result<f64> {
        if !(current_age >= 0.0) {
            return Err(Error::NegativeAge(current_age));
        }
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::UniformOutOfRange(u));
        }
        Ok(self.invert(current_age, -libm::log(u)))
    }

    /// Age at which the integrated hazard from `from` reaches `budget`.
    #[inline]
    pub fn invert(&self, from: f64, mut budget: f64) -> f64 {
        let mut x = from;
        let mut i = self.phase_of(from);
        loop {
            let rate = self.rates[i];
            let end = self.phase_end(i);
            if end.is_infinite() {
                return if rate > 0.0 { x + budget / rate } else { f64::INFINITY };
            }
            let cap = rate * (end - x);
            if rate > 0.0 && budget < cap {
                return x + budget / rate;
            }
            budget -= cap;
            x = end;
            i += 1;
        }
    }
}

/// Hazard rate of `profile` at `age` under `interp`.
pub fn hazard_at(profile: &BathtubProfile, interp: RateInterpretation, age: f64) -> Result<f64> {
    FailureLaw::new(profile, interp)?.hazard_at(age)
}

pub fn cumulative_hazard(profile: &BathtubProfile, interp: RateInterpretation, from: f64, to: f64) -> Result<f64> {
    FailureLaw::new(profile, interp)?.cumulative_hazard(from, to)
}

pub fn sample_failure_time(profile: &BathtubProfile, interp: RateInterpretation, current_age: f64, u: f64) -> Result<f64> {
    FailureLaw::new(profile, interp)?.sample_failure_time(current_age, u)
}
