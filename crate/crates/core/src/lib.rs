//! Reliability analysis for self-repairing disk arrays.
//!
//! A self-repairing array ships with an internal pool of spare disks that is
//! expected to cover every rebuild over the array's service life. This crate
//! holds the allocation-only core:
//!
//! - [`codes`]: array geometries (complete two-dimensional RAID, groups of
//!   RAID-6 or triple-parity stripes), exact erasure recoverability over GF(2)
//!   and exhaustive survival profiles.
//! - [`closed_form`]: combinatorial fatal-pattern fractions for groups of
//!   identical stripes, in exact rational arithmetic.
//! - [`failure_model`]: piecewise-constant (bathtub) hazard rates and exact
//!   inverse-transform sampling of failure ages.
//! - [`sim`]: the event-driven Monte Carlo engine and the spare-count search.
//! - [`stats`]: reliability estimates, Wilson intervals, nines and space
//!   overhead.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command line
//! front end and parallel execution live in the `selfrepair` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod closed_form;
pub mod codes;
pub mod error;
pub mod failure_model;
pub mod rng;
pub mod sim;
pub mod stats;

pub use codes::{ArrayScheme, DiskPosition, ErasurePattern, Layout, SurvivalProfile};
pub use error::Error;
pub use failure_model::{BathtubProfile, FailureLaw, Phase, RateInterpretation};
pub use sim::{
    ExhaustionPolicy, LossMode, RunOutcome, SimConfig, Simulator, SpareCount, Tally,
};
pub use stats::{Overhead, ReliabilityEstimate};

/// Hours in one year; repair times are carried in years internally.
pub const HOURS_PER_YEAR: f64 = 365.25 * 24.0;
