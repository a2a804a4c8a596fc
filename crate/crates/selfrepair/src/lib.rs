//! Command line simulator and profile analyzer for self-repairing disk
//! arrays, built on `selfrepair-core`.
//!
//! - [`config`]: the TOML campaign format.
//! - [`runner`]: deterministic parallel execution of a campaign.
//! - [`output`]: CSV rows, JSON records and printed tables.
//! - [`analyze`]: survival profiles with closed-form cross-checks.
//! - [`tables`]: published reference rows.
//! - [`cli`]: the `analyze`, `simulate`, `sweep` and `table` commands.

pub mod analyze;
pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod tables;

pub use cli::run_cli;
pub use error::CliError;
