//! Parallel execution of a campaign.
//!
//! Runs are cut into fixed-size chunks of consecutive run indices. Each chunk
//! is simulated serially on one worker with that worker's reusable
//! workspace, and chunk tallies are summed. Every run draws from its own
//! substream and the tally is a set of integer sums, so the result does not
//! depend on the worker count or the scheduling order.

use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use selfrepair_core::{Simulator, Tally};

use crate::error::CliError;

const CHUNK: u64 = 1 << 15;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "SELFREPAIR_WORKERS";

/// Worker count from the flag, then the campaign file, then the
/// environment, then the machine.
pub fn worker_count(flag: Option<usize>, file: Option<usize>) -> Result<usize, CliError> {
    let env = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?,
        ),
        Err(_) => None,
    };
    let n = flag
        .or(file)
        .or(env)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if n == 0 {
        return Err(CliError::Config("worker count must be at least 1".into()));
    }
    Ok(n)
}

/// Parallel runner with a fixed number of threads.
pub struct Runner {
    pool: rayon::ThreadPool,
    workers: usize,
}

impl Runner {
    pub fn new(workers: usize) -> Result<Self, CliError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        Ok(Runner { pool, workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Runs `f` inside this runner's thread pool.
    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    /// Tallies runs `0..runs` of `sim`. Returns `Interrupted` if `cancel` is
    /// raised before every chunk finished.
    pub fn tally(&self, sim: &Simulator, cancel: &AtomicBool) -> Result<Tally, CliError> {
        let runs = sim.config().runs;
        let chunks = runs.div_ceil(CHUNK);
        let partial = self.pool.install(|| {
            (0..chunks)
                .into_par_iter()
                .map_init(
                    || sim.workspace(),
                    |ws, c| {
                        if cancel.load(Ordering::Relaxed) {
                            return None;
                        }
                        let start = c * CHUNK;
                        let end = (start + CHUNK).min(runs);
                        let mut t = Tally::default();
                        for i in start..end {
                            t.record(&sim.run(i, ws));
                        }
                        Some(t)
                    },
                )
                .try_reduce(Tally::default, |a, b| Some(a.merge(b)))
        });
        partial.ok_or(CliError::Interrupted)
    }
}
