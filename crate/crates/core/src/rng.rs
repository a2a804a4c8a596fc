//! Per-run random substreams.
//!
//! Every simulation run owns private generators derived from the campaign
//! seed and the run index alone, so a run draws the same numbers no matter
//! which worker executes it or in what order. The derivation is:
//!
//! ```text
//! key   = mix64(seed ^ mix64(run_index + GOLDEN))
//! low   = mix64(key ^ mix64(lane + 1))
//! high  = mix64(low ^ GOLDEN)
//! state = high << 64 | low      (fed to a 128-bit MCG, PCG-XSL-RR output)
//! ```
//!
//! `mix64` is the SplitMix64 finalizer. Lane 0 drives disk failure times and
//! lane 1 drives profile-mode survival draws, which keeps the disk draws
//! aligned across configurations that differ only in their spare count.

use rand_core::{RngCore, SeedableRng};
use rand_pcg::Pcg64Mcg;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Which independent stream of a run to open.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lane {
    Disks = 0,
    Survival = 1,
}

/// 128-bit generator state for `(seed, run_index, lane)`.
pub fn substream_state(seed: u64, run_index: u64, lane: Lane) -> u128 {
    let key = mix64(seed ^ mix64(run_index.wrapping_add(GOLDEN)));
    let low = mix64(key ^ mix64(lane as u64 + 1));
    let high = mix64(low ^ GOLDEN);
    (u128::from(high) << 64) | u128::from(low)
}

/// A fast uniform source for one run lane.
#[derive(Debug, Clone)]
pub struct Stream(Pcg64Mcg);

impl Stream {
    pub fn new(seed: u64, run_index: u64, lane: Lane) -> Self {
        Stream(Pcg64Mcg::from_seed(
            substream_state(seed, run_index, lane).to_le_bytes(),
        ))
    }

    /// Uniform on the open interval (0, 1), 52 bits of resolution.
    #[inline]
    pub fn open01(&mut self) -> f64 {
        open01_from_bits(self.0.next_u64())
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform integer in `0..bound` (Lemire's multiply-shift, with rejection).
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let m = u128::from(self.0.next_u64()) * u128::from(bound);
            if (m as u64) >= threshold {
                return (m >> 64) as u64;
            }
        }
    }
}

#[inline]
pub fn open01_from_bits(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}
