//! Seeded random streams.
//!
//! Every stochastic draw in the crate goes through a [`SimRng`] built from a
//! 64-bit experiment seed plus a small tuple of stream coordinates, so a trial
//! can be regenerated on its own regardless of which worker ran it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Purpose tags separating independent draws of the same trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Scenario = 1,
    Schedule = 2,
    Noise = 3,
}

/// RNG seeded from the whole experiment seed only.
pub fn from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for `(seed, trial, stream, cell)`; `cell` separates draws that differ
/// between sweep cells (for example the IRS patterns, whose length depends on L).
pub fn trial_rng(seed: u64, trial: u64, stream: Stream, cell: u64) -> SimRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    key[16..24].copy_from_slice(&(stream as u64).to_le_bytes());
    key[24..].copy_from_slice(&cell.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
