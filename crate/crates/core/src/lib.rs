//! Bloom-filter coding over the OR multi-access channel.
//!
//! The crate is organised bottom-up:
//!
//! - [`bloom`]: Bloom filter arrays, deterministic hashing, containment with
//!   probe accounting, and exact occupancy (weight) distributions.
//! - [`analysis`]: closed-form entropies, rate regions, exact success
//!   probabilities, concentration bounds and cost intervals.
//! - [`schemes`]: the OR channel, encoders and decoders for fixed-population
//!   transmission, activity recognition and two-phase message transmission.
//! - [`harness`]: seeded Monte Carlo runner, sweeps, statistics and
//!   persistence.

pub mod analysis;
pub mod bloom;
mod error;
pub mod harness;
pub mod schemes;

pub use error::{Error, Result};
