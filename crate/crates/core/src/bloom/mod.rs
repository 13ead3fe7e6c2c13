//! Bloom filters as channel inputs.
//!
//! A filter of parameters `(L, K)` is a length-`L` binary array in which each
//! of `K` hash draws sets one uniformly chosen position; repeated draws
//! collapse. Hash draws are made deterministic by [`HashSpec`] so that encoder
//! and decoder regenerate identical codebooks.

mod filter;
mod hash;
mod occupancy;

pub use filter::{contains, generate, superpose, BloomFilter, Containment, Signature};
pub use hash::{mix64, mix_pair, HashSpec, Identity};
pub use occupancy::{
    conditional_occupancy_bound, ln_binomial, occupancy_bound, stirling2, weight_pmf,
    weight_pmf_closed_form, LnFactorials, OccupancyBound, WeightPmf, MAX_PMF_LEN, MAX_PMF_WORK,
};
