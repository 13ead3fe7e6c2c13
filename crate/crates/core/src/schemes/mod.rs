//! Encoders, the OR channel and decoders for fixed-population transmission,
//! activity recognition and two-phase message transmission.
//!
//! Every scheme is a pure function of its parameters and a codebook seed, so
//! trials can run concurrently and be replayed exactly.

mod activity;
mod channel;
mod mac;
mod scenario;
mod two_phase;

pub use activity::ActivityScheme;
pub use channel::{classify, or_channel, DecodeOutcome, Declared, ErrorCause};
pub use mac::{decode_per_user, joint_decode, Codebook, Encoded, MacScheme, JOINT_DECODE_GUARD};
pub use scenario::{
    codebook_seed, sample_activity, ActivityPattern, ActivitySampler, MacParams, Mode, Scenario,
    EXPLICIT_CODEBOOK_LIMIT,
};
pub use two_phase::TwoPhaseScheme;
