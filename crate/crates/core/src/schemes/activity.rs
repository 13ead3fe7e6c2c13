use super::mac::superpose_hashed;
use super::{ActivityPattern, DecodeOutcome, Declared, Encoded};
use crate::analysis::PhaseParams;
use crate::bloom::{BloomFilter, Containment, HashSpec, Identity, Signature};
use crate::Result;

/// Phase tag of activity signatures, shared with phase 1 of the two-phase
/// scheme.
pub(crate) const SIGNATURE_PHASE: u32 = 1;

pub(crate) fn signature_spec(seed: u64, user: u64) -> HashSpec {
    HashSpec::new(seed, Identity::new(user, SIGNATURE_PHASE, 0))
}

/// Decodes the users whose signature is contained in `y`, probing each
/// signature lazily and stopping at the first zero.
pub(crate) fn recognize(
    y: &BloomFilter,
    users: u64,
    params: PhaseParams,
    seed: u64,
    mut accept: impl FnMut(u64),
) -> u64 {
    let mut probes = 0u64;
    for user in 0..users {
        let spec = signature_spec(seed, user);
        let c = Containment::probe(y, spec.positions(params.len, params.hashes));
        probes += c.hashes_checked as u64;
        if c.verdict {
            accept(user);
        }
    }
    probes
}

/// Activity recognition: each user owns a `(L, K)` signature and the
/// receiver declares active every user whose signature is contained.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityScheme {
    users: u64,
    params: PhaseParams,
    seed: u64,
}

impl ActivityScheme {
    pub fn new(users: u64, params: PhaseParams, seed: u64) -> Self {
        ActivityScheme {
            users,
            params,
            seed,
        }
    }

    pub fn params(&self) -> PhaseParams {
        self.params
    }

    pub fn signature(&self, user: u64) -> Result<Signature> {
        Signature::from_hash(
            self.params.len,
            self.params.hashes,
            &signature_spec(self.seed, user),
        )
    }

    /// OR of the active users' signatures; messages are ignored.
    pub fn encode(&self, pattern: &ActivityPattern) -> Encoded {
        superpose_hashed(
            self.params.len,
            self.params.hashes,
            pattern.active().map(|u| signature_spec(self.seed, u)),
        )
    }

    /// Declares active every user whose signature is contained in `y`, each
    /// with message 0.
    pub fn decode(&self, y: &BloomFilter) -> DecodeOutcome {
        let mut declared = std::collections::BTreeMap::new();
        let probes = recognize(y, self.users, self.params, self.seed, |u| {
            declared.insert(u, Declared::Message(0));
        });
        DecodeOutcome {
            declared,
            candidate_list_size: 0,
            hash_count_total: probes,
        }
    }
}
