use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Absorbs `value` into the running key `state`.
#[inline]
pub fn mix_pair(state: u64, value: u64) -> u64 {
    mix64(state ^ mix64(value.wrapping_add(GOLDEN_GAMMA)))
}

/// Who a filter belongs to: a user, a transmission phase, and a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Identity {
    pub user: u64,
    pub phase: u32,
    pub message: u64,
}

impl Identity {
    pub fn new(user: u64, phase: u32, message: u64) -> Self {
        Identity {
            user,
            phase,
            message,
        }
    }
}

/// Keyed hash family mapping `(master_seed, identity, hash index)` to a
/// position in `[0, L)`.
///
/// Positions for consecutive hash indices are successive outputs of a
/// SplitMix64 stream keyed by the seed and identity, reduced to `[0, L)` by a
/// 128-bit multiply-shift. Everything is defined on fixed-width integers, so
/// the mapping is identical on every platform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HashSpec {
    pub master_seed: u64,
    pub identity: Identity,
    key: u64,
}

impl HashSpec {
    pub fn new(master_seed: u64, identity: Identity) -> Self {
        let mut key = mix64(master_seed ^ 0x424C_4F4F_4D5F_4653);
        key = mix_pair(key, identity.user);
        key = mix_pair(key, u64::from(identity.phase));
        key = mix_pair(key, identity.message);
        HashSpec {
            master_seed,
            identity,
            key,
        }
    }

    /// Position selected by hash function `index` in an array of length `len`.
    #[inline]
    pub fn position(&self, index: usize, len: usize) -> usize {
        debug_assert!(len > 0);
        let raw = mix64(
            self.key
                .wrapping_add(GOLDEN_GAMMA.wrapping_mul(index as u64 + 1)),
        );
        ((u128::from(raw) * len as u128) >> 64) as usize
    }

    /// The ordered sequence of `hashes` positions in `[0, len)`.
    pub fn positions(&self, len: usize, hashes: usize) -> impl Iterator<Item = usize> + '_ {
        (0..hashes).map(move |i| self.position(i, len))
    }
}
