use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ActivityPattern, DecodeOutcome, Declared, MacParams};
use crate::analysis::{false_containment, pow_one_minus};
use crate::bloom::{mix_pair, BloomFilter, Containment, HashSpec, Identity, Signature};
use crate::{Error, Result};

/// Largest message-tuple count [`joint_decode`] will enumerate.
pub const JOINT_DECODE_GUARD: u128 = 1_000_000;

const SAMPLED_STREAM: u64 = 0x5341_4D50_4C45_4421;

/// One user's messages in one phase, each a `(L, K)` hash position sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    user: u64,
    phase: u32,
    len: usize,
    signatures: Vec<Signature>,
}

impl Codebook {
    /// Regenerates the codebook hashed from `(seed, user, phase, message)`.
    pub fn generate(
        seed: u64,
        user: u64,
        phase: u32,
        messages: u64,
        len: usize,
        hashes: usize,
    ) -> Result<Self> {
        if messages == 0 {
            return Err(Error::Parameter("a codebook needs at least one message".into()));
        }
        let signatures = (0..messages)
            .map(|m| Signature::from_hash(len, hashes, &HashSpec::new(seed, Identity::new(user, phase, m))))
            .collect::<Result<_>>()?;
        Ok(Codebook {
            user,
            phase,
            len,
            signatures,
        })
    }

    /// Hand-built codebook; message `i` is `signatures[i]`.
    pub fn from_signatures(user: u64, phase: u32, signatures: Vec<Signature>) -> Result<Self> {
        let len = signatures
            .first()
            .ok_or_else(|| Error::Parameter("a codebook needs at least one message".into()))?
            .len();
        if let Some(s) = signatures.iter().find(|s| s.len() != len) {
            return Err(Error::Dimension {
                left: len,
                right: s.len(),
            });
        }
        Ok(Codebook {
            user,
            phase,
            len,
            signatures,
        })
    }

    pub fn user(&self) -> u64 {
        self.user
    }

    pub fn phase(&self) -> u32 {
        self.phase
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.signatures.is_empty()
    }

    pub fn messages(&self) -> u64 {
        self.signatures.len() as u64
    }

    pub fn signature(&self, message: u64) -> Option<&Signature> {
        self.signatures.get(message as usize)
    }

    /// Messages whose filter is contained in `y`, plus the number of hash
    /// positions probed with early exit.
    pub fn contained(&self, y: &BloomFilter) -> Result<(Vec<u64>, u64)> {
        if y.len() != self.len {
            return Err(Error::Dimension {
                left: y.len(),
                right: self.len,
            });
        }
        let mut hits = Vec::new();
        let mut probes = 0u64;
        for (m, s) in self.signatures.iter().enumerate() {
            let c = Containment::probe(y, s.positions().iter().copied());
            probes += c.hashes_checked as u64;
            if c.verdict {
                hits.push(m as u64);
            }
        }
        Ok((hits, probes))
    }
}

fn declare(hits: &[u64]) -> Option<Declared> {
    match hits {
        [] => None,
        [m] => Some(Declared::Message(*m)),
        _ => Some(Declared::Ambiguous),
    }
}

/// Per-user containment decoding: each user's declared message is its unique
/// contained message, or an ambiguity flag when several are contained.
pub fn decode_per_user(y: &BloomFilter, codebooks: &[Codebook]) -> Result<DecodeOutcome> {
    let mut out = DecodeOutcome::default();
    for cb in codebooks {
        let (hits, probes) = cb.contained(y)?;
        out.hash_count_total += probes;
        if let Some(d) = declare(&hits) {
            out.declared.insert(cb.user(), d);
        }
    }
    Ok(out)
}

/// Every message tuple, one message per codebook in order, whose
/// superposition equals `y` exactly.
pub fn joint_decode(y: &BloomFilter, codebooks: &[Codebook]) -> Result<Vec<Vec<u64>>> {
    let tuples = codebooks
        .iter()
        .try_fold(1u128, |acc, cb| acc.checked_mul(cb.messages() as u128))
        .unwrap_or(u128::MAX);
    if tuples > JOINT_DECODE_GUARD {
        return Err(Error::Resource(format!(
            "joint decoding would enumerate {tuples} tuples (limit {JOINT_DECODE_GUARD})"
        )));
    }
    // Components of a matching tuple are necessarily contained in y.
    let mut options = Vec::with_capacity(codebooks.len());
    for cb in codebooks {
        let (hits, _) = cb.contained(y)?;
        let filters: Vec<(u64, BloomFilter)> = hits
            .into_iter()
            .map(|m| (m, cb.signatures[m as usize].to_filter()))
            .collect();
        options.push(filters);
    }
    let mut found = Vec::new();
    let mut stack = Vec::with_capacity(codebooks.len());
    search(y, &options, BloomFilter::zeros(y.len()), &mut stack, &mut found);
    Ok(found)
}

fn search(
    y: &BloomFilter,
    options: &[Vec<(u64, BloomFilter)>],
    acc: BloomFilter,
    stack: &mut Vec<u64>,
    found: &mut Vec<Vec<u64>>,
) {
    let Some((first, rest)) = options.split_first() else {
        if acc == *y {
            found.push(stack.clone());
        }
        return;
    };
    for (m, f) in first {
        let mut next = acc.clone();
        next.or_assign(f).expect("lengths checked");
        stack.push(*m);
        search(y, rest, next, stack, found);
        stack.pop();
    }
}

/// Result of encoding: the received array and hash evaluations spent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub y: BloomFilter,
    pub hash_count: u64,
}

pub(crate) fn superpose_hashed(
    len: usize,
    hashes: usize,
    specs: impl IntoIterator<Item = HashSpec>,
) -> Encoded {
    let mut y = BloomFilter::zeros(len);
    let mut hash_count = 0;
    for spec in specs {
        for p in spec.positions(len, hashes) {
            y.set(p);
        }
        hash_count += hashes as u64;
    }
    Encoded { y, hash_count }
}

/// Fixed-population scheme: all `N` users transmit one of `M` messages with
/// `(L, K)` Bloom filter codewords, decoded per user by containment.
#[derive(Debug, Clone, PartialEq)]
pub struct MacScheme {
    params: MacParams,
    seed: u64,
}

pub(crate) const MAC_PHASE: u32 = 0;

impl MacScheme {
    pub fn new(params: MacParams, seed: u64) -> Self {
        MacScheme { params, seed }
    }

    pub fn params(&self) -> &MacParams {
        &self.params
    }

    fn spec(&self, user: u64, message: u64) -> HashSpec {
        HashSpec::new(self.seed, Identity::new(user, MAC_PHASE, message))
    }

    pub fn codebook(&self, user: u64) -> Result<Codebook> {
        let m = self.params.messages.ok_or_else(|| {
            Error::Resource(format!(
                "codebook of 2^{:.1} messages cannot be materialized",
                self.params.log2_messages
            ))
        })?;
        Codebook::generate(self.seed, user, MAC_PHASE, m, self.params.len, self.params.hashes)
    }

    pub fn codebooks(&self) -> Result<Vec<Codebook>> {
        (0..self.params.users).map(|u| self.codebook(u)).collect()
    }

    pub fn encode(&self, pattern: &ActivityPattern) -> Encoded {
        superpose_hashed(
            self.params.len,
            self.params.hashes,
            pattern.messages.iter().map(|(&u, &m)| self.spec(u, m)),
        )
    }

    /// Per-user containment decoding of `y`.
    ///
    /// When the codebooks are small enough they are regenerated and searched
    /// and `truth` is ignored. Otherwise the untransmitted codewords, which
    /// are independent of `y`, are sampled lazily: the transmitted codeword of
    /// each user is probed and counted, and the user's remaining `M - 1`
    /// messages are all excluded with probability `(1 - (w/L)^K)^(M-1)`,
    /// which is the exact law of the explicit decoder given `y`.
    pub fn decode(&self, y: &BloomFilter, truth: &ActivityPattern) -> Result<DecodeOutcome> {
        if self.params.explicit() {
            return decode_per_user(y, &self.codebooks()?);
        }
        let MacParams { len, hashes, .. } = self.params;
        let t = false_containment(y.weight(), len, hashes);
        let p_clear = pow_one_minus(t, self.params.messages_f64() - 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(mix_pair(self.seed, SAMPLED_STREAM));
        let mut out = DecodeOutcome::default();
        for (&user, &sent) in &truth.messages {
            let c = Containment::probe(y, self.spec(user, sent).positions(len, hashes));
            out.hash_count_total += c.hashes_checked as u64;
            if !c.verdict {
                continue;
            }
            let d = if rng.random::<f64>() < p_clear {
                Declared::Message(sent)
            } else {
                Declared::Ambiguous
            };
            out.declared.insert(user, d);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::success_prob_exact;
    use crate::schemes::{classify, or_channel, Mode, Scenario};

    fn sig(len: usize, pos: &[usize]) -> Signature {
        Signature::new(len, pos.to_vec()).unwrap()
    }

    #[test]
    fn hand_built_joint_ambiguity() {
        let u1 = Codebook::from_signatures(0, 0, vec![sig(4, &[0]), sig(4, &[1])]).unwrap();
        let u2 = Codebook::from_signatures(1, 0, vec![sig(4, &[0, 1]), sig(4, &[2])]).unwrap();
        let y = or_channel(4, &[sig(4, &[0]).to_filter(), sig(4, &[0, 1]).to_filter()]).unwrap();
        assert_eq!(y.to_bit_string(), "1100");
        let mut tuples = joint_decode(&y, &[u1.clone(), u2.clone()]).unwrap();
        tuples.sort();
        assert_eq!(tuples, vec![vec![0, 0], vec![1, 0]]);

        let per_user = decode_per_user(&y, &[u1, u2]).unwrap();
        assert_eq!(per_user.declared[&0], Declared::Ambiguous);
        assert_eq!(per_user.declared[&1], Declared::Message(0));
    }

    #[test]
    fn codebook_checks() {
        assert!(Codebook::from_signatures(0, 0, vec![]).is_err());
        assert!(Codebook::from_signatures(0, 0, vec![sig(4, &[0]), sig(5, &[0])]).is_err());
        assert!(Codebook::generate(1, 0, 0, 0, 8, 2).is_err());
        let a = Codebook::generate(9, 3, 0, 5, 16, 3).unwrap();
        assert_eq!(a, Codebook::generate(9, 3, 0, 5, 16, 3).unwrap());
        assert_eq!(a.messages(), 5);
        assert!(a.contained(&BloomFilter::zeros(15)).is_err());
    }

    #[test]
    fn joint_guard() {
        let cbs: Vec<Codebook> = (0..3)
            .map(|u| Codebook::generate(0, u, 0, 101, 8, 1).unwrap())
            .collect();
        assert!(matches!(
            joint_decode(&BloomFilter::zeros(8), &cbs),
            Err(Error::Resource(_))
        ));
    }

    fn run_mac(s: &Scenario, trial: u64) -> (ActivityPattern, Encoded, DecodeOutcome, Vec<Codebook>) {
        let pattern = s.sampler(Mode::Mac).unwrap().sample(trial);
        let scheme = s.mac_scheme(trial.wrapping_mul(0x9E37)).unwrap();
        let enc = scheme.encode(&pattern);
        let out = scheme.decode(&enc.y, &pattern).unwrap();
        (pattern, enc, out, scheme.codebooks().unwrap())
    }

    #[test]
    fn single_user_single_message() {
        let s = Scenario::mac(1, 1, 8, 3, 0);
        for t in 0..100 {
            let (p, _, out, _) = run_mac(&s, t);
            assert_eq!(classify(&p, &out, true), None);
        }
    }

    #[test]
    fn encode_matches_channel_of_codewords() {
        let s = Scenario::mac(3, 4, 16, 3, 0);
        for t in 0..50 {
            let (p, enc, out, cbs) = run_mac(&s, t);
            let inputs: Vec<BloomFilter> = p
                .messages
                .iter()
                .map(|(&u, &m)| cbs[u as usize].signature(m).unwrap().to_filter())
                .collect();
            assert_eq!(or_channel(16, &inputs).unwrap(), enc.y);
            assert_eq!(enc.hash_count, 3 * 3);
            // no-miss and joint membership
            for (&u, &m) in &p.messages {
                assert!(cbs[u as usize].contained(&enc.y).unwrap().0.contains(&m));
                assert!(out.declared.contains_key(&u));
            }
            let truth: Vec<u64> = p.messages.values().copied().collect();
            assert!(joint_decode(&enc.y, &cbs).unwrap().contains(&truth));
        }
    }

    #[test]
    fn per_user_rate_matches_exact() {
        let s = Scenario::mac(2, 2, 4, 2, 0);
        let trials = 200_000u64;
        let ok = (0..trials)
            .filter(|&t| {
                let (p, _, out, _) = run_mac(&s, t);
                classify(&p, &out, true).is_none()
            })
            .count() as f64;
        let q = success_prob_exact(2, 2, 4, 2).unwrap();
        let se = (q * (1.0 - q) / trials as f64).sqrt();
        assert!((ok / trials as f64 - q).abs() < 3.0 * se, "{} vs {q}", ok / trials as f64);
    }

    #[test]
    fn sampled_decoder_matches_exact() {
        // Force the lazy path on a configuration with a known answer.
        let params = MacParams {
            users: 3,
            len: 12,
            hashes: 3,
            messages: None,
            log2_messages: 1.0,
        };
        let trials = 100_000u64;
        let mut ok = 0u64;
        for t in 0..trials {
            let scheme = MacScheme::new(params, mix_pair(t, 1));
            let pattern = ActivityPattern {
                messages: (0..3).map(|u| (u, 0)).collect(),
            };
            let enc = scheme.encode(&pattern);
            let out = scheme.decode(&enc.y, &pattern).unwrap();
            ok += classify(&pattern, &out, true).is_none() as u64;
        }
        let q = success_prob_exact(3, 2, 12, 3).unwrap();
        let se = (q * (1.0 - q) / trials as f64).sqrt();
        let f = ok as f64 / trials as f64;
        assert!((f - q).abs() < 3.0 * se, "{f} vs {q}");
    }
}
