use super::activity::{recognize, signature_spec};
use super::mac::superpose_hashed;
use super::{ActivityPattern, DecodeOutcome, Declared, Encoded};
use crate::analysis::TwoPhaseConfig;
use crate::bloom::{BloomFilter, Containment, HashSpec, Identity};
use crate::{Error, Result};

pub(crate) const MESSAGE_PHASE: u32 = 2;

/// Two-phase message transmission: phase 1 sends activity signatures, phase
/// 2 sends message codewords; the receiver lists phase-1 candidates and
/// resolves them with their contained phase-2 messages.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhaseScheme {
    config: TwoPhaseConfig,
    seed: u64,
}

impl TwoPhaseScheme {
    pub fn new(config: TwoPhaseConfig, seed: u64) -> Self {
        TwoPhaseScheme { config, seed }
    }

    pub fn config(&self) -> &TwoPhaseConfig {
        &self.config
    }

    fn message_spec(&self, user: u64, message: u64) -> HashSpec {
        HashSpec::new(self.seed, Identity::new(user, MESSAGE_PHASE, message))
    }

    /// `[phase 1, phase 2]` received arrays.
    pub fn encode(&self, pattern: &ActivityPattern) -> [Encoded; 2] {
        let TwoPhaseConfig { phase1, phase2, .. } = self.config;
        [
            superpose_hashed(
                phase1.len,
                phase1.hashes,
                pattern.active().map(|u| signature_spec(self.seed, u)),
            ),
            superpose_hashed(
                phase2.len,
                phase2.hashes,
                pattern.messages.iter().map(|(&u, &m)| self.message_spec(u, m)),
            ),
        ]
    }

    /// Candidates are the users whose signature is contained in `y1`. A
    /// candidate is declared active with message `m` if `m` is its only
    /// message contained in `y2`, inactive if none is, and ambiguous
    /// otherwise.
    pub fn decode(&self, y1: &BloomFilter, y2: &BloomFilter) -> Result<DecodeOutcome> {
        let TwoPhaseConfig {
            users,
            messages,
            phase1,
            phase2,
        } = self.config;
        for (y, p) in [(y1, phase1), (y2, phase2)] {
            if y.len() != p.len {
                return Err(Error::Dimension {
                    left: y.len(),
                    right: p.len,
                });
            }
        }
        let mut candidates = Vec::new();
        let probes = recognize(y1, users, phase1, self.seed, |u| candidates.push(u));
        let mut out = DecodeOutcome {
            candidate_list_size: candidates.len() as u64,
            hash_count_total: probes,
            ..DecodeOutcome::default()
        };
        for user in candidates {
            let mut found = None;
            for m in 0..messages {
                let spec = self.message_spec(user, m);
                let c = Containment::probe(y2, spec.positions(phase2.len, phase2.hashes));
                out.hash_count_total += c.hashes_checked as u64;
                if c.verdict {
                    found = match found {
                        None => Some(Declared::Message(m)),
                        Some(_) => Some(Declared::Ambiguous),
                    };
                }
            }
            if let Some(d) = found {
                out.declared.insert(user, d);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::LN_2;

    use super::*;
    use crate::analysis::two_phase_q;
    use crate::schemes::{classify, codebook_seed, ErrorCause, Mode, Scenario};

    fn scenario(users: u64) -> Scenario {
        let (beta, gamma) = (0.5, 0.5);
        Scenario {
            users,
            beta,
            gamma,
            kappa1: 1.1 * (1.0 - beta) / LN_2,
            kappa2: 1.1 * (beta + gamma) / LN_2,
            ..Scenario::default()
        }
    }

    #[test]
    fn silence() {
        let s = scenario(1000);
        let scheme = s.mt_scheme(1).unwrap();
        let [a, b] = scheme.encode(&ActivityPattern::default());
        assert!(a.y.is_all_zero() && b.y.is_all_zero());
        let out = scheme.decode(&a.y, &b.y).unwrap();
        assert_eq!(out.candidate_list_size, 0);
        assert!(out.declared.is_empty());
        assert!(scheme.decode(&BloomFilter::zeros(a.y.len() + 1), &b.y).is_err());
    }

    #[test]
    fn phase_one_ignores_messages() {
        let s = scenario(1000);
        let scheme = s.mt_scheme(5).unwrap();
        let p = s.sampler(Mode::Mt).unwrap().sample(11);
        let mut q = p.clone();
        for m in q.messages.values_mut() {
            *m = (*m + 1) % s.message_count();
        }
        let [a1, b1] = scheme.encode(&p);
        let [a2, b2] = scheme.encode(&q);
        assert_eq!(a1.y, a2.y);
        assert_ne!(b1.y, b2.y);
        let c = scheme.config();
        assert_eq!(
            a1.hash_count + b1.hash_count,
            p.active_count() as u64 * (c.phase1.hashes + c.phase2.hashes) as u64
        );
    }

    #[test]
    fn no_miss_in_either_phase() {
        let s = scenario(3000);
        let sampler = s.sampler(Mode::Mt).unwrap();
        for t in 0..30 {
            let scheme = s.mt_scheme(codebook_seed(t)).unwrap();
            let p = sampler.sample(t);
            let [a, b] = scheme.encode(&p);
            let out = scheme.decode(&a.y, &b.y).unwrap();
            assert_ne!(classify(&p, &out, false), Some(ErrorCause::Phase1Miss));
            assert!(out.candidate_list_size >= p.active_count() as u64);
            for u in p.active() {
                assert!(out.declared.contains_key(&u));
            }
        }
    }

    #[test]
    fn conditional_success_matches_q() {
        // Small arrays so that both error causes occur often.
        let s = Scenario {
            users: 12,
            active_count: Some(2),
            active_mean: Some(2),
            messages: Some(3),
            kappa1: 0.6,
            kappa2: 0.7,
            ..scenario(12)
        };
        let cfg = s.mt_config().unwrap();
        let sampler = s.sampler(Mode::Mt).unwrap();
        let trials = 40_000u64;
        let (mut ok, mut expect) = (0u64, 0.0);
        let mut var = 0.0;
        for t in 0..trials {
            let scheme = s.mt_scheme(codebook_seed(t)).unwrap();
            let p = sampler.sample(t);
            let [a, b] = scheme.encode(&p);
            let q = two_phase_q(&cfg, 2, a.y.weight(), b.y.weight()).unwrap();
            expect += q;
            var += q * (1.0 - q);
            let out = scheme.decode(&a.y, &b.y).unwrap();
            ok += classify(&p, &out, false).is_none() as u64;
        }
        let diff = ok as f64 - expect;
        assert!(diff.abs() < 3.0 * var.sqrt(), "successes {ok} vs expected {expect}");
    }
}
