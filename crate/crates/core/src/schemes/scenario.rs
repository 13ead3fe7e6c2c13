use std::collections::BTreeMap;
use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{PhaseParams, TwoPhaseConfig};
use crate::bloom::mix_pair;
use crate::{Error, Result};

use super::{ActivityScheme, MacScheme, TwoPhaseScheme};

const ACTIVITY_STREAM: u64 = 0x4143_5449_5649_5459;
const CODEBOOK_STREAM: u64 = 0x434F_4445_424F_4F4B;

/// Largest `N * M` for which fixed-population decoding materializes every
/// codebook; above it untransmitted codewords are sampled lazily.
pub const EXPLICIT_CODEBOOK_LIMIT: u128 = 1 << 20;

/// Which scheme a trial exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Fixed population, everybody transmits, per-user containment decoding.
    Mac,
    /// Activity recognition.
    Ar,
    /// Two-phase message transmission.
    Mt,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Mac => "mac",
            Mode::Ar => "ar",
            Mode::Mt => "mt",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mac" => Ok(Mode::Mac),
            "ar" => Ok(Mode::Ar),
            "mt" => Ok(Mode::Mt),
            other => Err(Error::Parameter(format!(
                "unknown mode {other:?} (expected mac, ar or mt)"
            ))),
        }
    }
}

/// Full description of an experiment.
///
/// Many-access quantities are derived with unit constants:
/// `N_a = round(active_scale N^beta)`, `M = max(1, round(message_scale N^gamma))`,
/// `L = ceil(cost N_a log2 N)` and `K = max(1, round((L / N_a) ln 2))`.
/// The `Option` fields override derived values. Missing fields take their
/// [`Default`] values when deserializing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    /// Total users `N`.
    pub users: u64,
    pub beta: f64,
    pub gamma: f64,
    pub active_scale: f64,
    pub message_scale: f64,
    /// Activity-recognition cost multiplier.
    pub omega_a: f64,
    /// Fixed-population hash density: `K = max(1, round(kappa L / N))`.
    pub kappa: f64,
    /// Two-phase cost multipliers.
    pub kappa1: f64,
    pub kappa2: f64,
    pub seed: u64,
    /// Override for the mean active count `N_a`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_mean: Option<u64>,
    /// Condition every trial on exactly this many actives.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_count: Option<u64>,
    /// Override for messages per user `M`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub messages: Option<u64>,
    /// Fixed-population sum rate in bits per channel use; sets
    /// `M = 2^(rate L / N)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    /// Fixed-population array length `L`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub len: Option<usize>,
    /// Fixed-population hash count `K`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hashes: Option<usize>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            users: 1000,
            beta: 0.5,
            gamma: 0.0,
            active_scale: 1.0,
            message_scale: 1.0,
            omega_a: 1.6,
            kappa: LN_2,
            kappa1: 1.1 * 0.5 / LN_2,
            kappa2: 1.1 * 0.5 / LN_2,
            seed: 0,
            active_mean: None,
            active_count: None,
            messages: None,
            rate: None,
            len: None,
            hashes: None,
        }
    }
}

/// Derived fixed-population parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacParams {
    pub users: u64,
    pub len: usize,
    pub hashes: usize,
    /// Integer message count when representable.
    pub messages: Option<u64>,
    pub log2_messages: f64,
}

impl MacParams {
    /// `M` as a real number.
    pub fn messages_f64(&self) -> f64 {
        match self.messages {
            Some(m) => m as f64,
            None => self.log2_messages.exp2(),
        }
    }

    /// Whether every codebook is materialized during decoding.
    pub fn explicit(&self) -> bool {
        self.messages
            .is_some_and(|m| self.users as u128 * m as u128 <= EXPLICIT_CODEBOOK_LIMIT)
    }
}

fn check_unit(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::domain(name, v, "(0, inf)"));
    }
    Ok(())
}

impl Scenario {
    /// A fixed-population scenario with explicit `(N, M, L, K)`.
    pub fn mac(users: u64, messages: u64, len: usize, hashes: usize, seed: u64) -> Self {
        Scenario {
            users,
            messages: Some(messages),
            len: Some(len),
            hashes: Some(hashes),
            seed,
            ..Scenario::default()
        }
    }

    /// Mean active count `N_a`.
    pub fn active_mean(&self) -> u64 {
        self.active_mean.unwrap_or_else(|| {
            (self.active_scale * (self.users as f64).powf(self.beta))
                .round()
                .min(self.users as f64) as u64
        })
    }

    /// Messages per user `M` in the many-access modes.
    pub fn message_count(&self) -> u64 {
        self.messages.unwrap_or_else(|| {
            (self.message_scale * (self.users as f64).powf(self.gamma))
                .round()
                .max(1.0) as u64
        })
    }

    /// `(L, K)` for a cost multiplier: `L = ceil(cost N_a log2 N)`,
    /// `K = max(1, round((L / N_a) ln 2))`.
    pub fn many_access_params(&self, cost: f64) -> Result<PhaseParams> {
        let na = self.active_mean();
        if na == 0 {
            return Err(Error::Parameter(format!(
                "mean active count rounds to 0 for N = {}",
                self.users
            )));
        }
        let na = na as f64;
        let len = (cost * na * (self.users as f64).log2()).ceil();
        if len.is_nan() || len < 1.0 {
            return Err(Error::Parameter(format!(
                "derived length {len} < 1 (N = {}, cost = {cost})",
                self.users
            )));
        }
        let hashes = (len / na * LN_2).round().max(1.0);
        Ok(PhaseParams {
            len: len as usize,
            hashes: hashes as usize,
        })
    }

    pub fn ar_params(&self) -> Result<PhaseParams> {
        self.many_access_params(self.omega_a)
    }

    pub fn mt_config(&self) -> Result<TwoPhaseConfig> {
        Ok(TwoPhaseConfig {
            users: self.users,
            messages: self.message_count(),
            phase1: self.many_access_params(self.kappa1)?,
            phase2: self.many_access_params(self.kappa2)?,
        })
    }

    pub fn mac_params(&self) -> Result<MacParams> {
        let len = self
            .len
            .ok_or_else(|| Error::Parameter("fixed-population mode needs L".into()))?;
        if len == 0 {
            return Err(Error::Parameter("L must be at least 1".into()));
        }
        let n = self.users as f64;
        let hashes = match self.hashes {
            Some(k) => k,
            None => (self.kappa * len as f64 / n).round().max(1.0) as usize,
        };
        if hashes == 0 {
            return Err(Error::Parameter("K must be at least 1".into()));
        }
        let (messages, log2_messages) = match (self.rate, self.messages) {
            (Some(_), Some(_)) => {
                return Err(Error::Parameter(
                    "give either a message count or a rate, not both".into(),
                ))
            }
            (Some(rate), None) => {
                if !(rate >= 0.0 && rate.is_finite()) {
                    return Err(Error::domain("rate", rate, "[0, inf)"));
                }
                let log2 = rate * len as f64 / n;
                if log2 <= 52.0 {
                    let m = log2.exp2().round().max(1.0) as u64;
                    (Some(m), (m as f64).log2())
                } else {
                    (None, log2)
                }
            }
            (None, _) => {
                let m = self.message_count();
                (Some(m), (m as f64).log2())
            }
        };
        Ok(MacParams {
            users: self.users,
            len,
            hashes,
            messages,
            log2_messages,
        })
    }

    /// Checks every parameter `mode` depends on.
    pub fn validate(&self, mode: Mode) -> Result<()> {
        if self.users == 0 {
            return Err(Error::Parameter("N must be at least 1".into()));
        }
        match mode {
            Mode::Mac => {
                self.mac_params()?;
            }
            Mode::Ar | Mode::Mt => {
                if !(self.beta > 0.0 && self.beta < 1.0) {
                    return Err(Error::domain("beta", self.beta, "(0, 1)"));
                }
                if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
                    return Err(Error::domain("gamma", self.gamma, "[0, inf)"));
                }
                check_unit("active_scale", self.active_scale)?;
                check_unit("message_scale", self.message_scale)?;
                if self.active_mean() > self.users {
                    return Err(Error::Parameter(format!(
                        "N_a = {} exceeds N = {}",
                        self.active_mean(),
                        self.users
                    )));
                }
                if mode == Mode::Ar {
                    check_unit("omega_a", self.omega_a)?;
                    self.ar_params()?;
                } else {
                    check_unit("kappa1", self.kappa1)?;
                    check_unit("kappa2", self.kappa2)?;
                    self.mt_config()?;
                }
            }
        }
        if let Some(a) = self.active_count {
            if a > self.users {
                return Err(Error::Parameter(format!(
                    "active count {a} exceeds N = {}",
                    self.users
                )));
            }
        }
        Ok(())
    }

    pub fn sampler(&self, mode: Mode) -> Result<ActivitySampler> {
        self.validate(mode)?;
        Ok(match mode {
            Mode::Mac => {
                let p = self.mac_params()?;
                ActivitySampler {
                    users: self.users,
                    activity: 1.0,
                    exact: Some(self.users),
                    messages: p.messages.filter(|_| p.log2_messages < 64.0),
                }
            }
            Mode::Ar | Mode::Mt => ActivitySampler {
                users: self.users,
                activity: self.active_mean() as f64 / self.users as f64,
                exact: self.active_count,
                messages: Some(if mode == Mode::Ar {
                    1
                } else {
                    self.message_count()
                }),
            },
        })
    }

    pub fn mac_scheme(&self, codebook_seed: u64) -> Result<MacScheme> {
        self.validate(Mode::Mac)?;
        Ok(MacScheme::new(self.mac_params()?, codebook_seed))
    }

    pub fn ar_scheme(&self, codebook_seed: u64) -> Result<ActivityScheme> {
        self.validate(Mode::Ar)?;
        Ok(ActivityScheme::new(self.users, self.ar_params()?, codebook_seed))
    }

    pub fn mt_scheme(&self, codebook_seed: u64) -> Result<TwoPhaseScheme> {
        self.validate(Mode::Mt)?;
        Ok(TwoPhaseScheme::new(self.mt_config()?, codebook_seed))
    }
}

/// Seed for the hash codebooks of one trial.
pub fn codebook_seed(trial_seed: u64) -> u64 {
    mix_pair(trial_seed, CODEBOOK_STREAM)
}

/// Which users are active and what they send.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActivityPattern {
    /// Active user -> message index.
    pub messages: BTreeMap<u64, u64>,
}

impl ActivityPattern {
    pub fn active(&self) -> impl Iterator<Item = u64> + '_ {
        self.messages.keys().copied()
    }

    pub fn active_count(&self) -> usize {
        self.messages.len()
    }

    pub fn is_active(&self, user: u64) -> bool {
        self.messages.contains_key(&user)
    }
}

/// Draws activity patterns.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivitySampler {
    pub users: u64,
    /// Per-user activity probability `N_a / N`.
    pub activity: f64,
    /// Condition on exactly this many actives.
    pub exact: Option<u64>,
    /// Message alphabet size; `None` draws from the full `u64` range.
    pub messages: Option<u64>,
}

impl ActivitySampler {
    /// Deterministic in `trial_seed`.
    pub fn sample(&self, trial_seed: u64) -> ActivityPattern {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_pair(trial_seed, ACTIVITY_STREAM));
        let active: Vec<u64> = match self.exact {
            Some(a) if a >= self.users => (0..self.users).collect(),
            Some(a) => {
                let mut v: Vec<u64> = index::sample(&mut rng, self.users as usize, a as usize)
                    .into_iter()
                    .map(|i| i as u64)
                    .collect();
                v.sort_unstable();
                v
            }
            None if self.activity >= 1.0 => (0..self.users).collect(),
            None => (0..self.users)
                .filter(|_| rng.random_bool(self.activity))
                .collect(),
        };
        let messages = active
            .into_iter()
            .map(|u| {
                let m = match self.messages {
                    Some(1) => 0,
                    Some(m) => rng.random_range(0..m),
                    None => rng.random(),
                };
                (u, m)
            })
            .collect();
        ActivityPattern { messages }
    }
}

/// Samples the activity pattern of trial `trial_seed` under `scenario`.
pub fn sample_activity(scenario: &Scenario, mode: Mode, trial_seed: u64) -> Result<ActivityPattern> {
    Ok(scenario.sampler(mode)?.sample(trial_seed))
}
