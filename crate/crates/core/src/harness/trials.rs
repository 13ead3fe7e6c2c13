use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Summary;
use crate::bloom::{mix64, mix_pair};
use crate::schemes::{
    classify, codebook_seed, ActivityPattern, ActivitySampler, ErrorCause, MacParams, Mode,
    Scenario,
};
use crate::analysis::{PhaseParams, TwoPhaseConfig};
use crate::{Error, Result};

const TRIAL_STREAM: u64 = 0x5452_4941_4C53_4545;

/// Seed of trial `index` under `master`. Depends only on the pair, so trials
/// can run in any order.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    mix_pair(mix64(master ^ TRIAL_STREAM), index)
}

/// Stable 64-bit digest of a scenario, rendered as 16 hex digits.
pub fn fingerprint(scenario: &Scenario) -> String {
    let text = toml::to_string(scenario).expect("scenario serializes");
    let h = text
        .bytes()
        .fold(mix64(text.len() as u64), |h, b| mix_pair(h, b as u64));
    format!("{h:016x}")
}

/// One trial, in the column order of the records file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub seed: u64,
    pub mode: Mode,
    #[serde(rename = "N")]
    pub users: u64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(rename = "L1")]
    pub len1: usize,
    #[serde(rename = "K1")]
    pub hashes1: usize,
    /// Zero outside the two-phase scheme.
    #[serde(rename = "L2")]
    pub len2: usize,
    #[serde(rename = "K2")]
    pub hashes2: usize,
    #[serde(rename = "M")]
    pub messages: f64,
    #[serde(rename = "a")]
    pub active: u64,
    pub w1: usize,
    pub w2: usize,
    pub candidate_list_size: u64,
    pub encode_hashes: u64,
    pub decode_hashes: u64,
    pub success: bool,
    /// Present iff `success` is false.
    pub error_cause: Option<ErrorCause>,
}

/// How trials are scheduled. Results do not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Records and their summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub mode: Mode,
    pub fingerprint: String,
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

enum Prepared {
    Mac(MacParams),
    Ar(PhaseParams),
    Mt(TwoPhaseConfig),
}

struct Plan<'a> {
    scenario: &'a Scenario,
    mode: Mode,
    sampler: ActivitySampler,
    prepared: Prepared,
}

impl Plan<'_> {
    fn run(&self, index: u64) -> Result<TrialRecord> {
        let s = self.scenario;
        let seed = trial_seed(s.seed, index);
        let pattern: ActivityPattern = self.sampler.sample(seed);
        let cb = codebook_seed(seed);
        let mut rec = TrialRecord {
            trial_index: index,
            seed,
            mode: self.mode,
            users: s.users,
            beta: s.beta,
            gamma: s.gamma,
            len1: 0,
            hashes1: 0,
            len2: 0,
            hashes2: 0,
            messages: 1.0,
            active: pattern.active_count() as u64,
            w1: 0,
            w2: 0,
            candidate_list_size: 0,
            encode_hashes: 0,
            decode_hashes: 0,
            success: false,
            error_cause: None,
        };
        let outcome = match &self.prepared {
            Prepared::Mac(p) => {
                let scheme = crate::schemes::MacScheme::new(*p, cb);
                (rec.len1, rec.hashes1, rec.messages) = (p.len, p.hashes, p.messages_f64());
                let enc = scheme.encode(&pattern);
                rec.w1 = enc.y.weight();
                rec.encode_hashes = enc.hash_count;
                scheme.decode(&enc.y, &pattern)?
            }
            Prepared::Ar(p) => {
                let scheme = crate::schemes::ActivityScheme::new(s.users, *p, cb);
                (rec.len1, rec.hashes1) = (p.len, p.hashes);
                let enc = scheme.encode(&pattern);
                rec.w1 = enc.y.weight();
                rec.encode_hashes = enc.hash_count;
                scheme.decode(&enc.y)
            }
            Prepared::Mt(c) => {
                let scheme = crate::schemes::TwoPhaseScheme::new(*c, cb);
                (rec.len1, rec.hashes1) = (c.phase1.len, c.phase1.hashes);
                (rec.len2, rec.hashes2) = (c.phase2.len, c.phase2.hashes);
                rec.messages = c.messages as f64;
                let [e1, e2] = scheme.encode(&pattern);
                (rec.w1, rec.w2) = (e1.y.weight(), e2.y.weight());
                rec.encode_hashes = e1.hash_count + e2.hash_count;
                scheme.decode(&e1.y, &e2.y)?
            }
        };
        rec.candidate_list_size = outcome.candidate_list_size;
        rec.decode_hashes = outcome.hash_count_total;
        rec.error_cause = classify(&pattern, &outcome, self.mode == Mode::Mac);
        rec.success = rec.error_cause.is_none();
        Ok(rec)
    }
}

/// Runs `trials` trials of `mode` in parallel. See [`run_trials_with`].
pub fn run_trials(scenario: &Scenario, mode: Mode, trials: u64) -> Result<RunOutput> {
    run_trials_with(scenario, mode, trials, Execution::Parallel)
}

/// Runs `trials` independent trials seeded from `scenario.seed`. Records come
/// back in trial order and the summary is reduced in that order, so output
/// is identical under every execution schedule.
pub fn run_trials_with(
    scenario: &Scenario,
    mode: Mode,
    trials: u64,
    execution: Execution,
) -> Result<RunOutput> {
    if trials == 0 {
        return Err(Error::Parameter("trial count must be at least 1".into()));
    }
    let sampler = scenario.sampler(mode)?;
    let prepared = match mode {
        Mode::Mac => Prepared::Mac(scenario.mac_params()?),
        Mode::Ar => Prepared::Ar(scenario.ar_params()?),
        Mode::Mt => Prepared::Mt(scenario.mt_config()?),
    };
    let plan = Plan {
        scenario,
        mode,
        sampler,
        prepared,
    };
    let records: Vec<TrialRecord> = match execution {
        Execution::Serial => (0..trials).map(|i| plan.run(i)).collect::<Result<_>>()?,
        Execution::Parallel => (0..trials)
            .into_par_iter()
            .map(|i| plan.run(i))
            .collect::<Result<_>>()?,
    };
    let mut summary = Summary::from_records(mode, &records)?;
    summary.compare(scenario, mode)?;
    Ok(RunOutput {
        mode,
        fingerprint: fingerprint(scenario),
        records,
        summary,
    })
}
