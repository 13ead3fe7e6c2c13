use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ActivityPattern;
use crate::bloom::BloomFilter;
use crate::{Error, Result};

/// Noiseless OR channel: positionwise OR of every input. Silent users are
/// simply left out; an empty input list yields the all-zero array.
pub fn or_channel(len: usize, inputs: &[BloomFilter]) -> Result<BloomFilter> {
    let mut y = BloomFilter::zeros(len);
    for x in inputs {
        y.or_assign(x)?;
    }
    Ok(y)
}

/// What the receiver concluded about one declared user.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Declared {
    Message(u64),
    /// More than one message of this user was contained in the array.
    Ambiguous,
}

/// Receiver output for one trial.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DecodeOutcome {
    /// Declared user -> declared message or ambiguity flag. The key set is
    /// the declared active set.
    pub declared: BTreeMap<u64, Declared>,
    /// Phase-1 candidate count; zero outside the two-phase scheme.
    pub candidate_list_size: u64,
    pub hash_count_total: u64,
}

impl DecodeOutcome {
    pub fn declared_active(&self) -> impl Iterator<Item = u64> + '_ {
        self.declared.keys().copied()
    }
}

/// Why a trial failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCause {
    /// An active user was not recognized. Cannot happen on a noiseless
    /// channel; tracked so the no-miss property is auditable.
    Phase1Miss,
    /// An active user had an untransmitted message falsely contained.
    ActiveFalseMessage,
    /// An inactive user was declared active.
    InactiveFalseAccept,
    /// Fixed-population decoding found several contained messages for a user.
    Ambiguity,
}

impl ErrorCause {
    pub const ALL: [ErrorCause; 4] = [
        ErrorCause::Phase1Miss,
        ErrorCause::ActiveFalseMessage,
        ErrorCause::InactiveFalseAccept,
        ErrorCause::Ambiguity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCause::Phase1Miss => "phase1-miss",
            ErrorCause::ActiveFalseMessage => "active-false-message",
            ErrorCause::InactiveFalseAccept => "inactive-false-accept",
            ErrorCause::Ambiguity => "ambiguity",
        }
    }
}

impl fmt::Display for ErrorCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ErrorCause {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ErrorCause::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown error cause {s:?}")))
    }
}

/// Compares a decode against the truth. `None` means exact recovery.
///
/// A failed trial gets exactly one cause, checked in the order: missed
/// active user, active user with a wrong or ambiguous message, inactive
/// user declared active. With `fixed_population` set, an ambiguous active
/// user is reported as [`ErrorCause::Ambiguity`] instead.
pub fn classify(
    truth: &ActivityPattern,
    outcome: &DecodeOutcome,
    fixed_population: bool,
) -> Option<ErrorCause> {
    let mut wrong_message = None;
    for (user, &sent) in &truth.messages {
        match outcome.declared.get(user) {
            None => return Some(ErrorCause::Phase1Miss),
            Some(Declared::Message(m)) if *m == sent => {}
            Some(Declared::Ambiguous) if fixed_population => {
                wrong_message.get_or_insert(ErrorCause::Ambiguity);
            }
            Some(_) => wrong_message = Some(ErrorCause::ActiveFalseMessage),
        }
    }
    if wrong_message.is_some() {
        return wrong_message;
    }
    if outcome.declared.len() > truth.messages.len() {
        return Some(ErrorCause::InactiveFalseAccept);
    }
    None
}
