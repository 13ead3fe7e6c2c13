use serde::{Deserialize, Serialize};

use super::TrialRecord;
use crate::analysis::{
    ar_success_best_bound, per_user_success_exact, two_phase_success_exact,
};
use crate::schemes::{ErrorCause, Mode, Scenario};
use crate::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = (center - half).clamp(0.0, 1.0).min(p);
    let hi = (center + half).clamp(0.0, 1.0).max(p);
    (lo, hi)
}

/// Failed-trial counts per cause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CauseCounts {
    pub phase1_miss: u64,
    pub active_false_message: u64,
    pub inactive_false_accept: u64,
    pub ambiguity: u64,
}

impl CauseCounts {
    fn add(&mut self, cause: ErrorCause) {
        *match cause {
            ErrorCause::Phase1Miss => &mut self.phase1_miss,
            ErrorCause::ActiveFalseMessage => &mut self.active_false_message,
            ErrorCause::InactiveFalseAccept => &mut self.inactive_false_accept,
            ErrorCause::Ambiguity => &mut self.ambiguity,
        } += 1;
    }

    pub fn total(&self) -> u64 {
        self.phase1_miss + self.active_false_message + self.inactive_false_accept + self.ambiguity
    }
}

/// Aggregate statistics of one run.
///
/// The analytic comparison slots are evaluated conditional on the active
/// count `analytic_active`: the fixed count in conditional mode, otherwise
/// the mean `N_a` (and `N` in fixed-population mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mode: Mode,
    pub trials: u64,
    pub failures: u64,
    pub error_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub causes: CauseCounts,
    pub mean_active: f64,
    /// Mean and max of `candidate_list_size / a` over trials with `a > 0`;
    /// two-phase only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_candidate_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_candidate_ratio: Option<f64>,
    /// Total encode hashes over total active users.
    pub encode_hashes_per_active: f64,
    /// Total decode hashes over `trials * N`.
    pub decode_hashes_per_user: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic_active: Option<u64>,
    /// Exact error probability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_error: Option<f64>,
    /// Error upper bound from the concentration argument.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_error: Option<f64>,
}

impl Summary {
    /// Reduces records in the given order. Comparison slots stay empty.
    pub fn from_records(mode: Mode, records: &[TrialRecord]) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::Parameter("a summary needs at least one trial".into()))?;
        let users = first.users;
        let trials = records.len() as u64;
        let mut causes = CauseCounts::default();
        let (mut failures, mut active, mut enc, mut dec) = (0u64, 0u64, 0u64, 0u64);
        let (mut ratio_sum, mut ratio_n, mut ratio_max) = (0.0, 0u64, 0.0f64);
        for r in records {
            if let Some(c) = r.error_cause {
                causes.add(c);
            }
            failures += (!r.success) as u64;
            active += r.active;
            enc += r.encode_hashes;
            dec += r.decode_hashes;
            if mode == Mode::Mt && r.active > 0 {
                let q = r.candidate_list_size as f64 / r.active as f64;
                ratio_sum += q;
                ratio_n += 1;
                ratio_max = ratio_max.max(q);
            }
        }
        let (ci_low, ci_high) = wilson_interval(failures, trials, Z95);
        let ratios = (mode == Mode::Mt && ratio_n > 0).then_some(());
        Ok(Summary {
            mode,
            trials,
            failures,
            error_rate: failures as f64 / trials as f64,
            ci_low,
            ci_high,
            causes,
            mean_active: active as f64 / trials as f64,
            mean_candidate_ratio: ratios.map(|_| ratio_sum / ratio_n as f64),
            max_candidate_ratio: ratios.map(|_| ratio_max),
            encode_hashes_per_active: if active == 0 { 0.0 } else { enc as f64 / active as f64 },
            decode_hashes_per_user: dec as f64 / (trials as f64 * users as f64),
            analytic_active: None,
            exact_error: None,
            bound_error: None,
        })
    }

    /// Fills the analytic comparison slots for `scenario`.
    pub fn compare(&mut self, scenario: &Scenario, mode: Mode) -> Result<()> {
        match mode {
            Mode::Mac => {
                let p = scenario.mac_params()?;
                self.analytic_active = Some(p.users);
                let q = per_user_success_exact(p.users, p.messages_f64(), p.len, p.hashes)?;
                self.exact_error = Some(1.0 - q);
            }
            Mode::Ar => {
                let a = scenario.active_count.unwrap_or_else(|| scenario.active_mean());
                let p = scenario.ar_params()?;
                self.analytic_active = Some(a);
                if a > 0 {
                    let (_, b) = ar_success_best_bound(scenario.users, a, p.len, p.hashes, 200)?;
                    self.exact_error = Some(1.0 - b.exact);
                    self.bound_error = Some(1.0 - b.clamped);
                }
            }
            Mode::Mt => {
                let a = scenario.active_count.unwrap_or_else(|| scenario.active_mean());
                let cfg = scenario.mt_config()?;
                self.analytic_active = Some(a);
                self.exact_error = Some(1.0 - two_phase_success_exact(&cfg, a)?);
            }
        }
        Ok(())
    }

    /// Whether the interval contains `error`.
    pub fn covers(&self, error: f64) -> bool {
        self.ci_low <= error && error <= self.ci_high
    }

    /// Binomial standard error of the error rate.
    pub fn std_error(&self) -> f64 {
        (self.error_rate * (1.0 - self.error_rate) / self.trials as f64).sqrt()
    }
}
