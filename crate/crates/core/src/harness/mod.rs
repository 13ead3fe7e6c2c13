//! Seeded Monte Carlo runner: trial execution, summaries with Wilson
//! intervals and analytic comparisons, parameter sweeps and persistence.

mod persist;
mod summary;
mod sweep;
mod trials;

pub use persist::{load, persist, records_csv, Loaded, Persisted, SummaryDocument};
pub use summary::{wilson_interval, CauseCounts, Summary, Z95};
pub use sweep::{run_sweep, Axis, SweepRow};
pub use trials::{
    fingerprint, run_trials, run_trials_with, trial_seed, Execution, RunOutput, TrialRecord,
};
