use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{run_trials_with, Execution, RunOutput};
use crate::analysis::feasibility_mt;
use crate::schemes::{Mode, Scenario};
use crate::{Error, Result};

/// Scenario parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "N")]
    Users,
    #[serde(rename = "beta")]
    Beta,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "kappa")]
    Kappa,
    #[serde(rename = "kappa1")]
    Kappa1,
    #[serde(rename = "kappa2")]
    Kappa2,
    #[serde(rename = "omega_a")]
    OmegaA,
    #[serde(rename = "L")]
    Len,
}

impl Axis {
    pub const ALL: [Axis; 8] = [
        Axis::Users,
        Axis::Beta,
        Axis::Gamma,
        Axis::Kappa,
        Axis::Kappa1,
        Axis::Kappa2,
        Axis::OmegaA,
        Axis::Len,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Users => "N",
            Axis::Beta => "beta",
            Axis::Gamma => "gamma",
            Axis::Kappa => "kappa",
            Axis::Kappa1 => "kappa1",
            Axis::Kappa2 => "kappa2",
            Axis::OmegaA => "omega_a",
            Axis::Len => "L",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &Scenario, value: f64) -> Result<Scenario> {
        let count = |name: &str| -> Result<u64> {
            if value >= 1.0 && value.fract() == 0.0 && value < 2f64.powi(53) {
                Ok(value as u64)
            } else {
                Err(Error::Parameter(format!(
                    "{name} must be a positive integer, got {value}"
                )))
            }
        };
        let mut s = base.clone();
        match self {
            Axis::Users => s.users = count("N")?,
            Axis::Beta => s.beta = value,
            Axis::Gamma => s.gamma = value,
            Axis::Kappa => s.kappa = value,
            Axis::Kappa1 => s.kappa1 = value,
            Axis::Kappa2 => s.kappa2 = value,
            Axis::OmegaA => s.omega_a = value,
            Axis::Len => s.len = Some(count("L")? as usize),
        }
        Ok(s)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown sweep axis {s:?} (expected one of N, beta, gamma, kappa, kappa1, kappa2, omega_a, L)"
                ))
            })
    }
}

/// One point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: Axis,
    pub value: f64,
    pub scenario: Scenario,
    /// Two-phase only: whether `(kappa1, kappa2)` meets the sufficient
    /// feasibility conditions.
    pub feasible: Option<bool>,
    pub output: RunOutput,
}

impl SweepRow {
    /// `"feasible"`, `"infeasible"` or `"-"`.
    pub fn feasibility_label(&self) -> &'static str {
        match self.feasible {
            Some(true) => "feasible",
            Some(false) => "infeasible",
            None => "-",
        }
    }
}

/// One [`run_trials_with`] per value, in order. Every derived scenario is
/// validated before any trial runs.
pub fn run_sweep(
    base: &Scenario,
    axis: Axis,
    values: &[f64],
    mode: Mode,
    trials: u64,
    execution: Execution,
) -> Result<Vec<SweepRow>> {
    if axis == Axis::Len && mode != Mode::Mac {
        return Err(Error::Parameter(
            "the L axis applies to fixed-population mode only".into(),
        ));
    }
    let scenarios = values
        .iter()
        .map(|&v| {
            let s = axis.apply(base, v)?;
            s.validate(mode)?;
            Ok((v, s))
        })
        .collect::<Result<Vec<_>>>()?;
    scenarios
        .into_iter()
        .map(|(value, scenario)| {
            let output = run_trials_with(&scenario, mode, trials, execution)?;
            let feasible = (mode == Mode::Mt).then(|| {
                feasibility_mt(scenario.kappa1, scenario.kappa2, scenario.beta, scenario.gamma)
            });
            Ok(SweepRow {
                axis,
                value,
                scenario,
                feasible,
                output,
            })
        })
        .collect()
}
