//! Sweep configuration files.
//!
//! ```toml
//! mode = "ar"
//! trials = 1000
//! seed = 7
//!
//! [scenario]
//! beta = 0.5
//! omega_a = 1.6
//!
//! [sweep.N]
//! values = [1000, 10000, 100000]
//!
//! [sweep.omega_a]
//! values = [0.8, 1.2, 1.6, 2.0]
//! ```
//!
//! `[scenario]` takes any scenario field; missing ones use defaults. Each
//! `[sweep.<axis>]` section is run separately against the base scenario.
//! Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use ormac::harness::Axis;
use ormac::schemes::{Mode, Scenario};
use ormac::Error;
use serde::Deserialize;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub mode: Option<Mode>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub scenario: Scenario,
    #[serde(default)]
    pub sweep: BTreeMap<String, AxisValues>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisValues {
    pub values: Vec<f64>,
}

impl SweepFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Axes in file order of their names, with their values.
    pub fn axes(&self) -> Result<Vec<(Axis, Vec<f64>)>, Error> {
        self.sweep
            .iter()
            .map(|(name, v)| Ok((name.parse::<Axis>()?, v.values.clone())))
            .collect()
    }
}
