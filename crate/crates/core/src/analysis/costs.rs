use std::f64::consts::LN_2;

use crate::{Error, Result};

/// Interval `[lower, upper]` on a normalized cost (activity recognition or
/// message transmission), in units of `N_a log2 N` channel uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBounds {
    pub lower: f64,
    pub upper: f64,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain("beta", beta, "(0, 1)"));
    }
    Ok(())
}

/// Activity recognition: `1 - beta <= cost <= 1/ln 2`.
pub fn cost_bounds_ar(beta: f64) -> Result<CostBounds> {
    check_beta(beta)?;
    Ok(CostBounds {
        lower: 1.0 - beta,
        upper: 1.0 / LN_2,
    })
}

/// Message transmission: `1 - beta + gamma <= cost <= (1 + gamma)/ln 2`.
pub fn cost_bounds_mt(beta: f64, gamma: f64) -> Result<CostBounds> {
    check_beta(beta)?;
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::domain("gamma", gamma, "[0, inf)"));
    }
    Ok(CostBounds {
        lower: 1.0 - beta + gamma,
        upper: (1.0 + gamma) / LN_2,
    })
}
