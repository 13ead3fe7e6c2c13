use std::f64::consts::LN_2;

use super::binary_entropy;
use crate::{Error, Result};

/// Per-user rates and their sum, in bits per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    rates: Vec<f64>,
    sum: f64,
}

impl RatePoint {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if let Some(&r) = rates.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::domain("rate", r, "[0, inf)"));
        }
        let sum = rates.iter().sum();
        Ok(RatePoint { rates, sum })
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }
}

/// Whether the rates lie in the OR channel capacity region, i.e. sum to at
/// most one bit per channel use.
pub fn capacity_membership(point: &RatePoint) -> bool {
    point.sum <= 1.0 + 1e-12
}

/// Asymptotic two-user rate constraints under Bloom filter inputs with
/// `K_i / L -> kappa_i`: `R1 <= user1`, `R2 <= user2`, `R1 + R2 <= sum`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBounds {
    /// `exp(-kappa2) h2(exp(-kappa1))`
    pub user1: f64,
    /// `exp(-kappa1) h2(exp(-kappa2))`
    pub user2: f64,
    /// `h2(exp(-(kappa1 + kappa2)))`
    pub sum: f64,
}

impl RateBounds {
    /// The two dominant corners of the pentagon, each a [`RatePoint`] on the
    /// sum-rate face.
    pub fn corner_points(&self) -> [RatePoint; 2] {
        let a = vec![(self.sum - self.user2).max(0.0), self.user2];
        let b = vec![self.user1, (self.sum - self.user1).max(0.0)];
        [
            RatePoint::new(a).expect("finite non-negative"),
            RatePoint::new(b).expect("finite non-negative"),
        ]
    }

    pub fn admits(&self, point: &RatePoint) -> bool {
        let tol = 1e-12;
        let r = point.rates();
        r.len() == 2 && r[0] <= self.user1 + tol && r[1] <= self.user2 + tol && point.sum() <= self.sum + tol
    }
}

/// Rate constraints achieved by two users sending `BF(L, kappa_i L)`.
pub fn rate_region_point(kappa1: f64, kappa2: f64) -> Result<RateBounds> {
    for (name, k) in [("kappa1", kappa1), ("kappa2", kappa2)] {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::domain(name, k, "(0, inf)"));
        }
    }
    let (p1, p2) = ((-kappa1).exp(), (-kappa2).exp());
    Ok(RateBounds {
        user1: p2 * binary_entropy(p1)?,
        user2: p1 * binary_entropy(p2)?,
        sum: binary_entropy((-(kappa1 + kappa2)).exp())?,
    })
}

/// Largest symmetric sum rate, in nats per channel use, for which the
/// per-user containment decoder with `K = kappa L / N` stays reliable:
/// `-kappa ln(1 - exp(-kappa) + eps)`.
pub fn sumrate_threshold(kappa: f64, eps: f64) -> Result<f64> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::domain("kappa", kappa, "(0, inf)"));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::domain("eps", eps, "[0, inf)"));
    }
    let arg = 1.0 - (-kappa).exp() + eps;
    if arg <= 0.0 {
        return Err(Error::domain("1 - exp(-kappa) + eps", arg, "(0, inf)"));
    }
    Ok(-kappa * arg.ln())
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / LN_2
}
