//! Closed-form and exactly computed quantities: entropies, rate regions,
//! success probabilities of the containment decoders, concentration-driven
//! lower bounds, feasibility conditions and cost intervals.
//!
//! Entropies and rates are in bits unless a name says otherwise. Operations
//! taking finite `(L, K)` use `(1 - 1/L)^K` for the zero fraction; limit
//! operations taking `kappa` use `exp(-kappa)`.

mod costs;
mod entropy;
mod rates;
mod success;

pub use costs::{cost_bounds_ar, cost_bounds_mt, CostBounds};
pub use entropy::{
    binary_entropy, conditional_entropy_limit, entropy_limit, exact_conditional_entropy,
    exact_entropy, subset_entropy_rates, SubsetRate, MAX_SUBSET_USERS,
};
pub use rates::{
    capacity_membership, nats_to_bits, rate_region_point, sumrate_threshold, RateBounds,
    RatePoint,
};
pub use success::{
    ar_success_best_bound, ar_success_exact, ar_success_lower_bound, feasibility_mt, per_user_success_exact,
    success_prob_exact, two_phase_q, two_phase_success_exact, ArSuccessBound, PhaseParams,
    TwoPhaseConfig,
};

/// `(1 - x)^n` for `x` in `[0, 1]` and real `n >= 0`, evaluated as
/// `exp(n ln(1 - x))`. `n = 0` gives one even when `x = 1`.
pub(crate) fn pow_one_minus(x: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 1.0;
    }
    (n * (-x).ln_1p()).exp()
}

/// `(w / L)^K`: probability that an independent `(L, K)` filter is contained
/// in an array of weight `w`.
pub(crate) fn false_containment(weight: usize, len: usize, hashes: usize) -> f64 {
    if hashes == 0 {
        return 1.0;
    }
    (weight as f64 / len as f64).powf(hashes as f64)
}
