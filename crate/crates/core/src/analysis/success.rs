use std::f64::consts::LN_2;

use super::{false_containment, pow_one_minus};
use crate::bloom::{occupancy_bound, weight_pmf, WeightPmf};
use crate::{Error, Result};

fn check_positive(name: &str, v: u64) -> Result<()> {
    if v == 0 {
        return Err(Error::Parameter(format!("{name} must be at least 1")));
    }
    Ok(())
}

fn pmf_for(len: usize, draws: u64) -> Result<WeightPmf> {
    let draws = usize::try_from(draws)
        .map_err(|_| Error::Resource(format!("{draws} hash draws exceed the address space")))?;
    weight_pmf(len, draws)
}

/// Probability that per-user containment decoding is correct when `users`
/// users each send one of `messages` filters `BF(L, K)`, with `messages`
/// allowed to be any real `>= 1` (e.g. `2^(R L / N)`).
///
/// The received array is `BF(L, N K)`; given its weight `w` each of the
/// `N (M - 1)` untransmitted filters is independently contained with
/// probability `(w/L)^K`.
pub fn per_user_success_exact(users: u64, messages: f64, len: usize, hashes: usize) -> Result<f64> {
    check_positive("N", users)?;
    check_positive("L", len as u64)?;
    check_positive("K", hashes as u64)?;
    if !(messages >= 1.0 && messages.is_finite()) {
        return Err(Error::domain("M", messages, "[1, inf)"));
    }
    let pmf = pmf_for(len, users * hashes as u64)?;
    let competitors = users as f64 * (messages - 1.0);
    Ok(pmf
        .iter()
        .map(|(w, p)| p * pow_one_minus(false_containment(w, len, hashes), competitors))
        .sum())
}

/// [`per_user_success_exact`] with an integer message count.
pub fn success_prob_exact(users: u64, messages: u64, len: usize, hashes: usize) -> Result<f64> {
    check_positive("M", messages)?;
    per_user_success_exact(users, messages as f64, len, hashes)
}

/// Exact probability that containment-based activity recognition is correct
/// given `active` of `users` users are active: the received array is
/// `BF(L, aK)` and none of the `N - a` silent signatures may be contained.
pub fn ar_success_exact(users: u64, active: u64, len: usize, hashes: usize) -> Result<f64> {
    check_positive("L", len as u64)?;
    check_positive("K", hashes as u64)?;
    if active > users {
        return Err(Error::Parameter(format!(
            "active count {active} exceeds population {users}"
        )));
    }
    let pmf = pmf_for(len, active * hashes as u64)?;
    let silent = (users - active) as f64;
    Ok(pmf
        .iter()
        .map(|(w, p)| p * pow_one_minus(false_containment(w, len, hashes), silent))
        .sum())
}

/// Concentration lower bound on activity-recognition success, with the exact
/// value alongside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArSuccessBound {
    /// `1 - N (1 - p + eps)^K - 2 exp(-eps^2 L^2 / (2 a K))`; may be negative.
    pub raw: f64,
    pub clamped: f64,
    /// `p = (1 - 1/L)^(aK)`.
    pub zero_fraction: f64,
    /// Exact success probability given `a` actives.
    pub exact: f64,
}

pub fn ar_success_lower_bound(
    users: u64,
    active: u64,
    len: usize,
    hashes: usize,
    eps: f64,
) -> Result<ArSuccessBound> {
    check_positive("a", active)?;
    let exact = ar_success_exact(users, active, len, hashes)?;
    let draws = usize::try_from(active * hashes as u64)
        .map_err(|_| Error::Resource("aK exceeds the address space".into()))?;
    let occ = occupancy_bound(len, draws, eps)?;
    let p = occ.zero_fraction;
    let false_alarm = users as f64 * (1.0 - p + eps).powf(hashes as f64);
    let raw = 1.0 - false_alarm - occ.raw;
    Ok(ArSuccessBound {
        raw,
        clamped: raw.clamp(0.0, 1.0),
        zero_fraction: p,
        exact,
    })
}

/// [`ar_success_lower_bound`] at the `eps` in `(0, p)` that makes it
/// tightest, searched on a uniform grid of `grid` points.
pub fn ar_success_best_bound(
    users: u64,
    active: u64,
    len: usize,
    hashes: usize,
    grid: usize,
) -> Result<(f64, ArSuccessBound)> {
    check_positive("a", active)?;
    check_positive("grid", grid as u64)?;
    let exact = ar_success_exact(users, active, len, hashes)?;
    let draws = usize::try_from(active * hashes as u64)
        .map_err(|_| Error::Resource("aK exceeds the address space".into()))?;
    let p = occupancy_bound(len, draws, 1.0)?.zero_fraction;
    let mut best: Option<(f64, ArSuccessBound)> = None;
    for i in 1..=grid {
        let eps = p * i as f64 / (grid + 1) as f64;
        let occ = occupancy_bound(len, draws, eps)?;
        let raw = 1.0 - users as f64 * (1.0 - p + eps).powf(hashes as f64) - occ.raw;
        if best.is_none_or(|(_, b)| raw > b.raw) {
            let bound = ArSuccessBound {
                raw,
                clamped: raw.clamp(0.0, 1.0),
                zero_fraction: p,
                exact,
            };
            best = Some((eps, bound));
        }
    }
    Ok(best.expect("grid is non-empty"))
}

/// Length and hash count of one transmission phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseParams {
    pub len: usize,
    pub hashes: usize,
}

/// Parameters of the two-phase message transmission scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhaseConfig {
    pub users: u64,
    pub messages: u64,
    /// Activity signatures.
    pub phase1: PhaseParams,
    /// Message codewords.
    pub phase2: PhaseParams,
}

/// Success probability of two-phase decoding given `active` actives and
/// received weights `w1`, `w2`:
///
/// `[1 - t2]^(a(M-1)) * {1 - t1 [1 - (1 - t2)^M]}^(N-a)` with
/// `t_i = (w_i / L_i)^(K_i)`.
///
/// The first factor is "no active user has a second contained message"; the
/// second is "no silent user passes phase 1 and then has a contained message".
pub fn two_phase_q(cfg: &TwoPhaseConfig, active: u64, w1: usize, w2: usize) -> Result<f64> {
    let TwoPhaseConfig {
        users,
        messages,
        phase1,
        phase2,
    } = *cfg;
    if w1 > phase1.len || w2 > phase2.len {
        return Err(Error::Parameter(format!(
            "weights ({w1}, {w2}) exceed lengths ({}, {})",
            phase1.len, phase2.len
        )));
    }
    if active > users {
        return Err(Error::Parameter(format!(
            "active count {active} exceeds population {users}"
        )));
    }
    check_positive("M", messages)?;
    let t1 = false_containment(w1, phase1.len, phase1.hashes);
    let t2 = false_containment(w2, phase2.len, phase2.hashes);
    let actives_ok = pow_one_minus(t2, active as f64 * (messages - 1) as f64);
    // 1 - (1 - t2)^M, kept accurate for tiny t2
    let any_contained = if t2 == 0.0 {
        0.0
    } else {
        -(messages as f64 * (-t2).ln_1p()).exp_m1()
    };
    let silent_ok = pow_one_minus(t1 * any_contained, (users - active) as f64);
    Ok(actives_ok * silent_ok)
}

/// Exact success probability of two-phase decoding given `active` actives:
/// `q` averaged over the independent weights of `BF(L1, aK1)` and
/// `BF(L2, aK2)`.
pub fn two_phase_success_exact(cfg: &TwoPhaseConfig, active: u64) -> Result<f64> {
    let pmf1 = pmf_for(cfg.phase1.len, active * cfg.phase1.hashes as u64)?;
    let pmf2 = pmf_for(cfg.phase2.len, active * cfg.phase2.hashes as u64)?;
    let significant = |pmf: &WeightPmf| -> Vec<(usize, f64)> {
        let peak = pmf.probs().iter().cloned().fold(0.0, f64::max);
        pmf.iter().filter(|&(_, p)| p > 1e-18 * peak).collect()
    };
    let (s1, s2) = (significant(&pmf1), significant(&pmf2));
    let mut total = 0.0;
    for &(w1, p1) in &s1 {
        for &(w2, p2) in &s2 {
            total += p1 * p2 * two_phase_q(cfg, active, w1, w2)?;
        }
    }
    Ok(total)
}

/// Whether `(kappa1, kappa2)` satisfies the sufficient conditions for the
/// two-phase scheme: `kappa2 ln 2 > beta + gamma` and
/// `(kappa1 + kappa2) ln 2 > 1 + gamma`.
pub fn feasibility_mt(kappa1: f64, kappa2: f64, beta: f64, gamma: f64) -> bool {
    kappa2 * LN_2 > beta + gamma && (kappa1 + kappa2) * LN_2 > 1.0 + gamma
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn best_bound_dominates_grid_points() {
        let (eps, best) = ar_success_best_bound(1000, 32, 800, 17, 200).unwrap();
        assert!(eps > 0.0 && eps < best.zero_fraction);
        assert!(best.raw <= best.exact);
        for e in [0.01, 0.05, 0.1, 0.2] {
            let b = ar_success_lower_bound(1000, 32, 800, 17, e).unwrap();
            assert!(b.raw <= best.raw + 1e-3, "eps {e}: {} > {}", b.raw, best.raw);
        }
    }

    #[test]
    fn single_message_always_succeeds() {
        for (n, l, k) in [(1, 1, 1), (3, 10, 2), (5, 64, 7)] {
            assert!((success_prob_exact(n, 1, l, k).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_messages_one_hash() {
        // the two messages' single hashes collide with probability 1/2
        assert!((success_prob_exact(1, 2, 2, 1).unwrap() - 0.5).abs() < 1e-15);
    }

    // Enumerate all hash sequences of N users with M messages each.
    fn brute_success(n: usize, m: usize, len: usize, k: usize) -> f64 {
        let codewords = n * m;
        let draws = codewords * k;
        let total = len.pow(draws as u32);
        let mut ok = 0u64;
        for mut code in 0..total {
            let mut masks = vec![0u32; codewords];
            for mask in masks.iter_mut() {
                for _ in 0..k {
                    *mask |= 1 << (code % len);
                    code /= len;
                }
            }
            // user u sends message 0 (by symmetry)
            let y = (0..n).fold(0u32, |acc, u| acc | masks[u * m]);
            let good = (0..n).all(|u| (1..m).all(|j| masks[u * m + j] & !y != 0));
            ok += good as u64;
        }
        ok as f64 / total as f64
    }

    #[test]
    fn success_matches_enumeration() {
        for (n, m, l, k) in [(1, 2, 3, 2), (2, 2, 3, 1), (2, 2, 4, 2), (1, 3, 4, 2), (3, 2, 3, 1)] {
            let exact = success_prob_exact(n as u64, m as u64, l, k).unwrap();
            let brute = brute_success(n, m, l, k);
            assert!((exact - brute).abs() < 1e-12, "{n} {m} {l} {k}: {exact} vs {brute}");
        }
    }

    #[test]
    fn success_is_monotone_on_a_grid() {
        for k in 1..4 {
            for l in 4..12 {
                for n in 1..4u64 {
                    for m in 1..5u64 {
                        let s = success_prob_exact(n, m, l, k).unwrap();
                        assert!(success_prob_exact(n, m + 1, l, k).unwrap() <= s + 1e-12);
                        assert!(success_prob_exact(n + 1, m, l, k).unwrap() <= s + 1e-12);
                        assert!(success_prob_exact(n, m, l + 1, k).unwrap() >= s - 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn huge_message_counts_in_log_domain() {
        // M = 2^75, far beyond integer message indices.
        let s = per_user_success_exact(4, 2f64.powi(75), 500, 87).unwrap();
        assert!(s > 0.9 && s < 1.0, "{s}");
        let s = per_user_success_exact(4, 2f64.powi(106), 500, 87).unwrap();
        assert!(s < 1e-6, "{s}");
    }

    #[test]
    fn ar_bound_below_exact() {
        for (n, a, l, k) in [(100, 5, 60, 8), (1000, 10, 150, 10), (50, 3, 40, 6), (10_000, 100, 2000, 14)] {
            for eps in [0.01, 0.05, 0.1, 0.2, 0.5, 1.0] {
                let b = ar_success_lower_bound(n, a, l, k, eps).unwrap();
                assert!(b.clamped <= b.exact + 1e-12, "{n} {a} {l} {k} {eps}: {b:?}");
                assert!((0.0..=1.0).contains(&b.clamped));
            }
        }
        let b = ar_success_lower_bound(100, 5, 60, 8, 1.0).unwrap();
        assert!(b.raw < 0.0 && b.clamped == 0.0);
    }

    #[test]
    fn ar_false_alarm_term_vanishes_above_threshold() {
        // K = (L / N_a) ln 2 with L = cost * N_a log2 N and cost > 1/ln 2.
        let (beta, cost, eps) = (0.5, 1.8, 0.01);
        let mut prev = f64::INFINITY;
        for e in [4, 6, 8, 10, 12] {
            let n = 10f64.powi(e);
            let na = n.powf(beta);
            let l = (cost * na * n.log2()).ceil();
            let k = (l / na * LN_2).round();
            let p = (1.0 - 1.0 / l).powf(na * k);
            let term = n * (1.0 - p + eps).powf(k);
            assert!(term < prev);
            prev = term;
        }
        assert!(prev < 0.05, "{prev}");
    }

    #[test]
    fn ar_exact_matches_enumeration() {
        // N = 3 users, a = 1 active, L = 3, K = 2: enumerate all 3^6 draws.
        let (len, k) = (3usize, 2usize);
        let total = len.pow(6);
        let mut ok = 0;
        for mut code in 0..total {
            let mut masks = [0u32; 3];
            for m in masks.iter_mut() {
                for _ in 0..k {
                    *m |= 1 << (code % len);
                    code /= len;
                }
            }
            let y = masks[0];
            ok += (masks[1] & !y != 0 && masks[2] & !y != 0) as usize;
        }
        let exact = ar_success_exact(3, 1, len, k).unwrap();
        assert!((exact - ok as f64 / total as f64).abs() < 1e-12);
        assert_eq!(ar_success_exact(7, 0, 10, 3).unwrap(), 1.0);
    }

    fn cfg(users: u64, messages: u64, l1: usize, k1: usize, l2: usize, k2: usize) -> TwoPhaseConfig {
        TwoPhaseConfig {
            users,
            messages,
            phase1: PhaseParams { len: l1, hashes: k1 },
            phase2: PhaseParams { len: l2, hashes: k2 },
        }
    }

    #[test]
    fn q_edge_cases() {
        let c = cfg(4, 1, 8, 2, 8, 2);
        assert_eq!(two_phase_q(&c, 4, 5, 6).unwrap(), 1.0);
        let c = cfg(4, 3, 8, 2, 8, 2);
        // w2 = 0: nothing can be contained in phase 2
        assert_eq!(two_phase_q(&c, 2, 8, 0).unwrap(), 1.0);
        // full phase-2 array with silent users all passing phase 1
        assert_eq!(two_phase_q(&c, 2, 8, 8).unwrap(), 0.0);
        assert!(two_phase_q(&c, 2, 9, 1).is_err());
        assert!(two_phase_q(&c, 5, 1, 1).is_err());
    }

    #[test]
    fn q_value() {
        let c = cfg(4, 2, 8, 2, 8, 2);
        let q = two_phase_q(&c, 2, 4, 4).unwrap();
        // t1 = t2 = 1/4: (3/4)^2 * (1 - (1/4)(1 - 9/16))^2
        let expect = 0.75f64.powi(2) * (1.0f64 - 0.25 * (1.0 - 0.5625)).powi(2);
        assert!((q - expect).abs() < 1e-15);
    }

    #[test]
    fn two_phase_exact_is_a_probability() {
        let c = cfg(50, 4, 40, 4, 60, 6);
        let s = two_phase_success_exact(&c, 5).unwrap();
        assert!(s > 0.0 && s < 1.0);
        assert!(two_phase_success_exact(&c, 6).unwrap() < s);
    }

    #[test]
    fn feasibility() {
        assert!(feasibility_mt(2.0, 2.0, 0.5, 0.5));
        let (beta, gamma) = (0.5, 0.5);
        let k2 = (beta + gamma) / LN_2;
        assert!(!feasibility_mt(10.0, k2, beta, gamma));
        let k1 = (1.0 - beta) / LN_2;
        assert!(feasibility_mt(k1 * 1.001, k2 * 1.001, beta, gamma));
        assert!(!feasibility_mt(k1 * 0.9, k2 * 1.001, beta, gamma));
    }
}
