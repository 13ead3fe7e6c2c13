//! Exact weight distributions and concentration bounds for `BF(L, K)`.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// Largest array length accepted by the exact distributions.
pub const MAX_PMF_LEN: usize = 1_000_000;
/// Largest `K * min(K, L)` accepted by the occupancy recurrence.
pub const MAX_PMF_WORK: u128 = 2_000_000_000;

/// Exact distribution of the weight of `BF(L, K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPmf {
    len: usize,
    hashes: usize,
    /// `probs[w]` for `w` in `0..=min(K, L)`.
    probs: Vec<f64>,
}

impl WeightPmf {
    /// Filter length `L`, not the number of support points.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn hashes(&self) -> usize {
        self.hashes
    }

    pub fn max_weight(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn prob(&self, w: usize) -> f64 {
        self.probs.get(w).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `(w, Pr[w])` over `min(1, K)..=min(K, L)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let start = usize::from(self.hashes > 0);
        (start..self.probs.len()).map(|w| (w, self.probs[w]))
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(w, p)| w as f64 * p).sum()
    }

    /// Shannon entropy of the weight, in bits.
    pub fn entropy_bits(&self) -> f64 {
        self.probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.log2())
            .sum()
    }

    /// CSV with header `w,probability`, one row per support point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("w,probability\n");
        for (w, p) in self.iter() {
            let _ = writeln!(out, "{w},{p}");
        }
        out
    }
}

fn check_pmf_guard(len: usize, hashes: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::Parameter("array length L must be at least 1".into()));
    }
    if len > MAX_PMF_LEN {
        return Err(Error::Resource(format!(
            "L = {len} exceeds the exact-distribution limit {MAX_PMF_LEN}"
        )));
    }
    let work = hashes as u128 * hashes.min(len) as u128;
    if work > MAX_PMF_WORK {
        return Err(Error::Resource(format!(
            "weight distribution of BF({len}, {hashes}) needs {work} steps (limit {MAX_PMF_WORK})"
        )));
    }
    Ok(())
}

/// Exact weight pmf of `BF(len, hashes)` by the occupancy recurrence
/// `P_{k+1}(w) = P_k(w) w/L + P_k(w-1) (L-w+1)/L`, `P_0(0) = 1`.
pub fn weight_pmf(len: usize, hashes: usize) -> Result<WeightPmf> {
    check_pmf_guard(len, hashes)?;
    let top = hashes.min(len);
    let l = len as f64;
    let mut probs = vec![0.0; top + 1];
    probs[0] = 1.0;
    for k in 0..hashes {
        // After k draws the weight is at most min(k, L); update high to low
        // so each step reads the previous row.
        let hi = (k + 1).min(top);
        for w in (1..=hi).rev() {
            let stay = probs[w] * (w as f64 / l);
            let grow = probs[w - 1] * ((l - (w - 1) as f64) / l);
            probs[w] = stay + grow;
        }
        probs[0] = 0.0;
    }
    if hashes == 0 {
        probs[0] = 1.0;
    }
    Ok(WeightPmf {
        len,
        hashes,
        probs,
    })
}

/// Stirling number of the second kind `S(n, k)`; zero when `k > n`.
pub fn stirling2(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    if k == n {
        return BigUint::one();
    }
    if k == 0 {
        return BigUint::zero();
    }
    // row[j] = S(i, j), built up to i = n
    let mut row = vec![BigUint::zero(); k + 1];
    row[0] = BigUint::one();
    for i in 1..=n {
        let hi = i.min(k);
        for j in (1..=hi).rev() {
            let prev = std::mem::take(&mut row[j]);
            row[j] = prev * j + &row[j - 1];
        }
        row[0] = BigUint::zero();
    }
    std::mem::take(&mut row[k])
}

/// Exact outcome counts of the weight: entry `w` is
/// `C(L, w) * w! * S(K, w)`, the number of the `L^K` hash sequences giving
/// weight `w`. Returns the counts and `L^K`.
///
/// Uses big integers throughout; intended for cross-checks at small `K`.
pub fn weight_pmf_closed_form(len: usize, hashes: usize) -> Result<(Vec<BigUint>, BigUint)> {
    if len == 0 {
        return Err(Error::Parameter("array length L must be at least 1".into()));
    }
    if hashes > 512 {
        return Err(Error::Resource(format!(
            "closed-form weight counts limited to K <= 512 (got {hashes})"
        )));
    }
    let top = hashes.min(len);
    let mut counts = Vec::with_capacity(top + 1);
    // falling = L (L-1) ... (L-w+1) = C(L, w) w!
    let mut falling = BigUint::one();
    for w in 0..=top {
        if w > 0 {
            falling *= len - (w - 1);
        }
        counts.push(&falling * stirling2(hashes, w));
    }
    let total = BigUint::from(len).pow(hashes as u32);
    Ok((counts, total))
}

/// Table of `ln n!` for `n <= max`.
#[derive(Debug, Clone)]
pub struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn new(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        table.push(0.0);
        let mut acc = 0.0f64;
        for n in 1..=max {
            acc += (n as f64).ln();
            table.push(acc);
        }
        LnFactorials { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    pub fn ln_factorial(&self, n: usize) -> f64 {
        self.table[n]
    }

    /// `ln C(n, k)`; negative infinity when `k > n`.
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.table[n] - self.table[k] - self.table[n - k]
    }
}

/// `ln C(n, k)` without a precomputed table.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k)
        .map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln())
        .sum()
}

/// Azuma-type bound on the number of zeros deviating from its mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupancyBound {
    /// `2 exp(-eps^2 L^2 / (2K))`, may exceed one.
    pub raw: f64,
    /// `raw` clamped to `[0, 1]`.
    pub clamped: f64,
    /// `(1 - 1/L)^K`, the expected fraction of zeros.
    pub zero_fraction: f64,
}

fn azuma(len: usize, hashes: usize, eps: f64) -> OccupancyBound {
    let l = len as f64;
    let raw = 2.0 * (-(eps * eps * l * l) / (2.0 * hashes as f64)).exp();
    let zero_fraction = (hashes as f64 * (-1.0 / l).ln_1p()).exp();
    OccupancyBound {
        raw,
        clamped: raw.clamp(0.0, 1.0),
        zero_fraction,
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain("eps", eps, "(0, inf)"));
    }
    Ok(())
}

/// Bound on `Pr[|z - pL| > eps L]` for the zeros `z` of `BF(L, K)`, with
/// `p = (1 - 1/L)^K`.
pub fn occupancy_bound(len: usize, hashes: usize, eps: f64) -> Result<OccupancyBound> {
    if len == 0 || hashes == 0 {
        return Err(Error::Parameter("occupancy bound needs L >= 1 and K >= 1".into()));
    }
    check_eps(eps)?;
    Ok(azuma(len, hashes, eps))
}

/// Bound on `Pr[|z - p2 z1| > eps L | BF(L, K1)]` where `z` counts the zeros
/// left after superposing a further `BF(L, K2)`; `zero_fraction` is `p2`.
pub fn conditional_occupancy_bound(len: usize, hashes2: usize, eps: f64) -> Result<OccupancyBound> {
    if len == 0 {
        return Err(Error::Parameter("occupancy bound needs L >= 1".into()));
    }
    check_eps(eps)?;
    Ok(azuma(len, hashes2, eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Brute force over all L^K hash sequences.
    fn enumerate_counts(len: usize, hashes: usize) -> Vec<u64> {
        let mut counts = vec![0u64; hashes.min(len) + 1];
        let total = (len as u64).pow(hashes as u32);
        for mut code in 0..total {
            let mut seen = vec![false; len];
            let mut w = 0;
            for _ in 0..hashes {
                let p = (code % len as u64) as usize;
                code /= len as u64;
                if !seen[p] {
                    seen[p] = true;
                    w += 1;
                }
            }
            counts[w] += 1;
        }
        counts
    }

    #[test]
    fn pmf_small_cases() {
        let p = weight_pmf(2, 2).unwrap();
        assert_eq!(p.probs(), &[0.0, 0.5, 0.5]);

        let p = weight_pmf(3, 3).unwrap();
        assert!((p.prob(1) - 1.0 / 9.0).abs() < 1e-15);
        assert!((p.prob(2) - 6.0 / 9.0).abs() < 1e-15);
        assert!((p.prob(3) - 2.0 / 9.0).abs() < 1e-15);

        for len in [1, 2, 17, 1000] {
            let p = weight_pmf(len, 1).unwrap();
            assert_eq!(p.iter().collect::<Vec<_>>(), vec![(1, 1.0)]);
        }

        let p = weight_pmf(5, 0).unwrap();
        assert_eq!(p.iter().collect::<Vec<_>>(), vec![(0, 1.0)]);
    }

    #[test]
    fn pmf_matches_enumeration() {
        for (len, hashes) in [(2, 1), (3, 4), (5, 3), (6, 5), (4, 7), (10, 4)] {
            let counts = enumerate_counts(len, hashes);
            let total = (len as f64).powi(hashes as i32);
            let pmf = weight_pmf(len, hashes).unwrap();
            for (w, &c) in counts.iter().enumerate() {
                assert!((pmf.prob(w) - c as f64 / total).abs() < 1e-14);
            }
            let (exact, denom) = weight_pmf_closed_form(len, hashes).unwrap();
            assert_eq!(denom, BigUint::from(len).pow(hashes as u32));
            for (w, &c) in counts.iter().enumerate() {
                assert_eq!(exact[w], BigUint::from(c), "L={len} K={hashes} w={w}");
            }
        }
    }

    #[test]
    fn pmf_guard() {
        assert!(matches!(weight_pmf(0, 3), Err(Error::Parameter(_))));
        assert!(matches!(
            weight_pmf(MAX_PMF_LEN + 1, 3),
            Err(Error::Resource(_))
        ));
        assert!(matches!(
            weight_pmf(1_000_000, 100_000),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn csv_layout() {
        assert_eq!(weight_pmf(2, 2).unwrap().to_csv(), "w,probability\n1,0.5\n2,0.5\n");
        assert_eq!(weight_pmf(9, 1).unwrap().to_csv(), "w,probability\n1,1\n");
    }

    #[test]
    fn stirling_values() {
        for n in 0..12 {
            assert_eq!(stirling2(n, n), BigUint::one());
        }
        assert_eq!(stirling2(3, 2), BigUint::from(3u32));
        assert_eq!(stirling2(4, 2), BigUint::from(7u32));
        assert_eq!(stirling2(10, 3), BigUint::from(9330u32));
        assert_eq!(stirling2(2, 5), BigUint::zero());
        assert_eq!(stirling2(5, 0), BigUint::zero());
        // sum_k S(n, k) is the Bell number
        let bell10: BigUint = (0..=10).map(|k| stirling2(10, k)).sum();
        assert_eq!(bell10, BigUint::from(115_975u32));
    }

    #[test]
    fn stirling_matches_partition_enumeration() {
        // Restricted growth strings enumerate set partitions.
        fn count(n: usize) -> Vec<u64> {
            let mut by_blocks = vec![0u64; n + 1];
            fn rec(i: usize, n: usize, blocks: usize, out: &mut [u64]) {
                if i == n {
                    out[blocks] += 1;
                    return;
                }
                for b in 0..=blocks {
                    rec(i + 1, n, blocks.max(b + 1), out);
                }
            }
            rec(0, n, 0, &mut by_blocks);
            by_blocks
        }
        for n in 1..=8 {
            let c = count(n);
            for (k, &v) in c.iter().enumerate() {
                assert_eq!(stirling2(n, k), BigUint::from(v), "S({n},{k})");
            }
        }
    }

    #[test]
    fn occupancy_bound_values() {
        let b = occupancy_bound(100, 50, 0.1).unwrap();
        assert!((b.raw - 2.0 * (-1.0f64).exp()).abs() < 1e-12);
        assert!((b.raw - 0.735_758_882_342_884_7).abs() < 1e-12);
        assert!((b.zero_fraction - 0.99f64.powi(50)).abs() < 1e-12);

        let loose = occupancy_bound(10, 100, 0.01).unwrap();
        assert!(loose.raw > 1.0 && loose.clamped == 1.0);

        assert!(occupancy_bound(100_000, 10, 0.5).unwrap().raw == 0.0);
        assert!(occupancy_bound(0, 1, 0.1).is_err());
        assert!(occupancy_bound(10, 1, 0.0).is_err());

        let c = conditional_occupancy_bound(100, 50, 0.1).unwrap();
        assert!((c.raw - 2.0 * (-1.0f64).exp()).abs() < 1e-12);
        assert!(conditional_occupancy_bound(1_000_000, 7, 0.99).unwrap().raw < 1e-300);
    }

    #[test]
    fn ln_factorials() {
        let t = LnFactorials::new(100);
        assert!((t.ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-12);
        assert!((ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-12);
        assert!((t.ln_binomial(100, 50) - ln_binomial(100, 50)).abs() < 1e-9);
        assert_eq!(t.ln_binomial(3, 4), f64::NEG_INFINITY);
    }

    proptest! {
        #[test]
        fn pmf_is_a_distribution(len in 1usize..400, hashes in 0usize..400) {
            let p = weight_pmf(len, hashes).unwrap();
            prop_assert!((p.total() - 1.0).abs() < 1e-12);
            prop_assert!(p.probs().iter().all(|&x| (0.0..=1.0).contains(&x)));
            prop_assert_eq!(p.max_weight(), hashes.min(len));
            if hashes > 0 {
                prop_assert_eq!(p.prob(0), 0.0);
            }
            // E[w] = L (1 - (1 - 1/L)^K)
            let l = len as f64;
            let mean = l * (1.0 - (1.0 - 1.0 / l).powi(hashes as i32));
            prop_assert!((p.mean() - mean).abs() < 1e-9 * l.max(1.0));
        }
    }
}
