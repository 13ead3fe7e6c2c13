use std::f64::consts::LN_2;

use crate::bloom::{weight_pmf, LnFactorials, MAX_PMF_LEN};
use crate::{Error, Result};

/// Binary entropy `h2(x)` in bits.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain("x", x, "[0, 1]"));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

fn check_kappa(name: &'static str, kappa: f64) -> Result<()> {
    if kappa.is_nan() || kappa <= 0.0 {
        return Err(Error::domain(name, kappa, "(0, inf)"));
    }
    Ok(())
}

/// Normalized entropy of `BF(L, K)` as `L -> inf` with `K/L -> kappa`:
/// `h2(exp(-kappa))`.
pub fn entropy_limit(kappa: f64) -> Result<f64> {
    check_kappa("kappa", kappa)?;
    binary_entropy((-kappa).exp())
}

/// Normalized entropy of `BF(L, K1) + BF(L, K2)` given `BF(L, K1)` in the
/// limit: `exp(-kappa1) h2(exp(-kappa2))`.
pub fn conditional_entropy_limit(kappa1: f64, kappa2: f64) -> Result<f64> {
    check_kappa("kappa1", kappa1)?;
    check_kappa("kappa2", kappa2)?;
    Ok((-kappa1).exp() * binary_entropy((-kappa2).exp())?)
}

/// Exact entropy of `BF(L, K)` in bits.
///
/// Given its weight `w` the array is uniform over the `C(L, w)` patterns, so
/// `H = H(w) + E[log2 C(L, w)]`.
pub fn exact_entropy(len: usize, hashes: usize) -> Result<f64> {
    let pmf = weight_pmf(len, hashes)?;
    let lnf = LnFactorials::new(len);
    let patterns: f64 = pmf
        .iter()
        .filter(|&(_, p)| p > 0.0)
        .map(|(w, p)| p * lnf.ln_binomial(len, w))
        .sum::<f64>()
        / LN_2;
    Ok(pmf.entropy_bits() + patterns)
}

// Tail mass below which pmf entries are skipped.
const NEGLIGIBLE: f64 = 1e-18;

/// Exact entropy of `BF(L, K1) + BF(L, K2)` given `BF(L, K1)`, in bits.
///
/// Given the first filter only its zero count `z1` matters. The second
/// filter drops `b ~ Binomial(K2, z1/L)` of its draws into those zeros, and
/// the number `d` of zeros newly covered follows the occupancy distribution
/// of `b` draws over `z1` cells. Which `d` cells are covered is uniform, so
/// the conditional entropy is `E_z1[H(d | z1) + E log2 C(z1, d)]`.
pub fn exact_conditional_entropy(len: usize, hashes1: usize, hashes2: usize) -> Result<f64> {
    if hashes2 as u128 > MAX_PMF_LEN as u128 {
        return Err(Error::Resource(format!(
            "K2 = {hashes2} exceeds the exact-distribution limit {MAX_PMF_LEN}"
        )));
    }
    let first = weight_pmf(len, hashes1)?;
    if hashes2 == 0 {
        return Ok(0.0);
    }
    // Every z1 costs up to K2 * min(K2, z1) steps.
    let work = hashes2 as u128 * hashes2.min(len) as u128 * (first.max_weight() as u128 + 1);
    if work > 50 * crate::bloom::MAX_PMF_WORK {
        return Err(Error::Resource(format!(
            "conditional entropy of ({len}, {hashes1}, {hashes2}) needs ~{work} steps"
        )));
    }
    let lnf = LnFactorials::new(len.max(hashes2));
    let peak = first.probs().iter().cloned().fold(0.0, f64::max);

    let mut total = 0.0;
    for (w1, p1) in first.iter() {
        if p1 < NEGLIGIBLE * peak {
            continue;
        }
        let zeros = len - w1;
        if zeros == 0 {
            continue;
        }
        let covered = covered_zeros_pmf(len, zeros, hashes2, &lnf);
        let mut h = 0.0;
        for (d, &pd) in covered.iter().enumerate() {
            if pd > 0.0 {
                h += -pd * pd.log2() + pd * lnf.ln_binomial(zeros, d) / LN_2;
            }
        }
        total += p1 * h;
    }
    Ok(total)
}

/// Distribution of the number of the `zeros` empty cells (out of `len`) hit
/// by `draws` uniform draws.
fn covered_zeros_pmf(len: usize, zeros: usize, draws: usize, lnf: &LnFactorials) -> Vec<f64> {
    let top = draws.min(zeros);
    let q = zeros as f64 / len as f64;

    // Binomial(draws, q) weights for the number of draws landing in zeros.
    let weights: Vec<f64> = if zeros == len {
        let mut w = vec![0.0; draws + 1];
        w[draws] = 1.0;
        w
    } else {
        let (lq, lr) = (q.ln(), (-q).ln_1p());
        (0..=draws)
            .map(|b| {
                (lnf.ln_binomial(draws, b) + b as f64 * lq + (draws - b) as f64 * lr).exp()
            })
            .collect()
    };
    let mut last = draws;
    let mut tail = 0.0;
    while last > 0 && tail + weights[last] < NEGLIGIBLE {
        tail += weights[last];
        last -= 1;
    }

    let z = zeros as f64;
    let mut occ = vec![0.0; top + 1];
    occ[0] = 1.0;
    let mut mix = vec![0.0; top + 1];
    mix[0] = weights[0];
    for (b, &wb) in weights.iter().enumerate().take(last + 1).skip(1) {
        let hi = b.min(top);
        for d in (1..=hi).rev() {
            occ[d] = occ[d] * (d as f64 / z) + occ[d - 1] * ((z - (d - 1) as f64) / z);
        }
        occ[0] = 0.0;
        if wb > 0.0 {
            for (m, &o) in mix.iter_mut().zip(&occ).take(hi + 1) {
                *m += wb * o;
            }
        }
    }
    mix
}

/// Maximum number of users for [`subset_entropy_rates`].
pub const MAX_SUBSET_USERS: usize = 4;

/// Normalized conditional entropy bound for one subset of users.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetRate {
    /// Indices of the users in the subset `S`.
    pub members: Vec<usize>,
    /// `(1/L) H(y | x_{not S})` in bits per channel use; the sum of the
    /// rates of `S` must stay below it.
    pub bits_per_use: f64,
}

/// Exact finite-`L` rate constraints for `N <= 4` users sending
/// `BF(L, K_n)`, one per nonempty subset.
///
/// Superpositions of independent filters are again filters, so conditioning
/// on the complement of `S` reduces to the two-filter conditional entropy
/// with `K1 = sum of K over the complement` and `K2 = sum over S`.
pub fn subset_entropy_rates(len: usize, hashes: &[usize]) -> Result<Vec<SubsetRate>> {
    let n = hashes.len();
    if n == 0 || n > MAX_SUBSET_USERS {
        return Err(Error::Parameter(format!(
            "subset evaluator supports 1..={MAX_SUBSET_USERS} users, got {n}"
        )));
    }
    let mut out = Vec::with_capacity((1 << n) - 1);
    for mask in 1usize..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let inside: usize = members.iter().map(|&i| hashes[i]).sum();
        let outside: usize = hashes.iter().sum::<usize>() - inside;
        let h = exact_conditional_entropy(len, outside, inside)?;
        out.push(SubsetRate {
            members,
            bits_per_use: h / len as f64,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloom::{HashSpec, Identity};
    use proptest::prelude::*;

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        let h = binary_entropy(0.11).unwrap();
        assert!((h - 0.499_915_958_164_528).abs() < 1e-12);
        assert!((h - 0.49993).abs() < 1e-4);
        assert!(binary_entropy(-0.01).is_err());
        assert!(binary_entropy(1.01).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn limits() {
        assert!((entropy_limit(LN_2).unwrap() - 1.0).abs() < 1e-12);
        assert!((entropy_limit(2.0 * LN_2).unwrap() - 0.811_278_124_459_132_8).abs() < 1e-12);
        assert!(entropy_limit(1e-12).unwrap() < 1e-9);
        assert!(entropy_limit(0.0).is_err());

        assert!((conditional_entropy_limit(LN_2, LN_2).unwrap() - 0.5).abs() < 1e-12);
        assert!(conditional_entropy_limit(800.0, LN_2).unwrap() < 1e-300);
        let ab = conditional_entropy_limit(LN_2, 2.0 * LN_2).unwrap();
        let ba = conditional_entropy_limit(2.0 * LN_2, LN_2).unwrap();
        assert!((ab - 0.405_639_062_229_566_4).abs() < 1e-12);
        assert!((ba - 0.25).abs() < 1e-12);
        assert!(conditional_entropy_limit(-1.0, 1.0).is_err());
    }

    #[test]
    fn exact_entropy_small() {
        assert_eq!(exact_entropy(1, 1).unwrap(), 0.0);
        assert!((exact_entropy(2, 2).unwrap() - 1.5).abs() < 1e-12);
        // BF(3, 1): uniform over three single-one patterns.
        assert!((exact_entropy(3, 1).unwrap() - 3f64.log2()).abs() < 1e-12);
    }

    // Entropy of BF(L, K) by enumerating every hash sequence.
    fn brute_entropy(len: usize, hashes: usize) -> f64 {
        let total = len.pow(hashes as u32);
        let mut counts = std::collections::HashMap::new();
        for mut code in 0..total {
            let mut mask = 0u32;
            for _ in 0..hashes {
                mask |= 1 << (code % len);
                code /= len;
            }
            *counts.entry(mask).or_insert(0u64) += 1;
        }
        counts
            .values()
            .map(|&c| {
                let p = c as f64 / total as f64;
                -p * p.log2()
            })
            .sum()
    }

    // Conditional entropy by enumerating both filters' hash sequences.
    fn brute_conditional(len: usize, k1: usize, k2: usize) -> f64 {
        use std::collections::HashMap;
        let mut joint: HashMap<(u32, u32), u64> = HashMap::new();
        let mut first: HashMap<u32, u64> = HashMap::new();
        let total = len.pow((k1 + k2) as u32);
        for mut code in 0..total {
            let (mut x1, mut x2) = (0u32, 0u32);
            for _ in 0..k1 {
                x1 |= 1 << (code % len);
                code /= len;
            }
            for _ in 0..k2 {
                x2 |= 1 << (code % len);
                code /= len;
            }
            *joint.entry((x1, x1 | x2)).or_default() += 1;
            *first.entry(x1).or_default() += 1;
        }
        let h = |m: &mut dyn Iterator<Item = u64>| -> f64 {
            m.map(|c| {
                let p = c as f64 / total as f64;
                -p * p.log2()
            })
            .sum()
        };
        h(&mut joint.values().copied()) - h(&mut first.values().copied())
    }

    #[test]
    fn exact_entropy_matches_enumeration() {
        for (len, hashes) in [(2, 3), (4, 3), (5, 4), (6, 2), (7, 5)] {
            let e = exact_entropy(len, hashes).unwrap();
            let b = brute_entropy(len, hashes);
            assert!((e - b).abs() < 1e-10, "L={len} K={hashes}: {e} vs {b}");
        }
    }

    #[test]
    fn conditional_entropy_small() {
        assert_eq!(exact_conditional_entropy(10, 3, 0).unwrap(), 0.0);
        assert!((exact_conditional_entropy(2, 1, 1).unwrap() - 1.0).abs() < 1e-12);
        for (len, k1, k2) in [(3, 1, 2), (4, 2, 2), (5, 3, 2), (5, 1, 4), (6, 2, 3), (4, 0, 3)] {
            let e = exact_conditional_entropy(len, k1, k2).unwrap();
            let b = brute_conditional(len, k1, k2);
            assert!((e - b).abs() < 1e-10, "({len},{k1},{k2}): {e} vs {b}");
        }
    }

    #[test]
    fn conditional_with_no_first_filter_is_plain_entropy() {
        for (len, k) in [(9, 4), (50, 30)] {
            let a = exact_conditional_entropy(len, 0, k).unwrap();
            let b = exact_entropy(len, k).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn entropy_normalized_approaches_limit() {
        let len = 2000;
        let k = (len as f64 * LN_2).round() as usize;
        let h = exact_entropy(len, k).unwrap() / len as f64;
        assert!((h - 1.0).abs() < 0.02, "{h}");
    }

    #[test]
    fn conditional_entropy_plug_in_cross_check() {
        // Plug-in estimate of H(y | x1) via H(d | z1) + E log2 C(z1, d), with
        // filters drawn by the keyed hash rather than the occupancy algebra.
        let (len, k1, k2) = (12, 4, 4);
        let samples = 400_000u64;
        let mut cells = vec![vec![0u64; len + 1]; len + 1];
        let lnf = LnFactorials::new(len);
        let mut pattern_bits = 0.0;
        for s in 0..samples {
            let x1 = crate::bloom::generate(len, k1, &HashSpec::new(s, Identity::new(0, 0, 0)))
                .unwrap();
            let x2 = crate::bloom::generate(len, k2, &HashSpec::new(s, Identity::new(1, 0, 0)))
                .unwrap();
            let z1 = x1.zeros_count();
            let d = crate::bloom::superpose(&x1, &x2).unwrap().weight() - x1.weight();
            cells[z1][d] += 1;
            pattern_bits += lnf.ln_binomial(z1, d) / LN_2;
        }
        let n = samples as f64;
        let mut h_d = 0.0;
        for row in &cells {
            let rz: u64 = row.iter().sum();
            for &c in row.iter().filter(|&&c| c > 0) {
                h_d += -(c as f64 / n) * (c as f64 / rz as f64).log2();
            }
        }
        let plug_in = h_d + pattern_bits / n;
        let exact = exact_conditional_entropy(len, k1, k2).unwrap();
        assert!((plug_in - exact).abs() < 0.01, "{plug_in} vs {exact}");
    }

    #[test]
    fn subset_rates_two_users() {
        let rates = subset_entropy_rates(64, &[20, 24]).unwrap();
        assert_eq!(rates.len(), 3);
        assert_eq!(rates[2].members, vec![0, 1]);
        let full = exact_entropy(64, 44).unwrap() / 64.0;
        assert!((rates[2].bits_per_use - full).abs() < 1e-9);
        let r0 = exact_conditional_entropy(64, 24, 20).unwrap() / 64.0;
        assert!((rates[0].bits_per_use - r0).abs() < 1e-12);
        assert!(rates[0].bits_per_use <= rates[2].bits_per_use);
        assert!(rates[0].bits_per_use + rates[1].bits_per_use >= rates[2].bits_per_use);
        assert!(subset_entropy_rates(10, &[1, 1, 1, 1, 1]).is_err());
        assert_eq!(subset_entropy_rates(10, &[1, 2, 3, 4]).unwrap().len(), 15);
    }

    proptest! {
        #[test]
        fn binary_entropy_symmetric_and_bounded(x in 0.0f64..=1.0) {
            let a = binary_entropy(x).unwrap();
            let b = binary_entropy(1.0 - x).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
