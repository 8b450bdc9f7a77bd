//! Paired statistics for run comparisons: the Wilcoxon signed-rank test
//! (exact enumeration for small samples via dynamic programming, normal
//! approximation with continuity and tie corrections otherwise), plus means
//! and variances.

/// Largest sample size handled by the exact null distribution.
pub const EXACT_LIMIT: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Clone)]
pub struct WilcoxonResult {
    /// Pairs with a nonzero difference.
    pub n_used: usize,
    pub w_pos: f64,
    pub w_neg: f64,
    /// min(w_pos, w_neg), the conventional reported statistic.
    pub statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    /// True when every difference was zero (no signal; p = 1).
    pub degenerate: bool,
    /// True when the exact branch produced the p-value.
    pub exact: bool,
}

/// Two-sided Wilcoxon signed-rank test on paired observations. Zero
/// differences are dropped; tied absolute differences receive average
/// ranks.
pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> WilcoxonResult {
    wilcoxon_signed_rank_with(pairs, Branch::Auto)
}

/// As `wilcoxon_signed_rank` but with the distribution branch pinned, so the
/// exact and approximate routes can be compared on the same data.
pub fn wilcoxon_signed_rank_with(pairs: &[(f64, f64)], branch: Branch) -> WilcoxonResult {
    assert!(!pairs.is_empty(), "need at least one pair");
    let diffs: Vec<f64> = pairs
        .iter()
        .map(|&(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n == 0 {
        return WilcoxonResult {
            n_used: 0,
            w_pos: 0.0,
            w_neg: 0.0,
            statistic: 0.0,
            p_value: 1.0,
            degenerate: true,
            exact: true,
        };
    }

    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, tie_sizes) = average_ranks(&abs);
    let w_pos: f64 = ranks
        .iter()
        .zip(&diffs)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let total = n as f64 * (n as f64 + 1.0) / 2.0;
    let w_neg = total - w_pos;

    let use_exact = match branch {
        Branch::Auto => n <= EXACT_LIMIT,
        Branch::Exact => true,
        Branch::Normal => false,
    };
    let p_value = if use_exact {
        exact_two_sided_p(&ranks, w_pos)
    } else {
        normal_two_sided_p(n, &tie_sizes, w_pos)
    };

    WilcoxonResult {
        n_used: n,
        w_pos,
        w_neg,
        statistic: w_pos.min(w_neg),
        p_value,
        degenerate: false,
        exact: use_exact,
    }
}

/// Average ranks of `values` (1-based) and the tie-group sizes.
fn average_ranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j share the average of ranks i+1..=j+1
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        tie_sizes.push(j - i + 1);
        i = j + 1;
    }
    (ranks, tie_sizes)
}

/// Exact two-sided p over the 2^n equiprobable sign assignments, computed by
/// dynamic programming over doubled ranks (average ranks are multiples of
/// one half, so doubling makes them integers).
fn exact_two_sided_p(ranks: &[f64], w_pos: f64) -> f64 {
    let doubled: Vec<usize> = ranks
        .iter()
        .map(|r| {
            let d = (r * 2.0).round();
            debug_assert!((r * 2.0 - d).abs() < 1e-9);
            d as usize
        })
        .collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        reach += r;
        for s in (0..=reach).rev() {
            if s >= r && counts[s - r] > 0.0 {
                counts[s] += counts[s - r];
            }
        }
    }
    let w2 = (w_pos * 2.0).round() as usize;
    let all: f64 = 2.0f64.powi(ranks.len() as i32);
    let p_le: f64 = counts[..=w2.min(total)].iter().sum::<f64>() / all;
    let p_ge: f64 = counts[w2.min(total)..].iter().sum::<f64>() / all;
    (2.0 * p_le.min(p_ge)).min(1.0)
}

/// Normal approximation with continuity correction toward the mean and the
/// tie-corrected variance.
fn normal_two_sided_p(n: usize, tie_sizes: &[usize], w_pos: f64) -> f64 {
    let nf = n as f64;
    let mu = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum::<f64>()
        / 48.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    if var <= 0.0 {
        return 1.0;
    }
    let centered = w_pos - mu;
    let corrected = if centered > 0.5 {
        centered - 0.5
    } else if centered < -0.5 {
        centered + 0.5
    } else {
        0.0
    };
    let z = corrected / var.sqrt();
    (2.0 * (1.0 - normal_cdf(z.abs()))).min(1.0)
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

// Chebyshev-fitted complementary error function, fractional error < 1.2e-7.
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t
        * (-z * z - 1.26551223
            + t * (1.00002368
                + t * (0.37409196
                    + t * (0.09678418
                        + t * (-0.18628806
                            + t * (0.27886807
                                + t * (-1.13520398
                                    + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277)))))))))
            .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; 0 below two observations.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn all_equal_pairs_are_degenerate() {
        let pairs = vec![(3.0, 3.0); 8];
        let r = wilcoxon_signed_rank(&pairs);
        assert!(r.degenerate);
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.n_used, 0);
    }

    #[test]
    fn six_uniform_signs_give_exact_tail() {
        // distinct margins, all a > b: one-sided tail 1/64, two-sided 2/64
        let pairs: Vec<(f64, f64)> = (1..=6).map(|i| (10.0 + i as f64, 10.0)).collect();
        let r = wilcoxon_signed_rank(&pairs);
        assert!(r.exact);
        assert!((r.p_value - 0.03125).abs() < 1e-12);
        assert_eq!(r.w_neg, 0.0);
        assert_eq!(r.statistic, 0.0);
    }

    #[test]
    fn exact_p_matches_brute_force_enumeration() {
        // oracle: walk all 2^n sign assignments explicitly
        let brute = |ranks: &[f64], w_obs: f64| -> f64 {
            let n = ranks.len();
            let mut le = 0u64;
            let mut ge = 0u64;
            for mask in 0u64..(1 << n) {
                let w: f64 = (0..n)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| ranks[i])
                    .sum();
                if w <= w_obs + 1e-12 {
                    le += 1;
                }
                if w >= w_obs - 1e-12 {
                    ge += 1;
                }
            }
            let all = (1u64 << n) as f64;
            (2.0 * (le as f64 / all).min(ge as f64 / all)).min(1.0)
        };
        // includes ties (average ranks) via repeated magnitudes
        let cases: Vec<Vec<(f64, f64)>> = vec![
            vec![(5.0, 1.0), (4.0, 2.0), (1.0, 3.0), (9.0, 2.0), (3.0, 3.5)],
            vec![
                (1.0, 2.0),
                (2.0, 4.0),
                (3.0, 6.0),
                (4.0, 2.0),
                (5.0, 3.0),
                (6.0, 3.0),
            ],
            vec![
                (2.0, 1.0),
                (3.0, 2.0),
                (4.0, 3.0),
                (1.0, 2.0),
                (2.0, 3.0),
                (3.0, 4.0),
                (5.0, 1.0),
            ],
        ];
        for pairs in cases {
            let diffs: Vec<f64> = pairs
                .iter()
                .map(|&(a, b)| a - b)
                .filter(|d| *d != 0.0)
                .collect();
            let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
            let (ranks, _) = average_ranks(&abs);
            let w_pos: f64 = ranks
                .iter()
                .zip(&diffs)
                .filter(|(_, d)| **d > 0.0)
                .map(|(r, _)| r)
                .sum();
            let expected = brute(&ranks, w_pos);
            let got = wilcoxon_signed_rank(&pairs);
            assert!(got.exact);
            assert!(
                (got.p_value - expected).abs() < 1e-12,
                "exact {} vs brute {expected}",
                got.p_value
            );
        }
    }

    #[test]
    fn statistic_matches_naive_rank_computation() {
        // oracle ranks by pairwise counting rather than sorting
        let pairs = vec![
            (10.0, 8.0),
            (7.0, 9.5),
            (3.0, 3.0),
            (6.0, 2.0),
            (1.0, 5.0),
            (8.0, 6.0),
            (4.0, 4.5),
            (2.5, 2.0),
            (11.0, 7.0),
            (5.0, 5.5),
        ];
        let diffs: Vec<f64> = pairs
            .iter()
            .map(|&(a, b)| a - b)
            .filter(|d| *d != 0.0)
            .collect();
        let mut w_pos = 0.0;
        let mut w_neg = 0.0;
        for (i, &d) in diffs.iter().enumerate() {
            let below = diffs.iter().filter(|e| e.abs() < d.abs()).count();
            let equal = diffs.iter().filter(|e| e.abs() == d.abs()).count();
            let rank = below as f64 + (equal as f64 + 1.0) / 2.0;
            let _ = i;
            if d > 0.0 {
                w_pos += rank;
            } else {
                w_neg += rank;
            }
        }
        let r = wilcoxon_signed_rank(&pairs);
        assert!((r.w_pos - w_pos).abs() < 1e-12);
        assert!((r.w_neg - w_neg).abs() < 1e-12);
        assert!((r.statistic - w_pos.min(w_neg)).abs() < 1e-12);
    }

    #[test]
    fn branches_agree_near_the_crossover() {
        // seeded xorshift so the test stays self-contained
        let mut state = 0x1234_5678_9abc_def0u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..40 {
            let pairs: Vec<(f64, f64)> = (0..25).map(|_| (next(), next())).collect();
            let exact = wilcoxon_signed_rank_with(&pairs, Branch::Exact);
            let approx = wilcoxon_signed_rank_with(&pairs, Branch::Normal);
            assert!(
                (exact.p_value - approx.p_value).abs() < 0.01,
                "exact {} vs normal {}",
                exact.p_value,
                approx.p_value
            );
        }
    }

    #[test]
    fn normal_cdf_reference_points() {
        // the erfc fit is good to ~1.2e-7 relative
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-6);
        assert!((normal_cdf(1.959963985) - 0.975).abs() < 1e-6);
        assert!((normal_cdf(-1.959963985) - 0.025).abs() < 1e-6);
        assert!((normal_cdf(3.0) - 0.9986501019683699).abs() < 1e-6);
    }

    #[test]
    fn mean_and_variance_fixtures() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(sample_variance(&[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(sample_variance(&[42.0]), 0.0);
    }

    proptest! {
        #[test]
        fn p_values_are_probabilities(
            pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..40)
        ) {
            let r = wilcoxon_signed_rank(&pairs);
            prop_assert!((0.0..=1.0).contains(&r.p_value));
            prop_assert!(r.w_pos >= 0.0 && r.w_neg >= 0.0);
            let total = r.n_used as f64 * (r.n_used as f64 + 1.0) / 2.0;
            prop_assert!((r.w_pos + r.w_neg - total).abs() < 1e-9);
        }

        #[test]
        fn swapping_pairs_keeps_the_two_sided_p(
            pairs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 2..20)
        ) {
            let swapped: Vec<(f64, f64)> = pairs.iter().map(|&(a, b)| (b, a)).collect();
            let x = wilcoxon_signed_rank(&pairs);
            let y = wilcoxon_signed_rank(&swapped);
            prop_assert!((x.p_value - y.p_value).abs() < 1e-9);
        }
    }
}
