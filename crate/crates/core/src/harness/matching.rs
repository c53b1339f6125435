use crate::geometry::Angle;

/// Pairs estimates with true angles so that the summed absolute error is
/// minimal. Returns one error per true angle (degrees, in truth order);
/// truths left without an estimate get `+∞`.
///
/// Estimates beyond the number of truths are ignored.
pub fn match_estimates(truth: &[Angle], estimates: &[Angle]) -> Vec<f64> {
    let n = truth.len();
    let m = estimates.len().min(n);
    assert!(n < usize::BITS as usize, "too many users for exact matching");

    // dp[mask]: cheapest assignment of the first popcount(mask) estimates to the
    // truths in mask.
    let full = 1usize << n;
    let mut dp = vec![f64::INFINITY; full];
    let mut parent = vec![usize::MAX; full];
    dp[0] = 0.0;
    let mut best_mask = 0;
    let mut best_cost = if m == 0 { 0.0 } else { f64::INFINITY };
    for mask in 0..full {
        let j = mask.count_ones() as usize;
        if !dp[mask].is_finite() {
            continue;
        }
        if j == m {
            if dp[mask] < best_cost {
                best_cost = dp[mask];
                best_mask = mask;
            }
            continue;
        }
        for t in 0..n {
            let bit = 1 << t;
            if mask & bit != 0 {
                continue;
            }
            let cost = dp[mask] + truth[t].abs_diff_deg(estimates[j]);
            if cost < dp[mask | bit] {
                dp[mask | bit] = cost;
                parent[mask | bit] = t;
            }
        }
    }

    let mut errors = vec![f64::INFINITY; n];
    let mut mask = best_mask;
    while mask != 0 {
        let t = parent[mask];
        let j = mask.count_ones() as usize - 1;
        errors[t] = truth[t].abs_diff_deg(estimates[j]);
        mask &= !(1 << t);
    }
    errors
}
