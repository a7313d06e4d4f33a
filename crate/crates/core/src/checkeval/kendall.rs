//! Tie-corrected Kendall rank correlation (tau-b).
//!
//! `tau = (C − D) / sqrt((n0 − n1)(n0 − n2))` with `n0 = n(n−1)/2` and
//! `n1`, `n2` the tied-pair counts within each input. Discordant pairs are
//! counted with a merge sort over the second coordinate after sorting by the
//! first, so the whole computation is O(n log n) rather than the quadratic
//! pairwise enumeration (which the tests use as the oracle).

use super::CheckevalError;

pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64, CheckevalError> {
    if x.len() != y.len() {
        return Err(CheckevalError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(CheckevalError::TooShort);
    }

    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    // tied pairs within x, and jointly within (x, y)
    let mut x_ties = 0u64;
    let mut xy_ties = 0u64;
    let mut run_x = 1u64;
    let mut run_xy = 1u64;
    for i in 1..n {
        if pairs[i].0 == pairs[i - 1].0 {
            run_x += 1;
            if pairs[i].1 == pairs[i - 1].1 {
                run_xy += 1;
            } else {
                xy_ties += run_xy * (run_xy - 1) / 2;
                run_xy = 1;
            }
        } else {
            x_ties += run_x * (run_x - 1) / 2;
            run_x = 1;
            xy_ties += run_xy * (run_xy - 1) / 2;
            run_xy = 1;
        }
    }
    x_ties += run_x * (run_x - 1) / 2;
    xy_ties += run_xy * (run_xy - 1) / 2;

    // discordant pairs = inversions of the y sequence under the x-order
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut scratch = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut scratch);

    // tied pairs within y
    let mut y_sorted: Vec<f64> = y.to_vec();
    y_sorted.sort_by(f64::total_cmp);
    let mut y_ties = 0u64;
    let mut run_y = 1u64;
    for i in 1..n {
        if y_sorted[i] == y_sorted[i - 1] {
            run_y += 1;
        } else {
            y_ties += run_y * (run_y - 1) / 2;
            run_y = 1;
        }
    }
    y_ties += run_y * (run_y - 1) / 2;

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    if n0 == x_ties || n0 == y_ties {
        return Err(CheckevalError::AllTied);
    }
    let concordant_minus_discordant =
        n0 as f64 - x_ties as f64 - y_ties as f64 + xy_ties as f64 - 2.0 * swaps as f64;
    let denominator = ((n0 - x_ties) as f64 * (n0 - y_ties) as f64).sqrt();
    Ok((concordant_minus_discordant / denominator).clamp(-1.0, 1.0))
}

/// Merge sort counting the inversions it removes. Equal elements are not
/// inversions, matching tau's strict discordance.
fn merge_count(values: &mut [f64], scratch: &mut [f64]) -> u64 {
    let n = values.len();
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid || j < end {
                if i < mid && (j >= end || values[i] <= values[j]) {
                    scratch[k] = values[i];
                    i += 1;
                } else {
                    // values[j] jumps over the mid - i elements still waiting
                    swaps += (mid - i) as u64;
                    scratch[k] = values[j];
                    j += 1;
                }
                k += 1;
            }
            values[start..end].copy_from_slice(&scratch[start..end]);
            start = end;
        }
        width *= 2;
    }
    swaps
}
