//! Small numeric helpers shared across the crate.

/// Pairwise summation with a fixed reduction order.
///
/// Every reduction in the crate goes through this function so that results do
/// not depend on how callers happen to accumulate terms.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        3 => (xs[0] + xs[1]) + xs[2],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}
