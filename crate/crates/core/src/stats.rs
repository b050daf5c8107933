//! Binomial confidence intervals for Monte Carlo assertions.

/// Number of standard deviations used by every empirical assertion.
pub const SIGMAS: f64 = 3.0;

/// Wilson score interval for `successes` out of `trials` at `z` standard deviations.
pub fn wilson(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * ((p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()) / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Plain binomial standard error of the empirical frequency.
pub fn stderr(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let p = successes as f64 / trials as f64;
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// An empirical frequency is consistent with a lower bound when the bound does not
/// exceed the upper end of the 3-sigma Wilson interval.
pub fn consistent_with_lower_bound(successes: u64, trials: u64, bound: f64) -> bool {
    wilson(successes, trials, SIGMAS).1 >= bound
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_mle() {
        let (lo, hi) = wilson(30, 100, 3.0);
        assert!(lo < 0.3 && 0.3 < hi);
        let (lo, hi) = wilson(0, 50, 3.0);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.3);
    }
}
