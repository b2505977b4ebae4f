//! Binomial estimates with Wilson score intervals.

/// z for a two-sided 95% interval.
pub const Z_95: f64 = 1.96;

/// Wilson score interval for `successes` out of `trials`, clamped to `[0, 1]`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials >= 1, "wilson_interval needs at least one trial");
    assert!(successes <= trials, "more successes than trials");
    assert!(z > 0.0, "z must be positive");

    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();

    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).clamp(0.0, p)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).clamp(p, 1.0)
    };
    (lo, hi)
}

/// Standard deviation of a binomial proportion with success probability `p`.
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// A success frequency with its confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithCI {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
    pub z: f64,
}

impl EstimateWithCI {
    pub fn from_counts(successes: u64, trials: u64, z: f64) -> Self {
        let (lo, hi) = wilson_interval(successes, trials, z);
        EstimateWithCI {
            successes,
            trials,
            estimate: successes as f64 / trials as f64,
            lo,
            hi,
            z,
        }
    }

    /// Same counts at a different confidence level.
    pub fn with_z(&self, z: f64) -> Self {
        Self::from_counts(self.successes, self.trials, z)
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }
}
