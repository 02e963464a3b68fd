//! Medians with distribution-free confidence intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{Error, Result};

/// Median with an order-statistic confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MedianCi {
    pub median: f64,
    pub lo: f64,
    pub hi: f64,
    /// Exact binomial coverage of `[lo, hi]` before any widening.
    pub coverage: f64,
}

impl MedianCi {
    /// Widen for quantities observed on a grid of spacing `dt` that
    /// truncate downwards (valid time `(n-1)Δt` for a crossing inside
    /// `((n-1)Δt, nΔt]`): the upper end moves up by one grid step.
    pub fn widen_for_grid(mut self, dt: f64) -> Self {
        self.hi += dt;
        self
    }

    pub fn scaled(self, s: f64) -> Self {
        Self {
            median: self.median * s,
            lo: self.lo * s,
            hi: self.hi * s,
            coverage: self.coverage,
        }
    }
}

pub fn median(samples: &[f64]) -> Result<f64> {
    let mut v = samples.to_vec();
    if v.is_empty() {
        return Err(Error::InvalidParameter("median of an empty sample".into()));
    }
    v.sort_by(f64::total_cmp);
    Ok(sorted_median(&v))
}

fn sorted_median(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        let (a, b) = (v[n / 2 - 1], v[n / 2]);
        if a == b {
            a
        } else {
            0.5 * (a + b)
        }
    }
}

/// Median and the order-statistic interval `[x_(r), x_(n-r+1)]` with the
/// largest `r` whose coverage `1 - 2 P(B ≤ r-1)`, `B ~ Bin(n, 1/2)`, is at
/// least `level`. For very small samples the full range is returned and
/// `coverage` reports the (lower) attained level.
pub fn median_ci(samples: &[f64], level: f64) -> Result<MedianCi> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("median of an empty sample".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence level {level} outside (0, 1)"
        )));
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let binom = Binomial::new(0.5, n as u64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let alpha_half = 0.5 * (1.0 - level);
    let mut r = 1;
    while r < n.div_ceil(2) && binom.cdf(r as u64) <= alpha_half {
        r += 1;
    }
    let coverage = 1.0 - 2.0 * if r > 1 { binom.cdf(r as u64 - 1) } else { 0.0 };
    let coverage = coverage.clamp(0.0, 1.0);
    Ok(MedianCi {
        median: sorted_median(&v),
        lo: v[r - 1],
        hi: v[n - r],
        coverage,
    })
}
