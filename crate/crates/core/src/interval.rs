//! Jeffreys interval for a binomial proportion.
//!
//! The interval is the equal-tailed credible interval of the
//! `Beta(k + 1/2, n - k + 1/2)` posterior, with the usual boundary
//! conventions: the lower end is pinned to 0 when `k == 0` and the upper end
//! to 1 when `k == n`.

use serde::{Deserialize, Serialize};
use statrs::function::beta::inv_beta_reg;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub const UNIT: Interval = Interval {
        low: 0.0,
        high: 1.0,
    };

    pub fn point(value: f64) -> Self {
        Interval {
            low: value,
            high: value,
        }
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    pub fn contains(&self, value: f64) -> bool {
        self.low <= value && value <= self.high
    }

    /// Distance from `value` to the interval, 0 when inside.
    pub fn distance(&self, value: f64) -> f64 {
        (self.low - value).max(value - self.high).max(0.0)
    }
}

/// Jeffreys interval for `k` successes out of `n` trials at level `alpha`.
///
/// `n == 0` yields the uninformative interval `[0, 1]`.
pub fn jeffreys_interval(k: u64, n: u64, alpha: f64) -> Result<Interval> {
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "successes ({k}) exceed trials ({n})"
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if n == 0 {
        return Ok(Interval::UNIT);
    }
    let a = k as f64 + 0.5;
    let b = (n - k) as f64 + 0.5;
    let low = if k == 0 {
        0.0
    } else {
        inv_beta_reg(a, b, alpha / 2.0)
    };
    let high = if k == n {
        1.0
    } else {
        // upper quantile through the mirrored distribution keeps the tail accurate
        1.0 - inv_beta_reg(b, a, alpha / 2.0)
    };
    Ok(Interval {
        low: low.clamp(0.0, 1.0),
        high: high.clamp(0.0, 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_successes_pins_lower_bound() {
        let ci = jeffreys_interval(0, 50, 0.05).unwrap();
        assert_eq!(ci.low, 0.0);
        assert!(ci.high > 0.0 && ci.high < 0.1);
    }

    #[test]
    fn all_successes_pins_upper_bound() {
        let ci = jeffreys_interval(50, 50, 0.05).unwrap();
        assert_eq!(ci.high, 1.0);
    }

    #[test]
    fn no_trials_is_uninformative() {
        assert_eq!(jeffreys_interval(0, 0, 0.05).unwrap(), Interval::UNIT);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(jeffreys_interval(3, 2, 0.05).is_err());
        assert!(jeffreys_interval(1, 2, 0.0).is_err());
        assert!(jeffreys_interval(1, 2, 1.0).is_err());
    }

    #[test]
    fn mirrored_counts_mirror_the_interval() {
        for n in [1u64, 7, 20, 133] {
            for k in 0..=n {
                let a = jeffreys_interval(k, n, 0.05).unwrap();
                let b = jeffreys_interval(n - k, n, 0.05).unwrap();
                assert!((a.low - (1.0 - b.high)).abs() < 1e-12, "k={k} n={n}");
                assert!((a.high - (1.0 - b.low)).abs() < 1e-12, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn distance_is_zero_inside() {
        let ci = Interval {
            low: 0.1,
            high: 0.3,
        };
        assert_eq!(ci.distance(0.2), 0.0);
        assert!((ci.distance(0.9) - 0.6).abs() < 1e-15);
        assert!((ci.distance(0.0) - 0.1).abs() < 1e-15);
    }
}
