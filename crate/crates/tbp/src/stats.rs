//! Per-arm running statistics with pending-pull accounting.
//!
//! The mean and the sum of squared deviations are maintained with Welford's
//! one-pass recurrence, so episodes of tens of thousands of rounds keep the
//! drift against the batch formulas far below test tolerance. The variance
//! is the biased, divide-by-t estimator; no Bessel-corrected option exists
//! on purpose, since every index formula in this crate divides by t.

use crate::error::{Error, Result};

/// Running state for one arm.
///
/// `observed_count` counts rewards seen so far; `pending_count` counts
/// pulls issued whose rewards have not arrived yet. A reward may only be
/// recorded against a pending pull.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArmStats {
    observed_count: u64,
    pending_count: u64,
    mean_acc: f64,
    m2_acc: f64,
}

impl ArmStats {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of rewards observed so far.
    pub fn observed_count(&self) -> u64 {
        self.observed_count
    }

    /// Number of pulls issued but not yet observed.
    pub fn pending_count(&self) -> u64 {
        self.pending_count
    }

    /// Empirical mean of the observed rewards; 0.0 before the first reward.
    pub fn mean(&self) -> f64 {
        self.mean_acc
    }

    /// Biased (divide-by-t) empirical variance of the observed rewards;
    /// 0.0 before the first reward. Tiny negative rounding is clamped.
    pub fn variance(&self) -> f64 {
        if self.observed_count == 0 {
            return 0.0;
        }
        (self.m2_acc / self.observed_count as f64).max(0.0)
    }

    /// Square root of the divide-by-t variance.
    ///
    /// With a single observation this is 0 by construction.
    pub fn sigma_hat(&self) -> Result<f64> {
        if self.observed_count == 0 {
            return Err(Error::NoObservations);
        }
        Ok(self.variance().sqrt())
    }

    /// Marks one pull as issued; observed statistics are unchanged.
    pub fn record_pull_issued(&mut self) {
        self.pending_count += 1;
    }

    /// Resolves one pending pull with its observed reward.
    pub fn record_reward(&mut self, x: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::RewardOutOfRange(x));
        }
        if self.pending_count == 0 {
            return Err(Error::NoPendingPull);
        }
        self.pending_count -= 1;
        self.observed_count += 1;
        let delta = x - self.mean_acc;
        self.mean_acc += delta / self.observed_count as f64;
        self.m2_acc += delta * (x - self.mean_acc);
        Ok(())
    }
}
