//! Arm-selection indices and the final threshold classification.
//!
//! Every policy scores each arm and pulls the argmin; a smaller score means
//! the arm is harder to classify and deserves the next pull. All scores
//! share the shape `|mean - b| * S`, where `S` grows with the evidence
//! collected for the arm:
//!
//! * `atp` - `S = sqrt(T)`; first-moment only.
//! * `evt` / `ap_evt` - `S = (a/m + sqrt(a/m) * sigma)^-1` with
//!   `m = T + delta * tau`, so low-variance arms are retired early and
//!   pending pulls can be credited as partial evidence.
//! * `evt_pf` / `ap_evt_pf` - `B = sqrt(m) * (sqrt(sigma^2 + |mean - b|) - sigma)`,
//!   free of `a`, the budget, and the arm count.
//! * `evt_appendix` - `|mean - b| * (sqrt(2 sigma^2 a / m) + 3a/m)^-1`, the
//!   same index with the alternative constants 2 and 3; kept selectable so
//!   experiments can compare both forms.
//!
//! `T` is the arm's observed-reward count, `tau` its pending-pull count,
//! `sigma` the divide-by-t empirical standard deviation, and
//! `delta in [0,1]` the weight granted to pending pulls.

use crate::error::{Error, Result};
use crate::stats::ArmStats;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Atp,
    Evt,
    ApEvt,
    EvtPf,
    ApEvtPf,
    EvtAppendix,
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Atp => "atp",
            PolicyKind::Evt => "evt",
            PolicyKind::ApEvt => "ap_evt",
            PolicyKind::EvtPf => "evt_pf",
            PolicyKind::ApEvtPf => "ap_evt_pf",
            PolicyKind::EvtAppendix => "evt_appendix",
        }
    }

    /// Whether the exploration parameter `a` enters the index.
    pub fn uses_a(&self) -> bool {
        matches!(
            self,
            PolicyKind::Evt | PolicyKind::ApEvt | PolicyKind::EvtAppendix
        )
    }

    /// Whether the staleness weight `delta` enters the index.
    pub fn uses_delta(&self) -> bool {
        matches!(
            self,
            PolicyKind::ApEvt | PolicyKind::ApEvtPf | PolicyKind::EvtAppendix
        )
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A fully resolved policy: which index rule to use plus its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// The classification threshold.
    pub b: f64,
    /// Exploration parameter; ignored by `atp` and the parameter-free kinds.
    pub a: f64,
    /// Staleness weight in `[0,1]`; ignored by `atp`, `evt`, and `evt_pf`.
    pub delta: f64,
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.b.is_finite() {
            return Err(Error::InvalidPolicy(format!(
                "threshold b = {} is not finite",
                self.b
            )));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidPolicy(format!(
                "delta = {} outside [0,1]",
                self.delta
            )));
        }
        if !(self.a >= 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidPolicy(format!(
                "a = {} must be finite and nonnegative",
                self.a
            )));
        }
        if self.kind.uses_a() && self.a == 0.0 {
            return Err(Error::InvalidPolicy(format!(
                "policy {} requires a > 0",
                self.kind
            )));
        }
        Ok(())
    }

    /// The configured index of one arm, from its current statistics.
    ///
    /// The gap estimate `|mean - b|` is recomputed here on every call,
    /// never cached.
    pub fn index_for(&self, stats: &ArmStats) -> Result<f64> {
        let delta_hat = (stats.mean() - self.b).abs();
        let t = stats.observed_count();
        let tau = stats.pending_count();
        match self.kind {
            PolicyKind::Atp => index_atp(delta_hat, t),
            PolicyKind::Evt => index_ap_evt(delta_hat, stats.sigma_hat()?, t, tau, self.a, 0.0),
            PolicyKind::ApEvt => {
                index_ap_evt(delta_hat, stats.sigma_hat()?, t, tau, self.a, self.delta)
            }
            PolicyKind::EvtPf => index_ap_evt_pf(delta_hat, stats.sigma_hat()?, t, tau, 0.0),
            PolicyKind::ApEvtPf => {
                index_ap_evt_pf(delta_hat, stats.sigma_hat()?, t, tau, self.delta)
            }
            PolicyKind::EvtAppendix => {
                index_evt_appendix(delta_hat, stats.sigma_hat()?, t, tau, self.a, self.delta)
            }
        }
    }
}

/// First-moment index: `delta_hat * sqrt(T)`.
pub fn index_atp(delta_hat: f64, observed_count: u64) -> Result<f64> {
    if observed_count == 0 {
        return Err(Error::NoObservations);
    }
    Ok(delta_hat * (observed_count as f64).sqrt())
}

/// Variance-guided index `delta_hat / (a/m + sqrt(a/m) * sigma_hat)` with
/// `m = T + delta * tau`. With `delta * tau = 0` this is exactly the plain
/// variance-guided index, bit for bit.
pub fn index_ap_evt(
    delta_hat: f64,
    sigma_hat: f64,
    observed_count: u64,
    pending_count: u64,
    a: f64,
    delta: f64,
) -> Result<f64> {
    if a <= 0.0 {
        return Err(Error::InvalidPolicy(format!("a = {a} must be positive")));
    }
    if observed_count == 0 {
        return Err(Error::NoObservations);
    }
    let m = observed_count as f64 + delta * pending_count as f64;
    let ratio = a / m;
    Ok(delta_hat / (ratio + ratio.sqrt() * sigma_hat))
}

/// Parameter-free index `sqrt(m) * (sqrt(sigma_hat^2 + delta_hat) - sigma_hat)`
/// with `m = T + delta * tau`.
pub fn index_ap_evt_pf(
    delta_hat: f64,
    sigma_hat: f64,
    observed_count: u64,
    pending_count: u64,
    delta: f64,
) -> Result<f64> {
    if observed_count == 0 {
        return Err(Error::NoObservations);
    }
    let m = observed_count as f64 + delta * pending_count as f64;
    Ok(m.sqrt() * ((sigma_hat * sigma_hat + delta_hat).sqrt() - sigma_hat))
}

/// Alternative-constant variant:
/// `delta_hat / (sqrt(2 sigma_hat^2 a / m) + 3a/m)` with `m = T + delta * tau`.
pub fn index_evt_appendix(
    delta_hat: f64,
    sigma_hat: f64,
    observed_count: u64,
    pending_count: u64,
    a: f64,
    delta: f64,
) -> Result<f64> {
    if a <= 0.0 {
        return Err(Error::InvalidPolicy(format!("a = {a} must be positive")));
    }
    if observed_count == 0 {
        return Err(Error::NoObservations);
    }
    let m = observed_count as f64 + delta * pending_count as f64;
    let ratio = a / m;
    Ok(delta_hat / ((2.0 * sigma_hat * sigma_hat * ratio).sqrt() + 3.0 * ratio))
}

/// Picks the arm with the smallest index; ties go to the lowest arm index.
pub fn select_arm(per_arm_stats: &[ArmStats], config: &PolicyConfig) -> Result<usize> {
    config.validate()?;
    if per_arm_stats.is_empty() {
        return Err(Error::InvalidPolicy("no arms to select from".into()));
    }
    let mut best = 0usize;
    let mut best_index = f64::INFINITY;
    for (k, stats) in per_arm_stats.iter().enumerate() {
        let index = config.index_for(stats)?;
        if index < best_index {
            best = k;
            best_index = index;
        }
    }
    Ok(best)
}

/// Final split of the arms around the threshold.
///
/// Arm `k` lands in `above` iff its empirical mean is `>= b`; the two sets
/// partition `0..K` and are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub above: Vec<usize>,
    pub below: Vec<usize>,
}

impl Classification {
    pub fn is_above(&self, arm: usize) -> bool {
        self.above.binary_search(&arm).is_ok()
    }
}

/// Classifies every arm by comparing its empirical mean against `b`.
pub fn classify(per_arm_stats: &[ArmStats], b: f64) -> Result<Classification> {
    let mut above = Vec::new();
    let mut below = Vec::new();
    for (k, stats) in per_arm_stats.iter().enumerate() {
        if stats.observed_count() == 0 {
            return Err(Error::NoObservations);
        }
        if stats.mean() >= b {
            above.push(k);
        } else {
            below.push(k);
        }
    }
    Ok(Classification { above, below })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn stats_from(xs: &[f64]) -> ArmStats {
        let mut s = ArmStats::new();
        for &x in xs {
            s.record_pull_issued();
            s.record_reward(x).unwrap();
        }
        s
    }

    #[test]
    fn atp_index_examples() {
        assert_abs_diff_eq!(index_atp(0.1, 4).unwrap(), 0.2, epsilon = 1e-15);
        assert_eq!(index_atp(0.0, 100).unwrap(), 0.0);
        assert_abs_diff_eq!(index_atp(0.25, 16).unwrap(), 1.0, epsilon = 1e-15);
        assert!(matches!(index_atp(0.1, 0), Err(Error::NoObservations)));
    }

    #[test]
    fn ap_evt_index_examples() {
        // Frozen from direct evaluation of delta_hat / (a/m + sqrt(a/m) sigma).
        assert_abs_diff_eq!(
            index_ap_evt(0.1, 0.2, 4, 0, 10.0, 0.0).unwrap(),
            0.03550849160948231,
            epsilon = 1e-15
        );
        // Zero variance collapses to delta_hat * m / a.
        assert_abs_diff_eq!(
            index_ap_evt(0.1, 0.0, 4, 0, 10.0, 0.0).unwrap(),
            0.04,
            epsilon = 1e-15
        );
        // m = 4 + 0.5 * 2 = 5.
        assert_abs_diff_eq!(
            index_ap_evt(0.1, 0.2, 4, 2, 10.0, 0.5).unwrap(),
            0.04380503284503524,
            epsilon = 1e-15
        );
        assert!(matches!(
            index_ap_evt(0.1, 0.2, 4, 0, 0.0, 0.0),
            Err(Error::InvalidPolicy(_))
        ));
        assert!(matches!(
            index_ap_evt(0.1, 0.2, 0, 0, 10.0, 0.0),
            Err(Error::NoObservations)
        ));
    }

    #[test]
    fn ap_evt_pf_index_examples() {
        // sqrt(5) * (sqrt(0.04) - 0) frozen.
        assert_abs_diff_eq!(
            index_ap_evt_pf(0.04, 0.0, 4, 2, 0.5).unwrap(),
            0.447213595499958,
            epsilon = 1e-15
        );
        // Zero gap: sqrt(sigma^2) - sigma = 0.
        assert_eq!(index_ap_evt_pf(0.0, 0.3, 9, 0, 0.0).unwrap(), 0.0);
        // 2 * (sqrt(0.25) - 0.2).
        assert_abs_diff_eq!(
            index_ap_evt_pf(0.21, 0.2, 4, 0, 0.0).unwrap(),
            0.6,
            epsilon = 1e-15
        );
    }

    #[test]
    fn appendix_index_example() {
        // Frozen from delta_hat / (sqrt(2 sigma^2 a/m) + 3a/m).
        assert_abs_diff_eq!(
            index_evt_appendix(0.1, 0.2, 4, 0, 10.0, 0.0).unwrap(),
            0.012583026591436293,
            epsilon = 1e-15
        );
        assert!(matches!(
            index_evt_appendix(0.1, 0.2, 4, 0, -1.0, 0.0),
            Err(Error::InvalidPolicy(_))
        ));
    }

    #[test]
    fn reduction_is_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let dh = rng.gen::<f64>();
            let sh = rng.gen::<f64>() * 0.5;
            let t = rng.gen_range(1u64..200);
            let tau = rng.gen_range(0u64..50);
            let a = rng.gen::<f64>() * 40.0 + 0.1;
            let delta = rng.gen::<f64>();
            let plain = index_ap_evt(dh, sh, t, 0, a, delta).unwrap();
            assert_eq!(plain.to_bits(), index_ap_evt(dh, sh, t, 0, a, 0.0).unwrap().to_bits());
            assert_eq!(
                plain.to_bits(),
                index_ap_evt(dh, sh, t, tau, a, 0.0).unwrap().to_bits()
            );
            let plain_pf = index_ap_evt_pf(dh, sh, t, 0, delta).unwrap();
            assert_eq!(
                plain_pf.to_bits(),
                index_ap_evt_pf(dh, sh, t, tau, 0.0).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn indices_nondecreasing_in_observed_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let dh = rng.gen::<f64>() * 0.5;
            let sh = rng.gen::<f64>() * 0.5;
            let t = rng.gen_range(1u64..500);
            let tau = rng.gen_range(0u64..20);
            let a = rng.gen::<f64>() * 30.0 + 0.5;
            let delta = rng.gen::<f64>();
            let pairs = [
                (
                    index_atp(dh, t).unwrap(),
                    index_atp(dh, t + 1).unwrap(),
                ),
                (
                    index_ap_evt(dh, sh, t, tau, a, delta).unwrap(),
                    index_ap_evt(dh, sh, t + 1, tau, a, delta).unwrap(),
                ),
                (
                    index_ap_evt_pf(dh, sh, t, tau, delta).unwrap(),
                    index_ap_evt_pf(dh, sh, t + 1, tau, delta).unwrap(),
                ),
                (
                    index_evt_appendix(dh, sh, t, tau, a, delta).unwrap(),
                    index_evt_appendix(dh, sh, t + 1, tau, a, delta).unwrap(),
                ),
            ];
            for (lo, hi) in pairs {
                assert!(hi >= lo - 1e-12 * lo.abs().max(1.0), "{hi} < {lo}");
            }
        }
    }

    #[test]
    fn indices_nondecreasing_in_staleness_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let dh = rng.gen::<f64>() * 0.5;
            let sh = rng.gen::<f64>() * 0.5;
            let t = rng.gen_range(1u64..500);
            let tau = rng.gen_range(0u64..30);
            let a = rng.gen::<f64>() * 30.0 + 0.5;
            let d1 = rng.gen::<f64>();
            let d2 = rng.gen::<f64>();
            let (d_lo, d_hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let lo = index_ap_evt(dh, sh, t, tau, a, d_lo).unwrap();
            let hi = index_ap_evt(dh, sh, t, tau, a, d_hi).unwrap();
            assert!(hi >= lo - 1e-12 * lo.abs().max(1.0));
            let lo = index_ap_evt_pf(dh, sh, t, tau, d_lo).unwrap();
            let hi = index_ap_evt_pf(dh, sh, t, tau, d_hi).unwrap();
            assert!(hi >= lo - 1e-12 * lo.abs().max(1.0));
        }
    }

    #[test]
    fn select_arm_atp_example() {
        // Means 0.6 and 0.8 against b = 0.7: equal gaps, T = 4 vs 9.
        let arms = vec![
            stats_from(&[0.6, 0.6, 0.6, 0.6]),
            stats_from(&[0.8; 9]),
        ];
        let config = PolicyConfig {
            kind: PolicyKind::Atp,
            b: 0.7,
            a: 0.0,
            delta: 0.0,
        };
        // Indices 0.2 < 0.3.
        assert_eq!(select_arm(&arms, &config).unwrap(), 0);
    }

    #[test]
    fn select_arm_breaks_ties_by_lowest_index() {
        let arms = vec![stats_from(&[0.6, 0.8]), stats_from(&[0.6, 0.8])];
        let config = PolicyConfig {
            kind: PolicyKind::Atp,
            b: 0.7,
            a: 0.0,
            delta: 0.0,
        };
        assert_eq!(select_arm(&arms, &config).unwrap(), 0);
    }

    #[test]
    fn select_arm_ap_evt_example() {
        // Arm 0: mean 0.6, sigma 0.2, T = 4; arm 1: mean 0.66, sigma 0, T = 4.
        let arms = vec![
            stats_from(&[0.4, 0.4, 0.8, 0.8]),
            stats_from(&[0.66; 4]),
        ];
        let config = PolicyConfig {
            kind: PolicyKind::ApEvt,
            b: 0.7,
            a: 10.0,
            delta: 0.0,
        };
        // Indices ~0.0355 vs 0.016: the low-variance arm wins.
        assert_eq!(select_arm(&arms, &config).unwrap(), 1);
    }

    #[test]
    fn select_arm_requires_observations() {
        let arms = vec![stats_from(&[0.5]), ArmStats::new()];
        let config = PolicyConfig {
            kind: PolicyKind::Atp,
            b: 0.5,
            a: 0.0,
            delta: 0.0,
        };
        assert!(matches!(
            select_arm(&arms, &config),
            Err(Error::NoObservations)
        ));
        assert!(matches!(
            select_arm(&[], &config),
            Err(Error::InvalidPolicy(_))
        ));
    }

    #[test]
    fn select_arm_commutes_with_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let config = PolicyConfig {
            kind: PolicyKind::EvtPf,
            b: 0.5,
            a: 0.0,
            delta: 0.0,
        };
        for _ in 0..200 {
            let k = rng.gen_range(2usize..6);
            let arms: Vec<ArmStats> = (0..k)
                .map(|_| {
                    let len = rng.gen_range(2usize..8);
                    let xs: Vec<f64> = (0..len).map(|_| rng.gen()).collect();
                    stats_from(&xs)
                })
                .collect();
            let winner = select_arm(&arms, &config).unwrap();
            let win_index = config.index_for(&arms[winner]).unwrap();
            let strictly_minimal = arms
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != winner)
                .all(|(_, s)| config.index_for(s).unwrap() > win_index);
            if !strictly_minimal {
                continue;
            }
            // Rotate and check the winner maps through the permutation.
            let shift = rng.gen_range(1..k);
            let mut permuted = arms.clone();
            permuted.rotate_left(shift);
            let mapped = select_arm(&permuted, &config).unwrap();
            assert_eq!((mapped + shift) % k, winner);
        }
    }

    #[test]
    fn classify_examples() {
        let arms = vec![stats_from(&[0.8, 0.8]), stats_from(&[0.6, 0.6])];
        let c = classify(&arms, 0.7).unwrap();
        assert_eq!(c.above, vec![0]);
        assert_eq!(c.below, vec![1]);
        assert!(c.is_above(0));
        assert!(!c.is_above(1));

        // Boundary uses >=.
        let c = classify(&[stats_from(&[0.7, 0.7])], 0.7).unwrap();
        assert_eq!(c.above, vec![0]);

        let arms = vec![
            stats_from(&[0.69, 0.69]),
            stats_from(&[0.71, 0.71]),
            stats_from(&[0.7, 0.7]),
        ];
        let c = classify(&arms, 0.7).unwrap();
        assert_eq!(c.above, vec![1, 2]);
        assert_eq!(c.below, vec![0]);
    }

    #[test]
    fn classify_requires_observations() {
        assert!(matches!(
            classify(&[ArmStats::new()], 0.5),
            Err(Error::NoObservations)
        ));
    }

    #[test]
    fn policy_config_validation() {
        let mut config = PolicyConfig {
            kind: PolicyKind::Evt,
            b: 0.5,
            a: 2.0,
            delta: 0.0,
        };
        assert!(config.validate().is_ok());
        config.a = 0.0;
        assert!(config.validate().is_err());
        config.a = 2.0;
        config.delta = 1.5;
        assert!(config.validate().is_err());
        config.delta = 0.0;
        config.b = f64::NAN;
        assert!(config.validate().is_err());
    }
}
