//! Problem-complexity constants, gap/variance inequalities, Bernoulli KL
//! helpers, required-round formulas, and a hard-instance generator.
//!
//! The budget an index policy needs scales with an instance-dependent
//! constant built from the per-arm gaps `gap_k = |mu_k - b|` and variances:
//!
//! * `h_atp = sum gap_k^-2`
//! * `h_evt = sum (var_k * gap_k^-2 + gap_k^-1)`
//! * `h_ap_evt(delta, eta) = (1 + delta*eta)^2 * h_evt`
//! * `h_ap_evt_pf(delta, eta) = (1 + delta*eta) * h_evt`
//!
//! where `eta` bounds the per-arm pending/observed ratio. For arms bounded
//! in `[0,1]`, `var + |mu - b| <= 1` always, which gives `h_evt <= h_atp`:
//! variance-guided policies never face a harder constant than the
//! first-moment policy, and face a much smaller one when variances are low.

use crate::env::ArmModel;
use crate::error::{Error, Result};
use crate::policies::PolicyKind;

/// Closed-form complexity constants of a fully known instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSummary {
    /// Per-arm `|mu_k - b|`; all strictly positive.
    pub gaps: Vec<f64>,
    /// Per-arm true variances.
    pub variances: Vec<f64>,
    pub h_atp: f64,
    pub h_evt: f64,
}

impl ProblemSummary {
    /// Staleness-inflated constant `(1 + delta*eta)^2 * h_evt`.
    pub fn h_ap_evt(&self, delta: f64, eta: f64) -> f64 {
        let inflation = 1.0 + delta * eta;
        inflation * inflation * self.h_evt
    }

    /// Staleness-inflated constant `(1 + delta*eta) * h_evt` for the
    /// parameter-free index.
    pub fn h_ap_evt_pf(&self, delta: f64, eta: f64) -> f64 {
        (1.0 + delta * eta) * self.h_evt
    }
}

/// Computes the exact complexity constants from the true arm models.
///
/// Any arm whose mean equals `b` has a zero gap and would make every
/// constant infinite; such instances are rejected.
pub fn summarize(arms: &[ArmModel], b: f64) -> Result<ProblemSummary> {
    if arms.is_empty() {
        return Err(Error::Domain("instance has no arms".into()));
    }
    let mut gaps = Vec::with_capacity(arms.len());
    let mut variances = Vec::with_capacity(arms.len());
    let mut h_atp = 0.0;
    let mut h_evt = 0.0;
    for (k, arm) in arms.iter().enumerate() {
        arm.validate()?;
        let gap = (arm.mean() - b).abs();
        if gap == 0.0 {
            return Err(Error::DegenerateInstance { arm: k, b });
        }
        let var = arm.variance();
        h_atp += gap.powi(-2);
        h_evt += var * gap.powi(-2) + gap.recip();
        gaps.push(gap);
        variances.push(var);
    }
    Ok(ProblemSummary {
        gaps,
        variances,
        h_atp,
        h_evt,
    })
}

/// Budget suggested by the round-complexity formula
/// `big_theta * H * (log(n_probe * K) + log(1/epsilon))`, plus
/// `(1 - delta) * tau` for the asynchronous kinds.
///
/// `big_theta` is caller-supplied (the leading constant is not pinned by
/// theory) and `eta` only enters the asynchronous constants. The result is
/// a theory curve for plotting against measured success rates, not a
/// guarantee.
#[allow(clippy::too_many_arguments)]
pub fn required_rounds(
    summary: &ProblemSummary,
    kind: PolicyKind,
    epsilon: f64,
    big_theta: f64,
    n_probe: u64,
    k: usize,
    tau: u64,
    delta: f64,
    eta: f64,
) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon = {epsilon} outside (0,1)")));
    }
    if !(big_theta > 0.0) {
        return Err(Error::Domain(format!("big_theta = {big_theta} must be positive")));
    }
    let h = match kind {
        PolicyKind::Atp => summary.h_atp,
        PolicyKind::Evt | PolicyKind::EvtPf | PolicyKind::EvtAppendix => summary.h_evt,
        PolicyKind::ApEvt => summary.h_ap_evt(delta, eta),
        PolicyKind::ApEvtPf => summary.h_ap_evt_pf(delta, eta),
    };
    let logs = (n_probe as f64 * k as f64).ln() + epsilon.recip().ln();
    let mut rounds = big_theta * h * logs;
    if matches!(kind, PolicyKind::ApEvt | PolicyKind::ApEvtPf) {
        rounds += (1.0 - delta) * tau as f64;
    }
    Ok(rounds)
}

/// KL divergence between `Ber(1/2 + gap)` and `Ber(1/2 - gap)` in the
/// symmetric form `gap * log((1/2 + gap) / (1/2 - gap))`; bounded above by
/// `8 * gap^2` on the admissible range `(0, 1/4]`.
pub fn kl_bernoulli_gap(gap: f64) -> Result<f64> {
    if !(gap > 0.0 && gap <= 0.25) {
        return Err(Error::Domain(format!("gap = {gap} outside (0, 1/4]")));
    }
    Ok(gap * ((0.5 + gap) / (0.5 - gap)).ln())
}

/// Threshold used by every hard instance from [`make_tbp_instance`].
pub const TBP_THRESHOLD: f64 = 0.5;

/// Builds hard-instance family member `i` over `K = gaps.len()` Bernoulli
/// arms around the threshold 1/2: for `i = 0` every arm `k` sits above at
/// `1/2 + gaps[k]`; for `i in 1..=K` arm `i` (1-based) sits below at
/// `1/2 - gaps[i-1]` while the others stay above. All members share the
/// same gap profile, hence the same complexity constants.
pub fn make_tbp_instance(i: usize, gaps: &[f64]) -> Result<Vec<ArmModel>> {
    if gaps.is_empty() {
        return Err(Error::Domain("gaps must be non-empty".into()));
    }
    if i > gaps.len() {
        return Err(Error::Domain(format!(
            "instance index {i} outside 0..={}",
            gaps.len()
        )));
    }
    for &gap in gaps {
        if !(gap > 0.0 && gap <= 0.25) {
            return Err(Error::Domain(format!("gap = {gap} outside (0, 1/4]")));
        }
    }
    Ok(gaps
        .iter()
        .enumerate()
        .map(|(k, &gap)| {
            let below = i >= 1 && k == i - 1;
            let p = if below {
                TBP_THRESHOLD - gap
            } else {
                TBP_THRESHOLD + gap
            };
            ArmModel::Bernoulli { p }
        })
        .collect())
}

/// Checks `var + |mu - b| <= 1` on every `(mu, var, b)` sample, together
/// with the scaled corollary `var * gap^-2 + gap^-1 <= gap^-2`.
///
/// Samples must be admissible: `mu, b in [0,1]` and `var <= mu * (1 - mu)`,
/// the largest variance a `[0,1]`-supported distribution with mean `mu` can
/// have. For admissible samples the inequality always holds; the function
/// exists as a tested oracle for that fact.
pub fn check_compare_lemma(samples: &[(f64, f64, f64)]) -> Result<bool> {
    for &(mu, sigma_sq, b) in samples {
        if !(0.0..=1.0).contains(&mu) || !(0.0..=1.0).contains(&b) || !(sigma_sq >= 0.0) {
            return Err(Error::Domain(format!(
                "inadmissible sample (mu={mu}, var={sigma_sq}, b={b})"
            )));
        }
        if sigma_sq > mu * (1.0 - mu) {
            return Err(Error::Domain(format!(
                "variance {sigma_sq} exceeds mu(1-mu) = {}",
                mu * (1.0 - mu)
            )));
        }
        let gap = (mu - b).abs();
        if sigma_sq + gap > 1.0 {
            return Ok(false);
        }
        if gap > 0.0 {
            let evt_term = sigma_sq / (gap * gap) + 1.0 / gap;
            let atp_term = 1.0 / (gap * gap);
            if evt_term > atp_term {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Mistake-probability floor `exp(-10 n / h_evt - 16 log(5 n K))` used by
/// the hard-instance stress run. At desk scale the floor is astronomically
/// small; it is printed for transparency, not tightness.
pub fn lower_bound_mistake_probability(n: u64, k: usize, h_evt: f64) -> f64 {
    (-10.0 * n as f64 / h_evt - 16.0 * (5.0 * n as f64 * k as f64).ln()).exp()
}
