//! Virtual-time episode engine.
//!
//! One round is one decision in which exactly one pull is issued. Rewards
//! are drawn from per-arm generator streams at issue time and revealed at
//! their due round, so a delay model changes *when* evidence arrives, never
//! *what* it is: reward streams are comparable across delay settings at a
//! fixed seed, and adding arms does not perturb other arms' draws.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policies::{classify, select_arm, Classification, PolicyConfig};
use crate::seed::{stream_rng, STREAM_REWARD};
use crate::stats::ArmStats;

/// The true (hidden) reward distribution of one arm. All supports must lie
/// inside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArmModel {
    Bernoulli { p: f64 },
    UniformInterval { mu: f64, r: f64 },
    PointMass { value: f64 },
}

impl ArmModel {
    /// True mean of the distribution.
    pub fn mean(&self) -> f64 {
        match *self {
            ArmModel::Bernoulli { p } => p,
            ArmModel::UniformInterval { mu, .. } => mu,
            ArmModel::PointMass { value } => value,
        }
    }

    /// True variance of the distribution.
    pub fn variance(&self) -> f64 {
        match *self {
            ArmModel::Bernoulli { p } => p * (1.0 - p),
            ArmModel::UniformInterval { r, .. } => r * r / 3.0,
            ArmModel::PointMass { .. } => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ArmModel::Bernoulli { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidArm(format!("bernoulli p = {p} outside [0,1]")));
                }
            }
            ArmModel::UniformInterval { mu, r } => {
                if !(r >= 0.0) || !(mu - r >= 0.0) || !(mu + r <= 1.0) {
                    return Err(Error::InvalidArm(format!(
                        "uniform support [{}, {}] not within [0,1]",
                        mu - r,
                        mu + r
                    )));
                }
            }
            ArmModel::PointMass { value } => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::InvalidArm(format!(
                        "point mass {value} outside [0,1]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Draws one reward; consumes exactly one uniform variate.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        match *self {
            ArmModel::Bernoulli { p } => {
                if u < p {
                    1.0
                } else {
                    0.0
                }
            }
            ArmModel::UniformInterval { mu, r } => mu - r + 2.0 * r * u,
            ArmModel::PointMass { value } => value,
        }
    }
}

/// When an issued pull's reward becomes observable.
///
/// * `None` - every reward is observed before the next decision.
/// * `FixedDelay` - a pull issued at round `t` is observable at `t + d`.
/// * `MaxPending` - rewards return only when the in-flight count would
///   otherwise reach `tau_max`: before each decision the oldest pulls
///   resolve until fewer than `tau_max` remain, so the total pending count
///   never exceeds `tau_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DelayModel {
    None,
    FixedDelay { d: u64 },
    MaxPending { tau_max: u64 },
}

impl DelayModel {
    pub fn label(&self) -> String {
        match self {
            DelayModel::None => "none".to_string(),
            DelayModel::FixedDelay { d } => format!("fixed_delay({d})"),
            DelayModel::MaxPending { tau_max } => format!("max_pending({tau_max})"),
        }
    }

    fn due_round(&self, issue_round: u64) -> u64 {
        match *self {
            DelayModel::None => issue_round,
            DelayModel::FixedDelay { d } => issue_round.saturating_add(d),
            // Resolution is driven by the pending cap, not by time.
            DelayModel::MaxPending { .. } => u64::MAX,
        }
    }
}

/// An issued pull whose reward has not been observed yet. The reward was
/// drawn at issue time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendingPull {
    pub arm: usize,
    pub issue_round: u64,
    pub due_round: u64,
    pub reward: f64,
}

/// FIFO queue of in-flight pulls, held in issue order.
#[derive(Debug, Clone, Default)]
pub struct PendingQueue {
    entries: VecDeque<PendingPull>,
}

impl PendingQueue {
    pub fn push(&mut self, pull: PendingPull) {
        debug_assert!(self
            .entries
            .back()
            .map_or(true, |last| last.issue_round <= pull.issue_round));
        self.entries.push_back(pull);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PendingPull> {
        self.entries.iter()
    }

    /// Removes and returns every entry with `due_round <= t`, in issue
    /// order. Entries are pushed in issue order and due rounds are
    /// monotone for a fixed delay, so only the front needs checking.
    pub fn resolve_due(&mut self, t: u64) -> Vec<PendingPull> {
        let mut out = Vec::new();
        while let Some(front) = self.entries.front() {
            if front.due_round <= t {
                out.push(self.entries.pop_front().expect("front exists"));
            } else {
                break;
            }
        }
        out
    }

    /// Removes oldest entries while the queue holds `cap` or more, so that
    /// issuing one further pull keeps the in-flight count at most `cap`.
    /// `cap = 0` drains everything.
    pub fn resolve_at_cap(&mut self, cap: u64) -> Vec<PendingPull> {
        let mut out = Vec::new();
        while self.entries.len() as u64 >= cap {
            match self.entries.pop_front() {
                Some(pull) => out.push(pull),
                None => break,
            }
        }
        out
    }
}

fn resolve_for(delay: &DelayModel, queue: &mut PendingQueue, t: u64) -> Vec<PendingPull> {
    match *delay {
        DelayModel::None | DelayModel::FixedDelay { .. } => queue.resolve_due(t),
        DelayModel::MaxPending { tau_max } => queue.resolve_at_cap(tau_max),
    }
}

/// Everything one episode produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    /// Arms chosen by the selection loop, in order; the 2K initialization
    /// pulls are not included.
    pub pulls: Vec<usize>,
    /// Final split around the threshold, from observed rewards only.
    pub classification: Classification,
    /// True when the classification differs from the true threshold set.
    pub mistake: bool,
    /// Largest total pending count seen at any decision point.
    pub max_total_pending: u64,
    /// Largest per-arm pending/observed ratio seen at any decision point.
    pub max_pending_ratio: f64,
    /// Per-arm statistics at the final round.
    pub final_stats: Vec<ArmStats>,
}

/// Runs one full episode: every arm is pulled twice up front (those rewards
/// resolve immediately, since no index is computable without observations),
/// then one pull per round for rounds `2K..n`. At each round the due pulls
/// resolve first, then the policy scores the arms as they stand and issues
/// the next pull. At round `n` nothing further resolves and the
/// classification uses observed rewards only.
///
/// Identical inputs and seed give a bit-identical result.
pub fn run_episode(
    arms: &[ArmModel],
    policy: &PolicyConfig,
    delay: &DelayModel,
    n: u64,
    seed: u64,
) -> Result<EpisodeResult> {
    let k = arms.len();
    if k == 0 {
        return Err(Error::InvalidEpisode("at least one arm is required".into()));
    }
    let init_rounds = 2 * k as u64;
    if n <= init_rounds {
        return Err(Error::InvalidEpisode(format!(
            "budget n = {n} must exceed 2K = {init_rounds}"
        )));
    }
    for arm in arms {
        arm.validate()?;
    }
    policy.validate()?;

    let mut rngs: Vec<ChaCha8Rng> = (0..k)
        .map(|i| stream_rng(seed, STREAM_REWARD, i as u64))
        .collect();
    let mut stats = vec![ArmStats::new(); k];

    for arm in 0..k {
        for _ in 0..2 {
            stats[arm].record_pull_issued();
            let x = arms[arm].sample(&mut rngs[arm]);
            stats[arm].record_reward(x)?;
        }
    }

    let mut queue = PendingQueue::default();
    let mut pulls = Vec::with_capacity((n - init_rounds) as usize);
    let mut max_total_pending = 0u64;
    let mut max_pending_ratio = 0.0f64;
    let mut issued = init_rounds;
    let mut observed = init_rounds;

    for t in init_rounds..n {
        for pull in resolve_for(delay, &mut queue, t) {
            stats[pull.arm].record_reward(pull.reward)?;
            observed += 1;
        }
        // Every pull issued so far is either observed or still in flight.
        debug_assert_eq!(observed + queue.len() as u64, issued);
        debug_assert_eq!(issued, t);

        let total_pending = queue.len() as u64;
        if total_pending > max_total_pending {
            max_total_pending = total_pending;
        }
        for pending in queue.iter() {
            let s = &stats[pending.arm];
            let ratio = s.pending_count() as f64 / s.observed_count() as f64;
            if ratio > max_pending_ratio {
                max_pending_ratio = ratio;
            }
        }

        let chosen = select_arm(&stats, policy)?;
        stats[chosen].record_pull_issued();
        let reward = arms[chosen].sample(&mut rngs[chosen]);
        queue.push(PendingPull {
            arm: chosen,
            issue_round: t,
            due_round: delay.due_round(t),
            reward,
        });
        issued += 1;
        pulls.push(chosen);
    }

    let classification = classify(&stats, policy.b)?;
    let true_above: Vec<usize> = arms
        .iter()
        .enumerate()
        .filter(|(_, arm)| arm.mean() >= policy.b)
        .map(|(i, _)| i)
        .collect();
    let mistake = classification.above != true_above;

    Ok(EpisodeResult {
        pulls,
        classification,
        mistake,
        max_total_pending,
        max_pending_ratio,
        final_stats: stats,
    })
}
