//! Deterministic simulator for the thresholding bandit problem: given `K`
//! arms with bounded rewards and a threshold `b`, spend a fixed budget of
//! `n` pulls to identify every arm whose mean is at least `b`.
//!
//! The crate provides
//!
//! * five pull policies behind one argmin interface - the first-moment
//!   `atp` rule, the variance-guided `evt`, its parameter-free `evt_pf`,
//!   and asynchronous variants `ap_evt` / `ap_evt_pf` that keep deciding
//!   while rewards are still in flight (module [`policies`]);
//! * a virtual-time episode engine with pluggable delay models and
//!   bit-exact determinism at a fixed seed (module [`env`]);
//! * closed-form problem-complexity constants, KL helpers, and a
//!   hard-instance generator (module [`complexity`]);
//! * an experiment harness that sweeps policies x budgets x delays over
//!   replicated seeds and emits CSV (module [`harness`]), exposed through
//!   the `tbp` binary.

pub mod complexity;
pub mod env;
pub mod error;
pub mod harness;
pub mod policies;
pub mod seed;
pub mod stats;

pub use complexity::{
    check_compare_lemma, kl_bernoulli_gap, lower_bound_mistake_probability, make_tbp_instance,
    required_rounds, summarize, ProblemSummary, TBP_THRESHOLD,
};
pub use env::{run_episode, ArmModel, DelayModel, EpisodeResult, PendingPull, PendingQueue};
pub use error::{Error, Result};
pub use harness::{
    csv_string, emit_csv, estimate_complexity, rounds_to_accuracy, run_lowerbound, run_sweep,
    run_sweep_with_jobs, speedup, ExperimentConfig, InstanceSpec, LowerBoundParams,
    LowerBoundReport, PolicySpec, SweepOutcome, SweepRow,
};
pub use policies::{classify, select_arm, Classification, PolicyConfig, PolicyKind};
pub use stats::ArmStats;
