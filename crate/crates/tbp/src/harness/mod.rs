//! Experiment runner: sweeps policies x budgets x delays over replicated
//! seeds, aggregates success rates and staleness statistics, and emits CSV.
//!
//! Determinism contract: `(config, root_seed)` fully determines every CSV
//! byte, at any parallelism level. Instance draws are keyed by replication
//! index and episode seeds likewise, so every policy, budget, and delay
//! cell faces the same replicated instances and reward streams - adding a
//! cell never perturbs the others, and paired cells share their noise.

mod config;

pub use config::{ARule, ExperimentConfig, InstanceSpec, PolicySpec, RecipeDistribution};

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::complexity::{
    lower_bound_mistake_probability, make_tbp_instance, summarize, TBP_THRESHOLD,
};
use crate::env::{run_episode, ArmModel, DelayModel};
use crate::error::{Error, Result};
use crate::policies::{PolicyConfig, PolicyKind};
use crate::seed::{derive_seed, stream_rng, STREAM_EPISODE, STREAM_INSTANCE};

/// Aggregated outcome of one (policy, budget, delay) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub policy: String,
    pub n: u64,
    pub delay: String,
    /// Fraction of replications whose classification was exactly right.
    pub success_rate: f64,
    /// Mean over replications of the max total pending count.
    pub mean_max_pending: f64,
    /// Mean over replications of the max per-arm pending/observed ratio.
    pub mean_pending_ratio: f64,
    pub reps: u32,
}

/// A cell that could not run, with the reason; the sweep continues past it.
#[derive(Debug, Clone)]
pub struct CellError {
    pub policy: String,
    pub n: u64,
    pub delay: String,
    pub message: String,
}

impl std::fmt::Display for CellError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "cell (policy={}, n={}, delay={}) failed: {}",
            self.policy, self.n, self.delay, self.message
        )
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// Rows sorted by (policy, n, delay).
    pub rows: Vec<SweepRow>,
    /// Failed cells in config order.
    pub errors: Vec<CellError>,
}

struct RepOutcome {
    mistake: bool,
    max_total_pending: u64,
    max_pending_ratio: f64,
}

fn run_cell_replication(
    config: &ExperimentConfig,
    spec: &PolicySpec,
    n: u64,
    delay: &DelayModel,
    rep: u32,
) -> Result<RepOutcome> {
    let instance_index = if config.fixed_instance { 0 } else { rep as u64 };
    let mut instance_rng = stream_rng(config.root_seed, STREAM_INSTANCE, instance_index);
    let arms = config.instance.draw(&mut instance_rng);
    let policy = spec.build(config.b, n, &arms)?;
    let episode_seed = derive_seed(config.root_seed, STREAM_EPISODE, rep as u64);
    let result = run_episode(&arms, &policy, delay, n, episode_seed)?;
    Ok(RepOutcome {
        mistake: result.mistake,
        max_total_pending: result.max_total_pending,
        max_pending_ratio: result.max_pending_ratio,
    })
}

/// Runs the whole sweep sequentially. See [`run_sweep_with_jobs`].
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutcome> {
    run_sweep_with_jobs(config, 1)
}

/// Runs the whole sweep with replication-level parallelism.
///
/// Results are keyed by (cell, replication) index, and aggregation happens
/// in that fixed order, so the outcome is independent of `jobs`.
pub fn run_sweep_with_jobs(config: &ExperimentConfig, jobs: usize) -> Result<SweepOutcome> {
    config.validate()?;

    let cells: Vec<(&PolicySpec, u64, &DelayModel)> = config
        .policies
        .iter()
        .flat_map(|p| {
            config
                .budgets
                .iter()
                .flat_map(move |&n| config.delays.iter().map(move |d| (p, n, d)))
        })
        .collect();

    let reps = config.replications;
    let tasks: Vec<(usize, u32)> = (0..cells.len())
        .flat_map(|cell| (0..reps).map(move |rep| (cell, rep)))
        .collect();

    let run_task = |&(cell, rep): &(usize, u32)| -> Result<RepOutcome> {
        let (spec, n, delay) = cells[cell];
        run_cell_replication(config, spec, n, delay, rep)
    };

    let outcomes: Vec<Result<RepOutcome>> = if jobs <= 1 {
        tasks.iter().map(run_task).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("failed to build thread pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(run_task).collect())
    };

    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (cell_idx, (spec, n, delay)) in cells.iter().enumerate() {
        let start = cell_idx * reps as usize;
        let cell_outcomes = &outcomes[start..start + reps as usize];
        match aggregate_cell(cell_outcomes, reps) {
            Ok((success_rate, mean_max_pending, mean_pending_ratio)) => rows.push(SweepRow {
                policy: spec.label(),
                n: *n,
                delay: delay.label(),
                success_rate,
                mean_max_pending,
                mean_pending_ratio,
                reps,
            }),
            Err(message) => errors.push(CellError {
                policy: spec.label(),
                n: *n,
                delay: delay.label(),
                message,
            }),
        }
    }

    sort_rows(&mut rows);
    Ok(SweepOutcome { rows, errors })
}

fn aggregate_cell(
    outcomes: &[Result<RepOutcome>],
    reps: u32,
) -> std::result::Result<(f64, f64, f64), String> {
    let mut successes = 0u32;
    let mut pending_sum = 0.0;
    let mut ratio_sum = 0.0;
    for outcome in outcomes {
        match outcome {
            Ok(o) => {
                if !o.mistake {
                    successes += 1;
                }
                pending_sum += o.max_total_pending as f64;
                ratio_sum += o.max_pending_ratio;
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok((
        successes as f64 / reps as f64,
        pending_sum / reps as f64,
        ratio_sum / reps as f64,
    ))
}

fn sort_rows(rows: &mut [SweepRow]) {
    rows.sort_by(|a, b| {
        a.policy
            .cmp(&b.policy)
            .then(a.n.cmp(&b.n))
            .then(a.delay.cmp(&b.delay))
    });
}

/// Speedup of running with `tau` pulls in flight:
/// `(rounds_full / rounds_delayed) * tau`.
pub fn speedup(rounds_full: u64, rounds_delayed: u64, tau: u64) -> Result<f64> {
    if rounds_full == 0 || rounds_delayed == 0 {
        return Err(Error::Domain("round counts must be >= 1".into()));
    }
    if tau == 0 {
        return Err(Error::Domain("tau must be >= 1".into()));
    }
    Ok(rounds_full as f64 / rounds_delayed as f64 * tau as f64)
}

/// Smallest budget in the sweep grid whose success rate reaches `target`
/// for the given (policy, delay) cell; `None` when no budget does. The
/// first crossing wins even if later budgets dip below the target again -
/// the lookup is grid-resolution-limited by design, with no interpolation.
pub fn rounds_to_accuracy(
    rows: &[SweepRow],
    policy: &str,
    delay: &str,
    target: f64,
) -> Option<u64> {
    let mut matching: Vec<&SweepRow> = rows
        .iter()
        .filter(|row| row.policy == policy && row.delay == delay)
        .collect();
    matching.sort_by_key(|row| row.n);
    matching
        .iter()
        .find(|row| row.success_rate >= target)
        .map(|row| row.n)
}

/// Renders rows as CSV, sorted by (policy, n, delay), reals with six
/// significant digits.
pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut sorted: Vec<SweepRow> = rows.to_vec();
    sort_rows(&mut sorted);
    let mut out =
        String::from("policy,n,delay,success_rate,mean_max_pending,mean_pending_ratio,reps\n");
    for row in &sorted {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.policy,
            row.n,
            row.delay,
            sig6(row.success_rate),
            sig6(row.mean_max_pending),
            sig6(row.mean_pending_ratio),
            row.reps
        ));
    }
    out
}

/// Writes [`csv_string`] to `path`.
pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|source| Error::OutputIo {
        path: path.display().to_string(),
        source,
    })?;
    file.write_all(csv_string(rows).as_bytes())
        .map_err(|source| Error::OutputIo {
            path: path.display().to_string(),
            source,
        })
}

/// Six significant digits, plain decimal notation.
fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (5 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Parameters of the hard-instance stress run.
#[derive(Debug, Clone, Copy)]
pub struct LowerBoundParams {
    /// Number of arms (and of single-arm-flipped instances).
    pub k: usize,
    /// Shared gap of every arm, in `(0, 1/4]`.
    pub gap: f64,
    pub n: u64,
    pub replications: u32,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct LowerBoundReport {
    /// Mistake rate of instance `i`, for `i = 0..=K`.
    pub mistake_rates: Vec<f64>,
    pub empirical_max: f64,
    /// `exp(-10 n / h_evt - 16 log(5 n K))`.
    pub theoretical_floor: f64,
    pub h_evt: f64,
}

/// Runs the variance-guided policy (`a = n/K`) on every member of the
/// hard-instance family and reports the worst empirical mistake rate next
/// to the theoretical floor. The floor is vacuously small at desk scale;
/// both sides are reported for transparency.
pub fn run_lowerbound(params: &LowerBoundParams, jobs: usize) -> Result<LowerBoundReport> {
    if params.k == 0 {
        return Err(Error::Domain("k must be >= 1".into()));
    }
    if params.replications == 0 {
        return Err(Error::Domain("replications must be >= 1".into()));
    }
    let gaps = vec![params.gap; params.k];
    let h_evt = summarize(&make_tbp_instance(0, &gaps)?, TBP_THRESHOLD)?.h_evt;
    let policy = PolicyConfig {
        kind: PolicyKind::Evt,
        b: TBP_THRESHOLD,
        a: params.n as f64 / params.k as f64,
        delta: 0.0,
    };

    let instances: Vec<Vec<ArmModel>> = (0..=params.k)
        .map(|i| make_tbp_instance(i, &gaps))
        .collect::<Result<_>>()?;
    let reps = params.replications as u64;
    let tasks: Vec<(usize, u64)> = (0..=params.k)
        .flat_map(|i| (0..reps).map(move |rep| (i, rep)))
        .collect();
    let run_task = |&(i, rep): &(usize, u64)| -> Result<bool> {
        let seed = derive_seed(params.seed, STREAM_EPISODE, i as u64 * reps + rep);
        Ok(run_episode(&instances[i], &policy, &DelayModel::None, params.n, seed)?.mistake)
    };

    let mistakes: Vec<Result<bool>> = if jobs <= 1 {
        tasks.iter().map(run_task).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Domain(format!("failed to build thread pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(run_task).collect())
    };

    let mut mistake_rates = Vec::with_capacity(params.k + 1);
    for i in 0..=params.k {
        let start = i * reps as usize;
        let mut count = 0u32;
        for outcome in &mistakes[start..start + reps as usize] {
            match outcome {
                Ok(true) => count += 1,
                Ok(false) => {}
                Err(e) => return Err(Error::Domain(e.to_string())),
            }
        }
        mistake_rates.push(count as f64 / params.replications as f64);
    }
    let empirical_max = mistake_rates.iter().cloned().fold(0.0, f64::max);

    Ok(LowerBoundReport {
        mistake_rates,
        empirical_max,
        theoretical_floor: lower_bound_mistake_probability(params.n, params.k, h_evt),
        h_evt,
    })
}

/// Complexity constants of a config's instance: exact for explicit arm
/// lists, otherwise the expectation over the recipe estimated by Monte
/// Carlo draws.
#[derive(Debug, Clone)]
pub struct ComplexityReport {
    pub k: usize,
    pub b: f64,
    pub h_atp: f64,
    pub h_evt: f64,
    /// 0 when the instance was explicit and the constants exact.
    pub draws: u32,
}

pub fn estimate_complexity(
    instance: &InstanceSpec,
    b: f64,
    seed: u64,
    draws: u32,
) -> Result<ComplexityReport> {
    instance.validate()?;
    match instance {
        InstanceSpec::Explicit { arms } => {
            let s = summarize(arms, b)?;
            Ok(ComplexityReport {
                k: arms.len(),
                b,
                h_atp: s.h_atp,
                h_evt: s.h_evt,
                draws: 0,
            })
        }
        InstanceSpec::Recipe { .. } => {
            if draws == 0 {
                return Err(Error::Domain("draws must be >= 1".into()));
            }
            let mut h_atp = 0.0;
            let mut h_evt = 0.0;
            for draw in 0..draws {
                let mut rng = stream_rng(seed, STREAM_INSTANCE, draw as u64);
                let arms = instance.draw(&mut rng);
                let s = summarize(&arms, b)?;
                h_atp += s.h_atp;
                h_evt += s.h_evt;
            }
            Ok(ComplexityReport {
                k: instance.k(),
                b,
                h_atp: h_atp / draws as f64,
                h_evt: h_evt / draws as f64,
                draws,
            })
        }
    }
}
