use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tbp::harness::{
    csv_string, emit_csv, estimate_complexity, run_lowerbound, run_sweep_with_jobs,
    ExperimentConfig, LowerBoundParams,
};

#[derive(Parser)]
#[command(
    name = "tbp",
    version,
    about = "Thresholding-bandit experiment runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file and emit CSV.
    Sweep {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Override the config's root_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replication-level parallelism; the output is identical at any
        /// value.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Exit nonzero if any sweep cell fails.
        #[arg(long)]
        strict: bool,
    },
    /// Print problem-complexity constants for a config's instance.
    Complexity {
        /// Experiment config (TOML); only its instance and b are used.
        #[arg(long)]
        config: PathBuf,
        /// Override the config's root_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Monte Carlo draws used to estimate recipe expectations.
        #[arg(long, default_value_t = 10_000)]
        draws: u32,
    },
    /// Stress run on the hard-instance family: empirical worst-case
    /// mistake rate next to the theoretical floor.
    Lowerbound {
        /// Number of arms.
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Shared gap of every arm, in (0, 1/4].
        #[arg(long, default_value_t = 0.1)]
        gap: f64,
        /// Budget per episode.
        #[arg(long, default_value_t = 500)]
        n: u64,
        /// Replications per instance.
        #[arg(long, default_value_t = 200)]
        reps: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> tbp::Result<ExitCode> {
    match cli.command {
        Command::Sweep {
            config,
            seed,
            out,
            jobs,
            strict,
        } => {
            let mut config = ExperimentConfig::from_path(&config)?;
            if let Some(seed) = seed {
                config.root_seed = seed;
            }
            let outcome = run_sweep_with_jobs(&config, jobs)?;
            for error in &outcome.errors {
                eprintln!("{error}");
            }
            match out {
                Some(path) => emit_csv(&outcome.rows, &path)?,
                None => print!("{}", csv_string(&outcome.rows)),
            }
            if strict && !outcome.errors.is_empty() {
                eprintln!("error: {} sweep cell(s) failed", outcome.errors.len());
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Complexity {
            config,
            seed,
            draws,
        } => {
            let parsed = ExperimentConfig::from_path(&config)?;
            let seed = seed.unwrap_or(parsed.root_seed);
            let report = estimate_complexity(&parsed.instance, parsed.b, seed, draws)?;
            if report.draws == 0 {
                println!("instance: explicit, K = {} (exact constants)", report.k);
            } else {
                println!(
                    "instance: recipe, K = {} (expectation over {} draws)",
                    report.k, report.draws
                );
            }
            println!("b     = {}", report.b);
            println!("h_atp = {:.6e}", report.h_atp);
            println!("h_evt = {:.6e}", report.h_evt);
            Ok(ExitCode::SUCCESS)
        }
        Command::Lowerbound {
            k,
            gap,
            n,
            reps,
            seed,
            jobs,
        } => {
            let params = LowerBoundParams {
                k,
                gap,
                n,
                replications: reps,
                seed,
            };
            let report = run_lowerbound(&params, jobs)?;
            println!(
                "hard-instance stress: K = {k}, gap = {gap}, n = {n}, reps = {reps}, policy = evt (a = n/K)"
            );
            println!("h_evt = {}", report.h_evt);
            for (i, rate) in report.mistake_rates.iter().enumerate() {
                println!("mistake_rate[i={i}] = {rate}");
            }
            println!("empirical max_i mistake rate = {}", report.empirical_max);
            println!(
                "theoretical floor exp(-10n/h_evt - 16 log(5nK)) = {:e}",
                report.theoretical_floor
            );
            let ok = report.empirical_max >= report.theoretical_floor;
            println!(
                "empirical >= theoretical: {}",
                if ok { "OK" } else { "VIOLATED" }
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
