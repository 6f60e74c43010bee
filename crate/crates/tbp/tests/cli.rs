//! End-to-end checks of the `tbp` binary: exit codes, error surfaces, and
//! the complexity subcommand's output.

use std::path::Path;
use std::process::{Command, Output};

fn tbp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tbp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

const SMALL_SWEEP: &str = r#"
b = 0.6
budgets = [40, 80]
replications = 10
root_seed = 3

[instance]
kind = "explicit"
arms = [
    { kind = "bernoulli", p = 0.9 },
    { kind = "point_mass", value = 0.2 },
]

[[policies]]
kind = "evt_pf"

[[delays]]
kind = "none"
"#;

#[test]
fn sweep_writes_csv_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sweep.toml", SMALL_SWEEP);
    let out = tbp(
        &["sweep", "--config", &config, "--out", "rows.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    assert!(csv.starts_with(
        "policy,n,delay,success_rate,mean_max_pending,mean_pending_ratio,reps\n"
    ));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn sweep_without_out_prints_csv_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sweep.toml", SMALL_SWEEP);
    let out = tbp(&["sweep", "--config", &config], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("policy,n,delay,"));
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sweep.toml", SMALL_SWEEP);
    let overridden = tbp(
        &["sweep", "--config", &config, "--seed", "99"],
        dir.path(),
    );
    assert!(overridden.status.success());

    // The CLI with --seed 99 must match the library run of the same config
    // with root_seed = 99.
    let mut parsed = tbp::ExperimentConfig::from_toml_str(SMALL_SWEEP).unwrap();
    parsed.root_seed = 99;
    let expected = tbp::csv_string(&tbp::run_sweep(&parsed).unwrap().rows);
    assert_eq!(String::from_utf8(overridden.stdout).unwrap(), expected);
}

#[test]
fn unknown_config_key_is_a_one_line_error() {
    let dir = tempfile::tempdir().unwrap();
    let broken = SMALL_SWEEP.replace("root_seed = 3", "root_seed = 3\nbuget = 4");
    let config = write_config(dir.path(), "broken.toml", &broken);
    let out = tbp(&["sweep", "--config", &config], dir.path());
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("buget"), "stderr: {stderr}");
}

#[test]
fn strict_mode_fails_on_bad_cells_default_continues() {
    let dir = tempfile::tempdir().unwrap();
    // Budget 4 <= 2K = 4 is an invalid cell; 40 runs fine.
    let mixed = SMALL_SWEEP.replace("budgets = [40, 80]", "budgets = [4, 40]");
    let config = write_config(dir.path(), "mixed.toml", &mixed);

    let lenient = tbp(&["sweep", "--config", &config], dir.path());
    assert!(lenient.status.success());
    let stdout = String::from_utf8(lenient.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2, "one row survives: {stdout}");
    assert!(String::from_utf8(lenient.stderr).unwrap().contains("n = 4"));

    let strict = tbp(&["sweep", "--config", &config, "--strict"], dir.path());
    assert!(!strict.status.success());
    assert!(String::from_utf8(strict.stderr)
        .unwrap()
        .contains("cell(s) failed"));
}

#[test]
fn complexity_prints_exact_constants_for_explicit_instances() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "complexity.toml",
        r#"
b = 0.5
budgets = [50]
replications = 1
root_seed = 0

[instance]
kind = "explicit"
arms = [{ kind = "bernoulli", p = 0.75 }]

[[policies]]
kind = "evt"

[[delays]]
kind = "none"
"#,
    );
    let out = tbp(&["complexity", "--config", &config], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("exact"), "{stdout}");
    assert!(stdout.contains("h_atp = 1.600000e1"), "{stdout}");
    assert!(stdout.contains("h_evt = 7.000000e0"), "{stdout}");
}

#[test]
fn complexity_estimates_recipes_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "recipe.toml",
        r#"
b = 0.5
budgets = [300]
replications = 1
root_seed = 5

[instance]
kind = "recipe"
k = 20
mean_range = [0.2, 0.8]
half_width_range = [0.05, 0.15]
distribution = "uniform"

[[policies]]
kind = "evt"

[[delays]]
kind = "none"
"#,
    );
    let first = tbp(
        &["complexity", "--config", &config, "--draws", "500"],
        dir.path(),
    );
    let second = tbp(
        &["complexity", "--config", &config, "--draws", "500"],
        dir.path(),
    );
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let stdout = String::from_utf8(first.stdout).unwrap();
    assert!(stdout.contains("expectation over 500 draws"), "{stdout}");
}

#[test]
fn lowerbound_reports_ok_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = tbp(
        &[
            "lowerbound", "--k", "3", "--gap", "0.2", "--n", "60", "--reps", "50",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("empirical >= theoretical: OK"), "{stdout}");
    assert!(stdout.contains("mistake_rate[i=3]"), "{stdout}");
}
