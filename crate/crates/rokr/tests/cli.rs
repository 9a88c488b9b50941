//! End-to-end checks of the CLI surface: subcommands, exit codes, and
//! deterministic CSV output. The CLI entry point takes argv directly, so
//! no subprocess is needed.

use rokr::harness::{cli, ExperimentConfig, EXIT_BOUND_FAILURE, EXIT_CONFIG, EXIT_OK};

fn run(args: &[&str]) -> i32 {
    cli(std::iter::once("rokr").chain(args.iter().copied()))
}

fn write_config(dir: &std::path::Path, config: &ExperimentConfig) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

#[test]
fn missing_config_is_a_config_error() {
    assert_eq!(run(&["sweep", "--config", "missing.json"]), EXIT_CONFIG);
    assert_eq!(run(&["run", "--config", "missing.json"]), EXIT_CONFIG);
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(run(&["sweep", "--config", path.to_str().unwrap()]), EXIT_CONFIG);
}

#[test]
fn invalid_invariants_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::example();
    cfg.eta0 = Some(1e-9); // below the admissible floor
    let path = write_config(dir.path(), &cfg);
    assert_eq!(run(&["sweep", "--config", path.to_str().unwrap()]), EXIT_CONFIG);

    let mut cfg = ExperimentConfig::example();
    cfg.beta = Some(0.3); // beta * gamma = 0.6 <= 1
    let path = write_config(dir.path(), &cfg);
    assert_eq!(run(&["sweep", "--config", path.to_str().unwrap()]), EXIT_CONFIG);
}

#[test]
fn unknown_subcommand_is_a_config_error() {
    assert_eq!(run(&["frobnicate"]), EXIT_CONFIG);
}

#[test]
fn check_losses_passes() {
    assert_eq!(run(&["check-losses"]), EXIT_OK);
}

#[test]
fn sweep_writes_deterministic_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::example();
    let path = write_config(dir.path(), &cfg);
    let (out1, out2) = (dir.path().join("a"), dir.path().join("b"));

    // Serial and parallel runs of the same config.
    assert_eq!(
        run(&[
            "sweep",
            "--config",
            path.to_str().unwrap(),
            "--out",
            out1.to_str().unwrap(),
            "--threads",
            "1"
        ]),
        EXIT_OK
    );
    assert_eq!(
        run(&[
            "sweep",
            "--config",
            path.to_str().unwrap(),
            "--out",
            out2.to_str().unwrap(),
            "--threads",
            "4"
        ]),
        EXIT_OK
    );
    for file in ["results.csv", "aggregate.csv", "slopes.csv", "bounds.csv"] {
        let a = std::fs::read(out1.join(file)).unwrap();
        let b = std::fs::read(out2.join(file)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{file} differs between serial and parallel sweeps");
    }
}

#[test]
fn run_reports_errors_and_dumps_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::example();
    let path = write_config(dir.path(), &cfg);
    let dump = dir.path().join("stream.csv");
    assert_eq!(
        run(&[
            "run",
            "--config",
            path.to_str().unwrap(),
            "--t",
            "128",
            "--seed",
            "5",
            "--dump-data",
            dump.to_str().unwrap()
        ]),
        EXIT_OK
    );
    let text = std::fs::read_to_string(&dump).unwrap();
    assert!(text.starts_with("t,x,y,contaminated_flag"));
    assert_eq!(text.lines().count(), 129); // header + 128 samples
}

#[test]
fn verify_bounds_full_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bounds.csv");
    let code = run(&["verify-bounds", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("name,params,lhs,rhs,slack,pass"));
    // Every record in the suite must pass; a failure would have exited 3.
    assert_ne!(code, EXIT_BOUND_FAILURE);
    assert!(text.lines().skip(1).all(|l| l.ends_with("true")));
}
