//! Command-line entry point.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error,
//! 3 bound-check failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::learner::{min_eta0, Representation};
use crate::losses::{default_condition_grid, WindowingFunction, CONDITION_TOL};
use crate::metrics;
use crate::problems::write_samples_csv;
use crate::theory;

use super::config::{ConfigError, ExperimentConfig};
use super::experiment::{derive_seed, run_experiment, BoundRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BOUND_FAILURE: i32 = 3;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReprArg {
    Dual,
    Feature,
}

impl From<ReprArg> for Representation {
    fn from(r: ReprArg) -> Self {
        match r {
            ReprArg::Dual => Representation::Dual,
            ReprArg::Feature => Representation::Feature,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "rokr", about = "Robust online kernel regression experiments", version)]
struct Cli {
    /// Base seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output location (directory for `sweep`, CSV file for `verify-bounds`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to all cores or the ROKR_THREADS variable.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Learner representation override.
    #[arg(long, global = true, value_enum)]
    representation: Option<ReprArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every built-in windowing function against its constants.
    CheckLosses,
    /// Run a single (T, seed) cell from a config and print the errors.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Horizon; defaults to the first entry of the config's t_grid.
        #[arg(long)]
        t: Option<u64>,
        /// Also write the generated stream as CSV.
        #[arg(long)]
        dump_data: Option<PathBuf>,
    },
    /// Full sweep from a JSON config; writes CSV outputs.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the bound-check suites and write the records as CSV.
    VerifyBounds,
}

/// Parse arguments (including the program name) and run; returns the exit
/// code rather than exiting, so it is callable from tests.
pub fn cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes, not config errors.
            let benign = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if benign { EXIT_OK } else { EXIT_CONFIG };
        }
    };

    let threads = cli.threads.or_else(|| {
        std::env::var("ROKR_THREADS").ok().and_then(|v| v.parse().ok())
    });
    let run = || dispatch(&cli);
    match threads {
        Some(n) if n >= 1 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(err) => {
                eprintln!("error: cannot build thread pool: {err}");
                EXIT_RUNTIME
            }
        },
        _ => run(),
    }
}

fn dispatch(cli: &Cli) -> i32 {
    match &cli.command {
        Command::CheckLosses => check_losses(cli.out.as_deref()),
        Command::Run { config, t, dump_data } => {
            run_single(config, *t, cli.seed, cli.representation, dump_data.as_deref())
        }
        Command::Sweep { config } => sweep(config, cli.seed, cli.representation, cli.out.as_deref()),
        Command::VerifyBounds => verify_bounds(cli.out.as_deref()),
    }
}

fn config_exit(err: &ConfigError) -> i32 {
    eprintln!("error: {err}");
    EXIT_CONFIG
}

fn check_losses(out: Option<&std::path::Path>) -> i32 {
    let grid = default_condition_grid();
    println!(
        "{:<14} {:>10} {:>10} {:>6} {:>8} {:>12} {:>13} {:>13} {:>7}",
        "loss", "w_plus_zero", "c_w", "p", "c_p", "min_deriv", "bound_excess", "holder_excess", "status"
    );
    let mut rows = Vec::new();
    let mut unexpected = false;
    for loss in WindowingFunction::builtins() {
        let report = loss.check_conditions(&grid, CONDITION_TOL);
        let expected_positive = loss.strictly_positive_deriv();
        let ok = report.ok_allowing_redescent()
            && (report.strictly_positive || !expected_positive);
        let status = if !ok {
            unexpected = true;
            "FAIL"
        } else if !report.strictly_positive {
            "redescends"
        } else {
            "ok"
        };
        println!(
            "{:<14} {:>10.4} {:>10.4} {:>6.2} {:>8.4} {:>12.4e} {:>13.4e} {:>13.4e} {:>7}",
            report.loss,
            loss.w_plus_zero,
            loss.c_w,
            loss.p,
            loss.c_p,
            report.min_deriv,
            report.max_bound_excess,
            report.max_holder_excess,
            status
        );
        rows.push(BoundRow {
            name: "loss_conditions".to_string(),
            params: format!("loss={}", report.loss),
            lhs: report.max_bound_excess.max(report.max_holder_excess),
            rhs: CONDITION_TOL,
            slack: CONDITION_TOL - report.max_bound_excess.max(report.max_holder_excess),
            pass: ok,
        });
    }
    if let Some(path) = out {
        if let Err(err) = write_bound_rows(path, &rows) {
            eprintln!("error: cannot write {}: {err}", path.display());
            return EXIT_RUNTIME;
        }
    }
    if unexpected {
        eprintln!("error: unexpected loss-condition failure");
        EXIT_BOUND_FAILURE
    } else {
        EXIT_OK
    }
}

fn run_single(
    config_path: &std::path::Path,
    t_override: Option<u64>,
    seed_override: Option<u64>,
    repr: Option<ReprArg>,
    dump_data: Option<&std::path::Path>,
) -> i32 {
    let mut config = match ExperimentConfig::from_path(config_path) {
        Ok(c) => c,
        Err(err) => return config_exit(&err),
    };
    if let Some(seed) = seed_override {
        config.base_seed = seed;
    }
    if let Some(r) = repr {
        config.representation = r.into();
    }
    let t = t_override.unwrap_or_else(|| config.t_grid.first().copied().unwrap_or(0));
    config.t_grid = vec![t];
    config.seeds = 1;
    let resolved = match config.resolve() {
        Ok(r) => r,
        Err(err) => return config_exit(&err),
    };

    if let Some(path) = dump_data {
        let stream_seed = derive_seed(config.base_seed, t, 0);
        let samples = resolved.problem.sample(t as usize, stream_seed);
        if let Err(err) = write_samples_csv(path, &samples) {
            eprintln!("error: cannot write {}: {err}", path.display());
            return EXIT_RUNTIME;
        }
    }

    let result = match run_experiment(&config) {
        Ok(r) => r,
        Err(err) => return config_exit(&err),
    };
    let row = &result.rows[0];
    if row.diverged {
        eprintln!("error: run diverged (T={t}, eta={:.6e})", row.eta);
        return EXIT_RUNTIME;
    }
    println!("loss={} schedule={} T={t} seed={}", row.loss, row.schedule, config.base_seed);
    println!("eta={:.6e} sigma={:.6e}", row.eta, row.sigma);
    println!("l2_sq={:.6e}", row.l2_sq);
    println!("rkhs_sq={:.6e}", row.rkhs_sq);
    println!("excess_risk={:.6e}", row.excess_risk);
    EXIT_OK
}

fn sweep(
    config_path: &std::path::Path,
    seed_override: Option<u64>,
    repr: Option<ReprArg>,
    out: Option<&std::path::Path>,
) -> i32 {
    let mut config = match ExperimentConfig::from_path(config_path) {
        Ok(c) => c,
        Err(err) => return config_exit(&err),
    };
    if let Some(seed) = seed_override {
        config.base_seed = seed;
    }
    if let Some(r) = repr {
        config.representation = r.into();
    }
    let result = match run_experiment(&config) {
        Ok(r) => r,
        Err(err) => return config_exit(&err),
    };
    let out_dir = out.unwrap_or_else(|| std::path::Path::new("sweep_out"));
    if let Err(err) = result.write_csvs(out_dir) {
        eprintln!("error: cannot write CSVs to {}: {err}", out_dir.display());
        return EXIT_RUNTIME;
    }
    for agg in &result.aggregates {
        println!(
            "loss={} T={} n={} mean_l2={:.6e} se_l2={:.2e} mean_rkhs={:.6e}",
            agg.loss, agg.t, agg.n, agg.mean_l2, agg.se_l2, agg.mean_rkhs
        );
    }
    for slope in &result.slopes {
        println!(
            "loss={} target={} slope={:.4} theory={} r2={:.4}",
            slope.loss,
            slope.target,
            slope.slope,
            slope.theory_slope.map_or("n/a".to_string(), |s| format!("{s:.4}")),
            slope.r_squared
        );
    }
    let diverged = result.diverged_cells();
    if diverged > 0 {
        println!("diverged cells: {diverged}");
    }
    println!("wrote CSVs to {}", out_dir.display());
    if !result.all_bounds_pass() {
        eprintln!("error: bound check failed during sweep");
        return EXIT_BOUND_FAILURE;
    }
    EXIT_OK
}

fn verify_bounds(out: Option<&std::path::Path>) -> i32 {
    let records = match bound_suites() {
        Ok(r) => r,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_RUNTIME;
        }
    };
    let rows: Vec<BoundRow> = records.iter().map(BoundRow::from).collect();
    let failures = rows.iter().filter(|r| !r.pass).count();
    let mut by_name: Vec<(&str, usize, usize)> = Vec::new();
    for row in &rows {
        match by_name.iter_mut().find(|(n, _, _)| *n == row.name) {
            Some((_, total, failed)) => {
                *total += 1;
                if !row.pass {
                    *failed += 1;
                }
            }
            None => by_name.push((&row.name, 1, usize::from(!row.pass))),
        }
    }
    for (name, total, failed) in &by_name {
        println!("{name}: {}/{total} passed", total - failed);
    }
    let path = out
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("verify_bounds.csv"));
    if let Err(err) = write_bound_rows(&path, &rows) {
        eprintln!("error: cannot write {}: {err}", path.display());
        return EXIT_RUNTIME;
    }
    println!("wrote {} records to {}", rows.len(), path.display());
    if failures > 0 {
        eprintln!("error: {failures} bound checks failed");
        EXIT_BOUND_FAILURE
    } else {
        EXIT_OK
    }
}

fn write_bound_rows(path: &std::path::Path, rows: &[BoundRow]) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()
}

/// The default verification suites: the operator-norm grid, iterate-norm
/// runs for every loss, drift runs under rate schedules, and rate-constant
/// sanity at small horizons.
fn bound_suites() -> Result<Vec<theory::BoundCheckRecord>, ConfigError> {
    use crate::kernels::{Kernel, SpectralKernel};
    use crate::learner::{run_feature, schedule_l2};
    use crate::problems::{CoeffLaw, NoiseModel, SyntheticProblem};

    let mut records = Vec::new();

    // Operator-norm bound over a parameter grid.
    for gamma in [1.5, 2.0, 4.0] {
        let kernel = SpectralKernel::power_law(256, gamma).expect("valid spectrum");
        for alpha in [0.25, 0.5, 1.0, 2.0] {
            for s in [1.0, 10.0, 100.0, 1000.0] {
                for eta in [1e-3, 1e-2] {
                    for w0 in [0.5, 1.0] {
                        records.push(
                            theory::operator_norm_bound(kernel.eigenvalues(), alpha, s, eta, w0)
                                .expect("admissible grid point"),
                        );
                    }
                }
            }
        }
    }

    // Iterate-norm bound along runs, one per loss.
    let problem = SyntheticProblem::power_law(
        64,
        2.0,
        0.5,
        CoeffLaw::default(),
        NoiseModel { nu: 0.25, q: 0.05, s_mag: 1.0 },
        7,
    )?;
    let kernel = problem.kernel();
    let kappa = kernel.kappa_bound();
    for loss in WindowingFunction::builtins() {
        let eta = 0.8 / (kappa * kappa * loss.c_w);
        let stream = problem.sample_xy(400, derive_seed(7, 400, 0));
        let (_, log) = run_feature(&stream, eta, 1.0, loss, kernel)
            .expect("small steps cannot diverge");
        let recs = theory::iterate_norm_bounds(&log, problem.m_bound(), loss.c_w, eta, kappa)
            .expect("eta below ceiling");
        records.extend(recs);
    }

    // Drift bound under mean-square rate schedules.
    for loss in [WindowingFunction::welsch(), WindowingFunction::cauchy()] {
        let t = 512u64;
        let eta0 = min_eta0(&loss, kappa);
        let sched = schedule_l2(t, problem.r(), eta0, &loss, kappa)?;
        let stream = problem.sample_xy(t as usize, derive_seed(11, t, 1));
        let (_, log) = run_feature(&stream, sched.eta, sched.sigma_min, loss, kernel)
            .expect("schedule is admissible");
        records.extend(theory::drift_norm_bounds(
            &log,
            &loss,
            problem.m_bound(),
            kappa,
            sched.eta,
            t,
            sched.sigma_min,
        ));
    }

    // Rate-constant sanity at small horizons, seed-averaged.
    let loss = WindowingFunction::welsch();
    let eta0 = min_eta0(&loss, kappa);
    for t in [256u64, 512, 1024] {
        let sched = schedule_l2(t, problem.r(), eta0, &loss, kappa)?;
        let seeds = 5;
        let mut errors = Vec::with_capacity(seeds);
        for s in 0..seeds {
            let stream = problem.sample_xy(t as usize, derive_seed(13, t, s as u64));
            let (learner, _) = run_feature(&stream, sched.eta, sched.sigma_min, loss, kernel)
                .expect("schedule is admissible");
            errors.push(metrics::report_feature(&learner, &problem).l2_sq);
        }
        let mean = errors.iter().sum::<f64>() / errors.len() as f64;
        records.push(theory::l2_rate_bound(
            mean,
            &problem,
            &loss,
            kappa,
            eta0,
            t,
            sched.sigma_min,
        ));
        let report =
            theory::step_size_conditions(sched.eta, eta0, &loss, kappa, t);
        println!(
            "step-size conditions at T={t}: eta0 floor {}, log ceiling {}",
            if report.meets_eta0_floor { "met" } else { "NOT met" },
            if report.meets_log_ceiling { "met" } else { "NOT met" },
        );
    }

    Ok(records)
}
