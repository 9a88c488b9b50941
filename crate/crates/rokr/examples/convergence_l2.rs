//! Mean-square convergence-rate experiment: sweep the horizon, average
//! over seeds, and fit the log-log slope against the schedule's target
//! rate -2r/(2r+1).
//!
//! ```sh
//! cargo run --release -p rokr --example convergence_l2
//! ```

use rokr::harness::{run_experiment, ExperimentConfig, ScheduleConfig};
use rokr::learner::Representation;

fn main() {
    let mut cfg = ExperimentConfig::example();
    cfg.problem.n_terms = 256;
    cfg.problem.gamma = 2.0;
    cfg.problem.r = 0.5;
    cfg.problem.nu = 0.25;
    cfg.loss.name = "welsch".to_string();
    cfg.schedule = ScheduleConfig::L2;
    cfg.t_grid = vec![256, 512, 1024, 2048, 4096, 8192];
    cfg.seeds = 10;
    cfg.base_seed = 7;
    cfg.representation = Representation::Feature;

    let result = run_experiment(&cfg).unwrap();
    println!("{:>6} {:>14} {:>12} {:>10}", "T", "mean l2_sq", "std err", "median");
    for agg in &result.aggregates {
        println!(
            "{:>6} {:>14.6e} {:>12.2e} {:>10.3e}",
            agg.t, agg.mean_l2, agg.se_l2, agg.median_l2
        );
    }
    let slope = result.slope("welsch", "l2").unwrap();
    println!(
        "\nfitted slope {:.4} (theory {:.4} up to a log factor), R^2 = {:.4}",
        slope.slope,
        slope.theory_slope.unwrap(),
        slope.r_squared
    );
}
