//! Robust loss vs. plain least squares on contaminated streams.
//!
//! Symmetric outliers keep the conditional mean unchanged, so both
//! learners chase the same target and the comparison isolates error
//! inflation. Two regimes are shown: the rate-schedule scale (where the
//! robust loss behaves like a better-tuned least squares) and a small
//! fixed scale (where the redescending weight actually rejects outliers).
//!
//! ```sh
//! cargo run --release -p rokr --example robustness
//! ```

use rokr::learner::{min_eta0, run_feature, schedule_l2};
use rokr::losses::WindowingFunction;
use rokr::metrics;
use rokr::problems::{CoeffLaw, NoiseModel, SyntheticProblem};

fn main() {
    let noise = NoiseModel { nu: 0.25, q: 0.1, s_mag: 1.25 };
    let problem =
        SyntheticProblem::power_law(256, 2.0, 0.5, CoeffLaw::default(), noise, 3).unwrap();
    let kernel = problem.kernel();
    let kappa = kernel.kappa_bound();
    let t = 4096u64;
    let seeds = 20u64;

    let welsch = WindowingFunction::welsch();
    let identity = WindowingFunction::identity();
    let sched_w = schedule_l2(t, problem.r(), min_eta0(&welsch, kappa), &welsch, kappa).unwrap();
    let sched_i =
        schedule_l2(t, problem.r(), min_eta0(&identity, kappa), &identity, kappa).unwrap();

    let mut sums = [0.0f64; 3];
    for seed in 0..seeds {
        let stream = problem.sample_xy(t as usize, 100 + seed);
        // Scheduled scale.
        let (fw, _) = run_feature(&stream, sched_w.eta, sched_w.sigma_min, welsch, kernel).unwrap();
        // Least squares baseline (scale is irrelevant for the identity window).
        let (fi, _) = run_feature(&stream, sched_i.eta, 1.0, identity, kernel).unwrap();
        // Small fixed scale: residuals beyond ~sigma are rejected outright.
        let (fr, _) = run_feature(&stream, sched_w.eta, 0.75, welsch, kernel).unwrap();
        sums[0] += metrics::report_feature(&fw, &problem).l2_sq;
        sums[1] += metrics::report_feature(&fi, &problem).l2_sq;
        sums[2] += metrics::report_feature(&fr, &problem).l2_sq;
    }
    let n = seeds as f64;
    let (scheduled, least_squares, small_scale) = (sums[0] / n, sums[1] / n, sums[2] / n);

    println!("contamination: q = {}, spike = {} (5x the noise width)", noise.q, noise.s_mag);
    println!("seed-averaged final l2_sq over {seeds} streams at T = {t}:");
    println!("  least squares           : {least_squares:.4e}");
    println!("  welsch, scheduled sigma : {scheduled:.4e}  (ratio {:.3})", scheduled / least_squares);
    println!("  welsch, sigma = 0.75    : {small_scale:.4e}  (ratio {:.3})", small_scale / least_squares);
}
