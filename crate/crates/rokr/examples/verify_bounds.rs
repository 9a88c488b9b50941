//! Numeric verification of the bounds behind the convergence analysis:
//! the operator-power norm bound, the running iterate-norm bound, and the
//! per-step drift bound, plus the fully explicit rate constant.
//!
//! ```sh
//! cargo run --release -p rokr --example verify_bounds
//! ```

use rokr::kernels::{Kernel, SpectralKernel};
use rokr::learner::{min_eta0, run_feature, schedule_l2};
use rokr::losses::WindowingFunction;
use rokr::metrics;
use rokr::problems::{CoeffLaw, NoiseModel, SyntheticProblem};
use rokr::theory;

fn main() {
    // Operator norm: ||L^a (I - eta w0 L)^s|| against its closed-form cap.
    let kernel = SpectralKernel::power_law(256, 2.0).unwrap();
    println!("operator-norm bound (spectrum k^-2, eta = 0.01, w0 = 0.5):");
    for alpha in [0.5, 1.0, 2.0] {
        for s in [10.0, 1000.0] {
            let rec = theory::operator_norm_bound(kernel.eigenvalues(), alpha, s, 0.01, 0.5)
                .unwrap();
            println!(
                "  alpha = {alpha:<4} s = {s:<6} lhs = {:.4e}  rhs = {:.4e}  slack = {:+.2e}",
                rec.lhs,
                rec.rhs,
                rec.slack()
            );
        }
    }

    // Iterate-norm and drift bounds along an actual run.
    let problem = SyntheticProblem::power_law(
        256,
        2.0,
        0.5,
        CoeffLaw::default(),
        NoiseModel { nu: 0.25, q: 0.05, s_mag: 1.0 },
        5,
    )
    .unwrap();
    let kernel = problem.kernel();
    let kappa = kernel.kappa_bound();
    let loss = WindowingFunction::welsch();
    let t = 1024u64;
    let eta0 = min_eta0(&loss, kappa);
    let sched = schedule_l2(t, problem.r(), eta0, &loss, kappa).unwrap();
    let stream = problem.sample_xy(t as usize, 9);
    let (learner, log) =
        run_feature(&stream, sched.eta, sched.sigma_min, loss, kernel).unwrap();

    let norm_recs =
        theory::iterate_norm_bounds(&log, problem.m_bound(), loss.c_w, sched.eta, kappa).unwrap();
    let worst_norm = norm_recs
        .iter()
        .map(|r| r.slack())
        .fold(f64::INFINITY, f64::min);
    println!("\niterate-norm bound over {} steps: worst slack {worst_norm:.3e}", log.len());

    let drift_recs = theory::drift_norm_bounds(
        &log,
        &loss,
        problem.m_bound(),
        kappa,
        sched.eta,
        t,
        sched.sigma_min,
    );
    let worst_drift = drift_recs.iter().map(|r| r.slack()).fold(f64::INFINITY, f64::min);
    println!("drift bound over {} steps:        worst slack {worst_drift:.3e}", log.len());

    // The explicit rate constant is loose by design; the point is that it
    // provably dominates the measured error.
    let err = metrics::report_feature(&learner, &problem).l2_sq;
    let rec = theory::l2_rate_bound(err, &problem, &loss, kappa, eta0, t, sched.sigma_min);
    println!(
        "\nrate envelope at T = {t}: error = {:.3e} <= bound = {:.3e} (ratio {:.1e})",
        rec.lhs,
        rec.rhs,
        rec.rhs / rec.lhs
    );

    let conditions = theory::step_size_conditions(sched.eta, eta0, &loss, kappa, t);
    println!(
        "step-size conditions: eta0 floor met = {}, log ceiling met = {}",
        conditions.meets_eta0_floor, conditions.meets_log_ceiling
    );
}
