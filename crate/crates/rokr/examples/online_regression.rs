//! A single robust online regression run on a synthetic spectral problem,
//! in both representations, with exact error measurements.
//!
//! ```sh
//! cargo run -p rokr --example online_regression
//! ```

use rokr::kernels::{GaussianKernel, Kernel};
use rokr::learner::{min_eta0, run_dual, run_feature, schedule_l2};
use rokr::losses::WindowingFunction;
use rokr::metrics;
use rokr::problems::{CoeffLaw, NoiseModel, SyntheticProblem};

fn main() {
    // Spectrum lambda_k = k^-2, target regularity r = 1/2, uniform noise.
    let problem = SyntheticProblem::power_law(
        256,
        2.0,
        0.5,
        CoeffLaw::default(),
        NoiseModel::clean(0.25),
        7,
    )
    .unwrap();
    let kernel = problem.kernel();
    let kappa = kernel.kappa_bound();
    let loss = WindowingFunction::welsch();

    let t = 2000u64;
    let eta0 = min_eta0(&loss, kappa);
    let sched = schedule_l2(t, problem.r(), eta0, &loss, kappa).unwrap();
    println!("T = {t}, eta = {:.5e}, sigma = {:.3}", sched.eta, sched.sigma_min);

    let stream = problem.sample_xy(t as usize, 1);

    // Feature form: O(n_terms) per step.
    let (feat, _) = run_feature(&stream, sched.eta, sched.sigma_min, loss, kernel).unwrap();
    let report = metrics::report_feature(&feat, &problem);
    println!(
        "feature form:  l2_sq = {:.4e}  rkhs_sq = {:.4e}  excess risk = {:.4e}",
        report.l2_sq, report.rkhs_sq, report.excess_risk
    );
    println!("target norms:  ||f||_rho^2 = {:.4e}  ||f||_K^2 = {:.4e}", problem.l2_norm_sq(), problem.rkhs_norm_sq());

    // Dual form on a shorter stream (cost grows with the square of the
    // stream length), plus the Gram-identity oracle for its RKHS error.
    let short = &stream[..500];
    let (dual, _) = run_dual(short, sched.eta, sched.sigma_min, loss, kernel).unwrap();
    let dual_report = metrics::report_dual(&dual, &problem);
    let gram = metrics::rkhs_error_gram(&dual, &problem);
    println!(
        "dual form (T = 500): rkhs_sq exact = {:.6e}, via gram identity = {:.6e}",
        dual_report.rkhs_sq, gram
    );

    // Any bounded kernel works in dual form; errors against the synthetic
    // target then come from Monte Carlo quadrature.
    let gaussian = GaussianKernel::new(0.1).unwrap();
    let (g_learner, _) = run_dual(short, 0.3, 1.0, loss, &gaussian).unwrap();
    let mc = metrics::l2_error_mc(|x| g_learner.predict(x, &gaussian), &problem, 50_000, 2);
    println!("gaussian kernel (T = 500): l2_sq by Monte Carlo = {:.4e}", mc);
}
