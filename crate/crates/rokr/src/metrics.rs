//! Exact and Monte Carlo error measurements.
//!
//! On spectral problems both errors are available in closed form once the
//! estimate's basis coefficients are known: with `e_k = fhat_k - f_k`,
//!
//! ```text
//! ||fhat - f_rho||_rho^2 = sum_k e_k^2
//! ||fhat - f_rho||_K^2   = sum_k e_k^2 / lambda_k
//! ```
//!
//! For dual-form states the RKHS error can also be computed straight from
//! the Gram identity, `a' G a - 2 sum_i a_i f_rho(x_i) + ||f_rho||_K^2`,
//! which never touches basis coefficients; agreement of the two routes is
//! the strongest self-check in the crate. Excess risk equals the squared
//! L2 error for the square-integrated residual functional.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kernels::Kernel;
use crate::learner::{DualLearner, FeatureLearner};
use crate::problems::SyntheticProblem;

/// How an error value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMethod {
    /// Closed form over basis coefficients.
    Exact,
    /// Gram identity on a dual-form state.
    Gram,
    /// Monte Carlo quadrature.
    Mc,
}

impl std::fmt::Display for ErrorMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ErrorMethod::Exact => write!(f, "exact"),
            ErrorMethod::Gram => write!(f, "gram"),
            ErrorMethod::Mc => write!(f, "mc"),
        }
    }
}

/// Squared errors of an estimate against the problem target.
#[derive(Debug, Clone, Copy)]
pub struct ErrorReport {
    /// `||fhat - f_rho||_rho^2`.
    pub l2_sq: f64,
    /// `||fhat - f_rho||_K^2`.
    pub rkhs_sq: f64,
    /// `E(fhat) - E(f_rho)`; equals `l2_sq` for this risk functional.
    pub excess_risk: f64,
    pub method: ErrorMethod,
}

/// Basis coefficients of a dual-form estimate:
/// `fhat_k = lambda_k sum_i a_i phi_k(x_i)`.
pub fn estimator_coeffs_dual(learner: &DualLearner, problem: &SyntheticProblem) -> Vec<f64> {
    let kernel = problem.kernel();
    let n = kernel.n_terms();
    let mut acc = vec![0.0; n];
    let mut basis = vec![0.0; n];
    for (&x, &a) in learner.support().iter().zip(learner.coeffs()) {
        kernel.basis_into(x, &mut basis);
        for (s, &b) in acc.iter_mut().zip(&basis) {
            *s += a * b;
        }
    }
    for (s, &l) in acc.iter_mut().zip(kernel.eigenvalues()) {
        *s *= l;
    }
    acc
}

/// Basis coefficients of a feature-form estimate (stored directly).
pub fn estimator_coeffs_feature(learner: &FeatureLearner) -> Vec<f64> {
    learner.basis_coeffs().to_vec()
}

/// `sum_k (fhat_k - f_k)^2`.
pub fn l2_error_exact(coeffs: &[f64], problem: &SyntheticProblem) -> f64 {
    coeffs
        .iter()
        .zip(problem.target_coeffs())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum()
}

/// `sum_k (fhat_k - f_k)^2 / lambda_k`.
pub fn rkhs_error_exact(coeffs: &[f64], problem: &SyntheticProblem) -> f64 {
    coeffs
        .iter()
        .zip(problem.target_coeffs())
        .zip(problem.kernel().eigenvalues())
        .map(|((&a, &b), &l)| (a - b) * (a - b) / l)
        .sum()
}

/// RKHS error via the Gram identity; independent of the spectral
/// coefficient path.
pub fn rkhs_error_gram(learner: &DualLearner, problem: &SyntheticProblem) -> f64 {
    let kernel = problem.kernel();
    let cross: f64 = learner
        .support()
        .iter()
        .zip(learner.coeffs())
        .map(|(&x, &a)| a * problem.eval_target(x))
        .sum();
    learner.gram_norm_sq(kernel) - 2.0 * cross + problem.rkhs_norm_sq()
}

/// Monte Carlo estimate of the squared L2 error of an arbitrary predictor.
pub fn l2_error_mc<F: Fn(f64) -> f64>(
    predictor: F,
    problem: &SyntheticProblem,
    n_points: usize,
    seed: u64,
) -> f64 {
    assert!(n_points >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    for _ in 0..n_points {
        let x: f64 = rng.gen();
        let d = predictor(x) - problem.eval_target(x);
        acc += d * d;
    }
    acc / n_points as f64
}

/// Exact error report from basis coefficients.
pub fn report_exact(coeffs: &[f64], problem: &SyntheticProblem) -> ErrorReport {
    let l2_sq = l2_error_exact(coeffs, problem);
    ErrorReport {
        l2_sq,
        rkhs_sq: rkhs_error_exact(coeffs, problem),
        excess_risk: l2_sq,
        method: ErrorMethod::Exact,
    }
}

/// Exact error report for a dual-form learner.
pub fn report_dual(learner: &DualLearner, problem: &SyntheticProblem) -> ErrorReport {
    report_exact(&estimator_coeffs_dual(learner, problem), problem)
}

/// Exact error report for a feature-form learner.
pub fn report_feature(learner: &FeatureLearner, problem: &SyntheticProblem) -> ErrorReport {
    report_exact(learner.basis_coeffs(), problem)
}

#[allow(dead_code)]
fn assert_kernel_is_object_safe(k: &dyn Kernel) -> f64 {
    k.kappa_bound()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::SpectralKernel;
    use crate::learner::{run_dual, run_feature};
    use crate::losses::WindowingFunction;
    use crate::problems::{CoeffLaw, NoiseModel};
    use approx::assert_relative_eq;

    fn test_problem(n_terms: usize) -> SyntheticProblem {
        SyntheticProblem::power_law(
            n_terms,
            2.0,
            0.5,
            CoeffLaw::default(),
            NoiseModel::clean(0.2),
            1,
        )
        .unwrap()
    }

    #[test]
    fn empty_state_errors_are_target_norms() {
        let p = test_problem(32);
        let learner = DualLearner::new(0.1, 1.0, WindowingFunction::welsch()).unwrap();
        let coeffs = estimator_coeffs_dual(&learner, &p);
        assert!(coeffs.iter().all(|&c| c == 0.0));
        assert_relative_eq!(l2_error_exact(&coeffs, &p), p.l2_norm_sq(), max_relative = 1e-15);
        assert_relative_eq!(
            rkhs_error_exact(&coeffs, &p),
            p.rkhs_norm_sq(),
            max_relative = 1e-15
        );
        assert_relative_eq!(rkhs_error_gram(&learner, &p), p.rkhs_norm_sq(), max_relative = 1e-15);
    }

    #[test]
    fn perfect_estimate_has_zero_error() {
        let p = test_problem(16);
        let coeffs = p.target_coeffs().to_vec();
        assert_eq!(l2_error_exact(&coeffs, &p), 0.0);
        assert_eq!(rkhs_error_exact(&coeffs, &p), 0.0);
        assert_eq!(l2_error_mc(|x| p.eval_target(x), &p, 1000, 3), 0.0);
    }

    #[test]
    fn one_support_point_coefficients() {
        // a_1 = 1 at x_1 = 0 with spectrum {1, 1/2} and basis {1, sqrt2 cos}:
        // fhat = (1, sqrt2 / 2).
        let kernel = SpectralKernel::from_eigenvalues(vec![1.0, 0.5]).unwrap();
        let p = crate::problems::SyntheticProblem::from_parts(
            kernel,
            1.0,
            vec![0.0, 0.0],
            NoiseModel::noiseless(),
            1,
        );
        // All-zero targets are fine for this check.
        let p = p.unwrap();
        let mut learner = DualLearner::new(1.0, 1.0, WindowingFunction::identity()).unwrap();
        // One identity step with y = 1 at x = 0 gives a_1 = eta (pred = 0).
        learner.step(0.0, 1.0, p.kernel()).unwrap();
        let coeffs = estimator_coeffs_dual(&learner, &p);
        assert_relative_eq!(coeffs[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(coeffs[1], std::f64::consts::SQRT_2 / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn single_point_gram_expansion() {
        let p = test_problem(8);
        let k = p.kernel();
        let mut learner = DualLearner::new(0.3, 1.0, WindowingFunction::identity()).unwrap();
        learner.step(0.4, 1.0, k).unwrap();
        let a1 = learner.coeffs()[0];
        let expected =
            k.eval(0.4, 0.4) * a1 * a1 - 2.0 * a1 * p.eval_target(0.4) + p.rkhs_norm_sq();
        assert_relative_eq!(rkhs_error_gram(&learner, &p), expected, max_relative = 1e-12);
    }

    #[test]
    fn representations_and_oracles_agree_after_runs() {
        let p = test_problem(48);
        let k = p.kernel();
        let stream = p.sample_xy(100, 21);
        let loss = WindowingFunction::welsch();
        let (dual, _) = run_dual(&stream, 0.05, 1.0, loss, k).unwrap();
        let (feat, _) = run_feature(&stream, 0.05, 1.0, loss, k).unwrap();

        let cd = estimator_coeffs_dual(&dual, &p);
        let cf = estimator_coeffs_feature(&feat);
        for (a, b) in cd.iter().zip(&cf) {
            assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }

        let exact = rkhs_error_exact(&cd, &p);
        let gram = rkhs_error_gram(&dual, &p);
        assert_relative_eq!(exact, gram, max_relative = 1e-6);
    }

    #[test]
    fn mc_error_converges_to_exact() {
        let p = test_problem(32);
        let k = p.kernel();
        let stream = p.sample_xy(200, 8);
        let (feat, _) = run_feature(&stream, 0.05, 1.0, WindowingFunction::welsch(), k).unwrap();
        let coeffs = estimator_coeffs_feature(&feat);
        let exact = l2_error_exact(&coeffs, &p);

        let n = 100_000;
        // Standard error of the MC mean, estimated from the samples.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let draws: Vec<f64> = (0..n)
            .map(|_| {
                let x: f64 = rng.gen();
                let d = feat.predict(x, k) - p.eval_target(x);
                d * d
            })
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var =
            draws.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        let mc = l2_error_mc(|x| feat.predict(x, k), &p, n, 5);
        assert!((mc - exact).abs() <= 3.0 * se, "mc {mc}, exact {exact}, se {se}");
    }

    #[test]
    fn constant_predictor_against_zero_target() {
        let kernel = SpectralKernel::from_eigenvalues(vec![1.0]).unwrap();
        let p = crate::problems::SyntheticProblem::from_parts(
            kernel,
            1.0,
            vec![0.0],
            NoiseModel::noiseless(),
            1,
        )
        .unwrap();
        let mc = l2_error_mc(|_| 0.7, &p, 1000, 11);
        assert_relative_eq!(mc, 0.49, max_relative = 1e-12);
    }

    #[test]
    fn norm_ordering_and_excess_risk() {
        let p = test_problem(40);
        let k = p.kernel();
        let stream = p.sample_xy(150, 13);
        let (feat, _) = run_feature(&stream, 0.05, 1.0, WindowingFunction::cauchy(), k).unwrap();
        let report = report_feature(&feat, &p);
        let lambda1 = k.eigenvalues()[0];
        assert!(report.l2_sq <= lambda1 * report.rkhs_sq + 1e-15);
        assert_eq!(report.excess_risk, report.l2_sq);
        assert!(report.l2_sq >= 0.0 && report.rkhs_sq >= 0.0);
    }
}
