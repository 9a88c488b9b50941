//! The robust online learner and its step-size/scale schedules.
//!
//! Starting from `f_1 = 0`, each sample `(x_t, y_t)` updates the estimate
//! with a single gradient step gated by the windowing function:
//!
//! ```text
//! f_{t+1} = f_t - eta * W'(xi_t) * (f_t(x_t) - y_t) * K_{x_t},
//! xi_t    = (y_t - f_t(x_t))^2 / sigma^2.
//! ```
//!
//! Two equivalent representations are provided. [`DualLearner`] stores one
//! support point and coefficient per step and works with any bounded
//! kernel; its cost grows quadratically with the stream length.
//! [`FeatureLearner`] stores spectral coefficients and needs a
//! [`SpectralKernel`]; each step is O(n_terms), so long streams stay
//! linear. After identical streams the two predict identically up to
//! roundoff.
//!
//! The update applies the factor `W'(xi)(f(x) - y)` exactly as written
//! above, not the chain-rule gradient of `L_sigma` (which carries an extra
//! `2/sigma^2`); the schedules and admissibility constants below assume
//! this form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::{Kernel, SpectralKernel};
use crate::losses::{LossError, WindowingFunction};

#[derive(Debug, Error, PartialEq)]
pub enum LearnerError {
    #[error("step size must be positive and finite, got {0}")]
    BadEta(f64),
    #[error("scale must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("prediction became non-finite at step {step}; the configuration is divergent")]
    Diverged { step: usize },
    #[error("feature learner has {state} coefficients but the kernel has {kernel} terms")]
    KernelMismatch { state: usize, kernel: usize },
    #[error(transparent)]
    Loss(#[from] LossError),
}

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("horizon must be at least 1")]
    BadHorizon,
    #[error("regularity exponent must satisfy {needed}, got {got}")]
    BadRegularity { got: f64, needed: &'static str },
    #[error("capacity exponent must lie in (0, 1), got {0}")]
    BadCapacity(f64),
    #[error("eta0 = {eta0} is below the admissible floor {floor} for this loss and kernel")]
    Eta0BelowFloor { eta0: f64, floor: f64 },
}

/// One record per online step; enough to drive every bound check without
/// retaining the stream.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    /// `f_t(x_t) - y_t` before the update.
    pub residual: f64,
    /// `xi_t = residual^2 / sigma^2`.
    pub xi: f64,
    /// `W'(xi_t)`.
    pub weight: f64,
    /// `||f_{t+1}||_K^2` after the update.
    pub rkhs_norm_sq: f64,
    /// `|W'_+(0) - W'(xi_t)| * |residual| * sqrt(K(x_t, x_t))`, the RKHS
    /// norm of the step's deviation from its zero-residual linearization.
    pub drift_norm: f64,
}

/// Per-step log of a run.
#[derive(Debug, Clone, Default)]
pub struct StepLog {
    pub records: Vec<StepRecord>,
}

impl StepLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn check_params(eta: f64, sigma: f64) -> Result<(), LearnerError> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(LearnerError::BadEta(eta));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(LearnerError::BadSigma(sigma));
    }
    Ok(())
}

/// Online estimate stored in dual form: `f_t = sum_i a_i K_{x_i}` over the
/// points seen so far. Works with any [`Kernel`]; when the kernel exposes a
/// feature map the per-point features are cached so prediction is a plain
/// dot product.
#[derive(Debug, Clone)]
pub struct DualLearner {
    support: Vec<f64>,
    coeffs: Vec<f64>,
    features: Vec<Vec<f64>>,
    eta: f64,
    sigma: f64,
    loss: WindowingFunction,
    norm_sq: f64,
}

impl DualLearner {
    /// Empty state `f_1 = 0`.
    pub fn new(eta: f64, sigma: f64, loss: WindowingFunction) -> Result<Self, LearnerError> {
        check_params(eta, sigma)?;
        Ok(Self {
            support: Vec::new(),
            coeffs: Vec::new(),
            features: Vec::new(),
            eta,
            sigma,
            loss,
            norm_sq: 0.0,
        })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn loss(&self) -> &WindowingFunction {
        &self.loss
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Index `t` of the current iterate `f_t`; 1 for the empty state.
    pub fn step_index(&self) -> usize {
        self.coeffs.len() + 1
    }

    /// `||f_t||_K^2`, maintained incrementally across steps.
    pub fn rkhs_norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `f_t(x) = sum_i a_i K(x_i, x)`; zero for the empty state.
    pub fn predict<K: Kernel + ?Sized>(&self, x: f64, kernel: &K) -> f64 {
        if self.features.len() == self.coeffs.len() {
            if let Some(psi) = kernel.feature_map(x) {
                return self
                    .features
                    .iter()
                    .zip(&self.coeffs)
                    .map(|(f, &a)| a * dot(f, &psi))
                    .sum();
            }
        }
        self.support
            .iter()
            .zip(&self.coeffs)
            .map(|(&xi, &a)| a * kernel.eval(xi, x))
            .sum()
    }

    /// One online update. Appends `x` with coefficient
    /// `a_t = -eta * W'(xi_t) * (f_t(x) - y)`.
    pub fn step<K: Kernel + ?Sized>(
        &mut self,
        x: f64,
        y: f64,
        kernel: &K,
    ) -> Result<StepRecord, LearnerError> {
        let pred = self.predict(x, kernel);
        if !pred.is_finite() {
            return Err(LearnerError::Diverged { step: self.step_index() });
        }
        let residual = pred - y;
        let xi = residual * residual / (self.sigma * self.sigma);
        let weight = self.loss.deriv(xi)?;
        let a = -self.eta * weight * residual;
        let kxx = kernel.eval(x, x);
        // ||f + a K_x||^2 = ||f||^2 + 2 a f(x) + a^2 K(x, x).
        self.norm_sq += 2.0 * a * pred + a * a * kxx;
        if self.features.len() == self.coeffs.len() {
            if let Some(psi) = kernel.feature_map(x) {
                self.features.push(psi);
            }
        }
        self.support.push(x);
        self.coeffs.push(a);
        Ok(StepRecord {
            residual,
            xi,
            weight,
            rkhs_norm_sq: self.norm_sq,
            drift_norm: (self.loss.w_plus_zero - weight).abs() * residual.abs() * kxx.sqrt(),
        })
    }

    /// `a' G a` recomputed from scratch; the O(t^2) oracle for the
    /// incrementally maintained norm.
    pub fn gram_norm_sq<K: Kernel + ?Sized>(&self, kernel: &K) -> f64 {
        let n = self.support.len();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += self.coeffs[i]
                    * self.coeffs[j]
                    * kernel.eval(self.support[i], self.support[j]);
            }
        }
        acc
    }
}

/// Online estimate stored as coefficients over the spectral basis:
/// `f_t = sum_k b_k phi_k`. Valid only with a [`SpectralKernel`]; each step
/// costs O(n_terms).
#[derive(Debug, Clone)]
pub struct FeatureLearner {
    coeffs: Vec<f64>,
    scratch: Vec<f64>,
    eta: f64,
    sigma: f64,
    loss: WindowingFunction,
    steps: usize,
}

impl FeatureLearner {
    pub fn new(
        eta: f64,
        sigma: f64,
        loss: WindowingFunction,
        n_terms: usize,
    ) -> Result<Self, LearnerError> {
        check_params(eta, sigma)?;
        Ok(Self {
            coeffs: vec![0.0; n_terms],
            scratch: vec![0.0; n_terms],
            eta,
            sigma,
            loss,
            steps: 0,
        })
    }

    /// Coefficients of `f_t` over the basis.
    pub fn basis_coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn loss(&self) -> &WindowingFunction {
        &self.loss
    }

    pub fn step_index(&self) -> usize {
        self.steps + 1
    }

    fn check_kernel(&self, kernel: &SpectralKernel) -> Result<(), LearnerError> {
        if kernel.n_terms() != self.coeffs.len() {
            return Err(LearnerError::KernelMismatch {
                state: self.coeffs.len(),
                kernel: kernel.n_terms(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, x: f64, kernel: &SpectralKernel) -> f64 {
        let basis = kernel.basis(x);
        dot(&self.coeffs, &basis)
    }

    /// `||f_t||_K^2 = sum_k b_k^2 / lambda_k`.
    pub fn rkhs_norm_sq(&self, kernel: &SpectralKernel) -> f64 {
        self.coeffs
            .iter()
            .zip(kernel.eigenvalues())
            .map(|(&b, &l)| b * b / l)
            .sum()
    }

    /// Coordinate form of the online update:
    /// `b_k <- b_k - eta * W'(xi) * (f_t(x) - y) * lambda_k * phi_k(x)`.
    pub fn step(
        &mut self,
        x: f64,
        y: f64,
        kernel: &SpectralKernel,
    ) -> Result<StepRecord, LearnerError> {
        self.check_kernel(kernel)?;
        kernel.basis_into(x, &mut self.scratch);
        let pred = dot(&self.coeffs, &self.scratch);
        if !pred.is_finite() {
            return Err(LearnerError::Diverged { step: self.step_index() });
        }
        let residual = pred - y;
        let xi = residual * residual / (self.sigma * self.sigma);
        let weight = self.loss.deriv(xi)?;
        let g = -self.eta * weight * residual;
        let mut kxx = 0.0;
        for ((b, &phi), &lambda) in
            self.coeffs.iter_mut().zip(self.scratch.iter()).zip(kernel.eigenvalues())
        {
            *b += g * lambda * phi;
            kxx += lambda * phi * phi;
        }
        self.steps += 1;
        Ok(StepRecord {
            residual,
            xi,
            weight,
            rkhs_norm_sq: self.rkhs_norm_sq(kernel),
            drift_norm: (self.loss.w_plus_zero - weight).abs() * residual.abs() * kxx.sqrt(),
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Drive a dual-form learner through a stream, logging every step.
pub fn run_dual<K: Kernel + ?Sized>(
    stream: &[(f64, f64)],
    eta: f64,
    sigma: f64,
    loss: WindowingFunction,
    kernel: &K,
) -> Result<(DualLearner, StepLog), LearnerError> {
    let mut learner = DualLearner::new(eta, sigma, loss)?;
    let mut log = StepLog { records: Vec::with_capacity(stream.len()) };
    for &(x, y) in stream {
        log.records.push(learner.step(x, y, kernel)?);
    }
    Ok((learner, log))
}

/// Drive a feature-form learner through a stream, logging every step.
pub fn run_feature(
    stream: &[(f64, f64)],
    eta: f64,
    sigma: f64,
    loss: WindowingFunction,
    kernel: &SpectralKernel,
) -> Result<(FeatureLearner, StepLog), LearnerError> {
    let mut learner = FeatureLearner::new(eta, sigma, loss, kernel.n_terms())?;
    let mut log = StepLog { records: Vec::with_capacity(stream.len()) };
    for &(x, y) in stream {
        log.records.push(learner.step(x, y, kernel)?);
    }
    Ok((learner, log))
}

/// Which representation a run should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Dual,
    Feature,
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Representation::Dual => write!(f, "dual"),
            Representation::Feature => write!(f, "feature"),
        }
    }
}

/// Step size and scale floor produced by a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub eta: f64,
    pub sigma_min: f64,
}

/// Smallest admissible `eta0`:
/// `max{ C_W kappa^2, (1/e + 2 kappa^2 W'_+(0))^2 }`.
pub fn min_eta0(loss: &WindowingFunction, kappa: f64) -> f64 {
    let a = loss.c_w * kappa * kappa;
    let b = 1.0 / std::f64::consts::E + 2.0 * kappa * kappa * loss.w_plus_zero;
    a.max(b * b)
}

/// Schedule for the mean-square (L2) rate: constant step
/// `eta = eta0^-1 T^(-2r/(2r+1))` and scale floor
/// `sigma_min = T^((r+p+1)/(2p(2r+1)))` with `p` taken from the loss.
pub fn schedule_l2(
    t_horizon: u64,
    r: f64,
    eta0: f64,
    loss: &WindowingFunction,
    kappa: f64,
) -> Result<Schedule, ScheduleError> {
    if t_horizon < 1 {
        return Err(ScheduleError::BadHorizon);
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(ScheduleError::BadRegularity { got: r, needed: "r > 0" });
    }
    let floor = min_eta0(loss, kappa);
    if eta0 < floor {
        return Err(ScheduleError::Eta0BelowFloor { eta0, floor });
    }
    let t = t_horizon as f64;
    let eta = t.powf(-2.0 * r / (2.0 * r + 1.0)) / eta0;
    let p = loss.p;
    let sigma_min = t.powf((r + p + 1.0) / (2.0 * p * (2.0 * r + 1.0)));
    Ok(Schedule { eta, sigma_min })
}

/// Schedule for the RKHS-norm rate under a capacity exponent `beta`:
/// `eta = eta0^-1 T^((1-2r-beta)/(2r+beta))` and
/// `sigma_min = T^((p+r+1)/(2p(2r+beta)))`. Requires `r > 1/2`.
pub fn schedule_rkhs(
    t_horizon: u64,
    r: f64,
    beta: f64,
    eta0: f64,
    loss: &WindowingFunction,
    kappa: f64,
) -> Result<Schedule, ScheduleError> {
    if t_horizon < 1 {
        return Err(ScheduleError::BadHorizon);
    }
    if !(r > 0.5) || !r.is_finite() {
        return Err(ScheduleError::BadRegularity { got: r, needed: "r > 1/2" });
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(ScheduleError::BadCapacity(beta));
    }
    let floor = min_eta0(loss, kappa);
    if eta0 < floor {
        return Err(ScheduleError::Eta0BelowFloor { eta0, floor });
    }
    let t = t_horizon as f64;
    let eta = t.powf((1.0 - 2.0 * r - beta) / (2.0 * r + beta)) / eta0;
    let p = loss.p;
    let sigma_min = t.powf((p + r + 1.0) / (2.0 * p * (2.0 * r + beta)));
    Ok(Schedule { eta, sigma_min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::E;

    fn unit_kernel() -> SpectralKernel {
        SpectralKernel::from_eigenvalues(vec![1.0]).unwrap()
    }

    #[test]
    fn empty_state_predicts_zero() {
        let k = SpectralKernel::power_law(16, 2.0).unwrap();
        let learner = DualLearner::new(0.1, 1.0, WindowingFunction::welsch()).unwrap();
        assert_eq!(learner.predict(0.5, &k), 0.0);
        assert_eq!(learner.rkhs_norm_sq(), 0.0);
        assert_eq!(learner.step_index(), 1);
        assert!(DualLearner::new(0.0, 1.0, WindowingFunction::welsch()).is_err());
        assert!(DualLearner::new(0.1, -1.0, WindowingFunction::welsch()).is_err());
    }

    #[test]
    fn zero_target_keeps_zero_state() {
        let k = SpectralKernel::power_law(4, 2.0).unwrap();
        let mut learner = DualLearner::new(0.1, 1.0, WindowingFunction::welsch()).unwrap();
        learner.step(0.3, 0.0, &k).unwrap();
        assert_eq!(learner.coeffs()[0], 0.0);
        assert_eq!(learner.predict(0.7, &k), 0.0);
    }

    #[test]
    fn first_welsch_step_coefficient() {
        // From f_1 = 0 with y = 1, eta = 0.1, sigma = 1 on a kernel with
        // K(x, x) = 1: xi = 1, W'(1) = exp(-1/2)/2, a_1 = 0.1 W'(1).
        let k = unit_kernel();
        let mut learner = DualLearner::new(0.1, 1.0, WindowingFunction::welsch()).unwrap();
        let rec = learner.step(0.4, 1.0, &k).unwrap();
        let expected = 0.1 * 0.5 * (-0.5_f64).exp();
        assert_relative_eq!(learner.coeffs()[0], expected, max_relative = 1e-15);
        assert_relative_eq!(expected, 0.030_326_532_985_631_67, max_relative = 1e-12);
        assert_eq!(rec.xi, 1.0);

        let mut feat = FeatureLearner::new(0.1, 1.0, WindowingFunction::welsch(), 1).unwrap();
        feat.step(0.4, 1.0, &k).unwrap();
        assert_relative_eq!(feat.basis_coeffs()[0], expected, max_relative = 1e-15);
    }

    #[test]
    fn one_support_point_prediction() {
        let k = SpectralKernel::power_law(8, 2.0).unwrap();
        let mut learner = DualLearner::new(0.2, 1.0, WindowingFunction::identity()).unwrap();
        learner.step(0.25, 1.0, &k).unwrap();
        let a1 = learner.coeffs()[0];
        assert_relative_eq!(
            learner.predict(0.25, &k),
            a1 * k.eval(0.25, 0.25),
            max_relative = 1e-12
        );
    }

    #[test]
    fn identity_window_is_sigma_invariant() {
        let k = SpectralKernel::power_law(32, 2.0).unwrap();
        let stream = make_stream(200, 11);
        let (a, _) = run_dual(&stream, 0.05, 1.0, WindowingFunction::identity(), &k).unwrap();
        let (b, _) = run_dual(&stream, 0.05, 10.0, WindowingFunction::identity(), &k).unwrap();
        for (ca, cb) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((ca - cb).abs() <= 1e-12);
        }
    }

    #[test]
    fn identity_window_matches_handwritten_least_squares() {
        // Independent plain least-squares recursion, coded directly.
        let k = SpectralKernel::power_law(16, 2.0).unwrap();
        let stream = make_stream(150, 3);
        let eta = 0.05;
        let mut support: Vec<f64> = Vec::new();
        let mut coeffs: Vec<f64> = Vec::new();
        for &(x, y) in &stream {
            let pred: f64 =
                support.iter().zip(&coeffs).map(|(&xi, &ai)| ai * k.eval(xi, x)).sum();
            support.push(x);
            coeffs.push(-eta * (pred - y));
        }
        let (learner, _) = run_dual(&stream, eta, 1.0, WindowingFunction::identity(), &k).unwrap();
        for (a, b) in learner.coeffs().iter().zip(&coeffs) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn dual_and_feature_forms_agree() {
        let k = SpectralKernel::power_law(64, 2.0).unwrap();
        let stream = make_stream(100, 5);
        let loss = WindowingFunction::welsch();
        let (dual, _) = run_dual(&stream, 0.05, 1.0, loss, &k).unwrap();
        let (feat, _) = run_feature(&stream, 0.05, 1.0, loss, &k).unwrap();
        let mut max_gap = 0.0f64;
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            max_gap = max_gap.max((dual.predict(x, &k) - feat.predict(x, &k)).abs());
        }
        assert!(max_gap <= 1e-8, "max prediction gap {max_gap}");
    }

    #[test]
    fn incremental_norm_matches_gram() {
        let k = SpectralKernel::power_law(24, 2.0).unwrap();
        let stream = make_stream(80, 9);
        let (learner, log) =
            run_dual(&stream, 0.05, 1.0, WindowingFunction::cauchy(), &k).unwrap();
        let gram = learner.gram_norm_sq(&k);
        let inc = log.records.last().unwrap().rkhs_norm_sq;
        assert_relative_eq!(gram, inc, max_relative = 1e-9);
        assert_relative_eq!(learner.rkhs_norm_sq(), inc, max_relative = 1e-15);
    }

    #[test]
    fn divergent_configuration_is_reported() {
        let k = unit_kernel();
        let stream: Vec<(f64, f64)> = (0..2000).map(|i| (0.1, if i % 2 == 0 { 1.0 } else { -1.0 })).collect();
        // eta = 10 on K == 1 multiplies the residual by -9 every step.
        let err = run_dual(&stream, 10.0, 1.0, WindowingFunction::identity(), &k).unwrap_err();
        assert!(matches!(err, LearnerError::Diverged { .. }));
    }

    #[test]
    fn feature_kernel_mismatch_rejected() {
        let k = SpectralKernel::power_law(8, 2.0).unwrap();
        let mut learner = FeatureLearner::new(0.1, 1.0, WindowingFunction::welsch(), 4).unwrap();
        assert!(matches!(
            learner.step(0.5, 1.0, &k),
            Err(LearnerError::KernelMismatch { .. })
        ));
    }

    #[test]
    fn min_eta0_values() {
        let welsch = WindowingFunction::welsch();
        assert_relative_eq!(
            min_eta0(&welsch, 1.0),
            (1.0 / E + 1.0) * (1.0 / E + 1.0),
            max_relative = 1e-15
        );
        let id = WindowingFunction::identity();
        assert_relative_eq!(
            min_eta0(&id, 1.0),
            (1.0 / E + 2.0) * (1.0 / E + 2.0),
            max_relative = 1e-15
        );
        // kappa -> 0 leaves only the 1/e term.
        assert_relative_eq!(
            min_eta0(&welsch, 1e-12),
            1.0 / (E * E),
            max_relative = 1e-9
        );
    }

    #[test]
    fn l2_schedule_values() {
        let welsch = WindowingFunction::welsch();
        let s = schedule_l2(1000, 0.5, 2.0, &welsch, 1.0).unwrap();
        assert_relative_eq!(s.eta, 0.5 * 1000f64.powf(-0.5), max_relative = 1e-15);
        assert_relative_eq!(s.eta, 0.015_811_388_300_841_896, max_relative = 1e-12);
        // p = 1: exponent (r + p + 1) / (2p(2r + 1)) = 2.5 / 4.
        assert_relative_eq!(s.sigma_min, 1000f64.powf(0.625), max_relative = 1e-15);
        assert_relative_eq!(s.sigma_min, 74.989_420_933_245_58, max_relative = 1e-12);

        let one = schedule_l2(1, 0.5, 2.0, &welsch, 1.0).unwrap();
        assert_eq!(one.eta, 0.5);
        assert_eq!(one.sigma_min, 1.0);

        assert!(matches!(
            schedule_l2(1000, 0.5, 0.1, &welsch, 1.0),
            Err(ScheduleError::Eta0BelowFloor { .. })
        ));
        assert!(schedule_l2(0, 0.5, 2.0, &welsch, 1.0).is_err());
        assert!(schedule_l2(10, -1.0, 2.0, &welsch, 1.0).is_err());
    }

    #[test]
    fn rkhs_schedule_values() {
        let welsch = WindowingFunction::welsch();
        let s = schedule_rkhs(1000, 1.0, 0.5, 2.0, &welsch, 1.0).unwrap();
        assert_relative_eq!(s.eta, 0.5 * 1000f64.powf(-0.6), max_relative = 1e-15);
        assert_relative_eq!(s.eta, 0.007_924_465_962_305_567, max_relative = 1e-12);
        assert_relative_eq!(s.sigma_min, 1000f64.powf(0.6), max_relative = 1e-15);
        assert_relative_eq!(s.sigma_min, 63.095_734_448_019_32, max_relative = 1e-12);

        let one = schedule_rkhs(1, 1.0, 0.5, 2.0, &welsch, 1.0).unwrap();
        assert_eq!(one.eta, 0.5);

        // r <= 1/2 is outside the strong-convergence regime.
        assert!(matches!(
            schedule_rkhs(1000, 0.5, 0.5, 2.0, &welsch, 1.0),
            Err(ScheduleError::BadRegularity { .. })
        ));
        assert!(schedule_rkhs(1000, 1.0, 1.5, 2.0, &welsch, 1.0).is_err());
    }

    #[test]
    fn iterate_norm_bound_during_run() {
        // With eta <= 1 / (kappa^2 C_W) the running norm obeys
        // ||f_{t+1}||_K^2 <= M^2 C_W eta t.
        let k = SpectralKernel::power_law(32, 2.0).unwrap();
        let kappa2 = k.kappa_bound().powi(2);
        let m = 1.0;
        for loss in WindowingFunction::builtins() {
            let eta = 0.9 / (kappa2 * loss.c_w);
            let stream = make_stream(400, 17);
            let (_, log) = run_dual(&stream, eta, 1.0, loss, &k).unwrap();
            for (i, rec) in log.records.iter().enumerate() {
                let bound = m * m * loss.c_w * eta * (i as f64 + 1.0);
                assert!(
                    rec.rkhs_norm_sq <= bound * (1.0 + 1e-9),
                    "{} step {}: {} > {}",
                    loss.name(),
                    i + 1,
                    rec.rkhs_norm_sq,
                    bound
                );
            }
        }
    }

    fn make_stream(n: usize, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (rng.gen::<f64>(), 2.0 * rng.gen::<f64>() - 1.0))
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn representations_agree_on_short_streams(seed in 0u64..1000) {
            let k = SpectralKernel::power_law(16, 2.0).unwrap();
            let stream = make_stream(40, seed);
            let loss = WindowingFunction::cauchy();
            let (dual, _) = run_dual(&stream, 0.1, 1.0, loss, &k).unwrap();
            let (feat, _) = run_feature(&stream, 0.1, 1.0, loss, &k).unwrap();
            for i in 0..20 {
                let x = i as f64 / 19.0;
                prop_assert!((dual.predict(x, &k) - feat.predict(x, &k)).abs() <= 1e-8);
            }
        }
    }
}
