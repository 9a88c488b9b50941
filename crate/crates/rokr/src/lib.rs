//! Robust online kernel regression on `[0, 1]`.
//!
//! This crate implements single-pass stochastic gradient descent in a
//! reproducing kernel Hilbert space with windowed robust losses
//! `L_sigma(u) = W(u^2 / sigma^2)` (Welsch, Cauchy, Fair, Geman-McClure,
//! Tukey, plain least squares), together with everything needed to study
//! its convergence rates on synthetic problems whose regularity and
//! capacity are known exactly:
//!
//! * [`losses`] — the windowing-function family with analytically known
//!   constants and grid-based condition checks.
//! * [`kernels`] — bounded kernels, including a truncated spectral kernel
//!   with an explicit trigonometric eigensystem.
//! * [`learner`] — the online update in two equivalent representations
//!   (support-point dual form and spectral feature form), plus the step
//!   size and scale schedules that achieve the known rates.
//! * [`baselines`] — batch gradient descent with early stopping and plain
//!   online least squares.
//! * [`problems`] — synthetic regression problems with exactly known
//!   targets, bounded noise, and symmetric outlier contamination.
//! * [`metrics`] — exact L2 and RKHS errors via spectral coefficients,
//!   with an independent Gram-identity oracle and Monte Carlo fallback.
//! * [`theory`] — numeric checks of the operator-norm, iterate-norm, and
//!   weight-drift bounds that drive the rate analysis.
//! * [`harness`] — config-driven sweeps over sample size and seed, log-log
//!   rate fitting, CSV export, and the CLI entry point.
//!
//! The `examples/` directory has one runnable program per capability; the
//! `rokr` binary exposes the same machinery as `check-losses`, `run`,
//! `sweep`, and `verify-bounds` subcommands.

pub mod baselines;
pub mod harness;
pub mod kernels;
pub mod learner;
pub mod losses;
pub mod metrics;
pub mod problems;
pub mod theory;

pub use kernels::{GaussianKernel, Kernel, SpectralKernel};
pub use learner::{min_eta0, schedule_l2, schedule_rkhs, DualLearner, FeatureLearner, Schedule};
pub use losses::WindowingFunction;
pub use problems::{NoiseModel, Sample, SyntheticProblem};
