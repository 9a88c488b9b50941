//! Synthetic regression problems with exactly known targets.
//!
//! A problem pairs a [`SpectralKernel`] with target coefficients built as
//! `f_k = lambda_k^r c_k` for a square-summable sequence `c_k`, so the
//! regularity exponent `r` of the target relative to the kernel is chosen,
//! not estimated. With the power-law spectrum `lambda_k = k^-gamma`
//! (`gamma > 1`), the trace of every power `beta > 1/gamma` of the
//! integral operator is finite, which pins the capacity side as well.
//!
//! Outputs are `y = f_rho(x) + eps` with `x` uniform on `[0, 1]` and `eps`
//! either uniform on `[-nu, nu]` or, with probability `q`, a symmetric
//! outlier `+/- s_mag`. Both parts are mean zero, so `f_rho` stays the
//! conditional mean and robust and least-squares learners share one
//! target; contamination inflates error, it does not move the target.
//! Outputs are bounded: `|y| <= M` with `M` recorded on the problem.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::kernels::{KernelError, SpectralKernel};

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("spectrum decay must satisfy gamma > 1 for a trace-class operator, got {0}")]
    NotTraceClass(f64),
    #[error("regularity exponent must be positive and finite, got {0}")]
    BadRegularity(f64),
    #[error("coefficient sequence must match the spectrum length ({kernel} terms, got {coeffs})")]
    CoeffLengthMismatch { kernel: usize, coeffs: usize },
    #[error("noise half-width must be nonnegative and finite, got {0}")]
    BadNoise(f64),
    #[error("contamination probability must lie in [0, 1), got {0}")]
    BadContamination(f64),
    #[error("outlier magnitude must be nonnegative and finite, got {0}")]
    BadSpike(f64),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Bounded noise plus symmetric outlier contamination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Half-width of the clean uniform noise on `[-nu, nu]`.
    pub nu: f64,
    /// Probability of replacing the noise by an outlier.
    pub q: f64,
    /// Outlier magnitude; the sign is a fair coin.
    pub s_mag: f64,
}

impl NoiseModel {
    pub fn clean(nu: f64) -> Self {
        Self { nu, q: 0.0, s_mag: 0.0 }
    }

    pub fn noiseless() -> Self {
        Self { nu: 0.0, q: 0.0, s_mag: 0.0 }
    }

    fn validate(&self) -> Result<(), ProblemError> {
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return Err(ProblemError::BadNoise(self.nu));
        }
        if !(0.0..1.0).contains(&self.q) {
            return Err(ProblemError::BadContamination(self.q));
        }
        if !(self.s_mag >= 0.0) || !self.s_mag.is_finite() {
            return Err(ProblemError::BadSpike(self.s_mag));
        }
        Ok(())
    }

    /// `E[eps^2] = (1 - q) nu^2 / 3 + q s_mag^2`.
    pub fn variance(&self) -> f64 {
        (1.0 - self.q) * self.nu * self.nu / 3.0 + self.q * self.s_mag * self.s_mag
    }
}

/// How target coefficients `c_k` are generated.
#[derive(Debug, Clone, PartialEq)]
pub enum CoeffLaw {
    /// `c_k = k^-decay`, normalized so the sup-norm bound of the target is 1.
    PowerLaw { decay: f64 },
    /// Explicit coefficients, used as given.
    Explicit(Vec<f64>),
}

impl Default for CoeffLaw {
    fn default() -> Self {
        CoeffLaw::PowerLaw { decay: 0.51 }
    }
}

/// One observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub x: f64,
    pub y: f64,
    pub contaminated: bool,
}

impl Sample {
    pub fn xy(&self) -> (f64, f64) {
        (self.x, self.y)
    }
}

/// A synthetic problem: spectral kernel, target with chosen regularity,
/// and a bounded noise model. Immutable after construction; sampling takes
/// a per-call seed so concurrent streams never share generator state.
#[derive(Debug, Clone)]
pub struct SyntheticProblem {
    kernel: SpectralKernel,
    r: f64,
    g_coeffs: Vec<f64>,
    target_coeffs: Vec<f64>,
    noise: NoiseModel,
    sup_bound: f64,
    m_bound: f64,
    seed: u64,
}

impl SyntheticProblem {
    /// Problem over the power-law spectrum `lambda_k = k^-gamma` with
    /// `gamma > 1`, target coefficients from `law`, and the given noise.
    pub fn power_law(
        n_terms: usize,
        gamma: f64,
        r: f64,
        law: CoeffLaw,
        noise: NoiseModel,
        seed: u64,
    ) -> Result<Self, ProblemError> {
        if !(gamma > 1.0) {
            return Err(ProblemError::NotTraceClass(gamma));
        }
        let kernel = SpectralKernel::power_law(n_terms, gamma)?;
        let g_coeffs = match law {
            CoeffLaw::Explicit(c) => c,
            CoeffLaw::PowerLaw { decay } => {
                let raw: Vec<f64> =
                    (1..=n_terms).map(|k| (k as f64).powf(-decay)).collect();
                // Normalize so the sup-norm bound sqrt(2) sum lambda^r |c|
                // comes out exactly 1.
                let z: f64 = std::f64::consts::SQRT_2
                    * raw
                        .iter()
                        .zip(kernel.eigenvalues())
                        .map(|(c, l)| c * l.powf(r))
                        .sum::<f64>();
                raw.into_iter().map(|c| c / z).collect()
            }
        };
        Self::from_parts(kernel, r, g_coeffs, noise, seed)
    }

    /// Problem from an explicit kernel and coefficient sequence.
    pub fn from_parts(
        kernel: SpectralKernel,
        r: f64,
        g_coeffs: Vec<f64>,
        noise: NoiseModel,
        seed: u64,
    ) -> Result<Self, ProblemError> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(ProblemError::BadRegularity(r));
        }
        if g_coeffs.len() != kernel.n_terms() {
            return Err(ProblemError::CoeffLengthMismatch {
                kernel: kernel.n_terms(),
                coeffs: g_coeffs.len(),
            });
        }
        noise.validate()?;
        let target_coeffs: Vec<f64> = g_coeffs
            .iter()
            .zip(kernel.eigenvalues())
            .map(|(c, l)| c * l.powf(r))
            .collect();
        let sup_bound: f64 = std::f64::consts::SQRT_2
            * target_coeffs.iter().map(|c| c.abs()).sum::<f64>();
        let m_bound = sup_bound + noise.nu.max(noise.s_mag);
        Ok(Self { kernel, r, g_coeffs, target_coeffs, noise, sup_bound, m_bound, seed })
    }

    pub fn kernel(&self) -> &SpectralKernel {
        &self.kernel
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn default_seed(&self) -> u64 {
        self.seed
    }

    /// Coefficients of the target over the basis: `f_k = lambda_k^r c_k`.
    pub fn target_coeffs(&self) -> &[f64] {
        &self.target_coeffs
    }

    /// Upper bound for `sup |f_rho|`.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// Output bound `M = sup_bound + max(nu, s_mag)`; `|y| <= M` surely.
    pub fn m_bound(&self) -> f64 {
        self.m_bound
    }

    /// `||f_rho||_rho^2 = sum_k (lambda_k^r c_k)^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.target_coeffs.iter().map(|c| c * c).sum()
    }

    /// `||f_rho||_K^2 = sum_k lambda_k^(2r-1) c_k^2`.
    pub fn rkhs_norm_sq(&self) -> f64 {
        self.target_coeffs
            .iter()
            .zip(self.kernel.eigenvalues())
            .map(|(c, l)| c * c / l)
            .sum()
    }

    /// `||g_rho||_rho^2 = sum_k c_k^2`.
    pub fn g_norm_sq(&self) -> f64 {
        self.g_coeffs.iter().map(|c| c * c).sum()
    }

    /// Noise variance `E[(y - f_rho(x))^2]`, the risk of the target itself.
    pub fn noise_variance(&self) -> f64 {
        self.noise.variance()
    }

    /// Whether the declared capacity exponent is certified by the spectrum:
    /// `beta * gamma > 1` for power-law spectra.
    pub fn capacity_ok(&self, beta: f64) -> bool {
        match self.kernel.gamma() {
            Some(gamma) => beta > 0.0 && beta < 1.0 && beta * gamma > 1.0,
            None => false,
        }
    }

    /// `f_rho(x) = sum_k lambda_k^r c_k phi_k(x)`.
    pub fn eval_target(&self, x: f64) -> f64 {
        let basis = self.kernel.basis(x);
        self.target_coeffs.iter().zip(&basis).map(|(c, b)| c * b).sum()
    }

    /// Draw `count` samples, deterministically from `seed`. Each sample
    /// consumes a fixed number of draws, so streams are reproducible from
    /// `(seed, index)`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Sample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let x: f64 = rng.gen();
                let u_kind: f64 = rng.gen();
                let u_eps: f64 = rng.gen();
                let contaminated = u_kind < self.noise.q;
                let eps = if contaminated {
                    if u_eps < 0.5 {
                        self.noise.s_mag
                    } else {
                        -self.noise.s_mag
                    }
                } else {
                    (2.0 * u_eps - 1.0) * self.noise.nu
                };
                Sample { x, y: self.eval_target(x) + eps, contaminated }
            })
            .collect()
    }

    /// Samples as bare `(x, y)` pairs for the learners.
    pub fn sample_xy(&self, count: usize, seed: u64) -> Vec<(f64, f64)> {
        self.sample(count, seed).into_iter().map(|s| s.xy()).collect()
    }
}

/// Write a sample stream as CSV with columns `t, x, y, contaminated_flag`.
pub fn write_samples_csv<P: AsRef<Path>>(path: P, samples: &[Sample]) -> std::io::Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "t,x,y,contaminated_flag")?;
    for (t, s) in samples.iter().enumerate() {
        writeln!(file, "{},{},{},{}", t + 1, s.x, s.y, u8::from(s.contaminated))?;
    }
    file.flush()
}
