//! Bounded positive semi-definite kernels on `[0, 1]`.
//!
//! The workhorse is [`SpectralKernel`], a truncated Mercer kernel
//! `K(x, y) = sum_k lambda_k phi_k(x) phi_k(y)` over the trigonometric
//! system orthonormal for the uniform measure on `[0, 1]`:
//!
//! ```text
//! phi_1(x) = 1,  phi_2j(x) = sqrt(2) cos(2 pi j x),  phi_2j+1(x) = sqrt(2) sin(2 pi j x)
//! ```
//!
//! Because the eigensystem is explicit, source and capacity conditions can
//! be realized constructively and norms computed exactly. The truncated
//! kernel *is* the model: nothing downstream treats it as an approximation
//! to an infinite expansion. [`GaussianKernel`] is the generic bounded
//! kernel for non-spectral runs.

use std::f64::consts::{SQRT_2, TAU};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("eigenvalues must be strictly positive and nonincreasing (index {0})")]
    BadSpectrum(usize),
    #[error("spectrum must be nonempty")]
    EmptySpectrum,
    #[error("decay exponent must be positive and finite, got {0}")]
    BadDecay(f64),
    #[error("trace exponent must lie in (0, 1], got {0}")]
    BadTraceExponent(f64),
    #[error("bandwidth must be positive and finite, got {0}")]
    BadBandwidth(f64),
}

/// A symmetric positive semi-definite kernel with a finite sup bound
/// `kappa >= sup_x sqrt(K(x, x))`.
pub trait Kernel: Sync {
    fn eval(&self, x: f64, y: f64) -> f64;

    /// An upper bound for `kappa = sup_x sqrt(K(x, x))`.
    fn kappa_bound(&self) -> f64;

    /// An explicit feature map `psi` with `K(x, y) = <psi(x), psi(y)>`,
    /// when the kernel has one. Lets dual-form learners cache per-point
    /// features instead of re-deriving basis values pair by pair.
    fn feature_map(&self, _x: f64) -> Option<Vec<f64>> {
        None
    }
}

/// Truncated spectral kernel with explicit eigenvalues and trigonometric
/// eigenfunctions on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralKernel {
    eigenvalues: Vec<f64>,
    sqrt_eigenvalues: Vec<f64>,
    /// Decay exponent when generated as `lambda_k = k^-gamma`.
    gamma: Option<f64>,
}

impl SpectralKernel {
    /// Kernel with power-law spectrum `lambda_k = k^-gamma`, `k = 1..=n`.
    pub fn power_law(n_terms: usize, gamma: f64) -> Result<Self, KernelError> {
        if n_terms == 0 {
            return Err(KernelError::EmptySpectrum);
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(KernelError::BadDecay(gamma));
        }
        let eigenvalues: Vec<f64> = (1..=n_terms).map(|k| (k as f64).powf(-gamma)).collect();
        let sqrt_eigenvalues = eigenvalues.iter().map(|l| l.sqrt()).collect();
        Ok(Self { eigenvalues, sqrt_eigenvalues, gamma: Some(gamma) })
    }

    /// Kernel from an explicit spectrum, which must be strictly positive
    /// and nonincreasing.
    pub fn from_eigenvalues(eigenvalues: Vec<f64>) -> Result<Self, KernelError> {
        if eigenvalues.is_empty() {
            return Err(KernelError::EmptySpectrum);
        }
        for (i, &l) in eigenvalues.iter().enumerate() {
            if !(l > 0.0) || !l.is_finite() {
                return Err(KernelError::BadSpectrum(i));
            }
            if i > 0 && l > eigenvalues[i - 1] {
                return Err(KernelError::BadSpectrum(i));
            }
        }
        let sqrt_eigenvalues = eigenvalues.iter().map(|l| l.sqrt()).collect();
        Ok(Self { eigenvalues, sqrt_eigenvalues, gamma: None })
    }

    pub fn n_terms(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Decay exponent if the spectrum was generated as `k^-gamma`.
    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    /// Evaluate all basis functions at `x` into `out` (length `n_terms`).
    ///
    /// Frequencies are advanced by the angle-addition recurrence, so the
    /// whole basis costs O(n) with two trig calls total.
    pub fn basis_into(&self, x: f64, out: &mut [f64]) {
        let n = self.eigenvalues.len();
        assert_eq!(out.len(), n, "basis buffer length mismatch");
        out[0] = 1.0;
        if n == 1 {
            return;
        }
        let (s1, c1) = (TAU * x).sin_cos();
        let (mut cj, mut sj) = (c1, s1);
        let mut k = 1;
        loop {
            out[k] = SQRT_2 * cj;
            k += 1;
            if k >= n {
                break;
            }
            out[k] = SQRT_2 * sj;
            k += 1;
            if k >= n {
                break;
            }
            let c_next = cj * c1 - sj * s1;
            sj = sj * c1 + cj * s1;
            cj = c_next;
        }
    }

    /// Basis values at `x` as a fresh vector.
    pub fn basis(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.n_terms()];
        self.basis_into(x, &mut out);
        out
    }

    /// `K(x, x)` without allocating.
    pub fn diag(&self, x: f64) -> f64 {
        self.eval(x, x)
    }

    /// Plain trace `sum_k lambda_k`, which equals the integral of
    /// `K(x, x)` over `[0, 1]` by orthonormality.
    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// `sum_k lambda_k^beta` for `beta` in `(0, 1]`.
    pub fn trace_power(&self, beta: f64) -> Result<f64, KernelError> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(KernelError::BadTraceExponent(beta));
        }
        Ok(self.eigenvalues.iter().map(|l| l.powf(beta)).sum())
    }

    /// Whether `lambda_k <= k^(-1/beta) * (sum_j lambda_j^beta)^(1/beta)`
    /// holds for every `k`, the eigenvalue-decay consequence of a finite
    /// `beta`-trace.
    pub fn eigen_decay_holds(&self, beta: f64) -> Result<bool, KernelError> {
        let trace_beta = self.trace_power(beta)?;
        let scale = trace_beta.powf(1.0 / beta);
        Ok(self
            .eigenvalues
            .iter()
            .enumerate()
            .all(|(i, &l)| l <= (i as f64 + 1.0).powf(-1.0 / beta) * scale))
    }
}

impl Kernel for SpectralKernel {
    fn eval(&self, x: f64, y: f64) -> f64 {
        let ev = &self.eigenvalues;
        let n = ev.len();
        let mut acc = ev[0];
        if n == 1 {
            return acc;
        }
        let (sx1, cx1) = (TAU * x).sin_cos();
        let (sy1, cy1) = (TAU * y).sin_cos();
        let (mut cx, mut sx) = (cx1, sx1);
        let (mut cy, mut sy) = (cy1, sy1);
        let mut k = 1;
        loop {
            acc += ev[k] * 2.0 * cx * cy;
            k += 1;
            if k >= n {
                break;
            }
            acc += ev[k] * 2.0 * sx * sy;
            k += 1;
            if k >= n {
                break;
            }
            let cx_next = cx * cx1 - sx * sx1;
            sx = sx * cx1 + cx * sx1;
            cx = cx_next;
            let cy_next = cy * cy1 - sy * sy1;
            sy = sy * cy1 + cy * sy1;
            cy = cy_next;
        }
        acc
    }

    /// `sqrt(lambda_1 + 2 sum_{k>=2} lambda_k)`, valid since
    /// `sup |phi_k|^2 <= 2` and `phi_1 == 1`.
    fn kappa_bound(&self) -> f64 {
        let tail: f64 = self.eigenvalues[1..].iter().sum();
        (self.eigenvalues[0] + 2.0 * tail).sqrt()
    }

    fn feature_map(&self, x: f64) -> Option<Vec<f64>> {
        let mut psi = self.basis(x);
        for (v, s) in psi.iter_mut().zip(&self.sqrt_eigenvalues) {
            *v *= s;
        }
        Some(psi)
    }
}

/// Gaussian kernel `K(x, y) = exp(-(x - y)^2 / (2 bw^2))`; `K(x, x) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernel {
    bandwidth: f64,
}

impl GaussianKernel {
    pub fn new(bandwidth: f64) -> Result<Self, KernelError> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(KernelError::BadBandwidth(bandwidth));
        }
        Ok(Self { bandwidth })
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
}

impl Kernel for GaussianKernel {
    fn eval(&self, x: f64, y: f64) -> f64 {
        let d = x - y;
        (-d * d / (2.0 * self.bandwidth * self.bandwidth)).exp()
    }

    fn kappa_bound(&self) -> f64 {
        1.0
    }
}
