//! Comparison algorithms: batch gradient descent with a robust loss and
//! plain online least squares.
//!
//! Batch gradient descent iterates full-gradient updates
//!
//! ```text
//! g_{t+1} = g_t - (eta_t / T) sum_i W'((y_i - g_t(x_i))^2 / sigma^2) (g_t(x_i) - y_i) K_{x_i}
//! ```
//!
//! with step schedule `eta_t = eta_1 t^-theta`, `0 <= theta < 1`, and the
//! early-stopping rule `ceil(T^(1/((1+beta)(1-theta))) + 1)`. With `T = 1`
//! and constant step it reduces to one online update, which the tests pin
//! down exactly.

use crate::kernels::Kernel;
use crate::learner::{run_dual, DualLearner, LearnerError, StepLog};
use crate::losses::WindowingFunction;

/// Batch gradient descent state: one coefficient per training point.
#[derive(Debug, Clone)]
pub struct BatchGd {
    xs: Vec<f64>,
    coeffs: Vec<f64>,
    /// Empirical risk after each completed iteration (index 0 = initial).
    pub risk_history: Vec<f64>,
    pub iters_run: usize,
}

impl BatchGd {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn predict<K: Kernel + ?Sized>(&self, x: f64, kernel: &K) -> f64 {
        self.xs
            .iter()
            .zip(&self.coeffs)
            .map(|(&xi, &a)| a * kernel.eval(xi, x))
            .sum()
    }
}

/// Dense Gram matrices are precomputed up to this many points; beyond it
/// the run recomputes kernel rows on the fly.
const DENSE_GRAM_LIMIT: usize = 10_000;

/// Run batch gradient descent for `n_iters` full-gradient updates.
///
/// Up to [`DENSE_GRAM_LIMIT`] points the Gram matrix is precomputed once;
/// larger inputs fall back to recomputing kernel rows each iteration.
pub fn batch_gd_run<K: Kernel + ?Sized>(
    data: &[(f64, f64)],
    loss: WindowingFunction,
    sigma: f64,
    eta1: f64,
    theta: f64,
    n_iters: usize,
    kernel: &K,
) -> Result<BatchGd, LearnerError> {
    run_with_storage(data, loss, sigma, eta1, theta, n_iters, kernel, data.len() <= DENSE_GRAM_LIMIT)
}

#[allow(clippy::too_many_arguments)]
fn run_with_storage<K: Kernel + ?Sized>(
    data: &[(f64, f64)],
    loss: WindowingFunction,
    sigma: f64,
    eta1: f64,
    theta: f64,
    n_iters: usize,
    kernel: &K,
    dense: bool,
) -> Result<BatchGd, LearnerError> {
    if !(eta1 > 0.0) || !eta1.is_finite() {
        return Err(LearnerError::BadEta(eta1));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(LearnerError::BadSigma(sigma));
    }
    assert!((0.0..1.0).contains(&theta), "step decay must lie in [0, 1)");
    assert!(n_iters >= 1, "need at least one iteration");
    let n = data.len();
    let gram = if dense {
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = kernel.eval(data[i].0, data[j].0);
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        Some(g)
    } else {
        None
    };

    let mut state = BatchGd {
        xs: data.iter().map(|&(x, _)| x).collect(),
        coeffs: vec![0.0; n],
        risk_history: Vec::with_capacity(n_iters + 1),
        iters_run: 0,
    };
    let mut preds = vec![0.0; n];
    let risk = |preds: &[f64]| -> f64 {
        let mut acc = 0.0;
        for (p, &(_, y)) in preds.iter().zip(data) {
            let u = p - y;
            acc += loss.eval(u * u / (sigma * sigma)).expect("square is nonnegative");
        }
        acc / n as f64
    };
    state.risk_history.push(risk(&preds));

    for iter in 1..=n_iters {
        // g_t(x_i) for every training point.
        match &gram {
            Some(g) => {
                for (i, p) in preds.iter_mut().enumerate() {
                    let row = &g[i * n..(i + 1) * n];
                    *p = row.iter().zip(&state.coeffs).map(|(k, a)| k * a).sum();
                }
            }
            None => {
                for (i, p) in preds.iter_mut().enumerate() {
                    *p = state.predict(data[i].0, kernel);
                }
            }
        }
        if preds.iter().any(|p| !p.is_finite()) {
            return Err(LearnerError::Diverged { step: iter });
        }
        let eta_t = eta1 * (iter as f64).powf(-theta);
        let scale = eta_t / n as f64;
        for ((a, p), &(_, y)) in state.coeffs.iter_mut().zip(&preds).zip(data) {
            let residual = p - y;
            let xi = residual * residual / (sigma * sigma);
            let w = loss.deriv(xi)?;
            *a -= scale * w * residual;
        }
        state.iters_run = iter;
        // Risk of the updated iterate.
        match &gram {
            Some(g) => {
                for (i, p) in preds.iter_mut().enumerate() {
                    let row = &g[i * n..(i + 1) * n];
                    *p = row.iter().zip(&state.coeffs).map(|(k, a)| k * a).sum();
                }
            }
            None => {
                for (i, p) in preds.iter_mut().enumerate() {
                    *p = state.predict(data[i].0, kernel);
                }
            }
        }
        state.risk_history.push(risk(&preds));
    }
    Ok(state)
}

/// Early-stopping iteration count `ceil(T^(1/((1+beta)(1-theta))) + 1)`.
///
/// `beta` may be 1 (the capacity-independent edge). Values within 1e-9
/// relative of an integer are snapped before the ceiling so exact powers
/// are not pushed up a whole iteration by `powf` roundoff.
pub fn early_stop_iters(t_horizon: u64, beta: f64, theta: f64) -> u64 {
    assert!(t_horizon >= 1);
    assert!(beta > 0.0 && beta <= 1.0, "capacity exponent must lie in (0, 1]");
    assert!((0.0..1.0).contains(&theta));
    let exponent = 1.0 / ((1.0 + beta) * (1.0 - theta));
    let value = (t_horizon as f64).powf(exponent) + 1.0;
    let snapped = value.round();
    if (value - snapped).abs() <= 1e-9 * snapped.abs().max(1.0) {
        snapped as u64
    } else {
        value.ceil() as u64
    }
}

/// Plain online least squares: the online update with the identity window
/// (`W' == 1`), provided as a named baseline.
pub fn online_ls_run<K: Kernel + ?Sized>(
    stream: &[(f64, f64)],
    eta: f64,
    kernel: &K,
) -> Result<(DualLearner, StepLog), LearnerError> {
    run_dual(stream, eta, 1.0, WindowingFunction::identity(), kernel)
}
