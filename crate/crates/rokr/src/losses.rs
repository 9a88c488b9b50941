//! Windowed robust losses `L_sigma(u) = W(u^2 / sigma^2)`.
//!
//! A windowing function `W : [0, inf) -> R` turns a squared residual scaled
//! by `sigma^2` into a loss. Its derivative `W'` gates the gradient update:
//! near zero residual every built-in behaves like (scaled) least squares,
//! while for redescending windows `W'` decays and large residuals stop
//! moving the estimate. Each built-in carries four analytically known
//! constants:
//!
//! * `w_plus_zero` — the right derivative `W'_+(0)`,
//! * `c_w` — `sup_{s>0} |W'(s)|`,
//! * `p`, `c_p` — a Hölder control `|W'(s) - W'_+(0)| <= c_p s^p`.
//!
//! [`WindowingFunction::check_conditions`] verifies the derivative bound,
//! strict positivity of `W'`, and the Hölder control on a grid. Tukey's
//! biweight vanishes beyond `s = 1`; that violation of strict positivity is
//! reported, not rejected.

use thiserror::Error;

/// Default absolute tolerance for grid condition checks.
pub const CONDITION_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum LossError {
    #[error("windowing function argument must be nonnegative, got {0}")]
    NegativeArgument(f64),
    #[error("tukey scale must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("unknown windowing function `{0}`")]
    UnknownName(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Fair,
    Cauchy,
    Welsch,
    GemanMcClure,
    /// Tukey's biweight with cutoff scale `c`.
    Tukey(f64),
    /// Plain least squares, `W(s) = a * s` with constant derivative `a`.
    Identity(f64),
}

/// A windowing function together with its gradient constants.
///
/// Instances are immutable and `Copy`; they can be shared freely across
/// threads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowingFunction {
    kind: Kind,
    /// Right derivative `W'_+(0)`.
    pub w_plus_zero: f64,
    /// `sup_{s>0} |W'(s)|`.
    pub c_w: f64,
    /// Hölder exponent `p`.
    pub p: f64,
    /// Hölder constant `c_p` (zero for the identity window).
    pub c_p: f64,
}

impl WindowingFunction {
    /// Fair window `W(s) = sqrt(s) - log(1 + sqrt(s))`.
    pub fn fair() -> Self {
        Self { kind: Kind::Fair, w_plus_zero: 0.5, c_w: 0.5, p: 0.5, c_p: 0.5 }
    }

    /// Cauchy (Lorentzian) window `W(s) = log(1 + s/2)`.
    pub fn cauchy() -> Self {
        Self { kind: Kind::Cauchy, w_plus_zero: 0.5, c_w: 0.5, p: 1.0, c_p: 0.25 }
    }

    /// Welsch window `W(s) = 1 - exp(-s/2)`.
    pub fn welsch() -> Self {
        Self { kind: Kind::Welsch, w_plus_zero: 0.5, c_w: 0.5, p: 1.0, c_p: 0.25 }
    }

    /// Geman-McClure window `W(s) = s / (1 + s)`.
    ///
    /// Equivalently `L_sigma(u) = u^2 / (sigma^2 + u^2)`: the increasing
    /// form whose derivative is positive and whose Hölder constant is the
    /// conventional `c_p = 2`.
    pub fn geman_mcclure() -> Self {
        Self { kind: Kind::GemanMcClure, w_plus_zero: 1.0, c_w: 1.0, p: 1.0, c_p: 2.0 }
    }

    /// Tukey biweight window `W(s) = (c^2/6)(1 - (1-s)^3)` for `s <= 1`,
    /// constant `c^2/6` beyond. `W'` vanishes for `s > 1`, so strict
    /// positivity fails there by construction.
    pub fn tukey(c: f64) -> Result<Self, LossError> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(LossError::BadScale(c));
        }
        let c2 = c * c;
        Ok(Self { kind: Kind::Tukey(c), w_plus_zero: 0.5 * c2, c_w: 0.5 * c2, p: 1.0, c_p: c2 })
    }

    /// Identity window `W(s) = s`, i.e. plain least squares with `W' == 1`.
    /// With this window the update is exactly the online least-squares
    /// recursion and is independent of `sigma`.
    pub fn identity() -> Self {
        Self { kind: Kind::Identity(1.0), w_plus_zero: 1.0, c_w: 1.0, p: 1.0, c_p: 0.0 }
    }

    /// Halved identity window `W(s) = s/2` with `W' == 1/2`; the least
    /// squares update with the factor 1/2 absorbed into the window.
    pub fn identity_halved() -> Self {
        Self { kind: Kind::Identity(0.5), w_plus_zero: 0.5, c_w: 0.5, p: 1.0, c_p: 0.0 }
    }

    /// Look up a built-in by name. `tukey_c` applies to `"tukey"` only
    /// (default 1.0); `identity_halved` selects the halved identity form.
    pub fn by_name(
        name: &str,
        tukey_c: Option<f64>,
        identity_halved: bool,
    ) -> Result<Self, LossError> {
        match name {
            "fair" => Ok(Self::fair()),
            "cauchy" => Ok(Self::cauchy()),
            "welsch" => Ok(Self::welsch()),
            "geman_mcclure" => Ok(Self::geman_mcclure()),
            "tukey" => Self::tukey(tukey_c.unwrap_or(1.0)),
            "identity" => Ok(if identity_halved {
                Self::identity_halved()
            } else {
                Self::identity()
            }),
            other => Err(LossError::UnknownName(other.to_string())),
        }
    }

    /// All built-ins with default parameters (Tukey `c = 1`).
    pub fn builtins() -> Vec<Self> {
        vec![
            Self::fair(),
            Self::cauchy(),
            Self::welsch(),
            Self::geman_mcclure(),
            Self::tukey(1.0).expect("c = 1 is valid"),
            Self::identity(),
        ]
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            Kind::Fair => "fair",
            Kind::Cauchy => "cauchy",
            Kind::Welsch => "welsch",
            Kind::GemanMcClure => "geman_mcclure",
            Kind::Tukey(_) => "tukey",
            Kind::Identity(_) => "identity",
        }
    }

    /// Whether `W' > 0` holds on all of `(0, inf)`. False only for Tukey,
    /// whose derivative vanishes beyond the cutoff.
    pub fn strictly_positive_deriv(&self) -> bool {
        !matches!(self.kind, Kind::Tukey(_))
    }

    /// Evaluate `W(s)`. `W(0) = 0` for every built-in.
    pub fn eval(&self, s: f64) -> Result<f64, LossError> {
        if s < 0.0 || s.is_nan() {
            return Err(LossError::NegativeArgument(s));
        }
        Ok(match self.kind {
            Kind::Fair => {
                let t = s.sqrt();
                t - t.ln_1p()
            }
            Kind::Cauchy => (0.5 * s).ln_1p(),
            Kind::Welsch => -(-0.5 * s).exp_m1(),
            Kind::GemanMcClure => s / (1.0 + s),
            Kind::Tukey(c) => {
                let c2 = c * c;
                if s <= 1.0 {
                    // 1 - (1-s)^3 = s (3 - 3s + s^2), cancellation-free.
                    c2 / 6.0 * s * (3.0 - 3.0 * s + s * s)
                } else {
                    c2 / 6.0
                }
            }
            Kind::Identity(a) => a * s,
        })
    }

    /// Evaluate `W'(s)`; at `s = 0` this is the right derivative and equals
    /// [`Self::w_plus_zero`] for every built-in.
    pub fn deriv(&self, s: f64) -> Result<f64, LossError> {
        if s < 0.0 || s.is_nan() {
            return Err(LossError::NegativeArgument(s));
        }
        Ok(match self.kind {
            Kind::Fair => 0.5 / (1.0 + s.sqrt()),
            Kind::Cauchy => 1.0 / (2.0 + s),
            Kind::Welsch => 0.5 * (-0.5 * s).exp(),
            Kind::GemanMcClure => {
                let d = 1.0 + s;
                1.0 / (d * d)
            }
            Kind::Tukey(c) => {
                if s <= 1.0 {
                    let u = 1.0 - s;
                    0.5 * c * c * u * u
                } else {
                    0.0
                }
            }
            Kind::Identity(a) => a,
        })
    }

    /// Check the derivative bound, strict positivity, and the Hölder
    /// control on a grid of positive points, with absolute tolerance `tol`.
    pub fn check_conditions(&self, grid: &[f64], tol: f64) -> ConditionReport {
        assert!(!grid.is_empty(), "condition grid must be nonempty");
        let mut min_deriv = f64::INFINITY;
        let mut max_bound_excess = f64::NEG_INFINITY;
        let mut max_holder_excess = f64::NEG_INFINITY;
        for &s in grid {
            assert!(s > 0.0, "condition grid entries must be positive");
            let d = self.deriv(s).expect("grid entries are nonnegative");
            min_deriv = min_deriv.min(d);
            max_bound_excess = max_bound_excess.max(d.abs() - self.c_w);
            let holder = (d - self.w_plus_zero).abs() - self.c_p * s.powf(self.p);
            max_holder_excess = max_holder_excess.max(holder);
        }
        ConditionReport {
            loss: self.name(),
            w_plus_zero_positive: self.w_plus_zero > 0.0,
            min_deriv,
            strictly_positive: min_deriv > 0.0,
            max_bound_excess,
            bound_ok: max_bound_excess <= tol,
            max_holder_excess,
            holder_ok: max_holder_excess <= tol,
        }
    }
}

/// Outcome of a grid condition check, with worst-case slacks.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub loss: &'static str,
    /// `W'_+(0) > 0`.
    pub w_plus_zero_positive: bool,
    /// Smallest `W'` seen on the grid.
    pub min_deriv: f64,
    /// `min_deriv > 0`; expected to fail for Tukey on grids past the cutoff.
    pub strictly_positive: bool,
    /// `max |W'(s)| - c_w` over the grid.
    pub max_bound_excess: f64,
    pub bound_ok: bool,
    /// `max (|W'(s) - W'_+(0)| - c_p s^p)` over the grid.
    pub max_holder_excess: f64,
    pub holder_ok: bool,
}

impl ConditionReport {
    /// All conditions hold, including strict positivity.
    pub fn all_ok(&self) -> bool {
        self.w_plus_zero_positive && self.strictly_positive && self.bound_ok && self.holder_ok
    }

    /// All conditions hold except possibly strict positivity; what a
    /// redescending window (Tukey) is expected to satisfy.
    pub fn ok_allowing_redescent(&self) -> bool {
        self.w_plus_zero_positive && self.bound_ok && self.holder_ok
    }
}

/// Log-spaced grid of `n` points on `[lo, hi]`, inclusive of both ends.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Default grid for condition checks: 200 log-spaced points on `[1e-6, 1e2]`.
pub fn default_condition_grid() -> Vec<f64> {
    log_grid(1e-6, 1e2, 200)
}
