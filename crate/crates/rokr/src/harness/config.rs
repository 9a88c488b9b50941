//! JSON experiment configuration and its validation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::Kernel;
use crate::learner::{min_eta0, Representation, ScheduleError};
use crate::losses::{LossError, WindowingFunction};
use crate::problems::{CoeffLaw, NoiseModel, ProblemError, SyntheticProblem};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config `{path}`: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("t_grid must be nonempty with every T >= 1")]
    BadTGrid,
    #[error("seeds must be >= 1")]
    BadSeeds,
    #[error("declared capacity beta = {beta} is not certified: need beta in (0,1) with beta * gamma > 1 (gamma = {gamma})")]
    UncertifiedCapacity { beta: f64, gamma: f64 },
    #[error("the rkhs schedule needs a declared capacity beta")]
    MissingBeta,
    #[error("manual schedule needs positive finite eta and sigma")]
    BadManual,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemConfig {
    #[serde(default = "default_n_terms")]
    pub n_terms: usize,
    pub gamma: f64,
    pub r: f64,
    /// Decay of the raw target coefficients `c_k = k^-coeff_decay`.
    #[serde(default = "default_decay")]
    pub coeff_decay: f64,
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub q: f64,
    #[serde(default)]
    pub s_mag: f64,
}

fn default_n_terms() -> usize {
    256
}

fn default_decay() -> f64 {
    0.51
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossConfig {
    pub name: String,
    /// Tukey cutoff scale.
    #[serde(default)]
    pub c: Option<f64>,
    /// Use the halved identity window `W(s) = s/2`.
    #[serde(default)]
    pub halved: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScheduleConfig {
    /// Mean-square rate schedule; sigma is set to its floor.
    L2,
    /// RKHS rate schedule; needs the declared capacity `beta`.
    Rkhs,
    /// Fixed step size and scale.
    Manual { eta: f64, sigma: f64 },
}

impl ScheduleConfig {
    pub fn label(&self) -> &'static str {
        match self {
            ScheduleConfig::L2 => "l2",
            ScheduleConfig::Rkhs => "rkhs",
            ScheduleConfig::Manual { .. } => "manual",
        }
    }
}

/// Full sweep configuration. See `ExperimentConfig::example` for a
/// ready-to-serialize starting point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub loss: LossConfig,
    pub schedule: ScheduleConfig,
    /// Step-size scale; defaults to the admissible floor for the loss and
    /// kernel when omitted.
    #[serde(default)]
    pub eta0: Option<f64>,
    /// Declared capacity exponent; must satisfy `beta * gamma > 1`.
    #[serde(default)]
    pub beta: Option<f64>,
    pub t_grid: Vec<u64>,
    pub seeds: u32,
    #[serde(default = "default_base_seed")]
    pub base_seed: u64,
    #[serde(default = "default_representation")]
    pub representation: Representation,
    /// Also run the online least-squares baseline on identical streams.
    #[serde(default)]
    pub baselines: bool,
    /// Evaluate iterate-norm and drift bound checks per cell.
    #[serde(default = "default_true")]
    pub check_bounds: bool,
}

fn default_base_seed() -> u64 {
    20240601
}

fn default_representation() -> Representation {
    Representation::Feature
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io {
            path: path.as_ref().display().to_string(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn build_loss(&self) -> Result<WindowingFunction, ConfigError> {
        Ok(WindowingFunction::by_name(&self.loss.name, self.loss.c, self.loss.halved)?)
    }

    pub fn build_problem(&self) -> Result<SyntheticProblem, ConfigError> {
        Ok(SyntheticProblem::power_law(
            self.problem.n_terms,
            self.problem.gamma,
            self.problem.r,
            CoeffLaw::PowerLaw { decay: self.problem.coeff_decay },
            NoiseModel { nu: self.problem.nu, q: self.problem.q, s_mag: self.problem.s_mag },
            self.base_seed,
        )?)
    }

    /// Validate invariants and resolve derived quantities.
    pub fn resolve(&self) -> Result<ResolvedConfig, ConfigError> {
        if self.t_grid.is_empty() || self.t_grid.iter().any(|&t| t < 1) {
            return Err(ConfigError::BadTGrid);
        }
        if self.seeds < 1 {
            return Err(ConfigError::BadSeeds);
        }
        let loss = self.build_loss()?;
        let problem = self.build_problem()?;
        let kappa = problem.kernel().kappa_bound();
        if let Some(beta) = self.beta {
            if !problem.capacity_ok(beta) {
                return Err(ConfigError::UncertifiedCapacity { beta, gamma: self.problem.gamma });
            }
        }
        if matches!(self.schedule, ScheduleConfig::Rkhs) && self.beta.is_none() {
            return Err(ConfigError::MissingBeta);
        }
        if let ScheduleConfig::Manual { eta, sigma } = self.schedule {
            if !(eta > 0.0 && eta.is_finite() && sigma > 0.0 && sigma.is_finite()) {
                return Err(ConfigError::BadManual);
            }
        }
        let floor = min_eta0(&loss, kappa);
        let eta0 = self.eta0.unwrap_or(floor);
        if !matches!(self.schedule, ScheduleConfig::Manual { .. }) && eta0 < floor {
            return Err(ConfigError::Schedule(ScheduleError::Eta0BelowFloor { eta0, floor }));
        }
        Ok(ResolvedConfig { loss, problem, kappa, eta0 })
    }

    /// A small, fast configuration; handy as a template.
    pub fn example() -> Self {
        Self {
            problem: ProblemConfig {
                n_terms: 64,
                gamma: 2.0,
                r: 0.5,
                coeff_decay: 0.51,
                nu: 0.25,
                q: 0.0,
                s_mag: 0.0,
            },
            loss: LossConfig { name: "welsch".to_string(), c: None, halved: false },
            schedule: ScheduleConfig::L2,
            eta0: None,
            beta: None,
            t_grid: vec![64, 128, 256],
            seeds: 5,
            base_seed: default_base_seed(),
            representation: Representation::Feature,
            baselines: false,
            check_bounds: true,
        }
    }
}

/// Validated, derived view of a configuration.
pub struct ResolvedConfig {
    pub loss: WindowingFunction,
    pub problem: SyntheticProblem,
    pub kappa: f64,
    pub eta0: f64,
}
