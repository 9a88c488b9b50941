//! Sweep execution, aggregation, rate fitting, and CSV export.
//!
//! Cells (one horizon, one seed) are embarrassingly parallel; each owns
//! its stream seed, derived from `(base_seed, T, seed_index)`, so parallel
//! and serial execution see identical data. Aggregation runs afterwards
//! over rows in a fixed order with pairwise summation, so the aggregates
//! are byte-identical no matter how many threads ran the cells.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::learner::{
    min_eta0, run_dual, run_feature, LearnerError, Representation, Schedule, StepLog,
};
use crate::losses::WindowingFunction;
use crate::metrics;
use crate::problems::SyntheticProblem;
use crate::theory::{self, BoundCheckRecord};

use super::config::{ConfigError, ExperimentConfig, ScheduleConfig};

#[derive(Debug, Error)]
pub enum FitError {
    #[error("rate fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("rate fit needs strictly positive errors")]
    NonPositiveError,
}

/// Ordinary least squares fit of `log(error)` against `log(T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fit a log-log rate to `(T, mean_error)` points.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit, FitError> {
    if points.len() < 3 {
        return Err(FitError::TooFewPoints(points.len()));
    }
    if points.iter().any(|&(t, e)| !(t > 0.0) || !(e > 0.0)) {
        return Err(FitError::NonPositiveError);
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(t, e)| (t.ln(), e.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = logs
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let ss_tot: f64 = logs.iter().map(|p| (p.1 - mean_y) * (p.1 - mean_y)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit { slope, intercept, r_squared })
}

/// One (horizon, seed, loss) result row.
#[derive(Debug, Clone, Serialize)]
pub struct CellRow {
    pub t: u64,
    pub seed: u32,
    pub loss: String,
    pub schedule: String,
    pub eta: f64,
    pub sigma: f64,
    pub l2_sq: f64,
    pub rkhs_sq: f64,
    pub excess_risk: f64,
    pub diverged: bool,
}

/// Per-(loss, horizon) aggregate over seeds.
#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub t: u64,
    pub mean_l2: f64,
    pub se_l2: f64,
    pub mean_rkhs: f64,
    pub se_rkhs: f64,
    pub median_l2: f64,
    pub median_rkhs: f64,
    pub loss: String,
    pub n: u32,
}

/// Fitted log-log slope for one loss and error target.
#[derive(Debug, Clone, Serialize)]
pub struct SlopeRow {
    pub target: String,
    pub slope: f64,
    pub theory_slope: Option<f64>,
    pub r_squared: f64,
    pub intercept: f64,
    pub loss: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundRow {
    pub name: String,
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl From<&BoundCheckRecord> for BoundRow {
    fn from(rec: &BoundCheckRecord) -> Self {
        BoundRow {
            name: rec.name.to_string(),
            params: rec.params.clone(),
            lhs: rec.lhs,
            rhs: rec.rhs,
            slack: rec.slack(),
            pass: rec.pass(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub rows: Vec<CellRow>,
    pub aggregates: Vec<AggregateRow>,
    pub slopes: Vec<SlopeRow>,
    pub bounds: Vec<BoundRow>,
}

impl ExperimentResult {
    pub fn diverged_cells(&self) -> usize {
        self.rows.iter().filter(|r| r.diverged).count()
    }

    pub fn all_bounds_pass(&self) -> bool {
        self.bounds.iter().all(|b| b.pass)
    }

    /// Mean L2 error for a given loss and horizon, if aggregated.
    pub fn mean_l2(&self, loss: &str, t: u64) -> Option<f64> {
        self.aggregates.iter().find(|a| a.loss == loss && a.t == t).map(|a| a.mean_l2)
    }

    pub fn mean_rkhs(&self, loss: &str, t: u64) -> Option<f64> {
        self.aggregates.iter().find(|a| a.loss == loss && a.t == t).map(|a| a.mean_rkhs)
    }

    pub fn slope(&self, loss: &str, target: &str) -> Option<&SlopeRow> {
        self.slopes.iter().find(|s| s.loss == loss && s.target == target)
    }

    /// Write `results.csv`, `aggregate.csv`, `slopes.csv`, and
    /// `bounds.csv` under `dir`.
    pub fn write_csvs<P: AsRef<Path>>(&self, dir: P) -> std::io::Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        write_csv(dir.join("results.csv"), &self.rows)?;
        write_csv(dir.join("aggregate.csv"), &self.aggregates)?;
        write_csv(dir.join("slopes.csv"), &self.slopes)?;
        write_csv(dir.join("bounds.csv"), &self.bounds)?;
        Ok(())
    }
}

fn write_csv<P: AsRef<Path>, T: Serialize>(path: P, rows: &[T]) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()
}

/// Deterministic per-cell seed from `(base, t, seed_index)`.
pub fn derive_seed(base: u64, t: u64, rep: u64) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut x = z;
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^ (x >> 31)
    }
    splitmix64(splitmix64(base ^ splitmix64(t)) ^ rep)
}

/// Fixed-order pairwise summation; identical results in serial and
/// parallel sweeps.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

struct CellOutcome {
    row: CellRow,
    bounds: Vec<BoundCheckRecord>,
}

/// Run the full sweep described by `config`.
///
/// Divergent cells are flagged and excluded from aggregates; schedule and
/// invariant violations are rejected up front as configuration errors.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, ConfigError> {
    let resolved = config.resolve()?;
    let problem = &resolved.problem;
    let loss = resolved.loss;
    let kappa = resolved.kappa;

    // Resolve every schedule up front so bad configurations fail before
    // any work is spawned.
    let mut schedules = Vec::with_capacity(config.t_grid.len());
    for &t in &config.t_grid {
        schedules.push(resolve_schedule(config, t, &loss, kappa, resolved.eta0)?);
    }
    let baseline_eta0 = min_eta0(&WindowingFunction::identity(), kappa);
    let mut baseline_schedules = Vec::new();
    if config.baselines {
        for &t in &config.t_grid {
            baseline_schedules.push(resolve_schedule(
                config,
                t,
                &WindowingFunction::identity(),
                kappa,
                baseline_eta0,
            )?);
        }
    }

    let cells: Vec<(usize, u32)> = config
        .t_grid
        .iter()
        .enumerate()
        .flat_map(|(ti, _)| (0..config.seeds).map(move |s| (ti, s)))
        .collect();

    let outcomes: Vec<Vec<CellOutcome>> = cells
        .par_iter()
        .map(|&(ti, seed_idx)| {
            let t = config.t_grid[ti];
            let stream_seed = derive_seed(config.base_seed, t, seed_idx as u64);
            let stream = problem.sample_xy(t as usize, stream_seed);
            let mut out = Vec::with_capacity(2);
            out.push(run_cell(
                problem,
                &stream,
                t,
                seed_idx,
                loss,
                schedules[ti],
                config.schedule.label(),
                config.representation,
                config.check_bounds,
                kappa,
            ));
            if config.baselines {
                out.push(run_cell(
                    problem,
                    &stream,
                    t,
                    seed_idx,
                    WindowingFunction::identity(),
                    baseline_schedules[ti],
                    config.schedule.label(),
                    config.representation,
                    config.check_bounds,
                    kappa,
                ));
            }
            out
        })
        .collect();

    let mut rows: Vec<CellRow> = Vec::with_capacity(outcomes.len() * 2);
    let mut bounds: Vec<BoundRow> = Vec::new();
    for outcome in outcomes.into_iter().flatten() {
        bounds.extend(outcome.bounds.iter().map(BoundRow::from));
        rows.push(outcome.row);
    }
    rows.sort_by(|a, b| (&a.loss, a.t, a.seed).cmp(&(&b.loss, b.t, b.seed)));

    let aggregates = aggregate(&rows);
    let slopes = fit_slopes(config, &aggregates);
    Ok(ExperimentResult { rows, aggregates, slopes, bounds })
}

fn resolve_schedule(
    config: &ExperimentConfig,
    t: u64,
    loss: &WindowingFunction,
    kappa: f64,
    eta0: f64,
) -> Result<Schedule, ConfigError> {
    Ok(match config.schedule {
        ScheduleConfig::L2 => crate::learner::schedule_l2(t, config.problem.r, eta0, loss, kappa)?,
        ScheduleConfig::Rkhs => {
            let beta = config.beta.ok_or(ConfigError::MissingBeta)?;
            crate::learner::schedule_rkhs(t, config.problem.r, beta, eta0, loss, kappa)?
        }
        ScheduleConfig::Manual { eta, sigma } => Schedule { eta, sigma_min: sigma },
    })
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    problem: &SyntheticProblem,
    stream: &[(f64, f64)],
    t: u64,
    seed: u32,
    loss: WindowingFunction,
    schedule: Schedule,
    schedule_label: &str,
    representation: Representation,
    check_bounds: bool,
    kappa: f64,
) -> CellOutcome {
    let eta = schedule.eta;
    let sigma = schedule.sigma_min;
    let run: Result<(Vec<f64>, StepLog), LearnerError> = match representation {
        Representation::Feature => run_feature(stream, eta, sigma, loss, problem.kernel())
            .map(|(l, log)| (l.basis_coeffs().to_vec(), log)),
        Representation::Dual => run_dual(stream, eta, sigma, loss, problem.kernel())
            .map(|(l, log)| (metrics::estimator_coeffs_dual(&l, problem), log)),
    };
    match run {
        Ok((coeffs, log)) => {
            let report = metrics::report_exact(&coeffs, problem);
            let mut bounds = Vec::new();
            if check_bounds {
                bounds.extend(worst_bounds(problem, &loss, &log, eta, sigma, t, seed, kappa));
            }
            CellOutcome {
                row: CellRow {
                    t,
                    seed,
                    loss: loss.name().to_string(),
                    schedule: schedule_label.to_string(),
                    eta,
                    sigma,
                    l2_sq: report.l2_sq,
                    rkhs_sq: report.rkhs_sq,
                    excess_risk: report.excess_risk,
                    diverged: false,
                },
                bounds,
            }
        }
        Err(_) => CellOutcome {
            row: CellRow {
                t,
                seed,
                loss: loss.name().to_string(),
                schedule: schedule_label.to_string(),
                eta,
                sigma,
                l2_sq: f64::NAN,
                rkhs_sq: f64::NAN,
                excess_risk: f64::NAN,
                diverged: true,
            },
            bounds: Vec::new(),
        },
    }
}

/// Worst-slack iterate-norm and drift records for one cell.
#[allow(clippy::too_many_arguments)]
fn worst_bounds(
    problem: &SyntheticProblem,
    loss: &WindowingFunction,
    log: &StepLog,
    eta: f64,
    sigma: f64,
    t: u64,
    seed: u32,
    kappa: f64,
) -> Vec<BoundCheckRecord> {
    let mut out = Vec::with_capacity(2);
    let m = problem.m_bound();
    if let Ok(records) = theory::iterate_norm_bounds(log, m, loss.c_w, eta, kappa) {
        if let Some(worst) = records
            .into_iter()
            .min_by(|a, b| a.slack().partial_cmp(&b.slack()).expect("finite slacks"))
        {
            out.push(BoundCheckRecord {
                name: "iterate_norm_worst",
                params: format!("T={t}, seed={seed}, {}", worst.params),
                ..worst
            });
        }
    }
    let drift = theory::drift_norm_bounds(log, loss, m, kappa, eta, t, sigma);
    if let Some(worst) = drift
        .into_iter()
        .min_by(|a, b| a.slack().partial_cmp(&b.slack()).expect("finite slacks"))
    {
        out.push(BoundCheckRecord {
            name: "drift_norm_worst",
            params: format!("T={t}, seed={seed}, {}", worst.params),
            ..worst
        });
    }
    out
}

fn aggregate(rows: &[CellRow]) -> Vec<AggregateRow> {
    let mut keys: Vec<(String, u64)> = Vec::new();
    for row in rows {
        let key = (row.loss.clone(), row.t);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.sort();
    keys.iter()
        .map(|(loss, t)| {
            let mut l2: Vec<f64> = Vec::new();
            let mut rkhs: Vec<f64> = Vec::new();
            for row in rows.iter().filter(|r| &r.loss == loss && r.t == *t && !r.diverged) {
                l2.push(row.l2_sq);
                rkhs.push(row.rkhs_sq);
            }
            let n = l2.len() as u32;
            AggregateRow {
                t: *t,
                mean_l2: mean(&l2),
                se_l2: standard_error(&l2),
                mean_rkhs: mean(&rkhs),
                se_rkhs: standard_error(&rkhs),
                median_l2: median(&mut l2.clone()),
                median_rkhs: median(&mut rkhs.clone()),
                loss: loss.clone(),
                n,
            }
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        pairwise_sum(xs) / xs.len() as f64
    }
}

fn standard_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let devs: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    (pairwise_sum(&devs) / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt()
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite errors"));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn fit_slopes(config: &ExperimentConfig, aggregates: &[AggregateRow]) -> Vec<SlopeRow> {
    let r = config.problem.r;
    let (theory_l2, theory_rkhs) = match config.schedule {
        ScheduleConfig::L2 => (
            Some(-2.0 * r / (2.0 * r + 1.0)),
            (r > 0.5).then(|| -(2.0 * r - 1.0) / (2.0 * r + 1.0)),
        ),
        ScheduleConfig::Rkhs => {
            let beta = config.beta.unwrap_or(1.0);
            (None, Some(-(2.0 * r - 1.0) / (2.0 * r + beta)))
        }
        ScheduleConfig::Manual { .. } => (None, None),
    };
    let mut losses: Vec<String> = Vec::new();
    for a in aggregates {
        if !losses.contains(&a.loss) {
            losses.push(a.loss.clone());
        }
    }
    losses.sort();
    let mut out = Vec::new();
    for loss in &losses {
        for (target, theory) in [("l2", theory_l2), ("rkhs", theory_rkhs)] {
            let points: Vec<(f64, f64)> = aggregates
                .iter()
                .filter(|a| &a.loss == loss && a.n > 0)
                .map(|a| {
                    let e = if target == "l2" { a.mean_l2 } else { a.mean_rkhs };
                    (a.t as f64, e)
                })
                .collect();
            if let Ok(fit) = fit_rate(&points) {
                out.push(SlopeRow {
                    target: target.to_string(),
                    slope: fit.slope,
                    theory_slope: theory,
                    r_squared: fit.r_squared,
                    intercept: fit.intercept,
                    loss: loss.clone(),
                });
            }
        }
    }
    out
}
