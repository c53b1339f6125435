use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::matching::match_estimates;
use super::scenario::{draw_scenario, Scenario};
use crate::error::{Error, Result};
use crate::estimator::{estimate_with_table, EstimationResult, Method, SteeringTable};
use crate::geometry::Angle;
use crate::rng::{trial_rng, Stream};
use crate::synthesis::{
    extract_blocks, snr_to_noise_power, synthesize_bs_signal, BlockMetadata, BlockObservations, Schedule,
};

/// One (L, Q) point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub block_len: usize,
    pub num_blocks: usize,
}

impl Cell {
    pub fn new(block_len: usize, num_blocks: usize) -> Self {
        Self { block_len, num_blocks }
    }

    pub fn apply(&self, cfg: &ScenarioConfig) -> ScenarioConfig {
        ScenarioConfig {
            block_len: self.block_len,
            num_blocks: self.num_blocks,
            ..cfg.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub true_aoas: Vec<Angle>,
    pub estimated_aoas: Vec<Angle>,
    /// Per true user, degrees; `+∞` when no estimate was matched.
    pub errors_deg: Vec<f64>,
    pub error_event: bool,
    /// Set when the trial could not be run to completion.
    pub failure: Option<String>,
}

/// An error event: any matched error at or above the threshold, or a user
/// left without an estimate.
pub fn is_error_event(errors_deg: &[f64], num_users: usize, threshold_deg: f64) -> bool {
    errors_deg.len() < num_users || errors_deg.iter().any(|e| !(*e < threshold_deg))
}

impl TrialOutcome {
    fn from_estimates(trial: usize, truth: &[Angle], estimates: &[Angle], threshold: f64) -> Self {
        let errors_deg = match_estimates(truth, estimates);
        Self {
            trial,
            true_aoas: truth.to_vec(),
            estimated_aoas: estimates.to_vec(),
            error_event: is_error_event(&errors_deg, truth.len(), threshold),
            errors_deg,
            failure: None,
        }
    }

    fn failed(trial: usize, truth: &[Angle], err: &Error) -> Self {
        Self {
            trial,
            true_aoas: truth.to_vec(),
            estimated_aoas: vec![],
            errors_deg: vec![f64::INFINITY; truth.len()],
            error_event: true,
            failure: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// Configuration of this cell (L and Q already applied).
    pub config: ScenarioConfig,
    pub method: Method,
    pub cell: Cell,
    pub snr_db: f64,
    pub trials: usize,
    pub errors: usize,
    pub error_probability: f64,
    /// Wall-clock time of the whole sweep this report belongs to.
    pub elapsed_ms: u128,
    #[serde(skip)]
    pub outcomes: Vec<TrialOutcome>,
}

/// Scenario, observations, and per-method estimates of a single trial.
#[derive(Debug)]
pub struct TrialData {
    pub scenario: Scenario,
    pub schedule: Schedule,
    pub observations: BlockObservations,
    pub estimates: Vec<Result<EstimationResult>>,
}

/// Schedule, noise, and snapshots for trial `trial` of `cfg`, given its scenario.
///
/// Patterns, messages and noise are keyed by L only: runs that differ in Q
/// share their leading blocks.
pub fn simulate_observations(cfg: &ScenarioConfig, trial: u64, scenario: &Scenario) -> Result<(Schedule, BlockObservations)> {
    let cell_key = cfg.block_len as u64;
    let mut srng = trial_rng(cfg.seed, trial, Stream::Schedule, cell_key);
    let sched = Schedule::random(cfg.users, cfg.irs_elements, cfg.block_len, cfg.num_blocks, &mut srng)?;
    let real = &scenario.realization;
    let noise_power = snr_to_noise_power(cfg.snr_db, real, &sched)?;
    let mut nrng = trial_rng(cfg.seed, trial, Stream::Noise, cell_key);
    let stream = synthesize_bs_signal(real, &sched, noise_power, &mut nrng)?;
    let meta = BlockMetadata {
        gamma: real.gamma,
        irs_geom: real.irs_geom,
        noise_power,
        antenna: cfg.antenna,
    };
    let obs = extract_blocks(&stream, &sched, &meta)?;
    Ok((sched, obs))
}

pub fn draw_trial_scenario(cfg: &ScenarioConfig, trial: u64) -> Result<Scenario> {
    draw_scenario(cfg, &mut trial_rng(cfg.seed, trial, Stream::Scenario, 0))
}

/// Runs one trial end to end; every method sees the same observations.
pub fn run_trial(cfg: &ScenarioConfig, trial: u64, methods: &[Method], grid: &[Angle]) -> Result<TrialData> {
    let scenario = draw_trial_scenario(cfg, trial)?;
    let (schedule, observations) = simulate_observations(cfg, trial, &scenario)?;
    let manifold = observations.manifold()?;
    let table = SteeringTable::new(&manifold, grid.to_vec());
    let estimates = methods
        .iter()
        .map(|&m| estimate_with_table(&observations, &manifold, &table, cfg.users, m, &cfg.grid))
        .collect();
    Ok(TrialData {
        scenario,
        schedule,
        observations,
        estimates,
    })
}

fn trial_outcomes(cfg: &ScenarioConfig, trial: usize, methods: &[Method], cells: &[Cell], grid: &[Angle]) -> Vec<TrialOutcome> {
    let scenario = match draw_trial_scenario(cfg, trial as u64) {
        Ok(s) => s,
        Err(e) => {
            log::warn!("trial {trial}: scenario draw failed: {e}");
            let dummy = vec![];
            return vec![TrialOutcome::failed(trial, &dummy, &e); cells.len() * methods.len()];
        }
    };
    let truth = &scenario.true_aoas;
    let mut out = Vec::with_capacity(cells.len() * methods.len());
    for cell in cells {
        let ccfg = cell.apply(cfg);
        let prepared = simulate_observations(&ccfg, trial as u64, &scenario).and_then(|(_, obs)| {
            let manifold = obs.manifold()?;
            Ok((obs, manifold))
        });
        let (obs, manifold) = match prepared {
            Ok(p) => p,
            Err(e) => {
                log::warn!("trial {trial}, L={} Q={}: {e}", cell.block_len, cell.num_blocks);
                out.extend(methods.iter().map(|_| TrialOutcome::failed(trial, truth, &e)));
                continue;
            }
        };
        let table = SteeringTable::new(&manifold, grid.to_vec());
        for &method in methods {
            let outcome = match estimate_with_table(&obs, &manifold, &table, ccfg.users, method, &ccfg.grid) {
                Ok(est) => TrialOutcome::from_estimates(trial, truth, &est.estimates, ccfg.error_threshold_deg),
                Err(e) => {
                    log::warn!("trial {trial}, {method} L={} Q={}: {e}", cell.block_len, cell.num_blocks);
                    TrialOutcome::failed(trial, truth, &e)
                }
            };
            out.push(outcome);
        }
    }
    out
}

/// Error probability for every (cell, method) pair over `cfg.trials` trials.
///
/// Trials run in parallel on the current rayon pool; each draws from its own
/// RNG streams, so the reports do not depend on the number of workers.
/// Reports are ordered cell-major, then by `methods` order.
pub fn run_montecarlo(cfg: &ScenarioConfig, methods: &[Method], cells: &[Cell]) -> Result<Vec<ExperimentReport>> {
    cfg.validate()?;
    for cell in cells {
        cell.apply(cfg).validate()?;
    }
    if cells.is_empty() || methods.is_empty() {
        return Ok(vec![]);
    }
    let grid = cfg.grid.coarse_grid()?;
    let started = Instant::now();
    let per_trial: Vec<Vec<TrialOutcome>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| trial_outcomes(cfg, t, methods, cells, &grid))
        .collect();
    let elapsed_ms = started.elapsed().as_millis();

    let mut reports = Vec::with_capacity(cells.len() * methods.len());
    for (ci, cell) in cells.iter().enumerate() {
        for (mi, &method) in methods.iter().enumerate() {
            let slot = ci * methods.len() + mi;
            let outcomes: Vec<TrialOutcome> = per_trial.iter().map(|o| o[slot].clone()).collect();
            let errors = outcomes.iter().filter(|o| o.error_event).count();
            reports.push(ExperimentReport {
                config: cell.apply(cfg),
                method,
                cell: *cell,
                snr_db: cfg.snr_db,
                trials: cfg.trials,
                errors,
                error_probability: errors as f64 / cfg.trials as f64,
                elapsed_ms,
                outcomes,
            });
        }
    }
    Ok(reports)
}

/// Result of a single-scenario spectrum run.
#[derive(Debug, Clone)]
pub struct SpectrumRun {
    pub scenario: Scenario,
    pub estimation: EstimationResult,
    /// Matched absolute errors per true user, degrees.
    pub errors_deg: Vec<f64>,
    pub observations: BlockObservations,
}

/// Spectrum of trial 0 of `cfg` (pinned AOAs honoured).
pub fn run_spectrum(cfg: &ScenarioConfig, method: Method) -> Result<SpectrumRun> {
    cfg.validate()?;
    let grid = cfg.grid.coarse_grid()?;
    let mut data = run_trial(cfg, 0, &[method], &grid)?;
    let estimation = data.estimates.remove(0)?;
    let errors_deg = match_estimates(&data.scenario.true_aoas, &estimation.estimates);
    Ok(SpectrumRun {
        scenario: data.scenario,
        estimation,
        errors_deg,
        observations: data.observations,
    })
}

/// Outcome of an SNR calibration search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub snr_db: f64,
    pub error_probability: f64,
    pub target: f64,
    /// Every evaluated (SNR, error probability) pair in evaluation order.
    pub history: Vec<(f64, f64)>,
}

/// Bisection on SNR for the lowest value at which MUSIC at the configured
/// (L, Q) has error probability at or below `target`, using common random
/// numbers (the config seed) at every step.
pub fn calibrate_snr(cfg: &ScenarioConfig, target: f64, lo_db: f64, hi_db: f64, iterations: usize) -> Result<Calibration> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidConfig(format!("calibration target must lie in (0, 1), got {target}")));
    }
    if !(lo_db < hi_db) {
        return Err(Error::InvalidConfig("calibration bracket needs lo < hi".into()));
    }
    let cell = Cell::new(cfg.block_len, cfg.num_blocks);
    let mut history = Vec::new();
    let mut eval = |snr: f64| -> Result<f64> {
        let c = ScenarioConfig { snr_db: snr, ..cfg.clone() };
        let p = run_montecarlo(&c, &[Method::Music], &[cell])?[0].error_probability;
        log::info!("calibration: snr {snr:.3} dB → error probability {p}");
        history.push((snr, p));
        Ok(p)
    };

    let (mut lo, mut hi) = (lo_db, hi_db);
    let mut p_hi = eval(hi)?;
    if p_hi > target {
        return Err(Error::InvalidConfig(format!(
            "error probability {p_hi} at the upper bracket {hi} dB exceeds the target {target}"
        )));
    }
    let p_lo = eval(lo)?;
    if p_lo <= target {
        hi = lo;
        p_hi = p_lo;
    } else {
        for _ in 0..iterations {
            let mid = 0.5 * (lo + hi);
            let p = eval(mid)?;
            if p <= target {
                hi = mid;
                p_hi = p;
            } else {
                lo = mid;
            }
        }
    }
    Ok(Calibration {
        snr_db: hi,
        error_probability: p_hi,
        target,
        history,
    })
}
