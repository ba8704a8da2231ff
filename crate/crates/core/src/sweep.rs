//! Objective-weight sensitivity analysis.
//!
//! Two procedures calibrate the weight vector:
//!
//! * [`pareto_sweep_alpha1`] traces the energy/delay trade-off of a
//!   single-technology system: for each energy weight `alpha1` it solves
//!   seeded instances under `(alpha1, 0, 1 - alpha1)` and averages consumed
//!   energy and realized delay, both as percentages.
//! * [`grid_search_alpha2`] scores switching weights for a hybrid system:
//!   each candidate's per-term degradation is measured against the value
//!   that term reaches when optimized alone, and candidates within a
//!   threshold on every active term are accepted.
//!
//! Work items (grid point × seed) are independent and run on a thread pool;
//! aggregation is an ordered reduction, so results are deterministic.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{consumed_energy, message_delays, ModelError, ObjectiveBreakdown, ObjectiveConfig};
use crate::scenario::{generate_scenario, GenerationConfig, Scenario, ScenarioError, Technology, TechnologySet};
use crate::solver::{solve_bnb, SolveOptions, SolverError};

/// Averaged outcome of one energy-weight setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    /// Energy weight; delay gets the complement and switching gets zero.
    pub alpha1: f64,
    /// Mean over devices with a budget of consumed/budget, in percent.
    pub avg_energy_pct: f64,
    /// Mean over messages of (delay - 1) / (tau - 1), in percent; unsent
    /// messages count the full timeout, i.e. 100.
    pub avg_delay_pct: f64,
    /// Mean number of scheduled messages per instance.
    pub n_scheduled: f64,
    /// Every scheduled message went out at its window opening, across all
    /// seeds. Vacuously true for empty schedules.
    pub zero_delay: bool,
}

/// Outcome of one switching-weight candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alpha2Point {
    pub alpha2: f64,
    /// Mean degradation of the energy, switching and delay terms versus
    /// their optimized-alone values, in percentage points of each term's
    /// normalized scale.
    pub deviations: [f64; 3],
    /// All terms with positive weight degraded at most the threshold.
    pub accepted: bool,
}

/// Switching-weight search results plus the grid entries that were skipped
/// because the weights could not sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alpha2Search {
    pub points: Vec<Alpha2Point>,
    pub skipped: Vec<f64>,
}

/// Errors from sweep orchestration.
#[derive(Debug)]
pub enum SweepError {
    /// A grid value or weight lies outside `[0, 1]`, or a threshold is not
    /// positive.
    BadParameter(&'static str),
    Scenario(ScenarioError),
    Model(ModelError),
    Solver(SolverError),
    Csv(csv::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for SweepError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepError::BadParameter(what) => write!(f, "bad sweep parameter: {what}"),
            SweepError::Scenario(e) => write!(f, "{e}"),
            SweepError::Model(e) => write!(f, "{e}"),
            SweepError::Solver(e) => write!(f, "{e}"),
            SweepError::Csv(e) => write!(f, "{e}"),
            SweepError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SweepError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            SweepError::BadParameter(_) => None,
            SweepError::Scenario(e) => Some(e),
            SweepError::Model(e) => Some(e),
            SweepError::Solver(e) => Some(e),
            SweepError::Csv(e) => Some(e),
            SweepError::Io(e) => Some(e),
        }
    }
}

impl From<ScenarioError> for SweepError {
    fn from(e: ScenarioError) -> Self {
        SweepError::Scenario(e)
    }
}

impl From<ModelError> for SweepError {
    fn from(e: ModelError) -> Self {
        SweepError::Model(e)
    }
}

impl From<SolverError> for SweepError {
    fn from(e: SolverError) -> Self {
        SweepError::Solver(e)
    }
}

impl From<csv::Error> for SweepError {
    fn from(e: csv::Error) -> Self {
        SweepError::Csv(e)
    }
}

impl From<std::io::Error> for SweepError {
    fn from(e: std::io::Error) -> Self {
        SweepError::Io(e)
    }
}

/// Default energy-weight grid: 0 to 0.3 in steps of 0.025.
pub fn default_alpha1_grid() -> Vec<f64> {
    (0..=12).map(|i| i as f64 * 0.025).collect()
}

/// Default switching-weight grid: 0 to 0.5 in steps of 0.05.
pub fn default_alpha2_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 * 0.05).collect()
}

fn check_unit(values: &[f64], what: &'static str) -> Result<(), SweepError> {
    if values.iter().all(|v| v.is_finite() && (0.0..=1.0).contains(v)) {
        Ok(())
    } else {
        Err(SweepError::BadParameter(what))
    }
}

/// Per-seed, per-weight raw sample for the energy/delay sweep.
struct TradeoffSample {
    energy_pct: f64,
    delay_pct: f64,
    scheduled: usize,
    zero_delay: bool,
}

fn tradeoff_sample(
    scenario: &Scenario,
    technology: Technology,
    alpha1: f64,
    options: &SolveOptions,
) -> Result<TradeoffSample, SweepError> {
    let cfg = ObjectiveConfig::for_scenario(scenario, [alpha1, 0.0, 1.0 - alpha1])?;
    let solution = solve_bnb(scenario, &cfg, options)?;
    let consumed = consumed_energy(scenario, &solution.schedule);
    let m = technology.index();
    let mut utilization = 0.0;
    let mut with_budget = 0usize;
    for (device, &budget) in scenario.energy.budget[m].iter().enumerate() {
        if budget > 0.0 {
            with_budget += 1;
            utilization += 100.0 * consumed[m][device] / budget;
        }
    }
    let energy_pct = if with_budget == 0 { 0.0 } else { utilization / with_budget as f64 };
    let delays = message_delays(scenario, &solution.schedule);
    let span = (scenario.tau - 1).max(1) as f64;
    let delay_pct = if delays.is_empty() {
        0.0
    } else {
        delays.iter().map(|&d| 100.0 * (d as f64 - 1.0) / span).sum::<f64>()
            / delays.len() as f64
    };
    let zero_delay = solution
        .schedule
        .transmissions()
        .iter()
        .zip(message_starts(scenario, &solution))
        .all(|(tx, start)| tx.step == start);
    Ok(TradeoffSample {
        energy_pct,
        delay_pct,
        scheduled: solution.schedule.len(),
        zero_delay,
    })
}

/// Window opening of the message each transmission covers, in schedule
/// order.
fn message_starts<'a>(
    scenario: &'a Scenario,
    solution: &'a crate::solver::Solution,
) -> impl Iterator<Item = usize> + 'a {
    solution.schedule.transmissions().iter().map(|tx| {
        scenario
            .pair_messages(tx.sender, tx.receiver)
            .iter()
            .find(|m| m.contains_step(tx.step))
            .map(|m| m.window_start)
            .unwrap_or(tx.step)
    })
}

/// Traces the energy/delay trade-off of a standalone technology over a grid
/// of energy weights, averaging each point over seeded instances.
pub fn pareto_sweep_alpha1(
    base_config: &GenerationConfig,
    technology: Technology,
    alpha1_grid: &[f64],
    seeds: &[u64],
    options: &SolveOptions,
) -> Result<Vec<ParetoPoint>, SweepError> {
    check_unit(alpha1_grid, "alpha1 grid values must lie in [0, 1]")?;
    if seeds.is_empty() {
        return Err(SweepError::BadParameter("at least one seed is required"));
    }
    let mut config = base_config.clone();
    config.enabled = TechnologySet::only(technology);
    let scenarios: Result<Vec<Scenario>, SweepError> = seeds
        .par_iter()
        .map(|&seed| Ok(generate_scenario(&config, seed)?))
        .collect();
    let scenarios = scenarios?;
    let jobs: Vec<(usize, usize)> = (0..alpha1_grid.len())
        .flat_map(|gi| (0..seeds.len()).map(move |si| (gi, si)))
        .collect();
    let samples: Result<Vec<TradeoffSample>, SweepError> = jobs
        .par_iter()
        .map(|&(gi, si)| tradeoff_sample(&scenarios[si], technology, alpha1_grid[gi], options))
        .collect();
    let samples = samples?;
    let per_seed = seeds.len() as f64;
    let points = alpha1_grid
        .iter()
        .enumerate()
        .map(|(gi, &alpha1)| {
            let chunk = &samples[gi * seeds.len()..(gi + 1) * seeds.len()];
            ParetoPoint {
                alpha1,
                avg_energy_pct: chunk.iter().map(|s| s.energy_pct).sum::<f64>() / per_seed,
                avg_delay_pct: chunk.iter().map(|s| s.delay_pct).sum::<f64>() / per_seed,
                n_scheduled: chunk.iter().map(|s| s.scheduled as f64).sum::<f64>() / per_seed,
                zero_delay: chunk.iter().all(|s| s.zero_delay),
            }
        })
        .collect();
    Ok(points)
}

fn term(breakdown: &ObjectiveBreakdown, t: usize) -> f64 {
    match t {
        0 => breakdown.energy_norm,
        1 => breakdown.switching_norm,
        _ => breakdown.delay_norm,
    }
}

/// Scores switching-weight candidates for a hybrid system against the given
/// energy weight and per-term degradation threshold (percentage points).
/// Grid entries with `alpha1 + alpha2 > 1` land in `skipped`.
pub fn grid_search_alpha2(
    base_config: &GenerationConfig,
    alpha1: f64,
    threshold_pct: f64,
    alpha2_grid: &[f64],
    seeds: &[u64],
    options: &SolveOptions,
) -> Result<Alpha2Search, SweepError> {
    check_unit(&[alpha1], "alpha1 must lie in [0, 1]")?;
    check_unit(alpha2_grid, "alpha2 grid values must lie in [0, 1]")?;
    if !(threshold_pct > 0.0) {
        return Err(SweepError::BadParameter("threshold_pct must be positive"));
    }
    if seeds.is_empty() {
        return Err(SweepError::BadParameter("at least one seed is required"));
    }

    // Optimized-alone reference value of each term, per seed.
    let contexts: Result<Vec<(Scenario, [f64; 3])>, SweepError> = seeds
        .par_iter()
        .map(|&seed| {
            let scenario = generate_scenario(base_config, seed)?;
            let mut refs = [0.0; 3];
            for (t, reference) in refs.iter_mut().enumerate() {
                let mut alpha = [0.0; 3];
                alpha[t] = 1.0;
                let cfg = ObjectiveConfig::for_scenario(&scenario, alpha)?;
                let solution = solve_bnb(&scenario, &cfg, options)?;
                *reference = term(&solution.objective, t);
            }
            Ok((scenario, refs))
        })
        .collect();
    let contexts = contexts?;

    let mut evaluated = Vec::new();
    let mut skipped = Vec::new();
    for &alpha2 in alpha2_grid {
        if alpha1 + alpha2 > 1.0 + 1e-12 {
            skipped.push(alpha2);
        } else {
            evaluated.push(alpha2);
        }
    }

    let jobs: Vec<(usize, usize)> = (0..evaluated.len())
        .flat_map(|gi| (0..contexts.len()).map(move |si| (gi, si)))
        .collect();
    let samples: Result<Vec<[f64; 3]>, SweepError> = jobs
        .par_iter()
        .map(|&(gi, si)| {
            let (scenario, refs) = &contexts[si];
            let alpha2 = evaluated[gi];
            let alpha = [alpha1, alpha2, (1.0 - alpha1 - alpha2).max(0.0)];
            let cfg = ObjectiveConfig::for_scenario(scenario, alpha)?;
            let solution = solve_bnb(scenario, &cfg, options)?;
            let mut deviations = [0.0; 3];
            for (t, deviation) in deviations.iter_mut().enumerate() {
                *deviation = 100.0 * (term(&solution.objective, t) - refs[t]);
            }
            Ok(deviations)
        })
        .collect();
    let samples = samples?;

    let per_seed = contexts.len() as f64;
    let points = evaluated
        .iter()
        .enumerate()
        .map(|(gi, &alpha2)| {
            let chunk = &samples[gi * contexts.len()..(gi + 1) * contexts.len()];
            let mut deviations = [0.0; 3];
            for (t, deviation) in deviations.iter_mut().enumerate() {
                *deviation = chunk.iter().map(|d| d[t]).sum::<f64>() / per_seed;
            }
            let alpha = [alpha1, alpha2, (1.0 - alpha1 - alpha2).max(0.0)];
            let accepted = (0..3)
                .all(|t| alpha[t] == 0.0 || deviations[t] <= threshold_pct);
            Alpha2Point { alpha2, deviations, accepted }
        })
        .collect();
    Ok(Alpha2Search { points, skipped })
}

/// Writes the trade-off curve as CSV.
pub fn write_pareto_csv(points: &[ParetoPoint], path: &Path) -> Result<(), SweepError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["alpha1", "energy_pct", "delay_pct", "n_scheduled", "zero_delay"])?;
    for p in points {
        writer.write_record([
            p.alpha1.to_string(),
            p.avg_energy_pct.to_string(),
            p.avg_delay_pct.to_string(),
            p.n_scheduled.to_string(),
            p.zero_delay.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes the switching-weight search as CSV. Skipped grid entries are not
/// rows; they never produced measurements.
pub fn write_alpha2_csv(search: &Alpha2Search, path: &Path) -> Result<(), SweepError> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["alpha2", "dev_energy", "dev_switch", "dev_delay", "accepted"])?;
    for p in &search.points {
        writer.write_record([
            p.alpha2.to_string(),
            p.deviations[0].to_string(),
            p.deviations[1].to_string(),
            p.deviations[2].to_string(),
            p.accepted.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
