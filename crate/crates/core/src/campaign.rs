//! Seeded Monte-Carlo campaigns comparing technology modes.
//!
//! A campaign draws `iterations` scenarios from one generation distribution
//! (seeds `seed_base + t`), solves each under a fixed weight vector, and
//! records solve status, objective terms, transmission and energy rates,
//! and age-of-information summaries. Campaigns optionally sweep the node
//! count or the access-point count, and campaigns that differ only in
//! technology mode can be compared seed by seed.
//!
//! Every run is a pure function of its configuration: iterations execute in
//! parallel but are collected in order, and the CSV emitters format numbers
//! deterministically, so rerunning a manifest reproduces every artifact
//! byte for byte.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aoi::{system_metrics, SystemAoi};
use crate::model::{consumed_energy, ModelError, ObjectiveConfig, Schedule};
use crate::scenario::{
    generate_scenario, GenerationConfig, ScenarioError, Technology, TechnologySet,
};
use crate::solver::{solve_bnb, Proof, SolveOptions};

/// Which technologies the campaign's scenarios may schedule on.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    RfOnly,
    OcOnly,
    Hybrid,
}

impl Mode {
    pub fn technologies(self) -> TechnologySet {
        match self {
            Mode::RfOnly => TechnologySet::only(Technology::Rf),
            Mode::OcOnly => TechnologySet::only(Technology::Oc),
            Mode::Hybrid => TechnologySet::both(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::RfOnly => "rf_only",
            Mode::OcOnly => "oc_only",
            Mode::Hybrid => "hybrid",
        }
    }
}

/// Branch-and-bound settings applied to every iteration. The defaults trade
/// proof strength for throughput: a 2% gap certificate, with a node cap so a
/// pathological instance cannot stall a campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub gap_target: f64,
    pub node_limit: Option<u64>,
    pub time_limit_secs: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { gap_target: 0.02, node_limit: Some(200_000), time_limit_secs: None }
    }
}

impl SolverSettings {
    pub fn options(&self) -> SolveOptions {
        SolveOptions {
            gap_target: self.gap_target,
            node_limit: self.node_limit,
            time_limit_secs: self.time_limit_secs,
        }
    }
}

/// Sweep axis of a campaign. `None` runs the base configuration once.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    None,
    Nodes,
    Aps,
}

/// One campaign: a scenario distribution, a technology mode, objective
/// weights, solver settings and a seeded iteration count, optionally swept
/// along a node-count or AP-count axis (at most one of the two).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub generation: GenerationConfig,
    pub mode: Mode,
    pub alpha: [f64; 3],
    pub solver: SolverSettings,
    pub iterations: usize,
    pub seed_base: u64,
    pub vary_nodes: Option<Vec<usize>>,
    pub vary_aps: Option<Vec<usize>>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            generation: GenerationConfig::default(),
            mode: Mode::Hybrid,
            alpha: [0.1, 0.1, 0.8],
            solver: SolverSettings::default(),
            iterations: 100,
            seed_base: 1,
            vary_nodes: None,
            vary_aps: None,
        }
    }
}

impl ExperimentConfig {
    pub fn axis(&self) -> Axis {
        if self.vary_nodes.is_some() {
            Axis::Nodes
        } else if self.vary_aps.is_some() {
            Axis::Aps
        } else {
            Axis::None
        }
    }

    /// Axis values, one per sweep point. Without an axis the single point is
    /// labeled by the configured node count.
    pub fn points(&self) -> Vec<usize> {
        match self.axis() {
            Axis::Nodes => self.vary_nodes.clone().unwrap(),
            Axis::Aps => self.vary_aps.clone().unwrap(),
            Axis::None => vec![self.generation.n_nodes],
        }
    }

    /// Iteration seeds, in iteration order.
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.iterations).map(|t| self.seed_base.wrapping_add(t as u64)).collect()
    }

    fn generation_at(&self, point: usize) -> GenerationConfig {
        let mut generation = self.generation.clone();
        generation.enabled = self.mode.technologies();
        match self.axis() {
            Axis::Nodes => generation.n_nodes = point,
            Axis::Aps => generation.n_aps = point,
            Axis::None => {}
        }
        generation
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.iterations == 0 {
            return Err(CampaignError::BadConfig("iterations must be at least 1"));
        }
        if self.vary_nodes.is_some() && self.vary_aps.is_some() {
            return Err(CampaignError::BadConfig("vary_nodes and vary_aps are exclusive"));
        }
        // Weight validation is the objective module's; probe with neutral
        // constants so only alpha can fail.
        ObjectiveConfig::with_parts(self.alpha, [1.0; 2], [1.0; 3])?;
        let points = self.points();
        if points.is_empty() {
            return Err(CampaignError::BadConfig("sweep axis must list at least one point"));
        }
        for point in points {
            self.generation_at(point).validate()?;
        }
        Ok(())
    }
}

/// How one iteration's solve ended.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum IterationStatus {
    Optimal,
    GapBounded,
    Heuristic,
    Failed,
}

impl IterationStatus {
    pub fn label(self) -> &'static str {
        match self {
            IterationStatus::Optimal => "optimal",
            IterationStatus::GapBounded => "gap_bounded",
            IterationStatus::Heuristic => "heuristic",
            IterationStatus::Failed => "failed",
        }
    }
}

/// Outcome of a single seeded iteration. Failures are recorded, never
/// propagated; a failed record has empty `values`, no schedule and no ages.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub point: usize,
    pub iteration: usize,
    pub seed: u64,
    pub status: IterationStatus,
    /// Certified optimality gap; NaN when the iteration failed.
    pub gap: f64,
    /// One entry per campaign metric, ordered as [`metric_names`]. Per-type
    /// entries are NaN when the instance demanded no stream of that type.
    pub values: Vec<f64>,
    pub schedule: Option<Schedule>,
    pub aoi: Option<SystemAoi>,
    pub error: Option<String>,
}

/// Mean, population standard deviation and sample count of one metric over
/// an iteration set; NaN and failed entries are excluded from all three.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricAggregate {
    pub metric: String,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

/// All iterations of one sweep point plus their aggregates.
#[derive(Clone, Debug, PartialEq)]
pub struct CampaignPoint {
    pub point: usize,
    pub records: Vec<IterationRecord>,
    pub aggregates: Vec<MetricAggregate>,
}

impl CampaignPoint {
    pub fn aggregate(&self, metric: &str) -> Option<&MetricAggregate> {
        self.aggregates.iter().find(|a| a.metric == metric)
    }
}

/// A finished campaign, self-describing for emission and comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct CampaignResult {
    pub config: ExperimentConfig,
    pub axis: Axis,
    pub metric_names: Vec<String>,
    pub points: Vec<CampaignPoint>,
}

impl CampaignResult {
    pub fn metric_index(&self, metric: &str) -> Option<usize> {
        self.metric_names.iter().position(|n| n == metric)
    }
}

/// Campaign-level failures. Per-iteration solver failures are data, not
/// errors; a campaign only fails wholesale.
#[derive(Debug)]
pub enum CampaignError {
    BadConfig(&'static str),
    Scenario(ScenarioError),
    Model(ModelError),
    /// Every iteration of every point failed.
    AllIterationsFailed,
    /// Manifest written by a different artifact version.
    ManifestVersion { found: String },
    /// Manifest contents contradict themselves.
    ManifestMismatch(&'static str),
    Json(serde_json::Error),
    Csv(csv::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CampaignError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CampaignError::BadConfig(what) => write!(f, "bad campaign config: {what}"),
            CampaignError::Scenario(e) => write!(f, "{e}"),
            CampaignError::Model(e) => write!(f, "{e}"),
            CampaignError::AllIterationsFailed => write!(f, "every campaign iteration failed"),
            CampaignError::ManifestVersion { found } => write!(
                f,
                "manifest was written by artifact version {found}, this is {}",
                env!("CARGO_PKG_VERSION")
            ),
            CampaignError::ManifestMismatch(what) => write!(f, "manifest mismatch: {what}"),
            CampaignError::Json(e) => write!(f, "{e}"),
            CampaignError::Csv(e) => write!(f, "{e}"),
            CampaignError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CampaignError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            CampaignError::Scenario(e) => Some(e),
            CampaignError::Model(e) => Some(e),
            CampaignError::Json(e) => Some(e),
            CampaignError::Csv(e) => Some(e),
            CampaignError::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<ScenarioError> for CampaignError {
    fn from(e: ScenarioError) -> Self {
        CampaignError::Scenario(e)
    }
}

impl From<ModelError> for CampaignError {
    fn from(e: ModelError) -> Self {
        CampaignError::Model(e)
    }
}

impl From<serde_json::Error> for CampaignError {
    fn from(e: serde_json::Error) -> Self {
        CampaignError::Json(e)
    }
}

impl From<csv::Error> for CampaignError {
    fn from(e: csv::Error) -> Self {
        CampaignError::Csv(e)
    }
}

impl From<std::io::Error> for CampaignError {
    fn from(e: std::io::Error) -> Self {
        CampaignError::Io(e)
    }
}

/// Scalar metrics recorded per iteration, in column order: objective terms,
/// delivery and consumption rates, then overall and per-type ages.
pub fn metric_names(n_types: usize) -> Vec<String> {
    let mut names: Vec<String> = [
        "objective",
        "energy_raw",
        "switches",
        "delay_raw",
        "transmission_rate",
        "energy_rate",
        "mean_aoi",
        "peak_aoi",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for t in 0..n_types {
        names.push(format!("mean_aoi_type{t}"));
    }
    for t in 0..n_types {
        names.push(format!("peak_aoi_type{t}"));
    }
    names
}

struct IterationOutcome {
    status: IterationStatus,
    gap: f64,
    values: Vec<f64>,
    schedule: Schedule,
    aoi: SystemAoi,
}

fn run_iteration(
    generation: &GenerationConfig,
    alpha: [f64; 3],
    options: &SolveOptions,
    point: usize,
    iteration: usize,
    seed: u64,
) -> IterationRecord {
    match solve_iteration(generation, alpha, options, seed) {
        Ok(outcome) => IterationRecord {
            point,
            iteration,
            seed,
            status: outcome.status,
            gap: outcome.gap,
            values: outcome.values,
            schedule: Some(outcome.schedule),
            aoi: Some(outcome.aoi),
            error: None,
        },
        Err(message) => IterationRecord {
            point,
            iteration,
            seed,
            status: IterationStatus::Failed,
            gap: f64::NAN,
            values: Vec::new(),
            schedule: None,
            aoi: None,
            error: Some(message),
        },
    }
}

fn solve_iteration(
    generation: &GenerationConfig,
    alpha: [f64; 3],
    options: &SolveOptions,
    seed: u64,
) -> Result<IterationOutcome, String> {
    let scenario = generate_scenario(generation, seed).map_err(|e| e.to_string())?;
    let cfg = ObjectiveConfig::for_scenario(&scenario, alpha).map_err(|e| e.to_string())?;
    let solution = solve_bnb(&scenario, &cfg, options).map_err(|e| e.to_string())?;
    let aoi = system_metrics(&scenario, &solution.schedule).map_err(|e| e.to_string())?;

    let (status, gap) = match solution.proof {
        Proof::Optimal => (IterationStatus::Optimal, 0.0),
        Proof::GapBounded { gap } => (IterationStatus::GapBounded, gap),
        Proof::Heuristic => (IterationStatus::Heuristic, f64::NAN),
    };

    let consumed = consumed_energy(&scenario, &solution.schedule);
    let n = scenario.n_nodes + scenario.n_aps;
    let mut rates = Vec::with_capacity(n);
    for device in 0..n {
        let spent: f64 = Technology::ALL.iter().map(|t| consumed[t.index()][device]).sum();
        let budget: f64 =
            Technology::ALL.iter().map(|t| scenario.energy.budget[t.index()][device]).sum();
        if budget > 0.0 {
            rates.push(spent / budget);
        }
    }
    let energy_rate =
        if rates.is_empty() { 0.0 } else { rates.iter().sum::<f64>() / rates.len() as f64 };
    let transmission_rate = solution.schedule.len() as f64 / scenario.messages.len() as f64;

    let mut values = vec![
        solution.objective.total,
        solution.objective.energy_raw,
        solution.objective.switching_raw as f64,
        solution.objective.delay_raw as f64,
        transmission_rate,
        energy_rate,
        aoi.mean_aoi,
        aoi.peak_aoi,
    ];
    for t in 0..scenario.n_types {
        values.push(
            aoi.per_type.iter().find(|p| p.data_type == t).map_or(f64::NAN, |p| p.mean_aoi),
        );
    }
    for t in 0..scenario.n_types {
        values.push(
            aoi.per_type.iter().find(|p| p.data_type == t).map_or(f64::NAN, |p| p.peak_aoi),
        );
    }

    Ok(IterationOutcome { status, gap, values, schedule: solution.schedule, aoi })
}

/// Aggregates one metric column over an iteration set, skipping failed
/// records and NaN entries.
fn aggregate_metric(metric: &str, index: usize, records: &[IterationRecord]) -> MetricAggregate {
    let samples: Vec<f64> = records
        .iter()
        .filter_map(|r| r.values.get(index).copied())
        .filter(|v| v.is_finite())
        .collect();
    let count = samples.len();
    if count == 0 {
        return MetricAggregate { metric: metric.to_string(), count, mean: f64::NAN, std: f64::NAN };
    }
    let mean = samples.iter().sum::<f64>() / count as f64;
    let variance = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count as f64;
    MetricAggregate { metric: metric.to_string(), count, mean, std: variance.sqrt() }
}

/// Runs every (point, iteration) job and aggregates per point. Fails only if
/// the configuration is invalid or no iteration at all succeeded.
pub fn run_campaign(config: &ExperimentConfig) -> Result<CampaignResult, CampaignError> {
    config.validate()?;
    let names = metric_names(config.generation.n_types);
    let points = config.points();
    let seeds = config.seeds();
    let generations: Vec<GenerationConfig> =
        points.iter().map(|&p| config.generation_at(p)).collect();
    let options = config.solver.options();

    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|pi| (0..seeds.len()).map(move |ti| (pi, ti)))
        .collect();
    let records: Vec<IterationRecord> = jobs
        .par_iter()
        .map(|&(pi, ti)| {
            run_iteration(&generations[pi], config.alpha, &options, points[pi], ti, seeds[ti])
        })
        .collect();

    let mut campaign_points = Vec::with_capacity(points.len());
    for (pi, &point) in points.iter().enumerate() {
        let slice = &records[pi * seeds.len()..(pi + 1) * seeds.len()];
        let aggregates = names
            .iter()
            .enumerate()
            .map(|(mi, name)| aggregate_metric(name, mi, slice))
            .collect();
        campaign_points.push(CampaignPoint {
            point,
            records: slice.to_vec(),
            aggregates,
        });
    }
    if campaign_points
        .iter()
        .all(|p| p.records.iter().all(|r| r.status == IterationStatus::Failed))
    {
        return Err(CampaignError::AllIterationsFailed);
    }
    Ok(CampaignResult {
        config: config.clone(),
        axis: config.axis(),
        metric_names: names,
        points: campaign_points,
    })
}

/// Campaigns run side by side, usually differing only in technology mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonTable {
    pub paired: bool,
    pub results: Vec<CampaignResult>,
}

impl ComparisonTable {
    pub fn axis(&self) -> Axis {
        self.results[0].axis
    }

    pub fn points(&self) -> Vec<usize> {
        self.results[0].points.iter().map(|p| p.point).collect()
    }

    /// Per-seed metric differences `other − baseline` at one sweep point,
    /// skipping seeds where either side failed or the metric is undefined.
    /// `None` unless the comparison was run with paired seeds.
    pub fn paired_deltas(
        &self,
        baseline: usize,
        other: usize,
        point_index: usize,
        metric: &str,
    ) -> Option<Vec<(u64, f64)>> {
        if !self.paired {
            return None;
        }
        let index = self.results.first()?.metric_index(metric)?;
        let a = self.results.get(baseline)?.points.get(point_index)?;
        let b = self.results.get(other)?.points.get(point_index)?;
        Some(
            a.records
                .iter()
                .zip(&b.records)
                .filter_map(|(ra, rb)| {
                    let va = ra.values.get(index)?;
                    let vb = rb.values.get(index)?;
                    (va.is_finite() && vb.is_finite()).then_some((ra.seed, vb - va))
                })
                .collect(),
        )
    }
}

/// Fraction of deltas strictly on the stated side of zero; ties count
/// against the claimed direction.
pub fn sign_fraction(deltas: &[(u64, f64)], negative: bool) -> f64 {
    if deltas.is_empty() {
        return 0.0;
    }
    let hits = deltas
        .iter()
        .filter(|(_, d)| if negative { *d < 0.0 } else { *d > 0.0 })
        .count();
    hits as f64 / deltas.len() as f64
}

/// File form of a comparison request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSpec {
    pub configs: Vec<ExperimentConfig>,
    #[serde(default)]
    pub paired_seeds: bool,
}

/// Runs the given configurations side by side. The configurations must agree
/// on everything except mode; with `paired_seeds` their seed streams must
/// coincide so per-seed deltas are meaningful.
pub fn compare_modes(
    configs: &[ExperimentConfig],
    paired_seeds: bool,
) -> Result<ComparisonTable, CampaignError> {
    if configs.len() < 2 {
        return Err(CampaignError::BadConfig("comparison needs at least two configurations"));
    }
    let first = &configs[0];
    for config in &configs[1..] {
        if config.axis() != first.axis() || config.points() != first.points() {
            return Err(CampaignError::BadConfig("sweep axes must match"));
        }
        if config.iterations != first.iterations {
            return Err(CampaignError::BadConfig("iteration counts must match"));
        }
        if paired_seeds && config.seed_base != first.seed_base {
            return Err(CampaignError::BadConfig("paired seeds require a common seed base"));
        }
        let mut a = config.generation.clone();
        let mut b = first.generation.clone();
        a.enabled = TechnologySet::both();
        b.enabled = TechnologySet::both();
        if a != b || config.alpha != first.alpha || config.solver != first.solver {
            return Err(CampaignError::BadConfig(
                "configurations may differ only in mode and sweep axis",
            ));
        }
    }
    let results: Result<Vec<CampaignResult>, CampaignError> =
        configs.iter().map(run_campaign).collect();
    Ok(ComparisonTable { paired: paired_seeds, results: results? })
}

/// Reproduction recipe written alongside every campaign's artifacts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Manifest {
    Campaign { artifact_version: String, config: ExperimentConfig, seeds: Vec<u64> },
    Comparison { artifact_version: String, spec: ComparisonSpec, seeds: Vec<u64> },
}

fn artifact_version() -> String {
    env!("CARGO_PKG_VERSION").to_string()
}

fn write_manifest(manifest: &Manifest, out_dir: &Path) -> Result<(), CampaignError> {
    let mut body = serde_json::to_string_pretty(manifest)?;
    body.push('\n');
    std::fs::write(out_dir.join("manifest.json"), body)?;
    Ok(())
}

pub fn load_manifest(path: &Path) -> Result<Manifest, CampaignError> {
    let body = std::fs::read_to_string(path)?;
    let manifest: Manifest = serde_json::from_str(&body)?;
    let found = match &manifest {
        Manifest::Campaign { artifact_version, .. } => artifact_version,
        Manifest::Comparison { artifact_version, .. } => artifact_version,
    };
    if *found != artifact_version() {
        return Err(CampaignError::ManifestVersion { found: found.clone() });
    }
    Ok(manifest)
}

/// Re-executes a manifest and emits into `out_dir`; outputs are
/// byte-identical to the original run's.
pub fn rerun_manifest(manifest: &Manifest, out_dir: &Path) -> Result<(), CampaignError> {
    match manifest {
        Manifest::Campaign { config, seeds, .. } => {
            if *seeds != config.seeds() {
                return Err(CampaignError::ManifestMismatch(
                    "seed list does not match seed_base and iterations",
                ));
            }
            let result = run_campaign(config)?;
            emit_campaign(&result, out_dir)
        }
        Manifest::Comparison { spec, seeds, .. } => {
            if spec.configs.first().map(ExperimentConfig::seeds).as_ref() != Some(seeds) {
                return Err(CampaignError::ManifestMismatch(
                    "seed list does not match seed_base and iterations",
                ));
            }
            let table = compare_modes(&spec.configs, spec.paired_seeds)?;
            emit_comparison(&table, out_dir)
        }
    }
}

/// Shortest-round-trip decimal for finite values, empty cell otherwise.
fn cell(value: f64) -> String {
    if value.is_finite() {
        value.to_string()
    } else {
        String::new()
    }
}

/// Writes `iterations.csv`, `aggregates.csv`, `aoi_trajectories.csv` and
/// `manifest.json` into `out_dir` (created if absent).
pub fn emit_campaign(result: &CampaignResult, out_dir: &Path) -> Result<(), CampaignError> {
    std::fs::create_dir_all(out_dir)?;
    write_manifest(
        &Manifest::Campaign {
            artifact_version: artifact_version(),
            config: result.config.clone(),
            seeds: result.config.seeds(),
        },
        out_dir,
    )?;

    let mut iterations = csv::Writer::from_path(out_dir.join("iterations.csv"))?;
    let mut header = vec![
        "point".to_string(),
        "iteration".to_string(),
        "seed".to_string(),
        "status".to_string(),
        "gap".to_string(),
    ];
    header.extend(result.metric_names.iter().cloned());
    header.push("error".to_string());
    iterations.write_record(&header)?;
    for point in &result.points {
        for r in &point.records {
            let mut row = vec![
                r.point.to_string(),
                r.iteration.to_string(),
                r.seed.to_string(),
                r.status.label().to_string(),
                cell(r.gap),
            ];
            for mi in 0..result.metric_names.len() {
                row.push(r.values.get(mi).map_or_else(String::new, |v| cell(*v)));
            }
            row.push(r.error.clone().unwrap_or_default());
            iterations.write_record(&row)?;
        }
    }
    iterations.flush()?;

    let mut aggregates = csv::Writer::from_path(out_dir.join("aggregates.csv"))?;
    aggregates.write_record(["point", "metric", "count", "mean", "std"])?;
    for point in &result.points {
        for a in &point.aggregates {
            aggregates.write_record([
                point.point.to_string(),
                a.metric.clone(),
                a.count.to_string(),
                cell(a.mean),
                cell(a.std),
            ])?;
        }
    }
    aggregates.flush()?;

    let mut ages = csv::Writer::from_path(out_dir.join("aoi_trajectories.csv"))?;
    ages.write_record(["point", "iteration", "seed", "receiver", "data_type", "step", "age"])?;
    for point in &result.points {
        for r in &point.records {
            let Some(aoi) = &r.aoi else { continue };
            for stream in &aoi.streams {
                for (step, &age) in stream.trajectory.values.iter().enumerate() {
                    ages.write_record([
                        r.point.to_string(),
                        r.iteration.to_string(),
                        r.seed.to_string(),
                        stream.receiver.to_string(),
                        stream.data_type.to_string(),
                        step.to_string(),
                        age.to_string(),
                    ])?;
                }
            }
        }
    }
    ages.flush()?;
    Ok(())
}

/// Writes `comparison.csv` (side-by-side aggregates), `paired_deltas.csv`
/// when seeds are paired, and `manifest.json` into `out_dir`.
pub fn emit_comparison(table: &ComparisonTable, out_dir: &Path) -> Result<(), CampaignError> {
    std::fs::create_dir_all(out_dir)?;
    let spec = ComparisonSpec {
        configs: table.results.iter().map(|r| r.config.clone()).collect(),
        paired_seeds: table.paired,
    };
    let seeds = spec.configs[0].seeds();
    write_manifest(
        &Manifest::Comparison { artifact_version: artifact_version(), spec, seeds },
        out_dir,
    )?;

    let mut comparison = csv::Writer::from_path(out_dir.join("comparison.csv"))?;
    comparison.write_record(["point", "config", "mode", "metric", "count", "mean", "std"])?;
    for (ci, result) in table.results.iter().enumerate() {
        for point in &result.points {
            for a in &point.aggregates {
                comparison.write_record([
                    point.point.to_string(),
                    ci.to_string(),
                    result.config.mode.label().to_string(),
                    a.metric.clone(),
                    a.count.to_string(),
                    cell(a.mean),
                    cell(a.std),
                ])?;
            }
        }
    }
    comparison.flush()?;

    if table.paired {
        let mut deltas = csv::Writer::from_path(out_dir.join("paired_deltas.csv"))?;
        deltas.write_record(["point", "config", "mode", "seed", "metric", "delta"])?;
        let points = table.points();
        for ci in 1..table.results.len() {
            let mode = table.results[ci].config.mode.label();
            for (pi, &point) in points.iter().enumerate() {
                for metric in &table.results[0].metric_names {
                    let Some(pairs) = self::ComparisonTable::paired_deltas(table, 0, ci, pi, metric)
                    else {
                        continue;
                    };
                    for (seed, delta) in pairs {
                        deltas.write_record([
                            point.to_string(),
                            ci.to_string(),
                            mode.to_string(),
                            seed.to_string(),
                            metric.clone(),
                            cell(delta),
                        ])?;
                    }
                }
            }
        }
        deltas.flush()?;
    }
    Ok(())
}
