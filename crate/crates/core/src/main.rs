//! Command-line front end: scenario generation, solving, feasibility
//! checking, age analysis, weight sweeps, Monte-Carlo campaigns and LP
//! export.
//!
//! Exit codes: 0 success, 1 usage error, 2 infeasible or invalid input,
//! 3 an internal limit refused the work.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use aionet::campaign::{
    compare_modes, emit_campaign, emit_comparison, load_manifest, rerun_manifest, run_campaign,
    sign_fraction, CampaignError, CampaignResult, ComparisonSpec, ComparisonTable,
    ExperimentConfig, Manifest, Mode,
};
use aionet::model::milp::build_milp;
use aionet::model::{
    check_constraints, load_schedule, save_schedule, ModelError, ObjectiveConfig,
};
use aionet::scenario::{
    generate_scenario, load_scenario, save_scenario, GenerationConfig, Scenario, ScenarioError,
    Technology, TechnologySet,
};
use aionet::solver::{
    solve_bnb, solve_bruteforce, solve_greedy, write_lp_file, BruteForceLimits, LpError, Proof,
    Solution, SolveOptions, SolverError,
};
use aionet::sweep::{
    default_alpha1_grid, default_alpha2_grid, grid_search_alpha2, pareto_sweep_alpha1,
    write_alpha2_csv, write_pareto_csv, SweepError,
};
use aionet::system_metrics;

const EXIT_USAGE: i32 = 1;
const EXIT_INVALID: i32 = 2;
const EXIT_LIMIT: i32 = 3;

#[derive(Debug)]
enum CliError {
    /// Bad flags or flag combinations.
    Usage(String),
    /// Inputs that parse but cannot be worked with, and infeasibility.
    Invalid(String),
    /// A configured internal limit refused the work.
    Limit(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Limit(_) => EXIT_LIMIT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Invalid(m) | CliError::Limit(m) => f.write_str(m),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::SearchSpace { .. } => CliError::Limit(e.to_string()),
            SolverError::BadOptions(_) => CliError::Usage(e.to_string()),
            SolverError::Model(m) => m.into(),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::BadParameter(_) => CliError::Usage(e.to_string()),
            SweepError::Solver(s) => s.into(),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

impl From<CampaignError> for CliError {
    fn from(e: CampaignError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<LpError> for CliError {
    fn from(e: LpError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

/// Scheduling and age-of-information toolkit for hybrid radio/optical
/// networks.
#[derive(Parser, Debug)]
#[command(name = "aionet", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scenario file utilities.
    Scenario {
        #[command(subcommand)]
        command: ScenarioCommand,
    },
    /// Solve one instance and report the objective and certificate.
    Solve(SolveArgs),
    /// Check a schedule against every scheduling constraint.
    Check(CheckArgs),
    /// Age-of-information metrics of a schedule.
    Aoi(AoiArgs),
    /// Objective-weight sensitivity analyses.
    Sweep {
        #[command(subcommand)]
        command: SweepCommand,
    },
    /// Seeded Monte-Carlo campaigns.
    Campaign {
        #[command(subcommand)]
        command: CampaignCommand,
    },
    /// Model exchange formats.
    Export {
        #[command(subcommand)]
        command: ExportCommand,
    },
}

#[derive(Subcommand, Debug)]
enum ScenarioCommand {
    /// Draw a scenario from a seeded distribution and write it to a file.
    Gen(GenArgs),
}

#[derive(Subcommand, Debug)]
enum SweepCommand {
    /// Energy/delay trade-off curve of a single technology over the energy
    /// weight.
    Alpha1(Alpha1Args),
    /// Grid search for a switching weight whose sub-objective degradations
    /// stay under a threshold.
    Alpha2(Alpha2Args),
}

#[derive(Subcommand, Debug)]
enum CampaignCommand {
    /// Run one campaign and emit CSV artifacts plus a manifest.
    Run(CampaignRunArgs),
    /// Run several campaigns side by side and compare them.
    Compare(CampaignCompareArgs),
}

#[derive(Subcommand, Debug)]
enum ExportCommand {
    /// Write the instance's mixed-integer model in LP format.
    Lp(ExportLpArgs),
}

/// Where the scenario comes from: a file, or an on-the-fly seeded draw.
#[derive(Args, Debug)]
struct ScenarioSource {
    /// Scenario file (JSON, as written by `scenario gen`).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["config", "seed"])]
    scenario: Option<PathBuf>,
    /// Generation config (JSON `GenerationConfig`); defaults when omitted.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for an on-the-fly draw instead of a scenario file.
    #[arg(long)]
    seed: Option<u64>,
}

impl ScenarioSource {
    fn load(&self) -> Result<Scenario, CliError> {
        match (&self.scenario, self.seed) {
            (Some(path), None) => Ok(load_scenario(path)?),
            (None, Some(seed)) => {
                let config = match &self.config {
                    Some(path) => read_json::<GenerationConfig>(path)?,
                    None => GenerationConfig::default(),
                };
                Ok(generate_scenario(&config, seed)?)
            }
            _ => Err(CliError::Usage(
                "provide either --scenario FILE or --seed N (optionally with --config)".into(),
            )),
        }
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Generation config file; the flags below override its fields.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed of the draw.
    #[arg(long)]
    seed: u64,
    /// Output scenario file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    aps: Option<usize>,
    /// Number of data types.
    #[arg(long)]
    types: Option<usize>,
    /// Number of slots.
    #[arg(long)]
    horizon: Option<usize>,
    /// Messages per ordered device pair, as `MIN,MAX`.
    #[arg(long, value_name = "MIN,MAX")]
    messages: Option<String>,
    /// Longest delivery window, in slots.
    #[arg(long)]
    max_window_len: Option<usize>,
    /// Visibility thresholds, as `RF,OC`.
    #[arg(long, value_name = "RF,OC")]
    sigma: Option<String>,
    /// Technologies the scenario may schedule on.
    #[arg(long, value_enum)]
    enabled: Option<EnabledArg>,
    /// Charge the sender and receiver budgets separately instead of billing
    /// the sender for both sides.
    #[arg(long)]
    split_energy: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum EnabledArg {
    Rf,
    Oc,
    Both,
}

impl EnabledArg {
    fn set(self) -> TechnologySet {
        match self {
            EnabledArg::Rf => TechnologySet::only(Technology::Rf),
            EnabledArg::Oc => TechnologySet::only(Technology::Oc),
            EnabledArg::Both => TechnologySet::both(),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TechArg {
    Rf,
    Oc,
}

impl TechArg {
    fn tech(self) -> Technology {
        match self {
            TechArg::Rf => Technology::Rf,
            TechArg::Oc => Technology::Oc,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    RfOnly,
    OcOnly,
    Hybrid,
}

impl ModeArg {
    fn mode(self) -> Mode {
        match self {
            ModeArg::RfOnly => Mode::RfOnly,
            ModeArg::OcOnly => Mode::OcOnly,
            ModeArg::Hybrid => Mode::Hybrid,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    /// Branch and bound with a certified gap.
    Bnb,
    /// Earliest-deadline-first heuristic, no certificate.
    Greedy,
    /// Exhaustive enumeration (tiny instances only).
    Brute,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    source: ScenarioSource,
    /// Objective weights `ENERGY,SWITCH,DELAY`; must sum to 1.
    #[arg(long, value_name = "A0,A1,A2", default_value = "0.1,0.1,0.8")]
    alpha: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Bnb)]
    method: MethodArg,
    /// Certified relative gap to stop at; 0 proves optimality.
    #[arg(long, default_value_t = 0.0)]
    gap: f64,
    /// Node budget for the search; 0 means unlimited.
    #[arg(long, default_value_t = 2_000_000)]
    node_limit: u64,
    /// Wall-clock budget in seconds.
    #[arg(long, value_name = "SECS")]
    time_limit: Option<f64>,
    /// Write the full solution (JSON: schedule, objective, proof, stats).
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write the schedule alone, consumable by `check` and `aoi`.
    #[arg(long, value_name = "FILE")]
    schedule_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    source: ScenarioSource,
    /// Schedule file (JSON, as written by `solve --schedule-out`).
    #[arg(long, value_name = "FILE")]
    schedule: PathBuf,
}

#[derive(Args, Debug)]
struct AoiArgs {
    #[command(flatten)]
    source: ScenarioSource,
    /// Schedule file; omit to rate the empty schedule (no deliveries).
    #[arg(long, value_name = "FILE")]
    schedule: Option<PathBuf>,
    /// Write the full metrics (JSON) here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// Everything `sweep alpha1` needs; the config-file form of its flags.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
struct Alpha1Spec {
    config: GenerationConfig,
    technology: Technology,
    grid: Vec<f64>,
    seeds: usize,
    seed_base: u64,
    gap: f64,
    node_limit: Option<u64>,
    time_limit_secs: Option<f64>,
}

impl Default for Alpha1Spec {
    fn default() -> Self {
        Alpha1Spec {
            config: GenerationConfig::default(),
            technology: Technology::Rf,
            grid: default_alpha1_grid(),
            seeds: 3,
            seed_base: 1,
            gap: 0.02,
            node_limit: Some(200_000),
            time_limit_secs: None,
        }
    }
}

/// Everything `sweep alpha2` needs; the config-file form of its flags.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
struct Alpha2Spec {
    config: GenerationConfig,
    alpha1: f64,
    threshold_pct: f64,
    grid: Vec<f64>,
    seeds: usize,
    seed_base: u64,
    gap: f64,
    node_limit: Option<u64>,
    time_limit_secs: Option<f64>,
}

impl Default for Alpha2Spec {
    fn default() -> Self {
        Alpha2Spec {
            config: GenerationConfig::default(),
            alpha1: 0.1,
            threshold_pct: 5.0,
            grid: default_alpha2_grid(),
            seeds: 3,
            seed_base: 1,
            gap: 0.02,
            node_limit: Some(200_000),
            time_limit_secs: None,
        }
    }
}

#[derive(Args, Debug)]
struct Alpha1Args {
    /// Sweep spec file (JSON `Alpha1Spec`); flags override its fields.
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Generation config file (JSON `GenerationConfig`).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Technology to sweep standalone.
    #[arg(long, value_enum)]
    tech: Option<TechArg>,
    /// Comma-separated energy-weight grid.
    #[arg(long, value_name = "W,W,...")]
    grid: Option<String>,
    /// Number of seeded instances per grid point.
    #[arg(long)]
    seeds: Option<usize>,
    /// First seed; instance t uses seed-base + t.
    #[arg(long)]
    seed_base: Option<u64>,
    /// Certified relative gap per solve.
    #[arg(long)]
    gap: Option<f64>,
    /// Node budget per solve; 0 means unlimited.
    #[arg(long)]
    node_limit: Option<u64>,
    /// Wall-clock budget per solve, in seconds.
    #[arg(long, value_name = "SECS")]
    time_limit: Option<f64>,
    /// Output CSV.
    #[arg(long, value_name = "FILE", default_value = "pareto.csv")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct Alpha2Args {
    /// Sweep spec file (JSON `Alpha2Spec`); flags override its fields.
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
    /// Generation config file (JSON `GenerationConfig`).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Energy weight held fixed during the search.
    #[arg(long)]
    alpha1: Option<f64>,
    /// Acceptance threshold on each sub-objective's degradation, in
    /// percentage points.
    #[arg(long)]
    threshold: Option<f64>,
    /// Comma-separated switching-weight grid.
    #[arg(long, value_name = "W,W,...")]
    grid: Option<String>,
    /// Number of seeded instances per grid point.
    #[arg(long)]
    seeds: Option<usize>,
    /// First seed; instance t uses seed-base + t.
    #[arg(long)]
    seed_base: Option<u64>,
    /// Certified relative gap per solve.
    #[arg(long)]
    gap: Option<f64>,
    /// Node budget per solve; 0 means unlimited.
    #[arg(long)]
    node_limit: Option<u64>,
    /// Wall-clock budget per solve, in seconds.
    #[arg(long, value_name = "SECS")]
    time_limit: Option<f64>,
    /// Output CSV.
    #[arg(long, value_name = "FILE", default_value = "alpha2_search.csv")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CampaignRunArgs {
    /// Campaign config file (JSON `ExperimentConfig`); defaults when
    /// omitted.
    #[arg(long, value_name = "FILE", conflicts_with = "manifest")]
    config: Option<PathBuf>,
    /// Rerun a previously emitted manifest exactly (no overrides allowed).
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,
    /// Output directory for CSV artifacts and the manifest.
    #[arg(long, value_name = "DIR", default_value = "campaign_out")]
    out_dir: PathBuf,
    /// Override the config's iteration count.
    #[arg(long)]
    iterations: Option<usize>,
    /// Override the config's first seed.
    #[arg(long)]
    seed_base: Option<u64>,
    /// Override the config's technology mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Args, Debug)]
struct CampaignCompareArgs {
    /// Comparison spec file (JSON `ComparisonSpec`); when omitted, compares
    /// radio-only against hybrid on paired seeds with campaign defaults.
    #[arg(long, value_name = "FILE", conflicts_with = "manifest")]
    config: Option<PathBuf>,
    /// Rerun a previously emitted manifest exactly (no overrides allowed).
    #[arg(long, value_name = "FILE")]
    manifest: Option<PathBuf>,
    /// Output directory for CSV artifacts and the manifest.
    #[arg(long, value_name = "DIR", default_value = "comparison_out")]
    out_dir: PathBuf,
    /// Pair iteration seeds across configurations.
    #[arg(long)]
    paired: bool,
    /// Override every configuration's iteration count.
    #[arg(long)]
    iterations: Option<usize>,
    /// Override every configuration's first seed.
    #[arg(long)]
    seed_base: Option<u64>,
}

#[derive(Args, Debug)]
struct ExportLpArgs {
    #[command(flatten)]
    source: ScenarioSource,
    /// Objective weights `ENERGY,SWITCH,DELAY`; must sum to 1.
    #[arg(long, value_name = "A0,A1,A2", default_value = "0.1,0.1,0.8")]
    alpha: String,
    /// Output LP file.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version surface as clap "errors" but are successes.
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Scenario { command: ScenarioCommand::Gen(args) } => run_gen(args),
        Command::Solve(args) => run_solve(args),
        Command::Check(args) => run_check(args),
        Command::Aoi(args) => run_aoi(args),
        Command::Sweep { command: SweepCommand::Alpha1(args) } => run_alpha1(args),
        Command::Sweep { command: SweepCommand::Alpha2(args) } => run_alpha2(args),
        Command::Campaign { command: CampaignCommand::Run(args) } => run_campaign_cmd(args),
        Command::Campaign { command: CampaignCommand::Compare(args) } => run_compare_cmd(args),
        Command::Export { command: ExportCommand::Lp(args) } => run_export_lp(args),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&body).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn parse_alpha(text: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!(
            "--alpha expects three comma-separated weights, got `{text}`"
        )));
    }
    let mut alpha = [0.0; 3];
    for (slot, part) in alpha.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("bad weight `{part}` in --alpha")))?;
    }
    Ok(alpha)
}

fn parse_grid(text: &str, flag: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad value `{part}` in {flag}")))
        })
        .collect()
}

fn parse_usize_pair(text: &str, flag: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!("{flag} expects `LO,HI`, got `{text}`")));
    }
    let lo = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad value `{}` in {flag}", parts[0])))?;
    let hi = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad value `{}` in {flag}", parts[1])))?;
    Ok((lo, hi))
}

fn parse_f64_pair(text: &str, flag: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!("{flag} expects `RF,OC`, got `{text}`")));
    }
    let rf = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad value `{}` in {flag}", parts[0])))?;
    let oc = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad value `{}` in {flag}", parts[1])))?;
    Ok((rf, oc))
}

/// `0` from the command line means "no limit".
fn node_limit_option(limit: u64) -> Option<u64> {
    if limit == 0 {
        None
    } else {
        Some(limit)
    }
}

fn objective_config(scenario: &Scenario, alpha: [f64; 3]) -> Result<ObjectiveConfig, CliError> {
    ObjectiveConfig::for_scenario(scenario, alpha).map_err(|e| match e {
        ModelError::BadAlpha { .. } => CliError::Usage(e.to_string()),
        other => other.into(),
    })
}

fn run_gen(args: GenArgs) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => read_json::<GenerationConfig>(path)?,
        None => GenerationConfig::default(),
    };
    if let Some(n) = args.nodes {
        config.n_nodes = n;
    }
    if let Some(n) = args.aps {
        config.n_aps = n;
    }
    if let Some(n) = args.types {
        config.n_types = n;
    }
    if let Some(t) = args.horizon {
        config.horizon = t;
    }
    if let Some(text) = &args.messages {
        config.messages_per_pair = parse_usize_pair(text, "--messages")?;
    }
    if let Some(w) = args.max_window_len {
        config.max_window_len = w;
    }
    if let Some(text) = &args.sigma {
        let (rf, oc) = parse_f64_pair(text, "--sigma")?;
        config.sigma = [rf, oc];
    }
    if let Some(enabled) = args.enabled {
        config.enabled = enabled.set();
    }
    if args.split_energy {
        config.split_energy_accounting = true;
    }
    let scenario = generate_scenario(&config, args.seed)?;
    save_scenario(&scenario, &args.out)?;
    println!(
        "wrote {}: {} nodes + {} APs, {} slots, {} messages, tau {}",
        args.out.display(),
        scenario.n_nodes,
        scenario.n_aps,
        scenario.horizon,
        scenario.messages.len(),
        scenario.tau
    );
    Ok(())
}

fn print_solution(solution: &Solution) {
    let b = &solution.objective;
    println!("objective {}", b.total);
    println!(
        "  energy    {} (raw {})",
        b.energy_norm, b.energy_raw
    );
    println!(
        "  switching {} (raw {})",
        b.switching_norm, b.switching_raw
    );
    println!("  delay     {} (raw {})", b.delay_norm, b.delay_raw);
    match solution.proof {
        Proof::Optimal => println!("proof     optimal"),
        Proof::GapBounded { gap } => {
            println!("proof     within gap {gap} (best bound {})", solution.stats.best_bound)
        }
        Proof::Heuristic => println!("proof     none (heuristic)"),
    }
    println!(
        "stats     {} transmissions, {} nodes, {:.3}s",
        solution.schedule.len(),
        solution.stats.nodes,
        solution.stats.elapsed_secs
    );
}

fn run_solve(args: SolveArgs) -> Result<(), CliError> {
    let scenario = args.source.load()?;
    let alpha = parse_alpha(&args.alpha)?;
    let cfg = objective_config(&scenario, alpha)?;
    let solution = match args.method {
        MethodArg::Bnb => {
            let options = SolveOptions {
                gap_target: args.gap,
                node_limit: node_limit_option(args.node_limit),
                time_limit_secs: args.time_limit,
            };
            solve_bnb(&scenario, &cfg, &options)?
        }
        MethodArg::Greedy => solve_greedy(&scenario, &cfg)?,
        MethodArg::Brute => solve_bruteforce(&scenario, &cfg, BruteForceLimits::default())?,
    };
    print_solution(&solution);
    if let Some(path) = &args.out {
        let mut body = serde_json::to_string_pretty(&solution)?;
        body.push('\n');
        std::fs::write(path, body)?;
    }
    if let Some(path) = &args.schedule_out {
        save_schedule(&solution.schedule, path)?;
    }
    Ok(())
}

fn run_check(args: CheckArgs) -> Result<(), CliError> {
    let scenario = args.source.load()?;
    let schedule = load_schedule(&args.schedule)?;
    let report = check_constraints(&scenario, &schedule);
    if report.is_feasible() {
        println!("feasible: {} transmissions satisfy every constraint", schedule.len());
        Ok(())
    } else {
        println!("{}", serde_json::to_string_pretty(report.violations())?);
        Err(CliError::Invalid(format!(
            "schedule infeasible: {} violations",
            report.violations().len()
        )))
    }
}

fn run_aoi(args: AoiArgs) -> Result<(), CliError> {
    let scenario = args.source.load()?;
    let schedule = match &args.schedule {
        Some(path) => load_schedule(path)?,
        None => aionet::Schedule::empty(&scenario),
    };
    let metrics = system_metrics(&scenario, &schedule)?;
    println!(
        "streams {}  mean-AoI {}  peak-AoI {}",
        metrics.streams.len(),
        metrics.mean_aoi,
        metrics.peak_aoi
    );
    for per_type in &metrics.per_type {
        println!(
            "  type {}: mean-AoI {}  peak-AoI {}",
            per_type.data_type, per_type.mean_aoi, per_type.peak_aoi
        );
    }
    let mut body = serde_json::to_string_pretty(&metrics)?;
    body.push('\n');
    match &args.out {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn sweep_options(gap: f64, node_limit: Option<u64>, time_limit_secs: Option<f64>) -> SolveOptions {
    SolveOptions { gap_target: gap, node_limit, time_limit_secs }
}

fn run_alpha1(args: Alpha1Args) -> Result<(), CliError> {
    let mut spec = match &args.spec {
        Some(path) => read_json::<Alpha1Spec>(path)?,
        None => Alpha1Spec::default(),
    };
    if let Some(path) = &args.config {
        spec.config = read_json(path)?;
    }
    if let Some(tech) = args.tech {
        spec.technology = tech.tech();
    }
    if let Some(text) = &args.grid {
        spec.grid = parse_grid(text, "--grid")?;
    }
    if let Some(n) = args.seeds {
        spec.seeds = n;
    }
    if let Some(base) = args.seed_base {
        spec.seed_base = base;
    }
    if let Some(gap) = args.gap {
        spec.gap = gap;
    }
    if let Some(limit) = args.node_limit {
        spec.node_limit = node_limit_option(limit);
    }
    if let Some(t) = args.time_limit {
        spec.time_limit_secs = Some(t);
    }
    let seeds: Vec<u64> = (0..spec.seeds).map(|t| spec.seed_base.wrapping_add(t as u64)).collect();
    let options = sweep_options(spec.gap, spec.node_limit, spec.time_limit_secs);
    let points =
        pareto_sweep_alpha1(&spec.config, spec.technology, &spec.grid, &seeds, &options)?;
    println!("alpha1  energy%  delay%  scheduled  zero_delay");
    for p in &points {
        println!(
            "{}  {}  {}  {}  {}",
            p.alpha1, p.avg_energy_pct, p.avg_delay_pct, p.n_scheduled, p.zero_delay
        );
    }
    write_pareto_csv(&points, &args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn run_alpha2(args: Alpha2Args) -> Result<(), CliError> {
    let mut spec = match &args.spec {
        Some(path) => read_json::<Alpha2Spec>(path)?,
        None => Alpha2Spec::default(),
    };
    if let Some(path) = &args.config {
        spec.config = read_json(path)?;
    }
    if let Some(a1) = args.alpha1 {
        spec.alpha1 = a1;
    }
    if let Some(threshold) = args.threshold {
        spec.threshold_pct = threshold;
    }
    if let Some(text) = &args.grid {
        spec.grid = parse_grid(text, "--grid")?;
    }
    if let Some(n) = args.seeds {
        spec.seeds = n;
    }
    if let Some(base) = args.seed_base {
        spec.seed_base = base;
    }
    if let Some(gap) = args.gap {
        spec.gap = gap;
    }
    if let Some(limit) = args.node_limit {
        spec.node_limit = node_limit_option(limit);
    }
    if let Some(t) = args.time_limit {
        spec.time_limit_secs = Some(t);
    }
    let seeds: Vec<u64> = (0..spec.seeds).map(|t| spec.seed_base.wrapping_add(t as u64)).collect();
    let options = sweep_options(spec.gap, spec.node_limit, spec.time_limit_secs);
    let search = grid_search_alpha2(
        &spec.config,
        spec.alpha1,
        spec.threshold_pct,
        &spec.grid,
        &seeds,
        &options,
    )?;
    println!("alpha2  dev_energy  dev_switch  dev_delay  accepted");
    for p in &search.points {
        println!(
            "{}  {}  {}  {}  {}",
            p.alpha2, p.deviations[0], p.deviations[1], p.deviations[2], p.accepted
        );
    }
    for skipped in &search.skipped {
        println!("skipped alpha2 {skipped}: alpha1 + alpha2 exceeds 1");
    }
    // The reference operating point, when this search covers and accepts it.
    if (spec.alpha1 - 0.1).abs() < 1e-12 {
        if let Some(p) = search.points.iter().find(|p| (p.alpha2 - 0.1).abs() < 1e-12) {
            if p.accepted {
                println!("recommended weights (0.1, 0.1, 0.8) are within the threshold");
            }
        }
    }
    write_alpha2_csv(&search, &args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn print_campaign_summary(result: &CampaignResult) {
    for point in &result.points {
        let failed =
            point.records.iter().filter(|r| r.error.is_some()).count();
        println!(
            "point {}: {} iterations ({} failed)",
            point.point,
            point.records.len(),
            failed
        );
        for metric in ["transmission_rate", "energy_rate", "mean_aoi", "peak_aoi"] {
            if let Some(a) = point.aggregate(metric) {
                println!("  {} mean {} std {} (n={})", a.metric, a.mean, a.std, a.count);
            }
        }
    }
}

fn run_campaign_cmd(args: CampaignRunArgs) -> Result<(), CliError> {
    if let Some(path) = &args.manifest {
        if args.iterations.is_some() || args.seed_base.is_some() || args.mode.is_some() {
            return Err(CliError::Usage(
                "manifest reruns take no overrides; edit a config file instead".into(),
            ));
        }
        let manifest = load_manifest(path)?;
        if !matches!(manifest, Manifest::Campaign { .. }) {
            return Err(CliError::Invalid(
                "manifest describes a comparison; use `campaign compare --manifest`".into(),
            ));
        }
        rerun_manifest(&manifest, &args.out_dir)?;
        println!("reproduced campaign into {}", args.out_dir.display());
        return Ok(());
    }
    let mut config = match &args.config {
        Some(path) => read_json::<ExperimentConfig>(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(n) = args.iterations {
        config.iterations = n;
    }
    if let Some(base) = args.seed_base {
        config.seed_base = base;
    }
    if let Some(mode) = args.mode {
        config.mode = mode.mode();
    }
    let result = run_campaign(&config)?;
    emit_campaign(&result, &args.out_dir)?;
    print_campaign_summary(&result);
    println!("wrote artifacts into {}", args.out_dir.display());
    Ok(())
}

fn print_comparison_summary(table: &ComparisonTable) {
    let points = table.points();
    for (pi, point) in points.iter().enumerate() {
        println!("point {point}:");
        for result in &table.results {
            let p = &result.points[pi];
            let fmt = |name: &str| {
                p.aggregate(name).map_or(f64::NAN, |a| a.mean)
            };
            println!(
                "  {:8} tx-rate {} energy-rate {} mean-AoI {} peak-AoI {}",
                result.config.mode.label(),
                fmt("transmission_rate"),
                fmt("energy_rate"),
                fmt("mean_aoi"),
                fmt("peak_aoi")
            );
        }
        if table.paired {
            for other in 1..table.results.len() {
                for metric in ["mean_aoi", "peak_aoi", "transmission_rate"] {
                    if let Some(deltas) = table.paired_deltas(0, other, pi, metric) {
                        let below = sign_fraction(&deltas, true);
                        let above = sign_fraction(&deltas, false);
                        println!(
                            "  {} vs {}: {} lower on {:.0}% / higher on {:.0}% of paired seeds",
                            table.results[other].config.mode.label(),
                            table.results[0].config.mode.label(),
                            metric,
                            below * 100.0,
                            above * 100.0
                        );
                    }
                }
            }
        }
    }
}

fn run_compare_cmd(args: CampaignCompareArgs) -> Result<(), CliError> {
    if let Some(path) = &args.manifest {
        if args.iterations.is_some() || args.seed_base.is_some() || args.paired {
            return Err(CliError::Usage(
                "manifest reruns take no overrides; edit a config file instead".into(),
            ));
        }
        let manifest = load_manifest(path)?;
        if !matches!(manifest, Manifest::Comparison { .. }) {
            return Err(CliError::Invalid(
                "manifest describes a single campaign; use `campaign run --manifest`".into(),
            ));
        }
        rerun_manifest(&manifest, &args.out_dir)?;
        println!("reproduced comparison into {}", args.out_dir.display());
        return Ok(());
    }
    let mut spec = match &args.config {
        Some(path) => read_json::<ComparisonSpec>(path)?,
        None => ComparisonSpec {
            configs: vec![
                ExperimentConfig { mode: Mode::RfOnly, ..ExperimentConfig::default() },
                ExperimentConfig { mode: Mode::Hybrid, ..ExperimentConfig::default() },
            ],
            paired_seeds: true,
        },
    };
    if args.paired {
        spec.paired_seeds = true;
    }
    for config in &mut spec.configs {
        if let Some(n) = args.iterations {
            config.iterations = n;
        }
        if let Some(base) = args.seed_base {
            config.seed_base = base;
        }
    }
    let table = compare_modes(&spec.configs, spec.paired_seeds)?;
    emit_comparison(&table, &args.out_dir)?;
    print_comparison_summary(&table);
    println!("wrote artifacts into {}", args.out_dir.display());
    Ok(())
}

fn run_export_lp(args: ExportLpArgs) -> Result<(), CliError> {
    let scenario = args.source.load()?;
    let alpha = parse_alpha(&args.alpha)?;
    let cfg = objective_config(&scenario, alpha)?;
    let model = build_milp(&scenario, &cfg)?;
    write_lp_file(&model, &args.out)?;
    println!(
        "wrote {}: {} variables ({} binary), {} constraints",
        args.out.display(),
        model.variables.len(),
        model.n_binary(),
        model.constraints.len()
    );
    Ok(())
}
