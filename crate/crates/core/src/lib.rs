//! Transmission scheduling and age-of-information analysis for IoT networks
//! that mix a radio link with a short-range optical link.
//!
//! The crate models a slotted network of battery-powered nodes and access
//! points. Each device pair accumulates messages with delivery windows; a
//! schedule assigns every transmission a slot and a technology subject to
//! half-duplex, visibility, demand and per-technology energy-budget
//! constraints. The objective trades transmission energy, technology
//! switching and delivery delay under user-chosen weights.
//!
//! Modules:
//! - [`scenario`]: network instances, random generation, (de)serialization.
//! - [`model`]: schedules, endogenous state, objective evaluation,
//!   feasibility checking and the equivalent mixed-integer formulation.
//! - [`solver`]: exact branch-and-bound, exhaustive enumeration, a greedy
//!   heuristic and an LP-format exporter.
//! - [`aoi`]: per-stream age-of-information trajectories and summary metrics.
//! - [`sweep`]: weight sweeps (energy/delay trade-off curve, switching-weight
//!   grid search).
//! - [`campaign`]: seeded Monte-Carlo campaigns and mode comparisons with
//!   CSV/manifest emission.

pub mod aoi;
pub mod campaign;
pub mod model;
pub mod scenario;
pub mod solver;
pub mod sweep;

pub use aoi::{aoi_trajectory, system_metrics, AoiTrajectory, StreamKey, SystemAoi};
pub use campaign::{
    compare_modes, emit_campaign, emit_comparison, load_manifest, metric_names, rerun_manifest,
    run_campaign, sign_fraction, Axis, CampaignError, CampaignPoint, CampaignResult,
    ComparisonSpec, ComparisonTable, ExperimentConfig, IterationRecord, IterationStatus, Manifest,
    MetricAggregate, Mode, SolverSettings,
};
pub use model::milp::{build_milp, induced_assignment, LinearModel};
pub use model::{
    check_constraints, consumed_energy, derive_endogenous, evaluate_schedule, load_schedule,
    message_delays, normalization_coefficients, save_schedule, ConstraintKind, EndogenousState,
    FeasibilityReport, ModelError, ObjectiveBreakdown, ObjectiveConfig, Schedule, Transmission,
    Violation,
};
pub use scenario::{
    derive_demand, generate_scenario, load_scenario, save_scenario, GenerationConfig, Scenario,
    ScenarioError, Technology, TechnologySet,
};
pub use solver::{
    parse_lp_string, sample_feasible_schedule, solve_bnb, solve_bruteforce, solve_greedy,
    write_lp_file, write_lp_string, BruteForceLimits, LpError, ParsedLp, Proof, Solution,
    SolveOptions, SolveStats, SolverError,
};
pub use sweep::{
    default_alpha1_grid, default_alpha2_grid, grid_search_alpha2, pareto_sweep_alpha1,
    write_alpha2_csv, write_pareto_csv, Alpha2Point, Alpha2Search, ParetoPoint, SweepError,
};
