//! Exact and heuristic solvers for the transmission scheduling problem.
//!
//! Three entry points share one search infrastructure and one objective
//! composition path, so their reported totals are bit-comparable:
//!
//! * [`solve_greedy`] — earliest-deadline-first heuristic, linear time.
//! * [`solve_bruteforce`] — exhaustive enumeration of feasible schedules.
//!   Refuses instances whose estimated search space exceeds a caller limit.
//! * [`solve_bnb`] — depth-first branch and bound with an admissible bound.
//!   Proves optimality or a relative gap, depending on [`SolveOptions`].
//!
//! All solvers break objective ties the same way: lowest schedule key (the
//! lexicographic order of the sorted transmission list) wins, so two exact
//! solvers always return the identical schedule, not merely equal totals.

mod adopt;
mod arcs;
mod bnb;
mod bruteforce;
mod greedy;
mod lp;

pub use bnb::solve_bnb;
pub use bruteforce::{solve_bruteforce, BruteForceLimits};
pub use greedy::solve_greedy;
pub use lp::{parse_lp_string, write_lp_file, write_lp_string, LpError, ParsedLp, ParsedRow};

use crate::model::{ModelError, ObjectiveBreakdown, Schedule};
use crate::scenario::Scenario;
use serde::{Deserialize, Serialize};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// What the solver can certify about the schedule it returned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Proof {
    /// The schedule attains the minimum objective value.
    Optimal,
    /// The objective is within `gap` (relative) of the true minimum.
    GapBounded { gap: f64 },
    /// No bound was proven; the schedule is merely feasible.
    Heuristic,
}

/// Search effort bookkeeping, reported alongside every solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Search states visited. Heuristics report 0.
    pub nodes: u64,
    pub elapsed_secs: f64,
    /// Best proven lower bound on the objective. Heuristics report the
    /// trivial bound 0.
    pub best_bound: f64,
}

/// A feasible schedule together with its objective value and certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub schedule: Schedule,
    pub objective: ObjectiveBreakdown,
    pub proof: Proof,
    pub stats: SolveStats,
}

/// Termination controls for [`solve_bnb`].
///
/// Defaults request an exact solve with no effort cap. Time limits make runs
/// machine-dependent; node limits do not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Stop refining once the relative gap is proven at or below this value.
    pub gap_target: f64,
    /// Abort after visiting this many search states, keeping the incumbent.
    pub node_limit: Option<u64>,
    /// Abort after roughly this much wall time, keeping the incumbent.
    pub time_limit_secs: Option<f64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            gap_target: 0.0,
            node_limit: None,
            time_limit_secs: None,
        }
    }
}

/// Errors reported by the solvers.
#[derive(Debug)]
pub enum SolverError {
    /// Brute force refused to start: the estimated number of feasible
    /// schedules exceeds the configured limit.
    SearchSpace { estimate: u128, limit: u128 },
    /// An option value is out of range.
    BadOptions(&'static str),
    Model(ModelError),
}

impl std::fmt::Display for SolverError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverError::SearchSpace { estimate, limit } => write!(
                f,
                "estimated search space of {estimate} schedules exceeds the limit of {limit}"
            ),
            SolverError::BadOptions(what) => write!(f, "bad solve options: {what}"),
            SolverError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for SolverError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            SolverError::Model(e) => Some(e),
            _ => None,
        }
    }
}

impl From<ModelError> for SolverError {
    fn from(e: ModelError) -> Self {
        SolverError::Model(e)
    }
}

/// Draws a uniformly random-ish feasible schedule by walking the horizon and
/// flipping a coin for every admissible arc that still fits.
///
/// Useful for stress-testing evaluators: the result always passes
/// [`crate::check_constraints`] by construction, but exercises every
/// constraint family near its boundary.
pub fn sample_feasible_schedule(scenario: &Scenario, seed: u64) -> Schedule {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let table = arcs::ArcTable::build(scenario);
    let n = scenario.n_devices();
    let mut consumed = vec![0.0_f64; 2 * n];
    let mut sent = vec![false; scenario.messages.len()];
    let mut picked = Vec::new();
    for step in &table.steps {
        let mut used = vec![false; n];
        let mut order: Vec<usize> = (0..step.arcs.len()).collect();
        order.shuffle(&mut rng);
        for ai in order {
            let arc = &step.arcs[ai];
            if used[arc.sender] || used[arc.receiver] || sent[arc.message] {
                continue;
            }
            let m = arc.tech.index();
            let (send, recv) = charge_split(scenario, arc.tech);
            // Strictly within budget: sampled schedules must stay feasible
            // under any downstream tolerance convention.
            let sender_ok =
                consumed[m * n + arc.sender] + send <= scenario.energy.budget[m][arc.sender];
            let receiver_ok = recv == 0.0
                || consumed[m * n + arc.receiver] + recv <= scenario.energy.budget[m][arc.receiver];
            if !sender_ok || !receiver_ok || !rng.random_bool(0.5) {
                continue;
            }
            consumed[m * n + arc.sender] += send;
            consumed[m * n + arc.receiver] += recv;
            sent[arc.message] = true;
            used[arc.sender] = true;
            used[arc.receiver] = true;
            picked.push(crate::model::Transmission {
                sender: arc.sender,
                receiver: arc.receiver,
                tech: arc.tech,
                step: step.step,
            });
        }
    }
    Schedule::new(n, scenario.horizon, picked)
}

/// Per-transmission energy charge as (sender, receiver) amounts, honouring
/// the scenario's accounting mode.
fn charge_split(scenario: &Scenario, tech: crate::scenario::Technology) -> (f64, f64) {
    let m = tech.index();
    if scenario.split_energy_accounting {
        (scenario.energy.send_cost[m], scenario.energy.receive_cost[m])
    } else {
        (scenario.energy.full_cost(tech), 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::check_constraints;
    use crate::model::tests::toy_scenario;
    use crate::scenario::{generate_scenario, GenerationConfig};

    fn msg(
        sender: usize,
        receiver: usize,
        ordinal: usize,
        window: (usize, usize),
    ) -> crate::scenario::Message {
        crate::scenario::Message {
            sender,
            receiver,
            ordinal,
            data_type: 0,
            window_start: window.0,
            window_end: window.1,
        }
    }

    #[test]
    fn sampled_schedules_are_feasible() {
        let config = GenerationConfig {
            n_nodes: 4,
            n_aps: 2,
            horizon: 12,
            messages_per_pair: (1, 2),
            max_window_len: 3,
            ..GenerationConfig::default()
        };
        for seed in 0..30 {
            let scenario = generate_scenario(&config, seed).unwrap();
            let schedule = sample_feasible_schedule(&scenario, seed.wrapping_mul(77));
            let report = check_constraints(&scenario, &schedule);
            assert!(report.is_feasible(), "seed {seed}: {:?}", report.violations());
        }
    }

    #[test]
    fn sampling_visits_nonempty_schedules() {
        let scenario = toy_scenario(
            vec![msg(0, 2, 0, (0, 3)), msg(1, 2, 0, (1, 4))],
            6,
            5,
        );
        let nonempty = (0..20)
            .filter(|&s| !sample_feasible_schedule(&scenario, s).is_empty())
            .count();
        assert!(nonempty >= 10);
    }

    #[test]
    fn proof_serialization_is_tagged() {
        let json = serde_json::to_string(&Proof::GapBounded { gap: 0.25 }).unwrap();
        assert_eq!(json, r#"{"kind":"gap_bounded","gap":0.25}"#);
        let back: Proof = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Proof::GapBounded { gap: 0.25 });
    }
}
