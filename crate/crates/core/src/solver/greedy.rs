//! Earliest-deadline-first construction heuristic.

use std::time::Instant;

use crate::model::{ObjectiveConfig, Schedule};
use crate::scenario::Scenario;

use super::arcs::{ArcTable, SearchState};
use super::{Proof, Solution, SolveStats, SolverError};

/// Builds a feasible schedule step by step. Within each step, candidate arcs
/// are ranked by message deadline (then canonical order) and admitted while
/// they strictly improve the objective against the current partial schedule.
///
/// Never worse than the empty schedule, since only improving arcs enter.
/// Runs in `O(horizon * arcs^2)`; reports no bound.
pub fn solve_greedy(scenario: &Scenario, cfg: &ObjectiveConfig) -> Result<Solution, SolverError> {
    let start = Instant::now();
    let table = ArcTable::build(scenario);
    let mut state = SearchState::new(scenario, cfg, &table);
    let n = scenario.n_devices();
    let mut used = vec![false; n];
    let mut matching = Vec::new();
    let mut register_undo = Vec::new();
    for step in &table.steps {
        used.iter_mut().for_each(|u| *u = false);
        matching.clear();
        let mut order: Vec<usize> = (0..step.arcs.len()).collect();
        order.sort_by_key(|&ai| (step.arcs[ai].window_end, ai));
        // Admit greedily until no candidate improves the objective.
        loop {
            let mut picked = None;
            for &ai in &order {
                let arc = &step.arcs[ai];
                if used[arc.sender] || used[arc.receiver] || !state.admits(arc) {
                    continue;
                }
                if state.marginal(arc) < 0.0 {
                    picked = Some(*arc);
                    break;
                }
            }
            let Some(arc) = picked else { break };
            state.apply(step.step, &arc);
            used[arc.sender] = true;
            used[arc.receiver] = true;
            matching.push(arc);
        }
        state.finish_step(&matching, &mut register_undo);
    }
    let objective = state.objective();
    let schedule = Schedule::new(n, scenario.horizon, state.transmissions);
    Ok(Solution {
        schedule,
        objective,
        proof: Proof::Heuristic,
        stats: SolveStats {
            nodes: 0,
            elapsed_secs: start.elapsed().as_secs_f64(),
            best_bound: 0.0,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::toy_scenario;
    use crate::model::{check_constraints, evaluate_schedule, Transmission};
    use crate::scenario::{generate_scenario, GenerationConfig, Message, Technology};

    fn msg(sender: usize, receiver: usize, ordinal: usize, window: (usize, usize)) -> Message {
        Message {
            sender,
            receiver,
            ordinal,
            data_type: 0,
            window_start: window.0,
            window_end: window.1,
        }
    }

    #[test]
    fn greedy_is_feasible_and_self_consistent() {
        let config = GenerationConfig {
            n_nodes: 5,
            n_aps: 2,
            horizon: 15,
            messages_per_pair: (1, 2),
            max_window_len: 3,
            ..GenerationConfig::default()
        };
        for seed in 0..20 {
            let scenario = generate_scenario(&config, seed).unwrap();
            let cfg = ObjectiveConfig::for_scenario(&scenario, [0.2, 0.2, 0.6]).unwrap();
            let solution = solve_greedy(&scenario, &cfg).unwrap();
            assert!(check_constraints(&scenario, &solution.schedule).is_feasible());
            let direct = evaluate_schedule(&scenario, &solution.schedule, &cfg).unwrap();
            assert_eq!(solution.objective, direct, "seed {seed}");
            assert_eq!(solution.proof, Proof::Heuristic);
        }
    }

    #[test]
    fn greedy_never_exceeds_empty_schedule() {
        let config = GenerationConfig::default();
        for seed in 0..10 {
            let scenario = generate_scenario(&config, seed).unwrap();
            for alpha in [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.3, 0.3, 0.4]] {
                let cfg = ObjectiveConfig::for_scenario(&scenario, alpha).unwrap();
                let empty = evaluate_schedule(&scenario, &Schedule::empty(&scenario), &cfg)
                    .unwrap();
                let solution = solve_greedy(&scenario, &cfg).unwrap();
                assert!(solution.objective.total <= empty.total);
            }
        }
    }

    #[test]
    fn greedy_stays_idle_when_energy_dominates() {
        // Pure energy objective: every transmission costs, none can improve.
        let scenario = toy_scenario(vec![msg(0, 2, 0, (0, 3))], 6, 5);
        let cfg = ObjectiveConfig::for_scenario(&scenario, [1.0, 0.0, 0.0]).unwrap();
        let solution = solve_greedy(&scenario, &cfg).unwrap();
        assert!(solution.schedule.is_empty());
        assert_eq!(solution.objective.total, 0.0);
    }

    #[test]
    fn greedy_prefers_earlier_deadline_under_contention() {
        // Device 0 owes two messages; the tighter window must win step 0.
        let scenario = toy_scenario(
            vec![msg(0, 1, 0, (0, 0)), msg(0, 2, 0, (0, 1))],
            6,
            3,
        );
        let cfg = ObjectiveConfig::for_scenario(&scenario, [0.0, 0.0, 1.0]).unwrap();
        let solution = solve_greedy(&scenario, &cfg).unwrap();
        assert_eq!(
            solution.schedule.transmissions(),
            &[
                Transmission { sender: 0, receiver: 1, tech: Technology::Rf, step: 0 },
                Transmission { sender: 0, receiver: 2, tech: Technology::Rf, step: 1 },
            ]
        );
    }
}
