//! Exhaustive enumeration of feasible schedules.
//!
//! Intended as the ground-truth oracle for tiny instances. The search space
//! is estimated up front — an over-count that ignores cross-step coupling —
//! and the solve refuses to start when the estimate exceeds the caller's
//! limit, so a pathological input fails fast instead of spinning.

use std::time::Instant;

use crate::model::{ObjectiveBreakdown, ObjectiveConfig, Schedule, Transmission};
use crate::scenario::Scenario;

use super::arcs::{Arc, ArcTable, SearchState};
use super::{Proof, Solution, SolveStats, SolverError};

/// Work cap for [`solve_bruteforce`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BruteForceLimits {
    /// Upper bound on the estimated number of feasible schedules.
    pub max_schedules: u128,
}

impl Default for BruteForceLimits {
    fn default() -> Self {
        BruteForceLimits { max_schedules: 2_000_000 }
    }
}

/// Enumerates every feasible schedule and returns the objective minimizer,
/// breaking ties toward the lowest schedule key.
pub fn solve_bruteforce(
    scenario: &Scenario,
    cfg: &ObjectiveConfig,
    limits: BruteForceLimits,
) -> Result<Solution, SolverError> {
    let start = Instant::now();
    let table = ArcTable::build(scenario);
    let n = scenario.n_devices();

    let mut estimate: u128 = 1;
    for step in &table.steps {
        let per_step = count_matchings(&step.arcs, n, limits.max_schedules);
        estimate = estimate.saturating_mul(per_step);
        if estimate > limits.max_schedules {
            return Err(SolverError::SearchSpace {
                estimate,
                limit: limits.max_schedules,
            });
        }
    }

    let mut search = Search {
        state: SearchState::new(scenario, cfg, &table),
        steps: &table.steps,
        used: vec![vec![false; n]; table.steps.len()],
        matching: vec![Vec::new(); table.steps.len()],
        register_undo: vec![Vec::new(); table.steps.len()],
        leaves: 0,
        best: None,
    };
    search.descend(0);
    // The empty schedule is always a leaf, so a best exists.
    let best = search.best.expect("enumeration visits at least one schedule");
    Ok(Solution {
        schedule: Schedule::new(n, scenario.horizon, best.transmissions),
        objective: best.objective,
        proof: Proof::Optimal,
        stats: SolveStats {
            nodes: search.leaves,
            elapsed_secs: start.elapsed().as_secs_f64(),
            best_bound: best.objective.total,
        },
    })
}

/// Number of device-disjoint arc subsets within one step, saturating at
/// `cap + 1`. Ignores messages already sent and energy, so the product over
/// steps over-counts reachable schedules — safe for a refusal threshold.
fn count_matchings(arcs: &[Arc], n_devices: usize, cap: u128) -> u128 {
    fn recurse(arcs: &[Arc], ai: usize, used: &mut [bool], cap: u128, count: &mut u128) {
        if *count > cap {
            return;
        }
        if ai == arcs.len() {
            *count += 1;
            return;
        }
        let arc = &arcs[ai];
        if !used[arc.sender] && !used[arc.receiver] {
            used[arc.sender] = true;
            used[arc.receiver] = true;
            recurse(arcs, ai + 1, used, cap, count);
            used[arc.sender] = false;
            used[arc.receiver] = false;
        }
        recurse(arcs, ai + 1, used, cap, count);
    }
    let mut used = vec![false; n_devices];
    let mut count = 0;
    recurse(arcs, 0, &mut used, cap, &mut count);
    count
}

struct Incumbent {
    transmissions: Vec<Transmission>,
    objective: ObjectiveBreakdown,
}

struct Search<'a> {
    state: SearchState<'a>,
    steps: &'a [super::arcs::StepArcs],
    used: Vec<Vec<bool>>,
    matching: Vec<Vec<Arc>>,
    register_undo: Vec<Vec<(usize, crate::scenario::Technology)>>,
    leaves: u64,
    best: Option<Incumbent>,
}

impl Search<'_> {
    fn descend(&mut self, si: usize) {
        if si == self.steps.len() {
            self.leaves += 1;
            let objective = self.state.objective();
            let better = match &self.best {
                None => true,
                Some(best) => {
                    objective.total < best.objective.total
                        || (objective.total == best.objective.total
                            && self.state.transmissions.as_slice()
                                < best.transmissions.as_slice())
                }
            };
            if better {
                self.best = Some(Incumbent {
                    transmissions: self.state.transmissions.clone(),
                    objective,
                });
            }
            return;
        }
        self.used[si].iter_mut().for_each(|u| *u = false);
        self.matching[si].clear();
        self.branch(si, 0);
    }

    /// Include/exclude recursion over the step's arcs, include first.
    fn branch(&mut self, si: usize, ai: usize) {
        let step = &self.steps[si];
        if ai == step.arcs.len() {
            let mut undo = std::mem::take(&mut self.register_undo[si]);
            let matching = std::mem::take(&mut self.matching[si]);
            self.state.finish_step(&matching, &mut undo);
            self.matching[si] = matching;
            self.descend(si + 1);
            self.state.unfinish_step(&undo);
            self.register_undo[si] = undo;
            return;
        }
        let arc = step.arcs[ai];
        if !self.used[si][arc.sender] && !self.used[si][arc.receiver] && self.state.admits(&arc)
        {
            let undo = self.state.apply(step.step, &arc);
            self.used[si][arc.sender] = true;
            self.used[si][arc.receiver] = true;
            self.matching[si].push(arc);
            self.branch(si, ai + 1);
            self.matching[si].pop();
            self.used[si][arc.sender] = false;
            self.used[si][arc.receiver] = false;
            self.state.unapply(&arc, undo);
        }
        self.branch(si, ai + 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::milp::{build_milp, induced_assignment};
    use crate::model::tests::toy_scenario;
    use crate::model::{evaluate_schedule, Transmission};
    use crate::scenario::{generate_scenario, GenerationConfig, Message, Technology};
    use crate::solver::sample_feasible_schedule;

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

    /// One message, window of two slots, timeout 3. Sending at the first
    /// slot leaves one slot at full timeout plus a one-step delivery: raw
    /// delay 4; the later slot gives 5, not sending gives 6.
    #[test]
    fn single_message_oracle() {
        let scenario = toy_scenario(vec![msg(0, 2, 0, (0, 1))], 3, 3);
        let cfg = ObjectiveConfig::for_scenario(&scenario, [0.0, 0.0, 1.0]).unwrap();
        let solution =
            solve_bruteforce(&scenario, &cfg, BruteForceLimits::default()).unwrap();
        assert_eq!(
            solution.schedule.transmissions(),
            &[Transmission { sender: 0, receiver: 2, tech: Technology::Rf, step: 0 }],
            "radio wins the tie against optics on equal totals"
        );
        assert_eq!(solution.objective.delay_raw, 4);
        assert_eq!(solution.proof, Proof::Optimal);
        // Leaves: one per slot and technology, plus the empty schedule.
        assert_eq!(solution.stats.nodes, 5);
        assert_eq!(solution.stats.best_bound, solution.objective.total);
    }

    #[test]
    fn refuses_oversized_search_spaces() {
        let scenario = toy_scenario(vec![msg(0, 2, 0, (0, 1))], 3, 3);
        let cfg = ObjectiveConfig::for_scenario(&scenario, [0.0, 0.0, 1.0]).unwrap();
        let err = solve_bruteforce(&scenario, &cfg, BruteForceLimits { max_schedules: 4 })
            .unwrap_err();
        match err {
            // Two independent slots with three matchings each.
            SolverError::SearchSpace { estimate: 9, limit: 4 } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn optimum_dominates_sampled_schedules() {
        let config = GenerationConfig {
            n_nodes: 2,
            n_aps: 1,
            horizon: 6,
            messages_per_pair: (1, 1),
            max_window_len: 3,
            ..GenerationConfig::default()
        };
        for seed in 0..8 {
            let scenario = generate_scenario(&config, seed).unwrap();
            let cfg = ObjectiveConfig::for_scenario(&scenario, [0.2, 0.2, 0.6]).unwrap();
            let best =
                solve_bruteforce(&scenario, &cfg, BruteForceLimits::default()).unwrap();
            let direct = evaluate_schedule(&scenario, &best.schedule, &cfg).unwrap();
            assert_eq!(best.objective, direct);
            for draw in 0..20 {
                let sampled = sample_feasible_schedule(&scenario, draw);
                let value = evaluate_schedule(&scenario, &sampled, &cfg).unwrap();
                assert!(
                    best.objective.total <= value.total,
                    "seed {seed} draw {draw}"
                );
            }
        }
    }

    #[test]
    fn optimum_matches_linear_model_value() {
        let scenario = toy_scenario(
            vec![msg(0, 2, 0, (0, 2)), msg(1, 2, 0, (1, 3)), msg(0, 1, 0, (4, 5))],
            6,
            4,
        );
        let cfg = ObjectiveConfig::for_scenario(&scenario, [0.3, 0.2, 0.5]).unwrap();
        let solution =
            solve_bruteforce(&scenario, &cfg, BruteForceLimits::default()).unwrap();
        let model = build_milp(&scenario, &cfg).unwrap();
        let assignment = induced_assignment(&model, &scenario, &solution.schedule).unwrap();
        let value = model.objective_value(&assignment);
        assert!((value - solution.objective.total).abs() <= 1e-9);
        assert!(model.violated_rows(&assignment, 1e-9).is_empty());
    }
}
