//! Bundle adoption on the incumbent: admits groups of transmissions that are
//! unprofitable one at a time but profitable together.
//!
//! The greedy seed takes an arc only when its lone marginal is negative. A
//! transmission on a technology neither endpoint currently holds pays for
//! both register switches by itself, so the first transmission moving a
//! device onto the other technology never looks worthwhile — even when a
//! group of transmissions sharing that register would repay the switch many
//! times over. Exhaustive search closes that gap eventually, but under a
//! loose gap target it certifies the lone-arc seed before ever exploring
//! such groups.
//!
//! This pass recovers them directly. For every anchor — each ordered device
//! pair first, since repeats between one pair share both registers, then
//! each single device as a hub — it packs the compatible unsent-message
//! arcs on one technology, replays the incumbent plus each prefix of the
//! pack through the exact search state, and commits the best strictly
//! improving prefix. Rounds repeat until no anchor yields an improvement.
//! Every set is keyed, every iteration order comes from the arc table or a
//! sort, so the result is deterministic.

use std::cmp::Reverse;
use std::collections::{BTreeMap, HashMap, HashSet};

use crate::model::{
    ObjectiveBreakdown, ObjectiveConfig, Schedule, Transmission, ENERGY_TOLERANCE,
};
use crate::scenario::{DeviceId, Scenario, Technology};

use super::arcs::{Arc, ArcTable, SearchState};
use super::Solution;

type ArcKey = (usize, DeviceId, DeviceId, Technology);

/// What a candidate arc must touch to join a bundle.
#[derive(Clone, Copy)]
enum Anchor {
    /// Exactly this sender and receiver. Any number of repeats between one
    /// pair costs at most two register switches, so pairs ignite bundles
    /// that no single arc and no multi-sender group could.
    Pair(DeviceId, DeviceId),
    /// Either endpoint. Extends already-switched registers across pairs.
    Hub(DeviceId),
}

impl Anchor {
    fn admits(&self, arc: &Arc) -> bool {
        match *self {
            Anchor::Pair(sender, receiver) => {
                arc.sender == sender && arc.receiver == receiver
            }
            Anchor::Hub(hub) => arc.sender == hub || arc.receiver == hub,
        }
    }
}

/// Densifies `best` with profitable transmission bundles. Never raises the
/// total, never touches a message the incumbent already sends, and preserves
/// feasibility arc by arc.
pub(super) fn adopt_clusters(
    scenario: &Scenario,
    cfg: &ObjectiveConfig,
    table: &ArcTable,
    mut best: Solution,
) -> Solution {
    let mut arc_of: HashMap<ArcKey, Arc> = HashMap::new();
    for step in &table.steps {
        for arc in &step.arcs {
            arc_of.insert((step.step, arc.sender, arc.receiver, arc.tech), *arc);
        }
    }
    let n = scenario.n_devices();
    'rounds: loop {
        let base = arcs_by_step(best.schedule.transmissions(), &arc_of);
        let mut sent = vec![false; scenario.messages.len()];
        for arcs in base.values() {
            for arc in arcs {
                sent[arc.message] = true;
            }
        }
        let mut anchors: Vec<(Anchor, Technology)> = Vec::new();
        for tech in Technology::ALL {
            for sender in 0..n {
                for receiver in 0..n {
                    if sender != receiver {
                        anchors.push((Anchor::Pair(sender, receiver), tech));
                    }
                }
            }
        }
        for tech in Technology::ALL {
            for hub in 0..n {
                anchors.push((Anchor::Hub(hub), tech));
            }
        }
        for (anchor, tech) in anchors {
            let bundle = pack_bundle(scenario, table, &base, &sent, anchor, tech);
            let mut champion: Option<(ObjectiveBreakdown, Vec<Transmission>)> = None;
            for p in 1..=bundle.len() {
                let (objective, transmissions) =
                    replay(scenario, cfg, table, &base, &bundle[..p]);
                let bar = champion
                    .as_ref()
                    .map_or(best.objective.total, |(c, _)| c.total);
                if objective.total < bar {
                    champion = Some((objective, transmissions));
                }
            }
            if let Some((objective, transmissions)) = champion {
                let schedule = Schedule::new(n, scenario.horizon, transmissions);
                debug_assert!(
                    crate::model::check_constraints(scenario, &schedule).is_feasible()
                );
                best.schedule = schedule;
                best.objective = objective;
                // The base the remaining anchors were packed against is
                // stale; restart the scan from the new incumbent.
                continue 'rounds;
            }
        }
        return best;
    }
}

/// Incumbent transmissions resolved back to their table arcs, grouped by
/// step. Every scheduled transmission exists in the table: all schedules
/// reaching this pass were assembled from table arcs.
fn arcs_by_step(
    transmissions: &[Transmission],
    arc_of: &HashMap<ArcKey, Arc>,
) -> BTreeMap<usize, Vec<Arc>> {
    let mut grouped: BTreeMap<usize, Vec<Arc>> = BTreeMap::new();
    for t in transmissions {
        let arc = arc_of
            .get(&(t.step, t.sender, t.receiver, t.tech))
            .copied()
            .expect("incumbent transmission must be an admissible arc");
        grouped.entry(t.step).or_default().push(arc);
    }
    grouped
}

/// Largest-savings-first pack of unsent-message arcs on `tech` admitted by
/// `anchor`, compatible with the base schedule and with each other: one
/// send per message, one engagement per device per step, budgets respected
/// under the same tolerance the feasibility checker uses.
fn pack_bundle(
    scenario: &Scenario,
    table: &ArcTable,
    base: &BTreeMap<usize, Vec<Arc>>,
    sent: &[bool],
    anchor: Anchor,
    tech: Technology,
) -> Vec<(usize, Arc)> {
    let n = scenario.n_devices();
    let mut busy: HashSet<(usize, DeviceId)> = HashSet::new();
    let mut consumed = vec![0.0_f64; 2 * n];
    for (&step, arcs) in base {
        for arc in arcs {
            busy.insert((step, arc.sender));
            busy.insert((step, arc.receiver));
            let (send, recv) = super::charge_split(scenario, arc.tech);
            let m = arc.tech.index();
            consumed[m * n + arc.sender] += send;
            consumed[m * n + arc.receiver] += recv;
        }
    }
    let mut candidates: Vec<(usize, Arc)> = Vec::new();
    for step_arcs in &table.steps {
        for arc in &step_arcs.arcs {
            if arc.tech == tech
                && anchor.admits(arc)
                && !sent[arc.message]
                && !busy.contains(&(step_arcs.step, arc.sender))
                && !busy.contains(&(step_arcs.step, arc.receiver))
            {
                candidates.push((step_arcs.step, *arc));
            }
        }
    }
    candidates
        .sort_by_key(|&(step, arc)| (Reverse(arc.saving), step, arc.sender, arc.receiver));
    let budget = &scenario.energy.budget[tech.index()];
    let (send, recv) = super::charge_split(scenario, tech);
    let m = tech.index();
    let mut packed: Vec<(usize, Arc)> = Vec::new();
    let mut taken: HashSet<(usize, DeviceId)> = HashSet::new();
    let mut covered: HashSet<usize> = HashSet::new();
    for (step, arc) in candidates {
        if covered.contains(&arc.message)
            || taken.contains(&(step, arc.sender))
            || taken.contains(&(step, arc.receiver))
            || consumed[m * n + arc.sender] + send > budget[arc.sender] + ENERGY_TOLERANCE
        {
            continue;
        }
        if recv > 0.0
            && consumed[m * n + arc.receiver] + recv > budget[arc.receiver] + ENERGY_TOLERANCE
        {
            continue;
        }
        consumed[m * n + arc.sender] += send;
        consumed[m * n + arc.receiver] += recv;
        taken.insert((step, arc.sender));
        taken.insert((step, arc.receiver));
        covered.insert(arc.message);
        packed.push((step, arc));
    }
    packed
}

/// Rebuilds the merged schedule through the exact search state, so switches
/// are priced against true register history and the breakdown is
/// bit-identical to the evaluator's.
fn replay(
    scenario: &Scenario,
    cfg: &ObjectiveConfig,
    table: &ArcTable,
    base: &BTreeMap<usize, Vec<Arc>>,
    extra: &[(usize, Arc)],
) -> (ObjectiveBreakdown, Vec<Transmission>) {
    let mut merged = base.clone();
    for &(step, arc) in extra {
        merged.entry(step).or_default().push(arc);
    }
    let mut state = SearchState::new(scenario, cfg, table);
    let mut undo = Vec::new();
    for (&step, arcs) in merged.iter_mut() {
        arcs.sort_by_key(|a| (a.sender, a.receiver, a.tech.index()));
        for arc in arcs.iter() {
            debug_assert!(state.admits(arc));
            state.apply(step, arc);
        }
        state.finish_step(arcs, &mut undo);
    }
    (state.objective(), state.transmissions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::toy_scenario;
    use crate::model::{check_constraints, evaluate_schedule};
    use crate::scenario::Message;
    use crate::solver::{solve_bnb, solve_greedy, Proof, SolveOptions};

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

    /// Two optical sends to the access point, radio blacked out. With the
    /// weights below one send costs 0.8 in switches against a 0.6 delay
    /// saving, so the greedy refuses each arc; both together share the
    /// registers and win 2.0 against the empty schedule's 2.4.
    fn switch_bound_scenario() -> crate::scenario::Scenario {
        let mut scenario =
            toy_scenario(vec![msg(0, 2, 0, (0, 0)), msg(0, 2, 1, (1, 1))], 4, 2);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..4 {
                    scenario.visibility.set(Technology::Rf, i, j, k, 0.0);
                }
            }
        }
        scenario
    }

    #[test]
    fn adopts_a_bundle_the_greedy_refuses() {
        let scenario = switch_bound_scenario();
        let cfg = ObjectiveConfig::with_parts(
            [0.0, 0.4, 0.6],
            scenario.energy.full_costs(),
            [1.0, 1.0, 1.0],
        )
        .unwrap();
        let seed = solve_greedy(&scenario, &cfg).unwrap();
        assert!(seed.schedule.is_empty(), "each lone arc must look unprofitable");
        assert_eq!(seed.objective.total, 2.4);

        let table = ArcTable::build(&scenario);
        let adopted = adopt_clusters(&scenario, &cfg, &table, seed);
        let expected = vec![
            Transmission { sender: 0, receiver: 2, tech: Technology::Oc, step: 0 },
            Transmission { sender: 0, receiver: 2, tech: Technology::Oc, step: 1 },
        ];
        assert_eq!(adopted.schedule.transmissions(), expected.as_slice());
        assert_eq!(adopted.objective.total, 2.0);
        assert!(check_constraints(&scenario, &adopted.schedule).is_feasible());
        let direct = evaluate_schedule(&scenario, &adopted.schedule, &cfg).unwrap();
        assert_eq!(adopted.objective, direct);
    }

    #[test]
    fn loose_gap_search_returns_the_adopted_bundle() {
        let scenario = switch_bound_scenario();
        let cfg = ObjectiveConfig::with_parts(
            [0.0, 0.4, 0.6],
            scenario.energy.full_costs(),
            [1.0, 1.0, 1.0],
        )
        .unwrap();
        // A wide gap certifies the incumbent at the root, so the answer is
        // exactly what seeding produced — it must already hold the bundle.
        let opts = SolveOptions { gap_target: 0.5, ..SolveOptions::default() };
        let relaxed = solve_bnb(&scenario, &cfg, &opts).unwrap();
        assert_eq!(relaxed.schedule.len(), 2);
        assert_eq!(relaxed.objective.total, 2.0);

        let exact = solve_bnb(&scenario, &cfg, &SolveOptions::default()).unwrap();
        assert_eq!(exact.proof, Proof::Optimal);
        assert_eq!(exact.schedule, relaxed.schedule);
    }

    #[test]
    fn leaves_a_seed_without_profitable_bundles_alone() {
        let scenario = toy_scenario(vec![msg(0, 2, 0, (0, 2)), msg(1, 2, 0, (1, 3))], 5, 4);
        let cfg = ObjectiveConfig::for_scenario(&scenario, [0.1, 0.1, 0.8]).unwrap();
        let seed = solve_greedy(&scenario, &cfg).unwrap();
        assert!(!seed.schedule.is_empty());
        let table = ArcTable::build(&scenario);
        let before = seed.clone();
        let adopted = adopt_clusters(&scenario, &cfg, &table, seed);
        assert_eq!(adopted.schedule, before.schedule);
        assert_eq!(adopted.objective, before.objective);
    }
}
