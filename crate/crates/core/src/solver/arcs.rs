//! Shared search infrastructure: the per-step table of admissible arcs and a
//! mutable schedule-under-construction with exact apply/undo.
//!
//! Every solver walks the same table in the same order, and composes its
//! objective through [`compose_breakdown`], so totals across solvers and the
//! standalone evaluator are bit-identical for the same schedule.

use crate::model::{
    arc_admissible, compose_breakdown, ObjectiveBreakdown, ObjectiveConfig, RawTally, SlotIndex,
    Transmission,
};
use crate::scenario::{DeviceId, Scenario, Technology};

/// Energy comparisons reuse the feasibility checker's tolerance so the search
/// never emits a schedule the checker would reject.
use crate::model::ENERGY_TOLERANCE;

/// One admissible transmission opportunity.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Arc {
    pub sender: DeviceId,
    pub receiver: DeviceId,
    pub tech: Technology,
    /// Index into `scenario.messages`.
    pub message: usize,
    /// Delay-slot savings relative to an unsent message: `tau - pos - 1`
    /// where `pos` is the step's offset inside the message window.
    pub saving: u64,
    /// Deadline of the carrying message, for earliest-deadline-first orders.
    pub window_end: usize,
}

/// Arcs of one step, in canonical (sender, receiver, technology) order.
#[derive(Debug)]
pub(crate) struct StepArcs {
    pub step: usize,
    pub arcs: Vec<Arc>,
}

/// All admissible arcs of a scenario, grouped by step. Steps without arcs are
/// omitted: no decision exists there.
#[derive(Debug)]
pub(crate) struct ArcTable {
    pub steps: Vec<StepArcs>,
    /// Delay tally of the empty schedule: `tau` per window slot.
    pub base_delay: u64,
}

impl ArcTable {
    pub fn build(scenario: &Scenario) -> ArcTable {
        let slots = SlotIndex::build(scenario);
        let n = scenario.n_devices();
        let mut steps = Vec::new();
        for step in 0..scenario.horizon {
            let mut arcs = Vec::new();
            for sender in 0..n {
                for receiver in 0..n {
                    for tech in Technology::ALL {
                        if !arc_admissible(scenario, &slots, sender, receiver, tech, step) {
                            continue;
                        }
                        let message = slots.message_at(sender, receiver, step).unwrap();
                        let window = &scenario.messages[message];
                        let pos = step - window.window_start;
                        arcs.push(Arc {
                            sender,
                            receiver,
                            tech,
                            message,
                            saving: (scenario.tau - pos - 1) as u64,
                            window_end: window.window_end,
                        });
                    }
                }
            }
            if !arcs.is_empty() {
                steps.push(StepArcs { step, arcs });
            }
        }
        let window_slots: usize = scenario.messages.iter().map(|m| m.window_len()).sum();
        ArcTable { steps, base_delay: (scenario.tau * window_slots) as u64 }
    }
}

/// Undo record for one applied arc.
pub(crate) struct ArcUndo {
    old_sender_consumed: f64,
    old_receiver_consumed: f64,
}

/// A partial schedule under construction.
///
/// Registers hold each device's technology *as of the current step's entry*;
/// the caller promotes them with [`finish_step`](SearchState::finish_step)
/// after committing a step's matching, so switch deltas computed at apply
/// time are exact.
pub(crate) struct SearchState<'a> {
    scenario: &'a Scenario,
    cfg: &'a ObjectiveConfig,
    registers: Vec<Technology>,
    /// Energy consumed so far, `[tech][device]` flattened.
    consumed: Vec<f64>,
    sent: Vec<bool>,
    rf_count: u64,
    oc_count: u64,
    switches: u64,
    savings: u64,
    base_delay: u64,
    /// Applied transmissions in application order, which the step-major,
    /// canonical-within-step search discipline keeps sorted by schedule key.
    pub transmissions: Vec<Transmission>,
}

impl<'a> SearchState<'a> {
    pub fn new(scenario: &'a Scenario, cfg: &'a ObjectiveConfig, table: &ArcTable) -> Self {
        let n = scenario.n_devices();
        SearchState {
            scenario,
            cfg,
            registers: vec![Technology::Rf; n],
            consumed: vec![0.0; 2 * n],
            sent: vec![false; scenario.messages.len()],
            rf_count: 0,
            oc_count: 0,
            switches: 0,
            savings: 0,
            base_delay: table.base_delay,
            transmissions: Vec::new(),
        }
    }

    pub fn message_sent(&self, message: usize) -> bool {
        self.sent[message]
    }

    /// Whether the arc can be applied given messages already sent and energy
    /// already drawn. Device contention within the step is the caller's
    /// matching bookkeeping, not state.
    pub fn admits(&self, arc: &Arc) -> bool {
        if self.sent[arc.message] {
            return false;
        }
        let n = self.scenario.n_devices();
        let m = arc.tech.index();
        let budget = &self.scenario.energy.budget[m];
        let (send, recv) = super::charge_split(self.scenario, arc.tech);
        if self.consumed[m * n + arc.sender] + send > budget[arc.sender] + ENERGY_TOLERANCE {
            return false;
        }
        recv == 0.0
            || self.consumed[m * n + arc.receiver] + recv
                <= budget[arc.receiver] + ENERGY_TOLERANCE
    }

    /// Objective change if `arc` were applied now, against current registers.
    /// Negative means the arc improves the schedule.
    pub fn marginal(&self, arc: &Arc) -> f64 {
        let m = arc.tech.index();
        let dz = (self.registers[arc.sender] != arc.tech) as u64
            + (self.registers[arc.receiver] != arc.tech) as u64;
        self.cfg.alpha[0] * self.cfg.full_cost[m] / self.cfg.normalization[0]
            + self.cfg.alpha[1] * dz as f64 / self.cfg.normalization[1]
            - self.cfg.alpha[2] * arc.saving as f64 / self.cfg.normalization[2]
    }

    /// Applies an arc the caller has vetted with [`admits`](Self::admits).
    pub fn apply(&mut self, step: usize, arc: &Arc) -> ArcUndo {
        let n = self.scenario.n_devices();
        let m = arc.tech.index();
        let undo = ArcUndo {
            old_sender_consumed: self.consumed[m * n + arc.sender],
            old_receiver_consumed: self.consumed[m * n + arc.receiver],
        };
        let (send, recv) = super::charge_split(self.scenario, arc.tech);
        self.consumed[m * n + arc.sender] += send;
        self.consumed[m * n + arc.receiver] += recv;
        self.sent[arc.message] = true;
        match arc.tech {
            Technology::Rf => self.rf_count += 1,
            Technology::Oc => self.oc_count += 1,
        }
        self.switches += (self.registers[arc.sender] != arc.tech) as u64
            + (self.registers[arc.receiver] != arc.tech) as u64;
        self.savings += arc.saving;
        self.transmissions.push(Transmission {
            sender: arc.sender,
            receiver: arc.receiver,
            tech: arc.tech,
            step,
        });
        undo
    }

    pub fn unapply(&mut self, arc: &Arc, undo: ArcUndo) {
        let n = self.scenario.n_devices();
        let m = arc.tech.index();
        // Restore the saved values verbatim; subtracting the charge back out
        // would not be float-exact for arbitrary cost inputs.
        self.consumed[m * n + arc.sender] = undo.old_sender_consumed;
        self.consumed[m * n + arc.receiver] = undo.old_receiver_consumed;
        self.sent[arc.message] = false;
        match arc.tech {
            Technology::Rf => self.rf_count -= 1,
            Technology::Oc => self.oc_count -= 1,
        }
        self.switches -= (self.registers[arc.sender] != arc.tech) as u64
            + (self.registers[arc.receiver] != arc.tech) as u64;
        self.savings -= arc.saving;
        self.transmissions.pop();
    }

    /// Promotes registers of every device active in the committed matching.
    /// Old values land in `undo` for [`unfinish_step`](Self::unfinish_step).
    pub fn finish_step(&mut self, matching: &[Arc], undo: &mut Vec<(DeviceId, Technology)>) {
        undo.clear();
        for arc in matching {
            for device in [arc.sender, arc.receiver] {
                if self.registers[device] != arc.tech {
                    undo.push((device, self.registers[device]));
                    self.registers[device] = arc.tech;
                }
            }
        }
    }

    pub fn unfinish_step(&mut self, undo: &[(DeviceId, Technology)]) {
        for &(device, tech) in undo {
            self.registers[device] = tech;
        }
    }

    /// Objective of the schedule as it stands, with every unsent message
    /// charged the full timeout across its window.
    pub fn objective(&self) -> ObjectiveBreakdown {
        compose_breakdown(
            self.cfg,
            RawTally {
                rf_count: self.rf_count,
                oc_count: self.oc_count,
                switches: self.switches,
                delay: self.base_delay - self.savings,
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::toy_scenario;
    use crate::model::{evaluate_schedule, Schedule};
    use crate::scenario::Message;

    fn msg(sender: usize, receiver: usize, window: (usize, usize)) -> Message {
        Message {
            sender,
            receiver,
            ordinal: 0,
            data_type: 0,
            window_start: window.0,
            window_end: window.1,
        }
    }

    #[test]
    fn table_lists_only_window_steps() {
        let scenario = toy_scenario(vec![msg(0, 2, (1, 3))], 6, 4);
        let table = ArcTable::build(&scenario);
        let steps: Vec<usize> = table.steps.iter().map(|s| s.step).collect();
        assert_eq!(steps, vec![1, 2, 3]);
        // Node-to-access-point link carries both technologies.
        assert_eq!(table.steps[0].arcs.len(), 2);
        assert_eq!(table.steps[0].arcs[0].tech, Technology::Rf);
        assert_eq!(table.steps[0].arcs[0].saving, 3);
        assert_eq!(table.steps[2].arcs[1].saving, 1);
        assert_eq!(table.base_delay, 12);
    }

    #[test]
    fn apply_then_unapply_restores_state_exactly() {
        let scenario = toy_scenario(vec![msg(0, 2, (0, 3)), msg(1, 2, (0, 3))], 6, 5);
        let cfg = ObjectiveConfig::for_scenario(&scenario, [0.2, 0.3, 0.5]).unwrap();
        let table = ArcTable::build(&scenario);
        let mut state = SearchState::new(&scenario, &cfg, &table);
        let before = state.objective();
        let arc = table.steps[0].arcs[1];
        assert!(state.admits(&arc));
        let undo = state.apply(0, &arc);
        assert!(!state.admits(&arc), "message now sent");
        state.unapply(&arc, undo);
        assert_eq!(state.objective(), before);
        assert!(state.transmissions.is_empty());
    }

    #[test]
    fn state_objective_matches_evaluator() {
        let scenario = toy_scenario(vec![msg(0, 2, (0, 3)), msg(1, 2, (0, 3))], 6, 5);
        let cfg = ObjectiveConfig::for_scenario(&scenario, [0.2, 0.3, 0.5]).unwrap();
        let table = ArcTable::build(&scenario);
        let mut state = SearchState::new(&scenario, &cfg, &table);
        // Send message 0 over optics at step 0, message 1 over radio at 1.
        let oc = table.steps[0]
            .arcs
            .iter()
            .copied()
            .find(|a| a.sender == 0 && a.tech == Technology::Oc)
            .unwrap();
        state.apply(0, &oc);
        let mut regs = Vec::new();
        state.finish_step(&[oc], &mut regs);
        let rf = table.steps[1]
            .arcs
            .iter()
            .copied()
            .find(|a| a.sender == 1 && a.tech == Technology::Rf)
            .unwrap();
        state.apply(1, &rf);
        let schedule = Schedule::new(
            scenario.n_devices(),
            scenario.horizon,
            state.transmissions.clone(),
        );
        let direct = evaluate_schedule(&scenario, &schedule, &cfg).unwrap();
        assert_eq!(state.objective(), direct);
    }
}
