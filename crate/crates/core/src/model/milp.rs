//! Mixed-integer formulation equivalent to the schedule evaluator.
//!
//! Decision variables exist only for admissible arcs (slot inside a window,
//! technology enabled, visibility at or above threshold). Delays are
//! substituted away exactly: an arc at window position `pos` contributes
//! `-(tau - pos - 1)` to the raw delay against the all-unsent base
//! `tau * total_window_slots`, so no big-M constants appear anywhere.
//! Technology registers, carry-over products and switch indicators are built
//! only when the switching weight is positive and the optical technology is
//! enabled, and only for devices with at least one optical candidate arc;
//! every omitted variable is identically zero or irrelevant at binary points.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{derive_endogenous, ModelError, ObjectiveConfig, Schedule, SlotIndex};
use crate::scenario::{DeviceId, Scenario, Technology};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Binary,
    Continuous,
}

/// What a variable means, with enough indices to reconstruct the mapping
/// back to schedules.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum VarRole {
    /// `x`: sender transmits to receiver on tech at step; covers `message`
    /// at window position `window_pos`.
    Arc {
        sender: DeviceId,
        receiver: DeviceId,
        tech: Technology,
        step: usize,
        message: usize,
        window_pos: usize,
    },
    /// `s`: device register is optical at step.
    Register { device: DeviceId, step: usize },
    /// `z`: device register changed at step.
    Switch { device: DeviceId, step: usize },
    /// `w`: register carried over from the previous step while idle.
    Carry { device: DeviceId, step: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelVariable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub role: VarRole,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// `sum(terms) sense rhs`; terms reference variables by index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A minimization model over binary/continuous variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub name: String,
    pub variables: Vec<ModelVariable>,
    pub constraints: Vec<LinearConstraint>,
    /// Sparse objective terms by variable index.
    pub objective: Vec<(usize, f64)>,
    pub objective_constant: f64,
}

impl LinearModel {
    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn objective_value(&self, assignment: &[f64]) -> f64 {
        let mut total = self.objective_constant;
        for (idx, coeff) in &self.objective {
            total += coeff * assignment[*idx];
        }
        total
    }

    /// Names of rows, bounds and integrality conditions the assignment
    /// violates beyond `tol`.
    pub fn violated_rows(&self, assignment: &[f64], tol: f64) -> Vec<String> {
        let mut bad = Vec::new();
        for (idx, v) in self.variables.iter().enumerate() {
            let val = assignment[idx];
            if val < v.lower - tol || val > v.upper + tol {
                bad.push(format!("bound:{}", v.name));
            }
            if v.kind == VarKind::Binary && (val - val.round()).abs() > tol {
                bad.push(format!("integrality:{}", v.name));
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|(i, coeff)| coeff * assignment[*i]).sum();
            let ok = match c.sense {
                Sense::Le => lhs <= c.rhs + tol,
                Sense::Ge => lhs >= c.rhs - tol,
                Sense::Eq => (lhs - c.rhs).abs() <= tol,
            };
            if !ok {
                bad.push(c.name.clone());
            }
        }
        bad
    }

    pub fn n_binary(&self) -> usize {
        self.variables.iter().filter(|v| v.kind == VarKind::Binary).count()
    }
}

/// Whether a transmission variable exists for this arc. Mirrors the
/// per-transmission rules of the feasibility checker exactly.
pub(crate) fn arc_admissible(
    scenario: &Scenario,
    slots: &SlotIndex,
    sender: DeviceId,
    receiver: DeviceId,
    tech: Technology,
    step: usize,
) -> bool {
    sender != receiver
        && scenario.enabled.contains(tech)
        && slots.message_at(sender, receiver, step).is_some()
        && scenario.visibility.get(tech, sender, receiver, step) >= scenario.sigma[tech.index()]
}

/// Builds the mixed-integer model of a scenario under an objective
/// configuration. Scenarios without messages have no objective scale and are
/// rejected.
pub fn build_milp(scenario: &Scenario, cfg: &ObjectiveConfig) -> Result<LinearModel, ModelError> {
    if scenario.messages.is_empty() {
        return Err(ModelError::NoMessages);
    }
    let n = scenario.n_devices();
    let t = scenario.horizon;
    let slots = SlotIndex::build(scenario);
    let [s1, s2, s3] = cfg.normalization;
    let tau = scenario.tau;

    let mut variables = Vec::new();
    let mut objective = Vec::new();
    // (step, sender, receiver, tech) -> variable index, step-major like the
    // solver's canonical arc order.
    let mut arc_vars: BTreeMap<(usize, DeviceId, DeviceId, usize), usize> = BTreeMap::new();
    for step in 0..t {
        for sender in 0..n {
            for receiver in 0..n {
                for tech in Technology::ALL {
                    if !arc_admissible(scenario, &slots, sender, receiver, tech, step) {
                        continue;
                    }
                    let message = slots.message_at(sender, receiver, step).unwrap();
                    let window_pos = step - scenario.messages[message].window_start;
                    let mut name = String::new();
                    write!(name, "x_{sender}_{receiver}_{}_{step}", tech.index()).unwrap();
                    let idx = variables.len();
                    variables.push(ModelVariable {
                        name,
                        kind: VarKind::Binary,
                        lower: 0.0,
                        upper: 1.0,
                        role: VarRole::Arc { sender, receiver, tech, step, message, window_pos },
                    });
                    let coeff = cfg.alpha[0] * cfg.full_cost[tech.index()] / s1
                        - cfg.alpha[2] * (tau - window_pos - 1) as f64 / s3;
                    if coeff != 0.0 {
                        objective.push((idx, coeff));
                    }
                    arc_vars.insert((step, sender, receiver, tech.index()), idx);
                }
            }
        }
    }

    // Incident arc variables per (device, step), split by technology.
    let incident = |device: DeviceId, step: usize| -> Vec<(usize, Technology)> {
        let mut list = Vec::new();
        for ((k, i, j, m), idx) in arc_vars.range((step, 0, 0, 0)..(step + 1, 0, 0, 0)) {
            debug_assert_eq!(*k, step);
            if *i == device || *j == device {
                list.push((*idx, Technology::from_index(*m).unwrap()));
            }
        }
        list
    };

    let build_switching = cfg.alpha[1] > 0.0 && scenario.enabled.contains(Technology::Oc);
    let mut oc_device = vec![false; n];
    if build_switching {
        for ((_, i, j, m), _) in &arc_vars {
            if *m == Technology::Oc.index() {
                oc_device[*i] = true;
                oc_device[*j] = true;
            }
        }
    }

    let mut s_var = vec![usize::MAX; n * t];
    let mut z_var = vec![usize::MAX; n * t];
    let mut w_var = vec![usize::MAX; n * t];
    for device in 0..n {
        if !oc_device[device] {
            continue;
        }
        for step in 0..t {
            s_var[device * t + step] = variables.len();
            variables.push(ModelVariable {
                name: format!("s_{device}_{step}"),
                kind: VarKind::Binary,
                lower: 0.0,
                upper: 1.0,
                role: VarRole::Register { device, step },
            });
            z_var[device * t + step] = variables.len();
            objective.push((variables.len(), cfg.alpha[1] / s2));
            variables.push(ModelVariable {
                name: format!("z_{device}_{step}"),
                kind: VarKind::Binary,
                lower: 0.0,
                upper: 1.0,
                role: VarRole::Switch { device, step },
            });
            if step > 0 {
                w_var[device * t + step] = variables.len();
                variables.push(ModelVariable {
                    name: format!("w_{device}_{step}"),
                    kind: VarKind::Continuous,
                    lower: 0.0,
                    upper: 1.0,
                    role: VarRole::Carry { device, step },
                });
            }
        }
    }

    let mut constraints = Vec::new();

    // Combined degree / half-duplex row: each device touches at most one
    // transmission per step, as sender or receiver, on any technology.
    for device in 0..n {
        for step in 0..t {
            let inc = incident(device, step);
            if inc.is_empty() {
                continue;
            }
            constraints.push(LinearConstraint {
                name: format!("node_{device}_{step}"),
                terms: inc.iter().map(|(idx, _)| (*idx, 1.0)).collect(),
                sense: Sense::Le,
                rhs: 1.0,
            });
        }
    }

    // Per-technology energy budgets.
    for tech in Technology::ALL {
        if !scenario.enabled.contains(tech) {
            continue;
        }
        let m = tech.index();
        for device in 0..n {
            let mut terms = Vec::new();
            for ((_, i, j, mm), idx) in &arc_vars {
                if *mm != m {
                    continue;
                }
                if scenario.split_energy_accounting {
                    if *i == device {
                        terms.push((*idx, scenario.energy.send_cost[m]));
                    } else if *j == device {
                        terms.push((*idx, scenario.energy.receive_cost[m]));
                    }
                } else if *i == device {
                    terms.push((*idx, scenario.energy.full_cost(tech)));
                }
            }
            if terms.is_empty() {
                continue;
            }
            constraints.push(LinearConstraint {
                name: format!("energy_{device}_{m}"),
                terms,
                sense: Sense::Le,
                rhs: scenario.energy.budget[m][device],
            });
        }
    }

    // Each message leaves at most one arc across its window.
    let mut message_arcs: Vec<Vec<usize>> = vec![Vec::new(); scenario.messages.len()];
    for (idx, v) in variables.iter().enumerate() {
        if let VarRole::Arc { message, .. } = v.role {
            message_arcs[message].push(idx);
        }
    }
    for (message, arcs) in message_arcs.iter().enumerate() {
        if arcs.is_empty() {
            continue;
        }
        constraints.push(LinearConstraint {
            name: format!("once_{message}"),
            terms: arcs.iter().map(|idx| (*idx, 1.0)).collect(),
            sense: Sense::Le,
            rhs: 1.0,
        });
    }

    // Register propagation and switch detection. With `a` the device's
    // incident activity and `a_oc` its optical part:
    //   s[0]  = a_oc[0]                       (registers start on radio)
    //   w[k]  = (1 - a[k]) * s[k-1]           (three product bounds)
    //   s[k]  = a_oc[k] + w[k]
    //   z[k] >= |s[k] - s[k-1]|, s[-1] = 0
    if build_switching {
        for device in 0..n {
            if !oc_device[device] {
                continue;
            }
            for step in 0..t {
                let inc = incident(device, step);
                let s = s_var[device * t + step];
                let z = z_var[device * t + step];
                let oc_terms: Vec<(usize, f64)> = inc
                    .iter()
                    .filter(|(_, tech)| *tech == Technology::Oc)
                    .map(|(idx, _)| (*idx, -1.0))
                    .collect();
                if step == 0 {
                    let mut terms = vec![(s, 1.0)];
                    terms.extend(oc_terms);
                    constraints.push(LinearConstraint {
                        name: format!("reg_{device}_{step}"),
                        terms,
                        sense: Sense::Eq,
                        rhs: 0.0,
                    });
                    constraints.push(LinearConstraint {
                        name: format!("swu_{device}_{step}"),
                        terms: vec![(z, 1.0), (s, -1.0)],
                        sense: Sense::Ge,
                        rhs: 0.0,
                    });
                    continue;
                }
                let prev = s_var[device * t + step - 1];
                let w = w_var[device * t + step];
                let mut terms = vec![(s, 1.0), (w, -1.0)];
                terms.extend(oc_terms);
                constraints.push(LinearConstraint {
                    name: format!("reg_{device}_{step}"),
                    terms,
                    sense: Sense::Eq,
                    rhs: 0.0,
                });
                constraints.push(LinearConstraint {
                    name: format!("carryp_{device}_{step}"),
                    terms: vec![(w, 1.0), (prev, -1.0)],
                    sense: Sense::Le,
                    rhs: 0.0,
                });
                let mut terms = vec![(w, 1.0)];
                terms.extend(inc.iter().map(|(idx, _)| (*idx, 1.0)));
                constraints.push(LinearConstraint {
                    name: format!("carrya_{device}_{step}"),
                    terms,
                    sense: Sense::Le,
                    rhs: 1.0,
                });
                let mut terms = vec![(w, 1.0), (prev, -1.0)];
                terms.extend(inc.iter().map(|(idx, _)| (*idx, 1.0)));
                constraints.push(LinearConstraint {
                    name: format!("carryl_{device}_{step}"),
                    terms,
                    sense: Sense::Ge,
                    rhs: 0.0,
                });
                constraints.push(LinearConstraint {
                    name: format!("swu_{device}_{step}"),
                    terms: vec![(z, 1.0), (s, -1.0), (prev, 1.0)],
                    sense: Sense::Ge,
                    rhs: 0.0,
                });
                constraints.push(LinearConstraint {
                    name: format!("swd_{device}_{step}"),
                    terms: vec![(z, 1.0), (s, 1.0), (prev, -1.0)],
                    sense: Sense::Ge,
                    rhs: 0.0,
                });
            }
        }
    }

    let window_slots: usize = scenario.messages.iter().map(|m| m.window_len()).sum();
    Ok(LinearModel {
        name: format!("net{}x{}", n, t),
        variables,
        constraints,
        objective,
        objective_constant: cfg.alpha[2] * (tau * window_slots) as f64 / s3,
    })
}

/// Maps a schedule onto a full variable assignment of `model`: arc variables
/// from the transmissions, registers/switches/carries from the derived
/// endogenous state. Errs when the schedule uses an arc the model has no
/// variable for.
pub fn induced_assignment(
    model: &LinearModel,
    scenario: &Scenario,
    schedule: &Schedule,
) -> Result<Vec<f64>, ModelError> {
    let state = derive_endogenous(scenario, schedule)?;
    let t = scenario.horizon;

    let mut arc_vars: BTreeMap<(usize, DeviceId, DeviceId, usize), usize> = BTreeMap::new();
    for (idx, v) in model.variables.iter().enumerate() {
        if let VarRole::Arc { sender, receiver, tech, step, .. } = v.role {
            arc_vars.insert((step, sender, receiver, tech.index()), idx);
        }
    }

    let mut active = vec![false; scenario.n_devices() * t];
    let mut assignment = vec![0.0; model.variables.len()];
    for tx in schedule.transmissions() {
        let idx = arc_vars
            .get(&(tx.step, tx.sender, tx.receiver, tx.tech.index()))
            .copied()
            .ok_or(ModelError::NotRepresentable {
                sender: tx.sender,
                receiver: tx.receiver,
                tech: tx.tech,
                step: tx.step,
            })?;
        assignment[idx] = 1.0;
        active[tx.sender * t + tx.step] = true;
        active[tx.receiver * t + tx.step] = true;
    }

    let s_of = |device: DeviceId, step: usize| -> f64 {
        if state.register(device, step) == Technology::Oc {
            1.0
        } else {
            0.0
        }
    };
    for (idx, v) in model.variables.iter().enumerate() {
        match v.role {
            VarRole::Arc { .. } => {}
            VarRole::Register { device, step } => assignment[idx] = s_of(device, step),
            VarRole::Switch { device, step } => {
                let prev = if step == 0 { 0.0 } else { s_of(device, step - 1) };
                assignment[idx] = (s_of(device, step) - prev).abs();
            }
            VarRole::Carry { device, step } => {
                assignment[idx] =
                    if active[device * t + step] { 0.0 } else { s_of(device, step - 1) };
            }
        }
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::toy_scenario;
    use crate::model::{evaluate_schedule, Transmission};
    use crate::scenario::Message;

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

    fn tx(sender: usize, receiver: usize, tech: Technology, step: usize) -> Transmission {
        Transmission { sender, receiver, tech, step }
    }

    #[test]
    fn zero_message_scenario_is_rejected() {
        let scenario = toy_scenario(vec![msg(0, 1, 0, (0, 1))], 6, 3);
        let cfg = ObjectiveConfig::for_scenario(&scenario, [0.2, 0.2, 0.6]).unwrap();
        let mut empty = scenario.clone();
        empty.messages.clear();
        assert!(matches!(build_milp(&empty, &cfg), Err(ModelError::NoMessages)));
    }

    #[test]
    fn all_links_below_threshold_leave_only_the_constant() {
        let mut scenario = toy_scenario(vec![msg(0, 1, 0, (0, 2)), msg(1, 2, 0, (3, 5))], 6, 4);
        scenario.sigma = [1.0, 1.0];
        // Push every link strictly below sigma.
        for tech in Technology::ALL {
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..6 {
                        let v = scenario.visibility.get(tech, i, j, k);
                        scenario.visibility.set(tech, i, j, k, v * 0.5);
                    }
                }
            }
        }
        let alpha = [0.25, 0.25, 0.5];
        let cfg = ObjectiveConfig::for_scenario(&scenario, alpha).unwrap();
        let model = build_milp(&scenario, &cfg).unwrap();
        let arcs = model
            .variables
            .iter()
            .filter(|v| matches!(v.role, VarRole::Arc { .. }))
            .count();
        assert_eq!(arcs, 0);
        // The only schedule is empty; its objective is exactly alpha_3.
        assert_eq!(model.objective_value(&vec![0.0; model.variables.len()]), alpha[2]);
    }

    #[test]
    fn single_arc_model_prices_the_energy_delay_threshold() {
        // One message, one admissible slot. Including the transmission pays
        // alpha_1 * 80 / s1 (s1 = 107, the dearest enabled cost) and saves
        // alpha_3 * (tau - 1) / s3 = alpha_3 / 2. The sign flips near
        // alpha_1 = 0.4.
        let scenario = toy_scenario(vec![msg(0, 1, 0, (2, 2))], 6, 2);
        let score = |alpha: [f64; 3]| -> (f64, f64) {
            let cfg = ObjectiveConfig::for_scenario(&scenario, alpha).unwrap();
            let model = build_milp(&scenario, &cfg).unwrap();
            // Radio only: the node pair shares no optical link.
            assert_eq!(model.n_binary(), 1);
            let idx = model.variable_index("x_0_1_0_2").unwrap();
            let mut on = vec![0.0; model.variables.len()];
            on[idx] = 1.0;
            (model.objective_value(&on), model.objective_value(&vec![0.0; model.variables.len()]))
        };
        let (on, off) = score([0.3, 0.0, 0.7]); // saving 0.35 beats cost 0.224
        assert!(on < off);
        let (on, off) = score([0.5, 0.0, 0.5]); // cost 0.374 beats saving 0.25
        assert!(on > off);
    }

    #[test]
    fn induced_assignment_matches_evaluator() {
        let scenario = toy_scenario(
            vec![msg(0, 1, 0, (0, 3)), msg(0, 2, 0, (0, 3)), msg(1, 2, 0, (4, 6))],
            8,
            5,
        );
        let cfg = ObjectiveConfig::for_scenario(&scenario, [0.1, 0.1, 0.8]).unwrap();
        let model = build_milp(&scenario, &cfg).unwrap();
        let schedules = vec![
            Schedule::empty(&scenario),
            Schedule::new(3, 8, vec![tx(0, 1, Technology::Rf, 0)]),
            Schedule::new(
                3,
                8,
                vec![tx(0, 1, Technology::Rf, 1), tx(0, 2, Technology::Oc, 3)],
            ),
            Schedule::new(
                3,
                8,
                vec![
                    tx(0, 1, Technology::Rf, 0),
                    tx(0, 2, Technology::Oc, 2),
                    tx(1, 2, Technology::Rf, 5),
                ],
            ),
        ];
        for schedule in schedules {
            let assignment = induced_assignment(&model, &scenario, &schedule).unwrap();
            assert_eq!(model.violated_rows(&assignment, 1e-9), Vec::<String>::new());
            let direct = evaluate_schedule(&scenario, &schedule, &cfg).unwrap();
            let via_model = model.objective_value(&assignment);
            assert!(
                (via_model - direct.total).abs() <= 1e-9,
                "model {via_model} vs evaluator {}",
                direct.total
            );
        }
    }

    #[test]
    fn switch_variables_sum_to_the_switch_count() {
        let scenario = toy_scenario(
            vec![msg(0, 2, 0, (1, 2)), msg(0, 2, 1, (4, 5)), msg(1, 2, 0, (6, 7))],
            9,
            3,
        );
        let cfg = ObjectiveConfig::for_scenario(&scenario, [0.1, 0.4, 0.5]).unwrap();
        let model = build_milp(&scenario, &cfg).unwrap();
        let schedule = Schedule::new(
            3,
            9,
            vec![
                tx(0, 2, Technology::Oc, 1),  // node 0 and AP 2 flip optical
                tx(0, 2, Technology::Rf, 4),  // both flip back
                tx(1, 2, Technology::Oc, 6),  // node 1 and AP 2 flip optical
            ],
        );
        let assignment = induced_assignment(&model, &scenario, &schedule).unwrap();
        assert_eq!(model.violated_rows(&assignment, 1e-9), Vec::<String>::new());
        let z_sum: f64 = model
            .variables
            .iter()
            .enumerate()
            .filter(|(_, v)| matches!(v.role, VarRole::Switch { .. }))
            .map(|(i, _)| assignment[i])
            .sum();
        let state = derive_endogenous(&scenario, &schedule).unwrap();
        assert_eq!(z_sum, state.total_switches() as f64);
        assert_eq!(state.total_switches(), 2 + 2 + 2);
    }

    #[test]
    fn switching_machinery_is_omitted_when_weight_is_zero() {
        let scenario = toy_scenario(vec![msg(0, 2, 0, (1, 2))], 6, 3);
        let with = ObjectiveConfig::for_scenario(&scenario, [0.2, 0.3, 0.5]).unwrap();
        let without = ObjectiveConfig::for_scenario(&scenario, [0.2, 0.0, 0.8]).unwrap();
        let model_with = build_milp(&scenario, &with).unwrap();
        let model_without = build_milp(&scenario, &without).unwrap();
        assert!(model_with
            .variables
            .iter()
            .any(|v| matches!(v.role, VarRole::Register { .. })));
        assert!(model_without
            .variables
            .iter()
            .all(|v| matches!(v.role, VarRole::Arc { .. })));
        assert!(model_without.constraints.iter().all(|c| !c.name.starts_with("reg_")));
    }

    #[test]
    fn schedule_outside_the_variable_set_is_not_representable() {
        let mut scenario = toy_scenario(vec![msg(0, 1, 0, (0, 2))], 6, 4);
        // Admit only step 0 by dimming later slots.
        for k in 1..3 {
            scenario.visibility.set(Technology::Rf, 0, 1, k, 0.5);
            scenario.visibility.set(Technology::Rf, 1, 0, k, 0.5);
        }
        let cfg = ObjectiveConfig::for_scenario(&scenario, [0.3, 0.0, 0.7]).unwrap();
        let model = build_milp(&scenario, &cfg).unwrap();
        let schedule = Schedule::new(3, 6, vec![tx(0, 1, Technology::Rf, 2)]);
        assert!(matches!(
            induced_assignment(&model, &scenario, &schedule),
            Err(ModelError::NotRepresentable { step: 2, .. })
        ));
    }

    #[test]
    fn energy_rows_respect_split_accounting() {
        let mut scenario = toy_scenario(vec![msg(0, 1, 0, (0, 2))], 6, 4);
        let cfg = ObjectiveConfig::for_scenario(&scenario, [0.5, 0.0, 0.5]).unwrap();
        let pooled = build_milp(&scenario, &cfg).unwrap();
        // Default accounting: receiver rows carry no terms for inbound arcs,
        // so device 1 (receiver only) has no radio energy row.
        assert!(pooled.constraints.iter().any(|c| c.name == "energy_0_0"));
        assert!(pooled.constraints.iter().all(|c| c.name != "energy_1_0"));

        scenario.split_energy_accounting = true;
        let split = build_milp(&scenario, &cfg).unwrap();
        let row = split.constraints.iter().find(|c| c.name == "energy_1_0").unwrap();
        assert_eq!(row.terms.len(), 3); // three admissible slots, receive cost each
        assert!(row.terms.iter().all(|(_, c)| *c == 10.0));
    }
}
