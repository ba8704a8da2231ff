//! Feasibility checking: every scheduling rule, every violation enumerated.
//!
//! Per-transmission rules are attributed hierarchically (a malformed index
//! masks a self-loop masks a disabled technology masks missing demand masks
//! low visibility), so one transmission yields at most one arc violation.
//! Aggregate rules — degrees, half-duplex, energy budgets, send-at-most-once —
//! are checked independently over the whole schedule.

use serde::{Deserialize, Serialize};

use crate::model::{Schedule, SlotIndex};
use crate::scenario::{DeviceId, Scenario, Technology};

/// Energy comparisons tolerate this much overdraft to absorb float noise.
pub const ENERGY_TOLERANCE: f64 = 1e-9;

/// Constraint families a schedule can violate.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// A device sends to more than one receiver in a step.
    OutDegree,
    /// A device receives from more than one sender in a step.
    InDegree,
    /// Transmission on a slot no message window covers.
    Demand,
    /// Link quality below the technology's admission threshold.
    Visibility,
    /// Sender equals receiver.
    SelfLoop,
    /// A device both sends and receives in the same step.
    HalfDuplex,
    /// A device exceeds its per-technology energy budget.
    EnergyBudget,
    /// A message transmitted more than once inside its window.
    SendAtMostOnce,
    /// Transmission on a technology the scenario disables.
    TechnologyDisabled,
    /// Device or step index outside the scenario, or mismatched dimensions.
    Malformed,
}

/// One violation with enough indices to locate it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    OutDegree { device: DeviceId, step: usize, count: usize },
    InDegree { device: DeviceId, step: usize, count: usize },
    Demand { sender: DeviceId, receiver: DeviceId, tech: Technology, step: usize },
    Visibility {
        sender: DeviceId,
        receiver: DeviceId,
        tech: Technology,
        step: usize,
        visibility: f64,
        threshold: f64,
    },
    SelfLoop { device: DeviceId, tech: Technology, step: usize },
    HalfDuplex { device: DeviceId, step: usize },
    EnergyBudget { device: DeviceId, tech: Technology, consumed: f64, budget: f64 },
    SendAtMostOnce { sender: DeviceId, receiver: DeviceId, window_start: usize, count: usize },
    TechnologyDisabled { sender: DeviceId, receiver: DeviceId, tech: Technology, step: usize },
    Malformed { sender: DeviceId, receiver: DeviceId, step: usize },
}

impl Violation {
    pub fn constraint(&self) -> ConstraintKind {
        match self {
            Violation::OutDegree { .. } => ConstraintKind::OutDegree,
            Violation::InDegree { .. } => ConstraintKind::InDegree,
            Violation::Demand { .. } => ConstraintKind::Demand,
            Violation::Visibility { .. } => ConstraintKind::Visibility,
            Violation::SelfLoop { .. } => ConstraintKind::SelfLoop,
            Violation::HalfDuplex { .. } => ConstraintKind::HalfDuplex,
            Violation::EnergyBudget { .. } => ConstraintKind::EnergyBudget,
            Violation::SendAtMostOnce { .. } => ConstraintKind::SendAtMostOnce,
            Violation::TechnologyDisabled { .. } => ConstraintKind::TechnologyDisabled,
            Violation::Malformed { .. } => ConstraintKind::Malformed,
        }
    }
}

/// Outcome of [`check_constraints`]: all violations, in deterministic order
/// (arc violations in schedule order, then aggregates by index).
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct FeasibilityReport {
    violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    /// Distinct constraint families present, in check order.
    pub fn constraints(&self) -> Vec<ConstraintKind> {
        let mut kinds = Vec::new();
        for v in &self.violations {
            let k = v.constraint();
            if !kinds.contains(&k) {
                kinds.push(k);
            }
        }
        kinds
    }
}

/// Checks a schedule against every scheduling rule of the scenario and
/// returns the complete list of violations; an empty report means feasible.
pub fn check_constraints(scenario: &Scenario, schedule: &Schedule) -> FeasibilityReport {
    let n = scenario.n_devices();
    let t = scenario.horizon;
    let mut violations = Vec::new();

    if schedule.n_devices != n || schedule.horizon != t {
        // Nothing else can be indexed safely.
        violations.push(Violation::Malformed { sender: 0, receiver: 0, step: 0 });
        return FeasibilityReport { violations };
    }

    let slots = SlotIndex::build(scenario);
    let mut out_count = vec![0usize; n * t];
    let mut in_count = vec![0usize; n * t];
    let mut consumed = vec![0.0f64; Technology::COUNT * n];
    let mut sends_per_message = vec![0usize; scenario.messages.len()];

    for tx in schedule.transmissions() {
        // Hierarchical per-arc attribution; the most fundamental failure wins.
        if tx.sender >= n || tx.receiver >= n || tx.step >= t {
            violations.push(Violation::Malformed {
                sender: tx.sender,
                receiver: tx.receiver,
                step: tx.step,
            });
            continue;
        }
        if tx.sender == tx.receiver {
            violations.push(Violation::SelfLoop { device: tx.sender, tech: tx.tech, step: tx.step });
            continue;
        }
        // Proper arcs participate in the aggregate tallies no matter what
        // else is wrong with them: they still occupy the medium.
        out_count[tx.sender * t + tx.step] += 1;
        in_count[tx.receiver * t + tx.step] += 1;
        let m = tx.tech.index();
        if scenario.split_energy_accounting {
            consumed[m * n + tx.sender] += scenario.energy.send_cost[m];
            consumed[m * n + tx.receiver] += scenario.energy.receive_cost[m];
        } else {
            consumed[m * n + tx.sender] += scenario.energy.full_cost(tx.tech);
        }
        if let Some(msg) = slots.message_at(tx.sender, tx.receiver, tx.step) {
            sends_per_message[msg] += 1;
        }

        if !scenario.enabled.contains(tx.tech) {
            violations.push(Violation::TechnologyDisabled {
                sender: tx.sender,
                receiver: tx.receiver,
                tech: tx.tech,
                step: tx.step,
            });
            continue;
        }
        if slots.message_at(tx.sender, tx.receiver, tx.step).is_none() {
            violations.push(Violation::Demand {
                sender: tx.sender,
                receiver: tx.receiver,
                tech: tx.tech,
                step: tx.step,
            });
            continue;
        }
        let v = scenario.visibility.get(tx.tech, tx.sender, tx.receiver, tx.step);
        let threshold = scenario.sigma[tx.tech.index()];
        if v < threshold {
            violations.push(Violation::Visibility {
                sender: tx.sender,
                receiver: tx.receiver,
                tech: tx.tech,
                step: tx.step,
                visibility: v,
                threshold,
            });
        }
    }

    for d in 0..n {
        for k in 0..t {
            let out = out_count[d * t + k];
            let inc = in_count[d * t + k];
            if out > 1 {
                violations.push(Violation::OutDegree { device: d, step: k, count: out });
            }
            if inc > 1 {
                violations.push(Violation::InDegree { device: d, step: k, count: inc });
            }
            if out >= 1 && inc >= 1 {
                violations.push(Violation::HalfDuplex { device: d, step: k });
            }
        }
    }

    for tech in Technology::ALL {
        for d in 0..n {
            let used = consumed[tech.index() * n + d];
            let budget = scenario.energy.budget[tech.index()][d];
            if used > budget + ENERGY_TOLERANCE {
                violations.push(Violation::EnergyBudget { device: d, tech, consumed: used, budget });
            }
        }
    }

    for (idx, count) in sends_per_message.iter().enumerate() {
        if *count > 1 {
            let m = &scenario.messages[idx];
            violations.push(Violation::SendAtMostOnce {
                sender: m.sender,
                receiver: m.receiver,
                window_start: m.window_start,
                count: *count,
            });
        }
    }

    FeasibilityReport { violations }
}
