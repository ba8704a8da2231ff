//! Schedules, derived (endogenous) state and the weighted objective.
//!
//! A [`Schedule`] fixes the decision tensor: which sender transmits to which
//! receiver, on which technology, at which step. Everything else — the
//! per-device technology registers, per-slot delivery delays and sent flags —
//! is a pure function of scenario plus schedule, computed by
//! [`derive_endogenous`]. [`evaluate_schedule`] rejects infeasible schedules
//! and otherwise scores energy, technology switching and delay on a common
//! normalized scale.

mod check;
pub mod milp;

pub use check::{check_constraints, ConstraintKind, FeasibilityReport, Violation, ENERGY_TOLERANCE};
pub(crate) use milp::arc_admissible;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::scenario::{DeviceId, Scenario, Technology};

/// Current on-disk schema for schedule files.
pub const SCHEDULE_SCHEMA_VERSION: u32 = 1;

/// One scheduled transmission: `sender -> receiver` on `tech` at `step`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transmission {
    pub sender: DeviceId,
    pub receiver: DeviceId,
    pub tech: Technology,
    pub step: usize,
}

impl Transmission {
    /// Canonical ordering key: earlier step, then lower sender, lower
    /// receiver, radio before optical. Solvers break objective ties by this
    /// order, so it is load-bearing, not cosmetic.
    pub fn key(&self) -> (usize, DeviceId, DeviceId, usize) {
        (self.step, self.sender, self.receiver, self.tech.index())
    }
}

impl PartialOrd for Transmission {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Transmission {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

/// A sparse schedule over a fixed device count and horizon. Transmissions
/// are kept sorted by [`Transmission::key`] and deduplicated, so two
/// schedules with the same content compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub n_devices: usize,
    pub horizon: usize,
    transmissions: Vec<Transmission>,
}

impl Schedule {
    pub fn new(n_devices: usize, horizon: usize, mut transmissions: Vec<Transmission>) -> Self {
        transmissions.sort();
        transmissions.dedup();
        Schedule { n_devices, horizon, transmissions }
    }

    pub fn empty(scenario: &Scenario) -> Self {
        Schedule { n_devices: scenario.n_devices(), horizon: scenario.horizon, transmissions: Vec::new() }
    }

    pub fn transmissions(&self) -> &[Transmission] {
        &self.transmissions
    }

    pub fn len(&self) -> usize {
        self.transmissions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transmissions.is_empty()
    }

    /// Value of the decision tensor at `(sender, receiver, tech, step)`.
    pub fn assigned(&self, sender: DeviceId, receiver: DeviceId, tech: Technology, step: usize) -> bool {
        self.transmissions
            .binary_search(&Transmission { sender, receiver, tech, step })
            .is_ok()
    }

    /// Ordering used to break exact objective ties between whole schedules:
    /// lexicographic over the sorted transmission list, shorter list first.
    pub fn tie_key(&self) -> &[Transmission] {
        &self.transmissions
    }
}

#[derive(Serialize, Deserialize)]
struct ScheduleFile {
    schema_version: u32,
    schedule: Schedule,
}

/// Writes a schedule as pretty-printed JSON with a schema version header.
pub fn save_schedule(schedule: &Schedule, path: &Path) -> Result<(), ModelError> {
    let file = ScheduleFile { schema_version: SCHEDULE_SCHEMA_VERSION, schedule: schedule.clone() };
    let mut body = serde_json::to_string_pretty(&file).map_err(ModelError::Serialize)?;
    body.push('\n');
    std::fs::write(path, body).map_err(ModelError::Io)
}

pub fn load_schedule(path: &Path) -> Result<Schedule, ModelError> {
    let body = std::fs::read_to_string(path).map_err(ModelError::Io)?;
    let file: ScheduleFile = serde_json::from_str(&body).map_err(ModelError::Parse)?;
    if file.schema_version != SCHEDULE_SCHEMA_VERSION {
        return Err(ModelError::SchemaVersion {
            found: file.schema_version,
            supported: SCHEDULE_SCHEMA_VERSION,
        });
    }
    Ok(Schedule::new(file.schedule.n_devices, file.schedule.horizon, file.schedule.transmissions))
}

/// Maps `(sender, receiver, step)` to the message whose window covers the
/// slot. Windows of a pair are disjoint, so the message is unique.
pub(crate) struct SlotIndex {
    n_devices: usize,
    horizon: usize,
    slots: Vec<Option<u32>>,
}

impl SlotIndex {
    pub(crate) fn build(scenario: &Scenario) -> Self {
        let n = scenario.n_devices();
        let t = scenario.horizon;
        let mut slots = vec![None; n * n * t];
        for (idx, m) in scenario.messages.iter().enumerate() {
            for k in m.window_start..=m.window_end {
                slots[(m.sender * n + m.receiver) * t + k] = Some(idx as u32);
            }
        }
        SlotIndex { n_devices: n, horizon: t, slots }
    }

    pub(crate) fn message_at(&self, sender: DeviceId, receiver: DeviceId, step: usize) -> Option<usize> {
        self.slots[(sender * self.n_devices + receiver) * self.horizon + step].map(|i| i as usize)
    }
}

/// Delay sentinel meaning "no delay defined here" (slot outside any window).
const NO_DELAY: u32 = u32::MAX;

/// State implied by a schedule: per-device technology registers, per-slot
/// delivery delays and per-message sent flags.
///
/// Registers start on radio. A device's register at step `k` is the
/// technology of its activity at `k` (sending or receiving), or the previous
/// register when idle. Delays are defined on window slots only: `pos + 1`
/// where the pair transmits at window position `pos`, otherwise the scenario
/// `tau`.
pub struct EndogenousState {
    n_devices: usize,
    horizon: usize,
    registers: Vec<Technology>,
    delays: Vec<u32>,
    sent: Vec<bool>,
}

impl EndogenousState {
    pub fn register(&self, device: DeviceId, step: usize) -> Technology {
        self.registers[device * self.horizon + step]
    }

    /// Delay at a window slot, `None` outside every window of the pair.
    pub fn delay(&self, sender: DeviceId, receiver: DeviceId, step: usize) -> Option<u32> {
        let d = self.delays[(sender * self.n_devices + receiver) * self.horizon + step];
        (d != NO_DELAY).then_some(d)
    }

    pub fn message_sent(&self, message: usize) -> bool {
        self.sent[message]
    }

    pub fn sent_count(&self) -> usize {
        self.sent.iter().filter(|s| **s).count()
    }

    /// Register changes of one device across the horizon, counting an
    /// initial change away from radio at step 0.
    pub fn switch_count(&self, device: DeviceId) -> u64 {
        let row = &self.registers[device * self.horizon..(device + 1) * self.horizon];
        let mut prev = Technology::Rf;
        let mut switches = 0;
        for &r in row {
            if r != prev {
                switches += 1;
            }
            prev = r;
        }
        switches
    }

    pub fn total_switches(&self) -> u64 {
        (0..self.n_devices).map(|d| self.switch_count(d)).sum()
    }

    /// Sum of delays over all window slots.
    pub fn total_delay(&self) -> u64 {
        self.delays.iter().filter(|d| **d != NO_DELAY).map(|d| *d as u64).sum()
    }
}

/// Computes the endogenous state for a schedule whose transmissions all fall
/// inside message windows. Transmissions outside any window, outside the
/// device/step ranges, or giving one device two different technologies in the
/// same step are rejected — this function derives state mechanically and does
/// not otherwise check feasibility.
pub fn derive_endogenous(scenario: &Scenario, schedule: &Schedule) -> Result<EndogenousState, ModelError> {
    let n = scenario.n_devices();
    let t = scenario.horizon;
    if schedule.n_devices != n || schedule.horizon != t {
        return Err(ModelError::DimensionMismatch);
    }
    let slots = SlotIndex::build(scenario);

    let mut delays = vec![NO_DELAY; n * n * t];
    for m in &scenario.messages {
        for k in m.window_start..=m.window_end {
            delays[(m.sender * n + m.receiver) * t + k] = scenario.tau as u32;
        }
    }

    let mut sent = vec![false; scenario.messages.len()];
    // Technology of each device's activity per step, if any.
    let mut activity: Vec<Option<Technology>> = vec![None; n * t];
    let mut claim = |device: DeviceId, step: usize, tech: Technology| -> Result<(), ModelError> {
        match activity[device * t + step] {
            Some(prev) if prev != tech => Err(ModelError::AmbiguousRegister { device, step }),
            _ => {
                activity[device * t + step] = Some(tech);
                Ok(())
            }
        }
    };

    for tx in schedule.transmissions() {
        if tx.sender >= n || tx.receiver >= n {
            return Err(ModelError::DeviceOutOfRange {
                device: tx.sender.max(tx.receiver),
            });
        }
        if tx.step >= t {
            return Err(ModelError::StepOutOfRange { step: tx.step });
        }
        let msg = slots.message_at(tx.sender, tx.receiver, tx.step).ok_or(
            ModelError::OutsideWindow { sender: tx.sender, receiver: tx.receiver, step: tx.step },
        )?;
        let pos = tx.step - scenario.messages[msg].window_start;
        delays[(tx.sender * n + tx.receiver) * t + tx.step] = (pos + 1) as u32;
        sent[msg] = true;
        claim(tx.sender, tx.step, tx.tech)?;
        claim(tx.receiver, tx.step, tx.tech)?;
    }

    let mut registers = vec![Technology::Rf; n * t];
    for d in 0..n {
        let mut current = Technology::Rf;
        for k in 0..t {
            if let Some(tech) = activity[d * t + k] {
                current = tech;
            }
            registers[d * t + k] = current;
        }
    }

    Ok(EndogenousState { n_devices: n, horizon: t, registers, delays, sent })
}

/// Objective weights plus the constants they are applied with: the full
/// (send + receive) per-transmission energy of each technology and the three
/// normalization divisors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveConfig {
    pub alpha: [f64; 3],
    pub full_cost: [f64; Technology::COUNT],
    pub normalization: [f64; 3],
}

impl ObjectiveConfig {
    /// Standard configuration for a scenario: costs from its energy profile,
    /// divisors from [`normalization_coefficients`].
    pub fn for_scenario(scenario: &Scenario, alpha: [f64; 3]) -> Result<Self, ModelError> {
        let full_cost = scenario.energy.full_costs();
        let normalization = normalization_coefficients(scenario, full_cost)?;
        ObjectiveConfig::with_parts(alpha, full_cost, normalization)
    }

    /// Explicit construction; validates weights and divisors.
    pub fn with_parts(
        alpha: [f64; 3],
        full_cost: [f64; Technology::COUNT],
        normalization: [f64; 3],
    ) -> Result<Self, ModelError> {
        if alpha.iter().any(|a| !a.is_finite() || *a < 0.0)
            || (alpha.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(ModelError::BadAlpha { alpha });
        }
        if normalization.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(ModelError::BadNormalization);
        }
        if full_cost.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(ModelError::BadNormalization);
        }
        Ok(ObjectiveConfig { alpha, full_cost, normalization })
    }
}

/// Raw integer tallies of a schedule, sufficient to score it. Keeping the
/// objective a function of this small struct guarantees every solver prices
/// identical schedules bit-identically.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct RawTally {
    pub rf_count: u64,
    pub oc_count: u64,
    pub switches: u64,
    pub delay: u64,
}

/// Scored schedule: raw sums, normalized terms and the weighted total.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    pub energy_raw: f64,
    pub switching_raw: u64,
    pub delay_raw: u64,
    pub energy_norm: f64,
    pub switching_norm: f64,
    pub delay_norm: f64,
    pub total: f64,
}

pub(crate) fn compose_breakdown(cfg: &ObjectiveConfig, tally: RawTally) -> ObjectiveBreakdown {
    let energy_raw = tally.rf_count as f64 * cfg.full_cost[0] + tally.oc_count as f64 * cfg.full_cost[1];
    let energy_norm = energy_raw / cfg.normalization[0];
    let switching_norm = tally.switches as f64 / cfg.normalization[1];
    let delay_norm = tally.delay as f64 / cfg.normalization[2];
    ObjectiveBreakdown {
        energy_raw,
        switching_raw: tally.switches,
        delay_raw: tally.delay,
        energy_norm,
        switching_norm,
        delay_norm,
        total: cfg.alpha[0] * energy_norm + cfg.alpha[1] * switching_norm + cfg.alpha[2] * delay_norm,
    }
}

pub(crate) fn tally_of(scenario: &Scenario, schedule: &Schedule, state: &EndogenousState) -> RawTally {
    let mut rf_count = 0;
    let mut oc_count = 0;
    for tx in schedule.transmissions() {
        match tx.tech {
            Technology::Rf => rf_count += 1,
            Technology::Oc => oc_count += 1,
        }
    }
    let _ = scenario;
    RawTally { rf_count, oc_count, switches: state.total_switches(), delay: state.total_delay() }
}

/// Energy drawn per `[technology][device]`. Under pooled accounting the
/// sender is charged the full transmission; under split accounting the
/// receiver pays its own share.
pub fn consumed_energy(
    scenario: &Scenario,
    schedule: &Schedule,
) -> [Vec<f64>; Technology::COUNT] {
    let n = scenario.n_devices();
    let mut consumed = [vec![0.0; n], vec![0.0; n]];
    for tx in schedule.transmissions() {
        if tx.sender >= n || tx.receiver >= n {
            continue;
        }
        let m = tx.tech.index();
        if scenario.split_energy_accounting {
            consumed[m][tx.sender] += scenario.energy.send_cost[m];
            consumed[m][tx.receiver] += scenario.energy.receive_cost[m];
        } else {
            consumed[m][tx.sender] += scenario.energy.full_cost(tx.tech);
        }
    }
    consumed
}

/// Realized delay per message: its send slot's offset in the window plus
/// one, or the timeout `tau` if never sent. The earliest matching send
/// counts, which is the only one in a feasible schedule.
pub fn message_delays(scenario: &Scenario, schedule: &Schedule) -> Vec<u32> {
    let slots = SlotIndex::build(scenario);
    let mut delays = vec![scenario.tau as u32; scenario.messages.len()];
    let mut seen = vec![false; scenario.messages.len()];
    for tx in schedule.transmissions() {
        if tx.step >= scenario.horizon {
            continue;
        }
        let Some(message) = slots.message_at(tx.sender, tx.receiver, tx.step) else {
            continue;
        };
        if !seen[message] {
            seen[message] = true;
            delays[message] = (tx.step - scenario.messages[message].window_start + 1) as u32;
        }
    }
    delays
}

/// Scores a schedule. Infeasible schedules are rejected with the full
/// violation report.
pub fn evaluate_schedule(
    scenario: &Scenario,
    schedule: &Schedule,
    cfg: &ObjectiveConfig,
) -> Result<ObjectiveBreakdown, ModelError> {
    let report = check_constraints(scenario, schedule);
    if !report.is_feasible() {
        return Err(ModelError::Infeasible(Box::new(report)));
    }
    let state = derive_endogenous(scenario, schedule)?;
    Ok(compose_breakdown(cfg, tally_of(scenario, schedule, &state)))
}

/// Normalization divisors `[energy, switching, delay]`:
/// worst-case transmission energy (every message on the dearest enabled
/// technology), the device-step count, and the all-unsent delay sum
/// (`tau` on every window slot). Scenarios without messages have no
/// meaningful scale and are rejected.
pub fn normalization_coefficients(
    scenario: &Scenario,
    full_cost: [f64; Technology::COUNT],
) -> Result<[f64; 3], ModelError> {
    if scenario.messages.is_empty() {
        return Err(ModelError::NoMessages);
    }
    let dearest = scenario
        .enabled
        .iter()
        .map(|m| full_cost[m.index()])
        .fold(f64::NEG_INFINITY, f64::max);
    let window_slots: usize = scenario.messages.iter().map(|m| m.window_len()).sum();
    Ok([
        scenario.messages.len() as f64 * dearest,
        (scenario.n_devices() * scenario.horizon) as f64,
        (scenario.tau * window_slots) as f64,
    ])
}

/// Errors from schedule handling, state derivation and scoring.
#[derive(Debug)]
pub enum ModelError {
    DimensionMismatch,
    DeviceOutOfRange { device: DeviceId },
    StepOutOfRange { step: usize },
    OutsideWindow { sender: DeviceId, receiver: DeviceId, step: usize },
    AmbiguousRegister { device: DeviceId, step: usize },
    Infeasible(Box<FeasibilityReport>),
    NoMessages,
    BadAlpha { alpha: [f64; 3] },
    BadNormalization,
    NotRepresentable { sender: DeviceId, receiver: DeviceId, tech: Technology, step: usize },
    SchemaVersion { found: u32, supported: u32 },
    Io(std::io::Error),
    Parse(serde_json::Error),
    Serialize(serde_json::Error),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ModelError::*;
        match self {
            DimensionMismatch => write!(f, "schedule dimensions do not match the scenario"),
            DeviceOutOfRange { device } => write!(f, "device {device} outside the network"),
            StepOutOfRange { step } => write!(f, "step {step} outside the horizon"),
            OutsideWindow { sender, receiver, step } => write!(
                f,
                "transmission ({sender} -> {receiver}, step {step}) lies outside every message window"
            ),
            AmbiguousRegister { device, step } => write!(
                f,
                "device {device} is assigned two technologies at step {step}; register undefined"
            ),
            Infeasible(report) => {
                write!(f, "schedule is infeasible ({} violations)", report.violations().len())
            }
            NoMessages => write!(f, "scenario has no messages; objective scale undefined"),
            BadAlpha { alpha } => write!(
                f,
                "weights {alpha:?} must be non-negative and sum to 1"
            ),
            BadNormalization => write!(f, "normalization divisors and costs must be finite and positive"),
            NotRepresentable { sender, receiver, tech, step } => write!(
                f,
                "transmission ({sender} -> {receiver}, {tech}, step {step}) has no decision variable in the model"
            ),
            SchemaVersion { found, supported } => {
                write!(f, "schedule file schema {found} unsupported (expected {supported})")
            }
            Io(e) => write!(f, "io error: {e}"),
            Parse(e) => write!(f, "schedule file parse error: {e}"),
            Serialize(e) => write!(f, "schedule serialization error: {e}"),
        }
    }
}

impl std::error::Error for ModelError {}
