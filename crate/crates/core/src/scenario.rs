//! Network instances: devices, visibility, energy budgets and message demand.
//!
//! A [`Scenario`] is immutable after validation; every other module treats it
//! as ground truth. Random instances come from [`generate_scenario`], which is
//! fully determined by a [`GenerationConfig`] and a 64-bit seed.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Current on-disk schema for scenario files.
pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

/// Device index into a scenario. Nodes occupy `0..n_nodes`, access points
/// `n_nodes..n_nodes + n_aps`.
pub type DeviceId = usize;

/// Communication technology. The radio link reaches any device pair; the
/// optical link only works between a node and an access point.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technology {
    Rf,
    Oc,
}

impl Technology {
    pub const ALL: [Technology; 2] = [Technology::Rf, Technology::Oc];
    pub const COUNT: usize = 2;

    pub fn index(self) -> usize {
        match self {
            Technology::Rf => 0,
            Technology::Oc => 1,
        }
    }

    pub fn from_index(index: usize) -> Option<Technology> {
        match index {
            0 => Some(Technology::Rf),
            1 => Some(Technology::Oc),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Technology::Rf => "rf",
            Technology::Oc => "oc",
        }
    }
}

impl fmt::Display for Technology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Set of technologies a scenario may schedule on. Serialized as a list of
/// technology labels, e.g. `["rf", "oc"]`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<Technology>", into = "Vec<Technology>")]
pub struct TechnologySet {
    rf: bool,
    oc: bool,
}

impl TechnologySet {
    pub fn both() -> Self {
        TechnologySet { rf: true, oc: true }
    }

    pub fn only(tech: Technology) -> Self {
        match tech {
            Technology::Rf => TechnologySet { rf: true, oc: false },
            Technology::Oc => TechnologySet { rf: false, oc: true },
        }
    }

    pub fn contains(self, tech: Technology) -> bool {
        match tech {
            Technology::Rf => self.rf,
            Technology::Oc => self.oc,
        }
    }

    pub fn is_empty(self) -> bool {
        !self.rf && !self.oc
    }

    pub fn iter(self) -> impl Iterator<Item = Technology> {
        Technology::ALL.into_iter().filter(move |t| self.contains(*t))
    }
}

impl From<Vec<Technology>> for TechnologySet {
    fn from(list: Vec<Technology>) -> Self {
        let mut set = TechnologySet { rf: false, oc: false };
        for t in list {
            match t {
                Technology::Rf => set.rf = true,
                Technology::Oc => set.oc = true,
            }
        }
        set
    }
}

impl From<TechnologySet> for Vec<Technology> {
    fn from(set: TechnologySet) -> Self {
        set.iter().collect()
    }
}

/// Role of a device in the network.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKind {
    Node,
    AccessPoint,
}

/// One unit of demand: `sender` must deliver a payload of `data_type` to
/// `receiver` within the slot window `[window_start, window_end]` (inclusive).
/// `ordinal` is the message's position, by window order, within its
/// `(sender, receiver)` queue.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub sender: DeviceId,
    pub receiver: DeviceId,
    pub ordinal: usize,
    pub data_type: usize,
    pub window_start: usize,
    pub window_end: usize,
}

impl Message {
    /// Window length in slots (always >= 1 for a valid message).
    pub fn window_len(&self) -> usize {
        self.window_end - self.window_start + 1
    }

    pub fn contains_step(&self, step: usize) -> bool {
        step >= self.window_start && step <= self.window_end
    }
}

/// Dense link-quality tensor indexed `[technology][sender][receiver][step]`,
/// values in `[0, 1]`. Symmetric in the device pair; structurally zero on the
/// diagonal, between two access points, and between two nodes on the optical
/// technology.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorRepr", into = "TensorRepr")]
pub struct VisibilityTensor {
    n_devices: usize,
    horizon: usize,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TensorRepr {
    dims: [usize; 4],
    values: Vec<f64>,
}

impl VisibilityTensor {
    pub fn zeros(n_devices: usize, horizon: usize) -> Self {
        VisibilityTensor {
            n_devices,
            horizon,
            values: vec![0.0; Technology::COUNT * n_devices * n_devices * horizon],
        }
    }

    fn offset(&self, tech: Technology, i: DeviceId, j: DeviceId, step: usize) -> usize {
        ((tech.index() * self.n_devices + i) * self.n_devices + j) * self.horizon + step
    }

    pub fn get(&self, tech: Technology, i: DeviceId, j: DeviceId, step: usize) -> f64 {
        self.values[self.offset(tech, i, j, step)]
    }

    pub fn set(&mut self, tech: Technology, i: DeviceId, j: DeviceId, step: usize, value: f64) {
        let at = self.offset(tech, i, j, step);
        self.values[at] = value;
    }

    pub fn n_devices(&self) -> usize {
        self.n_devices
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Raw values in `[technology][sender][receiver][step]` order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl TryFrom<TensorRepr> for VisibilityTensor {
    type Error = String;

    fn try_from(repr: TensorRepr) -> Result<Self, String> {
        let [techs, n, m, t] = repr.dims;
        if techs != Technology::COUNT || n != m {
            return Err(format!("bad visibility dims {:?}", repr.dims));
        }
        let expected = techs * n * m * t;
        if repr.values.len() != expected {
            return Err(format!(
                "visibility dims {:?} imply {} values, found {}",
                repr.dims,
                expected,
                repr.values.len()
            ));
        }
        Ok(VisibilityTensor { n_devices: n, horizon: t, values: repr.values })
    }
}

impl From<VisibilityTensor> for TensorRepr {
    fn from(t: VisibilityTensor) -> Self {
        TensorRepr {
            dims: [Technology::COUNT, t.n_devices, t.n_devices, t.horizon],
            values: t.values,
        }
    }
}

/// Per-technology energy accounting: send/receive cost per transmission and a
/// per-device budget for the whole horizon. Indexed by `Technology::index()`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyProfile {
    pub send_cost: [f64; Technology::COUNT],
    pub receive_cost: [f64; Technology::COUNT],
    /// `budget[tech][device]`.
    pub budget: [Vec<f64>; Technology::COUNT],
}

impl EnergyProfile {
    /// Energy drawn from the network by one transmission: sender plus
    /// receiver side.
    pub fn full_cost(&self, tech: Technology) -> f64 {
        self.send_cost[tech.index()] + self.receive_cost[tech.index()]
    }

    pub fn full_costs(&self) -> [f64; Technology::COUNT] {
        [self.full_cost(Technology::Rf), self.full_cost(Technology::Oc)]
    }
}

/// A complete, validated network instance.
///
/// Devices `0..n_nodes` are IoT nodes, `n_nodes..n_nodes+n_aps` are access
/// points. `tau` is the delay assigned to an undelivered message; it is
/// strictly greater than every window length. `sigma` is the per-technology
/// visibility threshold a link must meet for a transmission to be admissible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub n_nodes: usize,
    pub n_aps: usize,
    pub n_types: usize,
    pub horizon: usize,
    pub messages: Vec<Message>,
    pub visibility: VisibilityTensor,
    pub energy: EnergyProfile,
    pub sigma: [f64; Technology::COUNT],
    pub tau: usize,
    pub enabled: TechnologySet,
    /// When set, the energy-budget constraint charges the send cost to the
    /// sender and the receive cost to the receiver. Default (off) charges the
    /// full transmission cost to the sender, leaving receivers free.
    #[serde(default)]
    pub split_energy_accounting: bool,
}

impl Scenario {
    pub fn n_devices(&self) -> usize {
        self.n_nodes + self.n_aps
    }

    pub fn device_kind(&self, device: DeviceId) -> DeviceKind {
        if device < self.n_nodes {
            DeviceKind::Node
        } else {
            DeviceKind::AccessPoint
        }
    }

    pub fn is_ap(&self, device: DeviceId) -> bool {
        device >= self.n_nodes
    }

    /// Whether the pair can carry traffic at all on `tech`: never self or
    /// AP-to-AP, and the optical link requires an access point endpoint.
    pub fn link_exists(&self, tech: Technology, i: DeviceId, j: DeviceId) -> bool {
        if i == j || (self.is_ap(i) && self.is_ap(j)) {
            return false;
        }
        match tech {
            Technology::Rf => true,
            Technology::Oc => self.is_ap(i) || self.is_ap(j),
        }
    }

    /// Messages of `sender -> receiver` ordered by window start.
    pub fn pair_messages(&self, sender: DeviceId, receiver: DeviceId) -> Vec<&Message> {
        let mut msgs: Vec<&Message> = self
            .messages
            .iter()
            .filter(|m| m.sender == sender && m.receiver == receiver)
            .collect();
        msgs.sort_by_key(|m| m.window_start);
        msgs
    }

    /// Checks every structural invariant; errors name the violated one.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.n_devices() == 0 {
            return Err(ScenarioError::EmptyNetwork);
        }
        if self.n_types == 0 {
            return Err(ScenarioError::NoDataTypes);
        }
        if self.horizon == 0 {
            return Err(ScenarioError::EmptyHorizon);
        }
        if self.enabled.is_empty() {
            return Err(ScenarioError::NoEnabledTechnology);
        }
        for (idx, m) in self.messages.iter().enumerate() {
            if m.sender >= self.n_devices() || m.receiver >= self.n_devices() {
                return Err(ScenarioError::MessageDeviceOutOfRange { message: idx });
            }
            if m.sender == m.receiver {
                return Err(ScenarioError::SelfMessage { message: idx });
            }
            if m.window_start > m.window_end || m.window_end >= self.horizon {
                return Err(ScenarioError::WindowOutOfRange { message: idx });
            }
            if m.data_type >= self.n_types {
                return Err(ScenarioError::DataTypeOutOfRange { message: idx });
            }
            if m.window_len() >= self.tau {
                return Err(ScenarioError::TauTooSmall {
                    tau: self.tau,
                    longest_window: m.window_len(),
                });
            }
        }
        // Per-pair queues: disjoint windows, ordinals equal to window order.
        let mut queues: BTreeMap<(DeviceId, DeviceId), Vec<&Message>> = BTreeMap::new();
        for m in &self.messages {
            queues.entry((m.sender, m.receiver)).or_default().push(m);
        }
        for ((sender, receiver), mut queue) in queues {
            queue.sort_by_key(|m| m.window_start);
            for (pos, m) in queue.iter().enumerate() {
                if pos + 1 < queue.len() && queue[pos + 1].window_start <= m.window_end {
                    return Err(ScenarioError::WindowOverlap { sender, receiver });
                }
                if m.ordinal != pos {
                    return Err(ScenarioError::BadOrdinal { sender, receiver, ordinal: m.ordinal });
                }
            }
        }
        self.validate_visibility()?;
        self.validate_energy()?;
        for tech in Technology::ALL {
            let s = self.sigma[tech.index()];
            if !(0.0..=1.0).contains(&s) {
                return Err(ScenarioError::SigmaOutOfRange { tech, value: s });
            }
        }
        Ok(())
    }

    fn validate_visibility(&self) -> Result<(), ScenarioError> {
        let n = self.n_devices();
        if self.visibility.n_devices() != n || self.visibility.horizon() != self.horizon {
            return Err(ScenarioError::VisibilityDims {
                devices: self.visibility.n_devices(),
                horizon: self.visibility.horizon(),
            });
        }
        for tech in Technology::ALL {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..self.horizon {
                        let v = self.visibility.get(tech, i, j, k);
                        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                            return Err(ScenarioError::VisibilityOutOfRange {
                                tech,
                                sender: i,
                                receiver: j,
                                step: k,
                                value: v,
                            });
                        }
                        if !self.link_exists(tech, i, j) && v != 0.0 {
                            return Err(ScenarioError::VisibilityOnMissingLink {
                                tech,
                                sender: i,
                                receiver: j,
                                step: k,
                            });
                        }
                        if v != self.visibility.get(tech, j, i, k) {
                            return Err(ScenarioError::VisibilityAsymmetric {
                                tech,
                                sender: i,
                                receiver: j,
                                step: k,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_energy(&self) -> Result<(), ScenarioError> {
        for tech in Technology::ALL {
            let budgets = &self.energy.budget[tech.index()];
            if budgets.len() != self.n_devices() {
                return Err(ScenarioError::BudgetDims { tech, len: budgets.len() });
            }
            for (device, b) in budgets.iter().enumerate() {
                if !b.is_finite() || *b < 0.0 {
                    return Err(ScenarioError::NegativeEnergy { tech, device, value: *b });
                }
            }
            let s = self.energy.send_cost[tech.index()];
            let r = self.energy.receive_cost[tech.index()];
            if !s.is_finite() || s < 0.0 {
                return Err(ScenarioError::NegativeCost { tech, value: s });
            }
            if !r.is_finite() || r < 0.0 {
                return Err(ScenarioError::NegativeCost { tech, value: r });
            }
        }
        Ok(())
    }
}

/// Binary demand tensor `rho[sender][receiver][step]`: 1 where some message
/// of the pair has the step inside its window.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandTensor {
    n_devices: usize,
    horizon: usize,
    bits: Vec<bool>,
}

impl DemandTensor {
    pub fn get(&self, sender: DeviceId, receiver: DeviceId, step: usize) -> bool {
        self.bits[(sender * self.n_devices + receiver) * self.horizon + step]
    }

    pub fn n_devices(&self) -> usize {
        self.n_devices
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Projects the message windows of a scenario onto a demand tensor. Windows
/// of one pair never overlap, so each set bit belongs to exactly one message.
pub fn derive_demand(scenario: &Scenario) -> DemandTensor {
    let n = scenario.n_devices();
    let t = scenario.horizon;
    let mut bits = vec![false; n * n * t];
    for m in &scenario.messages {
        for k in m.window_start..=m.window_end {
            bits[(m.sender * n + m.receiver) * t + k] = true;
        }
    }
    DemandTensor { n_devices: n, horizon: t, bits }
}

fn d_n_nodes() -> usize {
    9
}
fn d_n_aps() -> usize {
    2
}
fn d_n_types() -> usize {
    2
}
fn d_horizon() -> usize {
    20
}
fn d_rf_mean() -> f64 {
    0.85
}
fn d_oc_mean() -> f64 {
    0.9
}
fn d_vis_std() -> f64 {
    0.1
}
fn d_budget() -> (f64, f64) {
    (500.0, 700.0)
}
fn d_send() -> [f64; 2] {
    [70.0, 100.0]
}
fn d_recv() -> [f64; 2] {
    [10.0, 7.0]
}
fn d_msgs() -> (usize, usize) {
    (1, 5)
}
fn d_window() -> usize {
    4
}
fn d_sigma() -> [f64; 2] {
    [0.97, 0.97]
}
fn d_enabled() -> TechnologySet {
    TechnologySet::both()
}

/// Knobs for random instance generation. Defaults reproduce the reference
/// operating point: 9 nodes, 2 access points, 20 slots, 2 data types,
/// visibility means 0.85 (radio) / 0.90 (optical) with std 0.1 truncated to
/// `[0, 1]`, budgets uniform in `[500, 700]`, send/receive costs 70/10 and
/// 100/7, one to five messages per pair with windows up to 4 slots, and a
/// 97% visibility threshold on both technologies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub n_nodes: usize,
    pub n_aps: usize,
    pub n_types: usize,
    pub horizon: usize,
    pub rf_visibility_mean: f64,
    pub oc_visibility_mean: f64,
    pub visibility_std: f64,
    pub budget_range: (f64, f64),
    pub send_cost: [f64; Technology::COUNT],
    pub receive_cost: [f64; Technology::COUNT],
    pub messages_per_pair: (usize, usize),
    pub max_window_len: usize,
    pub sigma: [f64; Technology::COUNT],
    pub enabled: TechnologySet,
    pub split_energy_accounting: bool,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            n_nodes: d_n_nodes(),
            n_aps: d_n_aps(),
            n_types: d_n_types(),
            horizon: d_horizon(),
            rf_visibility_mean: d_rf_mean(),
            oc_visibility_mean: d_oc_mean(),
            visibility_std: d_vis_std(),
            budget_range: d_budget(),
            send_cost: d_send(),
            receive_cost: d_recv(),
            messages_per_pair: d_msgs(),
            max_window_len: d_window(),
            sigma: d_sigma(),
            enabled: d_enabled(),
            split_energy_accounting: false,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.n_nodes + self.n_aps == 0 {
            return Err(ScenarioError::EmptyNetwork);
        }
        if self.n_types == 0 {
            return Err(ScenarioError::NoDataTypes);
        }
        if self.horizon == 0 {
            return Err(ScenarioError::EmptyHorizon);
        }
        if self.enabled.is_empty() {
            return Err(ScenarioError::NoEnabledTechnology);
        }
        if !(self.visibility_std > 0.0) || !self.visibility_std.is_finite() {
            return Err(ScenarioError::BadGenerationParameter("visibility_std must be positive"));
        }
        for mean in [self.rf_visibility_mean, self.oc_visibility_mean] {
            if !(0.0..=1.0).contains(&mean) {
                return Err(ScenarioError::BadGenerationParameter(
                    "visibility means must lie in [0, 1]",
                ));
            }
        }
        let (lo, hi) = self.budget_range;
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi < lo {
            return Err(ScenarioError::BadGenerationParameter(
                "budget_range must satisfy 0 <= lo <= hi",
            ));
        }
        for tech in Technology::ALL {
            if self.send_cost[tech.index()] < 0.0 || self.receive_cost[tech.index()] < 0.0 {
                return Err(ScenarioError::BadGenerationParameter(
                    "energy costs must be non-negative",
                ));
            }
            if !(0.0..=1.0).contains(&self.sigma[tech.index()]) {
                return Err(ScenarioError::BadGenerationParameter("sigma must lie in [0, 1]"));
            }
        }
        let (mlo, mhi) = self.messages_per_pair;
        if mhi < mlo {
            return Err(ScenarioError::BadGenerationParameter(
                "messages_per_pair must satisfy lo <= hi",
            ));
        }
        if mhi > 0 && (self.max_window_len == 0 || self.max_window_len > self.horizon) {
            return Err(ScenarioError::BadGenerationParameter(
                "max_window_len must lie in [1, horizon]",
            ));
        }
        Ok(())
    }
}

/// Draws a scenario from the distribution described by `config`.
///
/// The draw is a pure function of `(config, seed)`: visibility first (pair by
/// pair, both directions set symmetrically), then budgets, then per-pair
/// message counts, window lengths and placements. Messages are generated for
/// every ordered pair except AP-to-AP, independent of `config.enabled`, so
/// scenarios drawn for different technology modes from the same seed carry
/// identical demand.
pub fn generate_scenario(config: &GenerationConfig, seed: u64) -> Result<Scenario, ScenarioError> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = config.n_nodes + config.n_aps;
    let t = config.horizon;
    let is_ap = |d: DeviceId| d >= config.n_nodes;

    let mut visibility = VisibilityTensor::zeros(n, t);
    for tech in Technology::ALL {
        let mean = match tech {
            Technology::Rf => config.rf_visibility_mean,
            Technology::Oc => config.oc_visibility_mean,
        };
        let normal = Normal::new(mean, config.visibility_std)
            .map_err(|_| ScenarioError::BadGenerationParameter("visibility distribution"))?;
        for i in 0..n {
            for j in (i + 1)..n {
                let exists = !(is_ap(i) && is_ap(j))
                    && (tech == Technology::Rf || is_ap(i) || is_ap(j));
                if !exists {
                    continue;
                }
                for k in 0..t {
                    let v = sample_truncated(&normal, &mut rng);
                    visibility.set(tech, i, j, k, v);
                    visibility.set(tech, j, i, k, v);
                }
            }
        }
    }

    let (blo, bhi) = config.budget_range;
    let mut budget: [Vec<f64>; Technology::COUNT] = [Vec::new(), Vec::new()];
    for tech in Technology::ALL {
        budget[tech.index()] = (0..n).map(|_| rng.random_range(blo..=bhi)).collect();
    }

    let mut messages = Vec::new();
    let (mlo, mhi) = config.messages_per_pair;
    for sender in 0..n {
        for receiver in 0..n {
            if sender == receiver || (is_ap(sender) && is_ap(receiver)) {
                continue;
            }
            let count = rng.random_range(mlo..=mhi);
            if count == 0 {
                continue;
            }
            let mut lengths: Vec<usize> =
                (0..count).map(|_| rng.random_range(1..=config.max_window_len)).collect();
            let total: usize = lengths.iter().sum();
            if total > t {
                return Err(ScenarioError::WindowPacking { sender, receiver });
            }
            lengths.shuffle(&mut rng);
            let gaps = sample_gap_composition(&mut rng, t - total, count + 1);
            let mut start = 0;
            for (ordinal, len) in lengths.iter().enumerate() {
                start += gaps[ordinal];
                messages.push(Message {
                    sender,
                    receiver,
                    ordinal,
                    data_type: rng.random_range(0..config.n_types),
                    window_start: start,
                    window_end: start + len - 1,
                });
                start += len;
            }
        }
    }
    messages.sort_by_key(|m| (m.sender, m.receiver, m.window_start));

    let tau = messages.iter().map(Message::window_len).max().unwrap_or(1) + 1;
    let scenario = Scenario {
        n_nodes: config.n_nodes,
        n_aps: config.n_aps,
        n_types: config.n_types,
        horizon: t,
        messages,
        visibility,
        energy: EnergyProfile {
            send_cost: config.send_cost,
            receive_cost: config.receive_cost,
            budget,
        },
        sigma: config.sigma,
        tau,
        enabled: config.enabled,
        split_energy_accounting: config.split_energy_accounting,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Normal rejection-sampled into `[0, 1]`.
fn sample_truncated(normal: &Normal<f64>, rng: &mut ChaCha12Rng) -> f64 {
    loop {
        let v = normal.sample(rng);
        if (0.0..=1.0).contains(&v) {
            return v;
        }
    }
}

/// Uniform composition of `free` spare slots into `parts` ordered gaps via
/// the stars-and-bars bijection: a uniform (parts-1)-subset of
/// `{0 .. free+parts-2}` marks the bar positions.
fn sample_gap_composition(rng: &mut ChaCha12Rng, free: usize, parts: usize) -> Vec<usize> {
    debug_assert!(parts >= 1);
    let bars = parts - 1;
    if bars == 0 {
        return vec![free];
    }
    let mut positions: Vec<usize> =
        rand::seq::index::sample(rng, free + bars, bars).into_iter().collect();
    positions.sort_unstable();
    let mut gaps = Vec::with_capacity(parts);
    let mut prev: isize = -1;
    for &p in &positions {
        gaps.push((p as isize - prev - 1) as usize);
        prev = p as isize;
    }
    gaps.push((free + bars) - 1 - prev as usize);
    gaps
}

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    schema_version: u32,
    scenario: Scenario,
}

/// Writes a scenario as pretty-printed JSON with a schema version header.
/// Identical scenarios produce identical bytes.
pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<(), ScenarioError> {
    let file = ScenarioFile { schema_version: SCENARIO_SCHEMA_VERSION, scenario: scenario.clone() };
    let mut body = serde_json::to_string_pretty(&file).map_err(ScenarioError::Serialize)?;
    body.push('\n');
    std::fs::write(path, body).map_err(ScenarioError::Io)
}

/// Reads and fully re-validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let body = std::fs::read_to_string(path).map_err(ScenarioError::Io)?;
    let file: ScenarioFile = serde_json::from_str(&body).map_err(ScenarioError::Parse)?;
    if file.schema_version != SCENARIO_SCHEMA_VERSION {
        return Err(ScenarioError::SchemaVersion {
            found: file.schema_version,
            supported: SCENARIO_SCHEMA_VERSION,
        });
    }
    file.scenario.validate()?;
    Ok(file.scenario)
}

/// Everything that can make a scenario, a generation config or a scenario
/// file unusable. Each variant names the violated invariant.
#[derive(Debug)]
pub enum ScenarioError {
    EmptyNetwork,
    NoDataTypes,
    EmptyHorizon,
    NoEnabledTechnology,
    MessageDeviceOutOfRange { message: usize },
    SelfMessage { message: usize },
    WindowOutOfRange { message: usize },
    DataTypeOutOfRange { message: usize },
    WindowOverlap { sender: DeviceId, receiver: DeviceId },
    BadOrdinal { sender: DeviceId, receiver: DeviceId, ordinal: usize },
    TauTooSmall { tau: usize, longest_window: usize },
    VisibilityDims { devices: usize, horizon: usize },
    VisibilityOutOfRange { tech: Technology, sender: DeviceId, receiver: DeviceId, step: usize, value: f64 },
    VisibilityOnMissingLink { tech: Technology, sender: DeviceId, receiver: DeviceId, step: usize },
    VisibilityAsymmetric { tech: Technology, sender: DeviceId, receiver: DeviceId, step: usize },
    BudgetDims { tech: Technology, len: usize },
    NegativeEnergy { tech: Technology, device: DeviceId, value: f64 },
    NegativeCost { tech: Technology, value: f64 },
    SigmaOutOfRange { tech: Technology, value: f64 },
    WindowPacking { sender: DeviceId, receiver: DeviceId },
    BadGenerationParameter(&'static str),
    SchemaVersion { found: u32, supported: u32 },
    Io(std::io::Error),
    Parse(serde_json::Error),
    Serialize(serde_json::Error),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ScenarioError::*;
        match self {
            EmptyNetwork => write!(f, "scenario has no devices"),
            NoDataTypes => write!(f, "scenario declares zero data types"),
            EmptyHorizon => write!(f, "scenario horizon is zero"),
            NoEnabledTechnology => write!(f, "scenario enables no technology"),
            MessageDeviceOutOfRange { message } => {
                write!(f, "message {message} references a device outside the network")
            }
            SelfMessage { message } => {
                write!(f, "message {message} has identical sender and receiver")
            }
            WindowOutOfRange { message } => {
                write!(f, "message {message} window is empty or exceeds the horizon")
            }
            DataTypeOutOfRange { message } => {
                write!(f, "message {message} data type is out of range")
            }
            WindowOverlap { sender, receiver } => {
                write!(f, "pair ({sender}, {receiver}) has overlapping message windows")
            }
            BadOrdinal { sender, receiver, ordinal } => write!(
                f,
                "pair ({sender}, {receiver}) ordinal {ordinal} does not match window order"
            ),
            TauTooSmall { tau, longest_window } => write!(
                f,
                "tau = {tau} must exceed the longest window length {longest_window}"
            ),
            VisibilityDims { devices, horizon } => write!(
                f,
                "visibility tensor is {devices} devices x {horizon} steps, scenario disagrees"
            ),
            VisibilityOutOfRange { tech, sender, receiver, step, value } => write!(
                f,
                "visibility[{tech}][{sender}][{receiver}][{step}] = {value} outside [0, 1]"
            ),
            VisibilityOnMissingLink { tech, sender, receiver, step } => write!(
                f,
                "visibility[{tech}][{sender}][{receiver}][{step}] nonzero on a structurally absent link"
            ),
            VisibilityAsymmetric { tech, sender, receiver, step } => write!(
                f,
                "visibility[{tech}][{sender}][{receiver}][{step}] differs from its mirror entry"
            ),
            BudgetDims { tech, len } => {
                write!(f, "{tech} budget vector has length {len}, expected one entry per device")
            }
            NegativeEnergy { tech, device, value } => {
                write!(f, "{tech} budget of device {device} is {value}, must be >= 0")
            }
            NegativeCost { tech, value } => {
                write!(f, "{tech} transmission cost {value} is negative")
            }
            SigmaOutOfRange { tech, value } => {
                write!(f, "sigma[{tech}] = {value} outside [0, 1]")
            }
            WindowPacking { sender, receiver } => write!(
                f,
                "pair ({sender}, {receiver}) drew window lengths that cannot fit the horizon"
            ),
            BadGenerationParameter(what) => write!(f, "generation config invalid: {what}"),
            SchemaVersion { found, supported } => {
                write!(f, "scenario file schema {found} unsupported (expected {supported})")
            }
            Io(e) => write!(f, "io error: {e}"),
            Parse(e) => write!(f, "scenario file parse error: {e}"),
            Serialize(e) => write!(f, "scenario serialization error: {e}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_config() -> GenerationConfig {
        GenerationConfig {
            n_nodes: 3,
            n_aps: 1,
            horizon: 8,
            messages_per_pair: (0, 2),
            max_window_len: 3,
            ..GenerationConfig::default()
        }
    }

    #[test]
    fn default_generation_matches_reference_shape() {
        let scenario = generate_scenario(&GenerationConfig::default(), 42).unwrap();
        assert_eq!(scenario.n_devices(), 11);
        assert_eq!(scenario.horizon, 20);
        assert_eq!(scenario.n_types, 2);
        assert!(!scenario.messages.is_empty());
        // Every ordered pair except AP-AP draws at least one message under
        // the default (1, 5) range: 9*10 node pairs plus 2*9*2 node-AP pairs.
        let pairs: std::collections::BTreeSet<_> =
            scenario.messages.iter().map(|m| (m.sender, m.receiver)).collect();
        assert_eq!(pairs.len(), 9 * 8 + 2 * 9 * 2);
        assert!(scenario.tau >= 2 && scenario.tau <= 5);
        for m in Technology::ALL {
            for d in 0..scenario.n_devices() {
                let b = scenario.energy.budget[m.index()][d];
                assert!((500.0..=700.0).contains(&b));
            }
        }
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let config = GenerationConfig::default();
        let a = generate_scenario(&config, 7).unwrap();
        let b = generate_scenario(&config, 7).unwrap();
        assert_eq!(a, b);
        let c = generate_scenario(&config, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn serialized_scenario_is_byte_identical_across_runs() {
        let config = GenerationConfig::default();
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.json");
        let p2 = dir.path().join("b.json");
        save_scenario(&generate_scenario(&config, 42).unwrap(), &p1).unwrap();
        save_scenario(&generate_scenario(&config, 42).unwrap(), &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn save_load_round_trips() {
        let scenario = generate_scenario(&small_config(), 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.json");
        save_scenario(&scenario, &path).unwrap();
        let loaded = load_scenario(&path).unwrap();
        assert_eq!(scenario, loaded);
    }

    #[test]
    fn load_rejects_violated_invariants_by_name() {
        let scenario = generate_scenario(&small_config(), 3).unwrap();
        let dir = tempfile::tempdir().unwrap();

        // Overlapping windows within a pair.
        let mut bad = scenario.clone();
        let m0 = bad.messages[0].clone();
        bad.messages.push(Message { ordinal: 1, ..m0 });
        let path = dir.path().join("overlap.json");
        save_unchecked(&bad, &path);
        assert!(matches!(load_scenario(&path), Err(ScenarioError::WindowOverlap { .. })));

        // tau not exceeding the longest window.
        let mut bad = scenario.clone();
        bad.tau = 1;
        let path = dir.path().join("tau.json");
        save_unchecked(&bad, &path);
        assert!(matches!(load_scenario(&path), Err(ScenarioError::TauTooSmall { .. })));

        // Visibility symmetry break.
        let mut bad = scenario.clone();
        let v = bad.visibility.get(Technology::Rf, 0, 1, 0);
        bad.visibility.set(Technology::Rf, 0, 1, 0, (v + 0.5).min(1.0).max(0.01) * 0.5);
        let path = dir.path().join("asym.json");
        save_unchecked(&bad, &path);
        assert!(matches!(load_scenario(&path), Err(ScenarioError::VisibilityAsymmetric { .. })));

        // Unsupported schema version.
        let path = dir.path().join("schema.json");
        let file = ScenarioFile { schema_version: 99, scenario: scenario.clone() };
        std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
        assert!(matches!(load_scenario(&path), Err(ScenarioError::SchemaVersion { .. })));
    }

    fn save_unchecked(scenario: &Scenario, path: &Path) {
        let file =
            ScenarioFile { schema_version: SCENARIO_SCHEMA_VERSION, scenario: scenario.clone() };
        std::fs::write(path, serde_json::to_string(&file).unwrap()).unwrap();
    }

    #[test]
    fn optical_visibility_is_zero_between_nodes() {
        let scenario = generate_scenario(&GenerationConfig::default(), 11).unwrap();
        for i in 0..scenario.n_nodes {
            for j in 0..scenario.n_nodes {
                for k in 0..scenario.horizon {
                    assert_eq!(scenario.visibility.get(Technology::Oc, i, j, k), 0.0);
                }
            }
        }
        // Node-AP optical links are populated.
        let mut nonzero = 0;
        for i in 0..scenario.n_nodes {
            for j in scenario.n_nodes..scenario.n_devices() {
                for k in 0..scenario.horizon {
                    if scenario.visibility.get(Technology::Oc, i, j, k) > 0.0 {
                        nonzero += 1;
                    }
                }
            }
        }
        assert!(nonzero > 0);
    }

    #[test]
    fn truncated_normal_mean_matches_direct_sampling_oracle() {
        // Pool RF visibility samples across seeds until we exceed 10k draws,
        // then compare against the same truncated normal sampled directly.
        let config = GenerationConfig::default();
        let mut generated = Vec::new();
        let mut seed = 100;
        while generated.len() < 10_000 {
            let s = generate_scenario(&config, seed).unwrap();
            for i in 0..s.n_devices() {
                for j in (i + 1)..s.n_devices() {
                    if !s.link_exists(Technology::Rf, i, j) {
                        continue;
                    }
                    for k in 0..s.horizon {
                        generated.push(s.visibility.get(Technology::Rf, i, j, k));
                    }
                }
            }
            seed += 1;
        }
        let gen_mean: f64 = generated.iter().sum::<f64>() / generated.len() as f64;

        let mut rng = ChaCha12Rng::seed_from_u64(987_654);
        let normal = Normal::new(config.rf_visibility_mean, config.visibility_std).unwrap();
        let oracle: f64 =
            (0..10_000).map(|_| sample_truncated(&normal, &mut rng)).sum::<f64>() / 10_000.0;
        assert!(
            (gen_mean - oracle).abs() <= 0.02,
            "generated mean {gen_mean} vs oracle {oracle}"
        );
    }

    #[test]
    fn windows_of_a_pair_are_disjoint_and_ordered() {
        let config = GenerationConfig::default();
        for seed in 0..50 {
            let s = generate_scenario(&config, seed).unwrap();
            let pairs: std::collections::BTreeSet<_> =
                s.messages.iter().map(|m| (m.sender, m.receiver)).collect();
            for (i, j) in pairs {
                let queue = s.pair_messages(i, j);
                for w in queue.windows(2) {
                    assert!(w[0].window_end < w[1].window_start);
                }
                for (pos, m) in queue.iter().enumerate() {
                    assert_eq!(m.ordinal, pos);
                }
            }
        }
    }

    #[test]
    fn window_packing_failure_names_the_pair() {
        let config = GenerationConfig {
            n_nodes: 2,
            n_aps: 0,
            horizon: 3,
            messages_per_pair: (4, 4),
            max_window_len: 3,
            ..GenerationConfig::default()
        };
        // 4 windows of >= 1 slot each never fit 3 slots.
        match generate_scenario(&config, 0) {
            Err(ScenarioError::WindowPacking { sender: 0, receiver: 1 }) => {}
            other => panic!("expected WindowPacking for pair (0, 1), got {other:?}"),
        }
    }

    #[test]
    fn tight_window_draws_always_pack() {
        // Total length == horizon is packable and must never error.
        let config = GenerationConfig {
            n_nodes: 2,
            n_aps: 0,
            horizon: 6,
            messages_per_pair: (3, 3),
            max_window_len: 2,
            ..GenerationConfig::default()
        };
        for seed in 0..200 {
            if let Ok(s) = generate_scenario(&config, seed) {
                for m in &s.messages {
                    assert!(m.window_end < s.horizon);
                }
            } else {
                // A draw summing above the horizon is impossible here: 3
                // windows of at most 2 slots fit 6 slots exactly.
                panic!("seed {seed} failed a packable draw");
            }
        }
    }

    #[test]
    fn demand_tensor_marks_exactly_the_window_slots() {
        let scenario = generate_scenario(&small_config(), 5).unwrap();
        let demand = derive_demand(&scenario);
        let expected: usize = scenario.messages.iter().map(Message::window_len).sum();
        assert_eq!(demand.count_ones(), expected);
        for i in 0..scenario.n_devices() {
            for j in 0..scenario.n_devices() {
                for k in 0..scenario.horizon {
                    let covered = scenario
                        .messages
                        .iter()
                        .any(|m| m.sender == i && m.receiver == j && m.contains_step(k));
                    assert_eq!(demand.get(i, j, k), covered);
                }
            }
        }
    }

    #[test]
    fn tau_exceeds_every_window_length() {
        for seed in 0..20 {
            let s = generate_scenario(&GenerationConfig::default(), seed).unwrap();
            let longest = s.messages.iter().map(Message::window_len).max().unwrap();
            assert_eq!(s.tau, longest + 1);
        }
    }

    proptest! {
        #[test]
        fn gap_composition_sums_to_free(free in 0usize..30, parts in 1usize..8, seed in 0u64..1000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let gaps = sample_gap_composition(&mut rng, free, parts);
            prop_assert_eq!(gaps.len(), parts);
            prop_assert_eq!(gaps.iter().sum::<usize>(), free);
        }

        #[test]
        fn generated_scenarios_validate(seed in 0u64..200) {
            let config = GenerationConfig {
                n_nodes: 4,
                n_aps: 2,
                horizon: 12,
                messages_per_pair: (0, 3),
                max_window_len: 4,
                ..GenerationConfig::default()
            };
            if let Ok(s) = generate_scenario(&config, seed) {
                prop_assert!(s.validate().is_ok());
            }
        }
    }
}
