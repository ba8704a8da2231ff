//! Age-of-information analysis of schedules.
//!
//! A *stream* is the flow of one data type toward one receiver, optionally
//! restricted to a single sender. Its age at a step is the elapsed time since
//! the generation of the freshest information the receiver holds, counted in
//! slots and starting at 1. Every device boots holding virtual information of
//! generation 0, so an unserved stream ages as `1, 2, 3, ...` across the
//! horizon.
//!
//! A delivery at step `k` of a message generated at `u` (its window opening)
//! resets the age to `k - u + 1`, provided the payload is at least as fresh
//! as what the receiver already holds; staler deliveries leave the trajectory
//! untouched. The age the stream would have reached at `k` — one above the
//! previous value — is recorded as that update's peak.

use serde::{Deserialize, Serialize};

use crate::model::{ModelError, Schedule, SlotIndex};
use crate::scenario::{DeviceId, Scenario};

/// Identifies a stream: one data type arriving at one receiver, from one
/// sender or (with `sender: None`) from any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StreamKey {
    pub receiver: DeviceId,
    pub data_type: usize,
    pub sender: Option<DeviceId>,
}

/// Slot-by-slot ages of one stream across the horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AoiTrajectory {
    /// Age at each step, `values[k]` for step `k`.
    pub values: Vec<u32>,
    /// Effective updates as `(step, peak_age)`, where the peak is the age
    /// the stream would have reached at that step without the update.
    pub updates: Vec<(usize, u32)>,
}

impl AoiTrajectory {
    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    /// Mean age over the horizon.
    pub fn mean_aoi(&self) -> f64 {
        let total: u64 = self.values.iter().map(|&v| v as u64).sum();
        total as f64 / self.values.len() as f64
    }

    /// Mean peak age over updates. A stream with no updates peaks exactly
    /// once, at the end of the horizon, so its final age stands in.
    pub fn peak_aoi(&self) -> f64 {
        if self.updates.is_empty() {
            return *self.values.last().expect("horizon is never empty") as f64;
        }
        let total: u64 = self.updates.iter().map(|&(_, peak)| peak as u64).sum();
        total as f64 / self.updates.len() as f64
    }
}

/// Computes the age trajectory of one stream under a schedule.
///
/// Transmissions that do not match the stream — or that cover no demanded
/// message, as in an infeasible schedule — deliver nothing. Feasibility is
/// the business of [`crate::check_constraints`]; this function only requires
/// matching dimensions.
pub fn aoi_trajectory(
    scenario: &Scenario,
    schedule: &Schedule,
    key: &StreamKey,
) -> Result<AoiTrajectory, ModelError> {
    if schedule.n_devices != scenario.n_devices() || schedule.horizon != scenario.horizon {
        return Err(ModelError::DimensionMismatch);
    }
    let slots = SlotIndex::build(scenario);
    let horizon = scenario.horizon;
    // Freshest generation delivered per step; receivers are half-duplex, so
    // feasible schedules put at most one delivery in a slot anyway.
    let mut delivered: Vec<Option<usize>> = vec![None; horizon];
    for tx in schedule.transmissions() {
        if tx.step >= horizon || tx.receiver != key.receiver {
            continue;
        }
        if key.sender.is_some_and(|sender| tx.sender != sender) {
            continue;
        }
        let Some(message) = slots.message_at(tx.sender, tx.receiver, tx.step) else {
            continue;
        };
        let message = &scenario.messages[message];
        if message.data_type != key.data_type {
            continue;
        }
        let generation = message.window_start;
        if delivered[tx.step].map_or(true, |g| generation > g) {
            delivered[tx.step] = Some(generation);
        }
    }
    let mut values = Vec::with_capacity(horizon);
    let mut updates = Vec::new();
    // Generation of the freshest information held; 0 is the boot payload.
    let mut freshest = 0usize;
    for step in 0..horizon {
        let aged = (step + 1 - freshest) as u32;
        match delivered[step] {
            Some(generation) if generation >= freshest => {
                updates.push((step, aged));
                freshest = generation;
                values.push((step + 1 - generation) as u32);
            }
            _ => values.push(aged),
        }
    }
    Ok(AoiTrajectory { values, updates })
}

/// Per-stream ages with the stream's identity attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamAoi {
    pub receiver: DeviceId,
    pub data_type: usize,
    pub mean_aoi: f64,
    pub peak_aoi: f64,
    pub trajectory: AoiTrajectory,
}

/// Unweighted aggregate over the streams of one data type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeAoi {
    pub data_type: usize,
    pub mean_aoi: f64,
    pub peak_aoi: f64,
}

/// Network-wide age summary: every demanded (receiver, data type) stream,
/// aggregates per data type, and unweighted overall means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemAoi {
    pub streams: Vec<StreamAoi>,
    pub per_type: Vec<TypeAoi>,
    pub mean_aoi: f64,
    pub peak_aoi: f64,
}

/// Evaluates every stream the scenario demands, in (receiver, data type)
/// order. Aggregates weight each stream equally, not by message count.
pub fn system_metrics(scenario: &Scenario, schedule: &Schedule) -> Result<SystemAoi, ModelError> {
    let mut keys: Vec<(DeviceId, usize)> = scenario
        .messages
        .iter()
        .map(|m| (m.receiver, m.data_type))
        .collect();
    keys.sort();
    keys.dedup();
    if keys.is_empty() {
        return Err(ModelError::NoMessages);
    }
    let mut streams = Vec::with_capacity(keys.len());
    for (receiver, data_type) in keys {
        let key = StreamKey { receiver, data_type, sender: None };
        let trajectory = aoi_trajectory(scenario, schedule, &key)?;
        streams.push(StreamAoi {
            receiver,
            data_type,
            mean_aoi: trajectory.mean_aoi(),
            peak_aoi: trajectory.peak_aoi(),
            trajectory,
        });
    }
    let mut per_type = Vec::new();
    for data_type in 0..scenario.n_types {
        let of_type: Vec<&StreamAoi> =
            streams.iter().filter(|s| s.data_type == data_type).collect();
        if of_type.is_empty() {
            continue;
        }
        per_type.push(TypeAoi {
            data_type,
            mean_aoi: of_type.iter().map(|s| s.mean_aoi).sum::<f64>() / of_type.len() as f64,
            peak_aoi: of_type.iter().map(|s| s.peak_aoi).sum::<f64>() / of_type.len() as f64,
        });
    }
    let mean_aoi = streams.iter().map(|s| s.mean_aoi).sum::<f64>() / streams.len() as f64;
    let peak_aoi = streams.iter().map(|s| s.peak_aoi).sum::<f64>() / streams.len() as f64;
    Ok(SystemAoi { streams, per_type, mean_aoi, peak_aoi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::toy_scenario;
    use crate::model::Transmission;
    use crate::scenario::{generate_scenario, GenerationConfig, Message, Technology};
    use crate::solver::sample_feasible_schedule;

    fn msg(
        sender: usize,
        receiver: usize,
        ordinal: usize,
        data_type: usize,
        window: (usize, usize),
    ) -> Message {
        Message {
            sender,
            receiver,
            ordinal,
            data_type,
            window_start: window.0,
            window_end: window.1,
        }
    }

    fn tx(sender: usize, receiver: usize, step: usize) -> Transmission {
        Transmission { sender, receiver, tech: Technology::Rf, step }
    }

    fn stream(receiver: usize, data_type: usize) -> StreamKey {
        StreamKey { receiver, data_type, sender: None }
    }

    #[test]
    fn single_update_trace() {
        let scenario = toy_scenario(vec![msg(0, 2, 0, 0, (3, 5))], 8, 4);
        let schedule = Schedule::new(3, 8, vec![tx(0, 2, 3)]);
        let trajectory = aoi_trajectory(&scenario, &schedule, &stream(2, 0)).unwrap();
        assert_eq!(trajectory.values, vec![1, 2, 3, 1, 2, 3, 4, 5]);
        assert_eq!(trajectory.updates, vec![(3, 4)]);
        assert_eq!(trajectory.mean_aoi(), 21.0 / 8.0);
        assert_eq!(trajectory.peak_aoi(), 4.0);
    }

    #[test]
    fn two_update_trace() {
        let scenario =
            toy_scenario(vec![msg(0, 2, 0, 0, (2, 3)), msg(0, 2, 1, 0, (4, 5))], 6, 3);
        let schedule = Schedule::new(3, 6, vec![tx(0, 2, 2), tx(0, 2, 5)]);
        let trajectory = aoi_trajectory(&scenario, &schedule, &stream(2, 0)).unwrap();
        assert_eq!(trajectory.values, vec![1, 2, 1, 2, 3, 2]);
        assert_eq!(trajectory.updates, vec![(2, 3), (5, 4)]);
        assert_eq!(trajectory.mean_aoi(), 11.0 / 6.0);
        assert_eq!(trajectory.peak_aoi(), 3.5);
    }

    #[test]
    fn unserved_stream_ages_linearly() {
        let scenario = toy_scenario(vec![msg(0, 2, 0, 0, (0, 2))], 4, 4);
        let schedule = Schedule::empty(&scenario);
        let trajectory = aoi_trajectory(&scenario, &schedule, &stream(2, 0)).unwrap();
        assert_eq!(trajectory.values, vec![1, 2, 3, 4]);
        assert!(trajectory.updates.is_empty());
        assert_eq!(trajectory.mean_aoi(), 2.5);
        assert_eq!(trajectory.peak_aoi(), 4.0, "no updates: final age stands in");
    }

    #[test]
    fn stale_delivery_is_ignored() {
        // Device 1's later delivery carries fresher information than device
        // 0's, so device 0's subsequent transmission must not age the stream
        // backwards.
        let scenario =
            toy_scenario(vec![msg(0, 2, 0, 0, (0, 5)), msg(1, 2, 0, 0, (2, 4))], 7, 7);
        let schedule = Schedule::new(3, 7, vec![tx(1, 2, 4), tx(0, 2, 5)]);
        let trajectory = aoi_trajectory(&scenario, &schedule, &stream(2, 0)).unwrap();
        assert_eq!(trajectory.values, vec![1, 2, 3, 4, 3, 4, 5]);
        assert_eq!(trajectory.updates, vec![(4, 5)]);
    }

    #[test]
    fn sender_filter_narrows_the_stream() {
        let scenario =
            toy_scenario(vec![msg(0, 2, 0, 0, (0, 5)), msg(1, 2, 0, 0, (2, 4))], 7, 7);
        let schedule = Schedule::new(3, 7, vec![tx(1, 2, 4), tx(0, 2, 5)]);
        let only_zero = StreamKey { receiver: 2, data_type: 0, sender: Some(0) };
        let trajectory = aoi_trajectory(&scenario, &schedule, &only_zero).unwrap();
        // Generation 0 ties the boot payload: recorded, but no reset.
        assert_eq!(trajectory.values, vec![1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(trajectory.updates, vec![(5, 6)]);
    }

    #[test]
    fn type_mismatch_means_no_updates() {
        let scenario = toy_scenario(vec![msg(0, 2, 0, 1, (0, 2))], 4, 4);
        let schedule = Schedule::new(3, 4, vec![tx(0, 2, 0)]);
        let wrong_type = aoi_trajectory(&scenario, &schedule, &stream(2, 0)).unwrap();
        assert!(wrong_type.updates.is_empty());
        let right_type = aoi_trajectory(&scenario, &schedule, &stream(2, 1)).unwrap();
        assert_eq!(right_type.updates.len(), 1);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let scenario = toy_scenario(vec![msg(0, 2, 0, 0, (0, 2))], 4, 4);
        let schedule = Schedule::new(5, 4, vec![]);
        assert!(matches!(
            aoi_trajectory(&scenario, &schedule, &stream(2, 0)),
            Err(ModelError::DimensionMismatch)
        ));
    }

    #[test]
    fn earliest_send_minimizes_mean_age() {
        let scenario = toy_scenario(vec![msg(0, 2, 0, 0, (2, 6))], 9, 6);
        let key = stream(2, 0);
        let at = |step: usize| {
            let schedule = Schedule::new(3, 9, vec![tx(0, 2, step)]);
            aoi_trajectory(&scenario, &schedule, &key).unwrap().mean_aoi()
        };
        let best = at(2);
        for step in 3..=6 {
            assert!(best < at(step), "window opening beats step {step}");
        }
    }

    #[test]
    fn extra_deliveries_never_age_a_stream() {
        let config = GenerationConfig {
            n_nodes: 3,
            n_aps: 1,
            horizon: 12,
            messages_per_pair: (1, 2),
            max_window_len: 3,
            ..GenerationConfig::default()
        };
        for seed in 0..10 {
            let scenario = generate_scenario(&config, seed).unwrap();
            let schedule = sample_feasible_schedule(&scenario, seed + 100);
            if schedule.is_empty() {
                continue;
            }
            let full = system_metrics(&scenario, &schedule).unwrap();
            // Drop one transmission; every stream's trajectory may only rise.
            let mut fewer = schedule.transmissions().to_vec();
            fewer.pop();
            let reduced = Schedule::new(schedule.n_devices, schedule.horizon, fewer);
            let partial = system_metrics(&scenario, &reduced).unwrap();
            for (with, without) in full.streams.iter().zip(&partial.streams) {
                assert_eq!((with.receiver, with.data_type), (without.receiver, without.data_type));
                for (a, b) in with.trajectory.values.iter().zip(&without.trajectory.values) {
                    assert!(a <= b, "seed {seed}");
                }
            }
        }
    }

    #[test]
    fn aggregates_average_streams_not_messages() {
        // Three streams: types 0 and 1 at device 2, type 0 at device 1.
        let scenario = toy_scenario(
            vec![
                msg(0, 2, 0, 0, (0, 1)),
                msg(1, 2, 0, 1, (0, 1)),
                msg(0, 1, 0, 0, (2, 3)),
            ],
            4,
            3,
        );
        let schedule = Schedule::new(3, 4, vec![tx(0, 2, 0), tx(0, 1, 2)]);
        let system = system_metrics(&scenario, &schedule).unwrap();
        assert_eq!(system.streams.len(), 3);
        // (1, 0): update at 2 -> [1, 2, 1, 2]; (2, 0): update at 0 -> [1, 2, 3, 4]
        // with an immediate refresh; (2, 1): unserved -> [1, 2, 3, 4].
        let means: Vec<f64> = system.streams.iter().map(|s| s.mean_aoi).collect();
        assert_eq!(means, vec![1.5, 2.5, 2.5]);
        assert_eq!(system.mean_aoi, (1.5 + 2.5 + 2.5) / 3.0);
        assert_eq!(system.per_type.len(), 2);
        assert_eq!(system.per_type[0].data_type, 0);
        assert_eq!(system.per_type[0].mean_aoi, 2.0);
        assert_eq!(system.per_type[1].mean_aoi, 2.5);
        let no_messages = toy_scenario(vec![], 4, 2);
        assert!(matches!(
            system_metrics(&no_messages, &Schedule::empty(&no_messages)),
            Err(ModelError::NoMessages)
        ));
    }
}
