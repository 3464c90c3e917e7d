use serde::{Deserialize, Serialize};

use crate::controllers::{ActuationCommand, Mode};

/// One sample of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub ego_speed: f64,
    pub lead_speed: f64,
    pub gap: f64,
    /// Last free-distance measurement delivered to the controller.
    pub sensed_f: f64,
    pub mode: Mode,
    /// First non-hold command issued since the previous sample, else the
    /// first hold, else none.
    pub command: Option<ActuationCommand>,
}

/// Samples plus the identity of the scenario that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub scenario_hash: String,
    pub seed: u64,
    pub records: Vec<TraceRecord>,
}

/// Safety and following metrics, computed from a trace alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub min_gap: f64,
    #[serde(rename = "max_speed")]
    pub max_ego_speed: f64,
    pub collision: bool,
    pub steady_min_gap: f64,
    pub steady_max_gap: f64,
    pub emergency_count: usize,
}

impl Metrics {
    /// Fold over the records; the steady window is `t >= steady_from`.
    pub fn from_records(records: &[TraceRecord], steady_from: f64) -> Metrics {
        let mut m = Metrics {
            min_gap: f64::INFINITY,
            max_ego_speed: 0.0,
            collision: false,
            steady_min_gap: f64::INFINITY,
            steady_max_gap: f64::NEG_INFINITY,
            emergency_count: 0,
        };
        let last = records.last().map_or(0.0, |r| r.t);
        let from = steady_from.min(last);
        for r in records {
            m.min_gap = m.min_gap.min(r.gap);
            m.max_ego_speed = m.max_ego_speed.max(r.ego_speed);
            m.collision |= r.gap <= 0.0;
            if r.t >= from - 1e-9 {
                m.steady_min_gap = m.steady_min_gap.min(r.gap);
                m.steady_max_gap = m.steady_max_gap.max(r.gap);
            }
            if r.command == Some(ActuationCommand::EmergencyBrake) {
                m.emergency_count += 1;
            }
        }
        m
    }
}
