//! Accelerating and braking distance functions and the precomputed speed ladder.
//!
//! The controllers never look at vehicle dynamics directly. Everything they
//! need is a pair of distance functions: how far the vehicle travels while
//! accelerating from one speed to another, and how far it travels while
//! braking. [`DistanceModel`] is that boundary; [`KinematicProfile`] is the
//! constant-rate implementation used throughout the crate.
//!
//! Both functions are required to satisfy `f(V, V) = 0`, additivity
//! (`f(V, v1) + f(v1, v2) = f(V, v2)`) and strict monotonicity in the target
//! speed. The constant-rate closed forms satisfy all three exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("invalid kinematic profile: {0}")]
    InvalidProfile(&'static str),
    #[error("braking needs 0 <= to <= from <= {limit} m/s, got {from} -> {to}")]
    BrakeDomain { from: f64, to: f64, limit: f64 },
    #[error("accelerating needs 0 <= from <= to <= {limit} m/s, got {from} -> {to}")]
    AccelDomain { from: f64, to: f64, limit: f64 },
    #[error("speed ladder needs at least one level above zero")]
    EmptyLadder,
    #[error("speed levels must be finite, non-negative and strictly increasing (level {index} = {speed} m/s)")]
    NotIncreasing { index: usize, speed: f64 },
    #[error("speed level {speed} m/s exceeds the limit speed {limit} m/s")]
    AboveLimit { speed: f64, limit: f64 },
    #[error("distance model broke the guard band at level {index}: D_(i+1) must exceed B_i")]
    GuardBand { index: usize },
}

/// Distance and duration of speed changes, as seen by the controllers.
///
/// Speeds are in m/s, distances in m, durations in s.
pub trait DistanceModel {
    fn limit_speed(&self) -> f64;

    /// Distance travelled while braking from `from` down to `to`.
    fn brake_distance(&self, from: f64, to: f64) -> Result<f64, KinematicsError>;

    /// Distance travelled while accelerating from `from` up to `to`.
    fn accel_distance(&self, from: f64, to: f64) -> Result<f64, KinematicsError>;

    fn brake_time(&self, from: f64, to: f64) -> Result<f64, KinematicsError>;

    fn accel_time(&self, from: f64, to: f64) -> Result<f64, KinematicsError>;

    /// Braking distance to a full stop.
    fn stopping_distance(&self, speed: f64) -> Result<f64, KinematicsError> {
        self.brake_distance(speed, 0.0)
    }
}

/// Constant accelerating rate `a`, constant braking rate `b` and a limit speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct KinematicProfile {
    accel_rate: f64,
    brake_rate: f64,
    limit_speed: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    accel_rate: f64,
    brake_rate: f64,
    limit_speed: f64,
}

impl TryFrom<RawProfile> for KinematicProfile {
    type Error = KinematicsError;

    fn try_from(raw: RawProfile) -> Result<Self, Self::Error> {
        KinematicProfile::new(raw.accel_rate, raw.brake_rate, raw.limit_speed)
    }
}

impl From<KinematicProfile> for RawProfile {
    fn from(p: KinematicProfile) -> Self {
        RawProfile {
            accel_rate: p.accel_rate,
            brake_rate: p.brake_rate,
            limit_speed: p.limit_speed,
        }
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl KinematicProfile {
    pub fn new(accel_rate: f64, brake_rate: f64, limit_speed: f64) -> Result<Self, KinematicsError> {
        if !positive(accel_rate) {
            return Err(KinematicsError::InvalidProfile("accel_rate must be > 0"));
        }
        if !positive(brake_rate) {
            return Err(KinematicsError::InvalidProfile("brake_rate must be > 0"));
        }
        if !positive(limit_speed) {
            return Err(KinematicsError::InvalidProfile("limit_speed must be > 0"));
        }
        Ok(KinematicProfile {
            accel_rate,
            brake_rate,
            limit_speed,
        })
    }

    pub fn accel_rate(&self) -> f64 {
        self.accel_rate
    }

    pub fn brake_rate(&self) -> f64 {
        self.brake_rate
    }

    fn check_brake(&self, from: f64, to: f64) -> Result<(), KinematicsError> {
        let ok = from.is_finite() && to.is_finite() && 0.0 <= to && to <= from && from <= self.limit_speed;
        if ok {
            Ok(())
        } else {
            Err(KinematicsError::BrakeDomain {
                from,
                to,
                limit: self.limit_speed,
            })
        }
    }

    fn check_accel(&self, from: f64, to: f64) -> Result<(), KinematicsError> {
        let ok = from.is_finite() && to.is_finite() && 0.0 <= from && from <= to && to <= self.limit_speed;
        if ok {
            Ok(())
        } else {
            Err(KinematicsError::AccelDomain {
                from,
                to,
                limit: self.limit_speed,
            })
        }
    }
}

impl DistanceModel for KinematicProfile {
    fn limit_speed(&self) -> f64 {
        self.limit_speed
    }

    // V(V - v)/b - (V - v)^2/(2b), factored as (V - v)(V + v)/(2b).
    fn brake_distance(&self, from: f64, to: f64) -> Result<f64, KinematicsError> {
        self.check_brake(from, to)?;
        Ok((from - to) * (from + to) / (2.0 * self.brake_rate))
    }

    // V(v - V)/a + (v - V)^2/(2a), factored as (v - V)(v + V)/(2a).
    fn accel_distance(&self, from: f64, to: f64) -> Result<f64, KinematicsError> {
        self.check_accel(from, to)?;
        Ok((to - from) * (to + from) / (2.0 * self.accel_rate))
    }

    fn brake_time(&self, from: f64, to: f64) -> Result<f64, KinematicsError> {
        self.check_brake(from, to)?;
        Ok((from - to) / self.brake_rate)
    }

    fn accel_time(&self, from: f64, to: f64) -> Result<f64, KinematicsError> {
        self.check_accel(from, to)?;
        Ok((to - from) / self.accel_rate)
    }
}

/// One level of a [`SpeedLadder`] with its precomputed bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rung {
    pub speed: f64,
    /// `B_i`: braking distance from this level to a full stop.
    pub brake_to_stop: f64,
    /// `A(v_{i-1}, v_i)`; zero for level 0.
    pub step_accel: f64,
    /// `B(v_i, v_{i-1})`; zero for level 0.
    pub step_brake: f64,
    /// `D_i = A(v_{i-1}, v_i) + B_i`; zero for level 0.
    pub ab_bound: f64,
    pub step_accel_time: f64,
    pub step_brake_time: f64,
}

/// Speed levels `0 = v_0 < v_1 < ... < v_n <= v_L` with their braking and
/// A/B distances.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedLadder {
    rungs: Vec<Rung>,
}

impl SpeedLadder {
    /// Builds the ladder for `levels`. A leading zero is optional; `v_0 = 0`
    /// is always present in the result.
    pub fn build(model: &impl DistanceModel, levels: &[f64]) -> Result<Self, KinematicsError> {
        let levels: &[f64] = match levels.first() {
            Some(0.0) => &levels[1..],
            _ => levels,
        };
        if levels.is_empty() {
            return Err(KinematicsError::EmptyLadder);
        }
        let limit = model.limit_speed();
        let mut rungs = Vec::with_capacity(levels.len() + 1);
        rungs.push(Rung {
            speed: 0.0,
            brake_to_stop: 0.0,
            step_accel: 0.0,
            step_brake: 0.0,
            ab_bound: 0.0,
            step_accel_time: 0.0,
            step_brake_time: 0.0,
        });
        let mut prev = 0.0;
        for (k, &speed) in levels.iter().enumerate() {
            let index = k + 1;
            if !speed.is_finite() || speed <= prev {
                return Err(KinematicsError::NotIncreasing { index, speed });
            }
            if speed > limit {
                return Err(KinematicsError::AboveLimit { speed, limit });
            }
            let brake_to_stop = model.stopping_distance(speed)?;
            let step_accel = model.accel_distance(prev, speed)?;
            rungs.push(Rung {
                speed,
                brake_to_stop,
                step_accel,
                step_brake: model.brake_distance(speed, prev)?,
                ab_bound: step_accel + brake_to_stop,
                step_accel_time: model.accel_time(prev, speed)?,
                step_brake_time: model.brake_time(speed, prev)?,
            });
            prev = speed;
        }
        for i in 0..rungs.len() - 1 {
            if rungs[i + 1].ab_bound <= rungs[i].brake_to_stop {
                return Err(KinematicsError::GuardBand { index: i });
            }
        }
        Ok(SpeedLadder { rungs })
    }

    /// `n` levels evenly spaced up to the limit speed: `v_i = i * v_L / n`.
    pub fn evenly_spaced(model: &impl DistanceModel, n: usize) -> Result<Self, KinematicsError> {
        Self::build(model, &even_levels(model.limit_speed(), n))
    }

    /// Number of levels above zero (`n`).
    pub fn top(&self) -> usize {
        self.rungs.len() - 1
    }

    pub fn rung(&self, level: usize) -> &Rung {
        &self.rungs[level]
    }

    pub fn rungs(&self) -> &[Rung] {
        &self.rungs
    }

    pub fn speed(&self, level: usize) -> f64 {
        self.rungs[level].speed
    }

    pub fn top_speed(&self) -> f64 {
        self.rungs[self.top()].speed
    }

    pub fn brake_to_stop(&self, level: usize) -> f64 {
        self.rungs[level].brake_to_stop
    }

    pub fn ab_bound(&self, level: usize) -> f64 {
        self.rungs[level].ab_bound
    }

    /// Speeds `v_1..v_n` (without the implicit zero).
    pub fn levels(&self) -> Vec<f64> {
        self.rungs[1..].iter().map(|r| r.speed).collect()
    }

    /// Index of the level whose speed equals `speed` exactly.
    pub fn level_of(&self, speed: f64) -> Option<usize> {
        self.rungs.iter().position(|r| r.speed == speed)
    }

    /// `B(v_from, v_to)` for `from >= to`, summed over rungs.
    pub fn brake_between(&self, from: usize, to: usize) -> f64 {
        self.rungs[to + 1..=from].iter().map(|r| r.step_brake).sum()
    }

    /// `A(v_from, v_to)` for `from <= to`, summed over rungs.
    pub fn accel_between(&self, from: usize, to: usize) -> f64 {
        self.rungs[from + 1..=to].iter().map(|r| r.step_accel).sum()
    }
}

/// `n` evenly spaced levels up to `limit`.
pub fn even_levels(limit: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| limit * i as f64 / n as f64).collect()
}
