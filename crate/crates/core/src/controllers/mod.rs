//! Discrete controllers refining the ideal ladder principle.
//!
//! Both controllers are single-owner state machines driven by
//! [`ControllerEvent`]s. They have no clock of their own: time reaches them
//! only through the events the host delivers (periodic `UpdateF` for the
//! synchronous controller, sporadic `UpdateF` plus `Tick` for the
//! asynchronous one). Guards compare the local free-distance estimate `F'`
//! against bounds inflated by the worst-case distance travelled between two
//! observations, see [`AdjustedLadder`].

mod asynchronous;
mod ideal;
mod synchronous;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::kinematics::SpeedLadder;

pub use asynchronous::{estimate_brackets, AsyncController};
pub use ideal::IdealController;
pub use synchronous::SyncController;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControllerError {
    #[error("initial level {level} is not safe: free distance {free_distance} m < B_{level} = {bound} m")]
    UnsafeInitial {
        level: usize,
        free_distance: f64,
        bound: f64,
    },
    #[error("initial level {level} is outside the ladder (top level {top})")]
    LevelOutOfRange { level: usize, top: usize },
    #[error("{name} must be finite and > 0, got {value}")]
    InvalidPeriod { name: &'static str, value: f64 },
    #[error("sensing period {period} s too large: level {level} travels {travelled} m per period but A(v_(i-1), v_i) is only {step} m")]
    PeriodTooLarge {
        level: usize,
        period: f64,
        travelled: f64,
        step: f64,
    },
    #[error(
        "horizon {horizon} m closes the band at level {level}: D'_(i+1) = {accel_bound} m <= B''_i = {brake_upper} m"
    )]
    BandOverlap {
        level: usize,
        horizon: f64,
        accel_bound: f64,
        brake_upper: f64,
    },
    #[error("free distance measurement must be finite and non-negative, got {0}")]
    InvalidMeasurement(f64),
    #[error("event {event:?} is not accepted in mode {mode}")]
    Protocol { event: ControllerEvent, mode: Mode },
}

/// Inputs of a controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControllerEvent {
    /// A fresh free-distance measurement, in m.
    UpdateF(f64),
    /// The acceleration command finished (`ca`).
    AccelComplete,
    /// The braking command finished (`cb`).
    BrakeComplete,
    /// Internal dead-reckoning clock (asynchronous controller only).
    Tick,
}

/// Kinematic state tracked by the controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `Csp(v_i)`: constant speed at level `i`.
    Cruise(usize),
    /// `Ac(v_i, v_{i+1})`.
    Accelerating { from: usize, to: usize },
    /// `Br(v_i, v_j)`; `to = from - 1` except for emergency braking to 0.
    Braking { from: usize, to: usize },
    /// `Upd`: transient guard evaluation after an update. Never observable
    /// between events.
    Update(usize),
}

impl Mode {
    pub fn is_cruise(&self) -> bool {
        matches!(self, Mode::Cruise(_))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Cruise(i) => write!(f, "Csp({i})"),
            Mode::Accelerating { from, to } => write!(f, "Ac({from}->{to})"),
            Mode::Braking { from, to } => write!(f, "Br({from}->{to})"),
            Mode::Update(i) => write!(f, "Upd({i})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unrecognised {what}: {text:?}")]
pub struct ParseError {
    what: &'static str,
    text: String,
}

fn parse_err(what: &'static str, text: &str) -> ParseError {
    ParseError {
        what,
        text: text.to_string(),
    }
}

impl FromStr for Mode {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || parse_err("mode", s);
        let (head, rest) = s.split_once('(').ok_or_else(err)?;
        let body = rest.strip_suffix(')').ok_or_else(err)?;
        let pair = || -> Result<(usize, usize), ParseError> {
            let (a, b) = body.split_once("->").ok_or_else(err)?;
            Ok((a.parse().map_err(|_| err())?, b.parse().map_err(|_| err())?))
        };
        match head {
            "Csp" => Ok(Mode::Cruise(body.parse().map_err(|_| err())?)),
            "Upd" => Ok(Mode::Update(body.parse().map_err(|_| err())?)),
            "Ac" => pair().map(|(from, to)| Mode::Accelerating { from, to }),
            "Br" => pair().map(|(from, to)| Mode::Braking { from, to }),
            _ => Err(err()),
        }
    }
}

/// Outputs of a controller. Speeds in m/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActuationCommand {
    Accelerate {
        to: f64,
    },
    Brake {
        to: f64,
    },
    HoldSpeed {
        at: f64,
    },
    /// Brake to a full stop.
    EmergencyBrake,
}

impl ActuationCommand {
    pub fn is_hold(&self) -> bool {
        matches!(self, ActuationCommand::HoldSpeed { .. })
    }
}

impl fmt::Display for ActuationCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActuationCommand::Accelerate { to } => write!(f, "accelerate:{}", crate::fmt::sig9(*to)),
            ActuationCommand::Brake { to } => write!(f, "brake:{}", crate::fmt::sig9(*to)),
            ActuationCommand::HoldSpeed { at } => write!(f, "hold:{}", crate::fmt::sig9(*at)),
            ActuationCommand::EmergencyBrake => f.write_str("emergency"),
        }
    }
}

impl FromStr for ActuationCommand {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "emergency" {
            return Ok(ActuationCommand::EmergencyBrake);
        }
        let err = || parse_err("command", s);
        let (kind, speed) = s.split_once(':').ok_or_else(err)?;
        let speed: f64 = speed.parse().map_err(|_| err())?;
        match kind {
            "accelerate" => Ok(ActuationCommand::Accelerate { to: speed }),
            "brake" => Ok(ActuationCommand::Brake { to: speed }),
            "hold" => Ok(ActuationCommand::HoldSpeed { at: speed }),
            _ => Err(err()),
        }
    }
}

/// A speed ladder whose guards are inflated by a horizon `ε`:
/// `D'_i = D_i + ε`, `B'_i = B_i + ε`, `B''_i = B_i + 2ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjustedLadder {
    base: SpeedLadder,
    horizon: f64,
}

/// Which guard of a cruising controller holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Guard {
    Accelerate,
    Brake,
    Emergency,
    Hold,
}

impl AdjustedLadder {
    /// Fails unless `ε > 0` and `D'_{i+1} > B''_i` for every level, so that
    /// the braking band can never be stepped over between two evaluations.
    pub fn new(base: SpeedLadder, horizon: f64) -> Result<Self, ControllerError> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(ControllerError::InvalidPeriod {
                name: "horizon",
                value: horizon,
            });
        }
        let ladder = AdjustedLadder { base, horizon };
        for level in 0..ladder.base.top() {
            let accel_bound = ladder.accel_bound(level + 1);
            let brake_upper = ladder.brake_upper(level);
            if accel_bound <= brake_upper {
                return Err(ControllerError::BandOverlap {
                    level,
                    horizon,
                    accel_bound,
                    brake_upper,
                });
            }
        }
        Ok(ladder)
    }

    pub fn base(&self) -> &SpeedLadder {
        &self.base
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn accel_bound(&self, level: usize) -> f64 {
        self.base.ab_bound(level) + self.horizon
    }

    pub fn brake_lower(&self, level: usize) -> f64 {
        self.base.brake_to_stop(level) + self.horizon
    }

    pub fn brake_upper(&self, level: usize) -> f64 {
        self.base.brake_to_stop(level) + 2.0 * self.horizon
    }

    pub(crate) fn guard(&self, level: usize, estimate: f64) -> Guard {
        if level >= 1 && estimate < self.brake_lower(level) {
            Guard::Emergency
        } else if level >= 1 && estimate <= self.brake_upper(level) {
            Guard::Brake
        } else if level < self.base.top() && estimate >= self.accel_bound(level + 1) {
            Guard::Accelerate
        } else {
            Guard::Hold
        }
    }

    /// Fires the guard for a cruising controller: returns the next mode and
    /// the command to emit.
    pub(crate) fn dispatch(&self, level: usize, estimate: f64) -> (Mode, ActuationCommand) {
        match self.guard(level, estimate) {
            Guard::Accelerate => (
                Mode::Accelerating {
                    from: level,
                    to: level + 1,
                },
                ActuationCommand::Accelerate {
                    to: self.base.speed(level + 1),
                },
            ),
            Guard::Brake => (
                Mode::Braking {
                    from: level,
                    to: level - 1,
                },
                ActuationCommand::Brake {
                    to: self.base.speed(level - 1),
                },
            ),
            Guard::Emergency => (Mode::Braking { from: level, to: 0 }, ActuationCommand::EmergencyBrake),
            Guard::Hold => (
                Mode::Cruise(level),
                ActuationCommand::HoldSpeed {
                    at: self.base.speed(level),
                },
            ),
        }
    }
}

pub(crate) fn check_initial(ladder: &SpeedLadder, level: usize, free_distance: f64) -> Result<(), ControllerError> {
    let top = ladder.top();
    if level > top {
        return Err(ControllerError::LevelOutOfRange { level, top });
    }
    check_measurement(free_distance)?;
    let bound = ladder.brake_to_stop(level);
    if free_distance < bound {
        return Err(ControllerError::UnsafeInitial {
            level,
            free_distance,
            bound,
        });
    }
    Ok(())
}

pub(crate) fn check_period(name: &'static str, value: f64) -> Result<(), ControllerError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ControllerError::InvalidPeriod { name, value })
    }
}

pub(crate) fn check_measurement(f: f64) -> Result<(), ControllerError> {
    if f.is_finite() && f >= 0.0 {
        Ok(())
    } else {
        Err(ControllerError::InvalidMeasurement(f))
    }
}
