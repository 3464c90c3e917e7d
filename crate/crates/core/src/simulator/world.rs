use serde::{Deserialize, Serialize};

use super::lead::LeadProfile;
use crate::controllers::ActuationCommand;
use crate::kinematics::KinematicProfile;

/// Which free distance the controller is shown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Setting {
    /// The raw gap to the lead.
    Gap,
    /// The gap plus the lead's own braking distance.
    GapPlusLeadBraking,
}

impl TryFrom<u8> for Setting {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            1 => Ok(Setting::Gap),
            2 => Ok(Setting::GapPlusLeadBraking),
            other => Err(format!("setting must be 1 or 2, got {other}")),
        }
    }
}

impl From<Setting> for u8 {
    fn from(s: Setting) -> u8 {
        match s {
            Setting::Gap => 1,
            Setting::GapPlusLeadBraking => 2,
        }
    }
}

/// Snapshot of both vehicles. Positions are measured from the ego's start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub time: f64,
    pub ego_position: f64,
    pub ego_speed: f64,
    pub lead_position: f64,
    pub lead_speed: f64,
}

impl WorldState {
    pub fn gap(&self) -> f64 {
        self.lead_position - self.ego_position
    }
}

/// Free distance presented to the controller, clamped at zero.
pub fn free_distance(state: &WorldState, setting: Setting, lead_brake_rate: f64) -> f64 {
    let f = match setting {
        Setting::Gap => state.gap(),
        Setting::GapPlusLeadBraking => state.gap() + state.lead_speed * state.lead_speed / (2.0 * lead_brake_rate),
    };
    f.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Maneuver {
    Accelerate,
    Brake,
}

/// Constant-rate ego motion from an anchor until the target speed, then
/// constant speed.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    t0: f64,
    x0: f64,
    v0: f64,
    rate: f64,
    target: f64,
}

impl Segment {
    fn end_time(&self) -> f64 {
        if self.rate == 0.0 {
            self.t0
        } else {
            self.t0 + ((self.target - self.v0) / self.rate).max(0.0)
        }
    }

    fn at(&self, t: f64) -> (f64, f64) {
        let t_end = self.end_time();
        let ramp = |tau: f64| self.x0 + self.v0 * tau + 0.5 * self.rate * tau * tau;
        if t < t_end {
            let tau = t - self.t0;
            let v = self.v0 + self.rate * tau;
            let (lo, hi) = if self.v0 <= self.target {
                (self.v0, self.target)
            } else {
                (self.target, self.v0)
            };
            (ramp(tau), v.clamp(lo, hi))
        } else {
            (ramp(t_end - self.t0) + self.target * (t - t_end), self.target)
        }
    }
}

/// Ego and lead vehicles integrated in closed form.
///
/// Actuation commands take effect at the current time. A maneuver in
/// progress completes when the ego reaches the target speed, and
/// [`World::advance_to`] reports that completion exactly once.
#[derive(Debug, Clone)]
pub struct World {
    profile: KinematicProfile,
    lead: LeadProfile,
    initial_gap: f64,
    time: f64,
    segment: Segment,
    maneuver: Option<Maneuver>,
}

/// A maneuver that reached its target speed at `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completion {
    pub time: f64,
    pub maneuver: Maneuver,
}

impl World {
    pub fn new(profile: KinematicProfile, lead: LeadProfile, initial_gap: f64, initial_speed: f64) -> Self {
        World {
            profile,
            lead,
            initial_gap,
            time: 0.0,
            segment: Segment {
                t0: 0.0,
                x0: 0.0,
                v0: initial_speed,
                rate: 0.0,
                target: initial_speed,
            },
            maneuver: None,
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn lead(&self) -> &LeadProfile {
        &self.lead
    }

    pub fn maneuver(&self) -> Option<Maneuver> {
        self.maneuver
    }

    /// When the maneuver in progress will reach its target speed.
    pub fn pending_completion(&self) -> Option<f64> {
        self.maneuver.map(|_| self.segment.end_time())
    }

    pub fn state(&self) -> WorldState {
        let (ego_position, ego_speed) = self.segment.at(self.time);
        WorldState {
            time: self.time,
            ego_position,
            ego_speed,
            lead_position: self.initial_gap + self.lead.displacement(self.time),
            lead_speed: self.lead.speed(self.time),
        }
    }

    /// Move the clock forward to `t` (never backwards).
    pub fn advance_to(&mut self, t: f64) -> Option<Completion> {
        self.time = self.time.max(t);
        match (self.maneuver, self.pending_completion()) {
            (Some(maneuver), Some(end)) if end <= self.time => {
                self.maneuver = None;
                Some(Completion { time: end, maneuver })
            }
            _ => None,
        }
    }

    pub fn step(&mut self, dt: f64) -> Option<Completion> {
        self.advance_to(self.time + dt)
    }

    pub fn actuate(&mut self, command: ActuationCommand) {
        let (target, rate, maneuver) = match command {
            ActuationCommand::HoldSpeed { .. } => return,
            ActuationCommand::Accelerate { to } => (to, self.profile.accel_rate(), Maneuver::Accelerate),
            ActuationCommand::Brake { to } => (to, -self.profile.brake_rate(), Maneuver::Brake),
            ActuationCommand::EmergencyBrake => (0.0, -self.profile.brake_rate(), Maneuver::Brake),
        };
        let (x0, v0) = self.segment.at(self.time);
        self.segment = Segment {
            t0: self.time,
            x0,
            v0,
            rate,
            target,
        };
        self.maneuver = Some(maneuver);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile() -> KinematicProfile {
        KinematicProfile::new(2.0, 2.0, 32.0).unwrap()
    }

    #[test]
    fn first_step_of_acceleration() {
        let mut w = World::new(profile(), LeadProfile::stationary(), 100.0, 0.0);
        w.actuate(ActuationCommand::Accelerate { to: 4.0 });
        assert_eq!(w.step(0.01), None);
        let s = w.state();
        assert!((s.ego_speed - 0.02).abs() < 1e-15);
        assert!((s.ego_position - 0.0001).abs() < 1e-15);
        assert_eq!(s.gap(), 100.0 - s.ego_position);
    }

    #[test]
    fn completion_is_exact_and_reported_once() {
        let mut w = World::new(profile(), LeadProfile::stationary(), 100.0, 0.0);
        w.actuate(ActuationCommand::Accelerate { to: 4.0 });
        assert_eq!(w.pending_completion(), Some(2.0));
        assert_eq!(w.advance_to(1.5), None);
        let c = w.advance_to(2.5).unwrap();
        assert_eq!(c.time, 2.0);
        assert_eq!(c.maneuver, Maneuver::Accelerate);
        assert_eq!(w.advance_to(3.0), None);
        let s = w.state();
        assert_eq!(s.ego_speed, 4.0);
        assert_eq!(s.ego_position, 4.0 + 4.0);

        // Brake from 4 to 0 covers B(4) = 4.
        w.actuate(ActuationCommand::EmergencyBrake);
        w.advance_to(10.0).unwrap();
        assert_eq!(w.state().ego_position, 12.0);
        assert_eq!(w.state().ego_speed, 0.0);
    }

    #[test]
    fn completion_inside_a_step() {
        let mut w = World::new(profile(), LeadProfile::stationary(), 100.0, 3.99);
        w.actuate(ActuationCommand::Accelerate { to: 4.0 });
        let c = w.step(0.01).unwrap();
        assert!((c.time - 0.005).abs() < 1e-12);
        let s = w.state();
        assert_eq!(s.ego_speed, 4.0);
        let expected = 3.99 * 0.005 + 0.5 * 2.0 * 0.005 * 0.005 + 4.0 * 0.005;
        assert!((s.ego_position - expected).abs() < 1e-12);

        let mut cruise = World::new(profile(), LeadProfile::stationary(), 100.0, 4.0);
        cruise.actuate(ActuationCommand::HoldSpeed { at: 4.0 });
        cruise.step(1.0);
        assert_eq!(cruise.state().ego_position, 4.0);
    }

    #[test]
    fn hold_does_not_interrupt_maneuver() {
        let mut w = World::new(profile(), LeadProfile::stationary(), 100.0, 4.0);
        w.actuate(ActuationCommand::Brake { to: 0.0 });
        w.actuate(ActuationCommand::HoldSpeed { at: 4.0 });
        assert_eq!(w.pending_completion(), Some(2.0));
    }

    #[test]
    fn free_distance_settings() {
        let s = WorldState {
            time: 0.0,
            ego_position: 0.0,
            ego_speed: 0.0,
            lead_position: 5.0,
            lead_speed: 10.0,
        };
        assert_eq!(free_distance(&s, Setting::Gap, 5.0), 5.0);
        assert_eq!(free_distance(&s, Setting::GapPlusLeadBraking, 5.0), 15.0);
        let crashed = WorldState {
            lead_position: -1.0,
            lead_speed: 0.0,
            ..s
        };
        assert_eq!(free_distance(&crashed, Setting::Gap, 5.0), 0.0);
    }
}
