use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::lead::LeadProfile;
use super::world::Setting;
use crate::kinematics::{KinematicProfile, SpeedLadder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControllerKind {
    Sync,
    Async,
    Ideal,
}

/// When free-distance measurements are delivered.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum UpdateLaw {
    /// Every sensing period, starting at time zero.
    #[default]
    Periodic,
    /// Gaps of `sensing_period + U[0, max_jitter]`, drawn from the seed.
    /// Asynchronous controller only.
    Jittered { max_jitter: f64 },
}

/// One closed-loop run, as read from a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub seed: u64,
    pub profile: KinematicProfile,
    /// Cruising speeds above rest, strictly increasing.
    pub levels: Vec<f64>,
    pub controller: ControllerKind,
    pub sensing_period: f64,
    #[serde(default = "default_tick_period")]
    pub tick_period: f64,
    #[serde(default)]
    pub update_law: UpdateLaw,
    pub setting: Setting,
    pub lead: LeadProfile,
    pub initial_gap: f64,
    /// Must be one of the ladder speeds (or zero).
    pub initial_speed: f64,
    pub duration: f64,
    /// Trace sampling step.
    pub dt: f64,
}

fn default_tick_period() -> f64 {
    0.005
}

/// A field that failed validation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid `{field}`: {reason}")]
pub struct ScenarioError {
    pub field: String,
    pub reason: String,
}

fn invalid(field: &str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite and > 0, got {v}")))
    }
}

const MAX_SAMPLES: f64 = 5e7;

/// The validated pieces a run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub ladder: SpeedLadder,
    pub initial_level: usize,
    pub samples: usize,
}

impl Scenario {
    pub fn validate(&self) -> Result<Plan, ScenarioError> {
        let ladder = SpeedLadder::build(&self.profile, &self.levels).map_err(|e| invalid("levels", e.to_string()))?;
        positive("sensing_period", self.sensing_period)?;
        positive("tick_period", self.tick_period)?;
        if let UpdateLaw::Jittered { max_jitter } = self.update_law {
            if !(max_jitter.is_finite() && max_jitter >= 0.0) {
                return Err(invalid("update_law.max_jitter", "must be finite and >= 0"));
            }
            if self.controller == ControllerKind::Sync {
                return Err(invalid(
                    "update_law",
                    "the synchronous controller needs periodic updates",
                ));
            }
        }
        self.lead.check().map_err(|(field, reason)| invalid(field, reason))?;
        positive("initial_gap", self.initial_gap)?;
        let initial_level = ladder
            .level_of(self.initial_speed)
            .ok_or_else(|| invalid("initial_speed", format!("{} is not a ladder speed", self.initial_speed)))?;
        let lead_braking = match self.setting {
            Setting::Gap => 0.0,
            Setting::GapPlusLeadBraking => self.lead.braking_distance(0.0),
        };
        let f0 = self.initial_gap + lead_braking;
        let needed = ladder.brake_to_stop(initial_level);
        if f0 < needed {
            return Err(invalid(
                "initial_gap",
                format!("unsafe start: free distance {f0} is below the braking distance {needed}"),
            ));
        }
        positive("duration", self.duration)?;
        positive("dt", self.dt)?;
        let finest = match self.controller {
            ControllerKind::Sync => Some(self.sensing_period),
            ControllerKind::Async => Some(self.sensing_period.min(self.tick_period)),
            ControllerKind::Ideal => None,
        };
        if let Some(p) = finest {
            if self.dt > p / 2.0 * (1.0 + 1e-12) {
                return Err(invalid("dt", format!("must be at most half the finest period ({p})")));
            }
        }
        if self.dt > self.duration {
            return Err(invalid("dt", "must not exceed the duration"));
        }
        let samples = self.duration / self.dt;
        if samples > MAX_SAMPLES {
            return Err(invalid(
                "dt",
                format!("{samples:.0} samples exceed the limit of {MAX_SAMPLES:.0}"),
            ));
        }
        Ok(Plan {
            ladder,
            initial_level,
            samples: (samples + 1e-9).floor() as usize + 1,
        })
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_vec(self).expect("scenario serializes");
        hex::encode(&Sha256::digest(&json)[..8])
    }

    /// Start of the window in which steady-state following is measured:
    /// the last two lead periods, or the last quarter for aperiodic leads.
    pub fn steady_from(&self) -> f64 {
        match self.lead.period() {
            Some(p) if 2.0 * p < self.duration => self.duration - 2.0 * p,
            _ => 0.75 * self.duration,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sample() -> Scenario {
        Scenario {
            name: "s".into(),
            description: String::new(),
            seed: 7,
            profile: KinematicProfile::new(2.0, 2.0, 32.0).unwrap(),
            levels: vec![4.0, 8.0, 12.0, 16.0, 20.0, 24.0, 28.0, 32.0],
            controller: ControllerKind::Async,
            sensing_period: 0.1,
            tick_period: 0.005,
            update_law: UpdateLaw::Periodic,
            setting: Setting::Gap,
            lead: LeadProfile::sinusoidal(14.0, 20.0, 5.0),
            initial_gap: 5.0,
            initial_speed: 0.0,
            duration: 100.0,
            dt: 0.0025,
        }
    }

    #[test]
    fn valid_sample() {
        let plan = sample().validate().unwrap();
        assert_eq!(plan.initial_level, 0);
        assert_eq!(plan.samples, 40_001);
        assert_eq!(plan.ladder.top(), 8);
    }

    #[test]
    fn rejections_name_the_field() {
        let field = |s: Scenario| s.validate().unwrap_err().field;
        assert_eq!(
            field(Scenario {
                levels: vec![],
                ..sample()
            }),
            "levels"
        );
        assert_eq!(
            field(Scenario {
                levels: vec![8.0, 4.0],
                ..sample()
            }),
            "levels"
        );
        assert_eq!(field(Scenario { dt: 0.01, ..sample() }), "dt");
        assert_eq!(
            field(Scenario {
                initial_speed: 5.0,
                ..sample()
            }),
            "initial_speed"
        );
        assert_eq!(
            field(Scenario {
                initial_speed: 8.0,
                ..sample()
            }),
            "initial_gap"
        );
        let single = Scenario {
            levels: vec![32.0],
            initial_speed: 32.0,
            ..sample()
        };
        assert!(single.validate().unwrap_err().reason.contains("256"));
        assert!(Scenario {
            levels: vec![32.0],
            ..sample()
        }
        .validate()
        .is_ok());
        assert_eq!(
            field(Scenario {
                sensing_period: 0.0,
                ..sample()
            }),
            "sensing_period"
        );
        assert_eq!(
            field(Scenario {
                duration: f64::NAN,
                ..sample()
            }),
            "duration"
        );
        assert_eq!(
            field(Scenario {
                lead: LeadProfile::sinusoidal(14.0, 0.0, 5.0),
                ..sample()
            }),
            "lead.motion.period"
        );
        assert_eq!(
            field(Scenario {
                controller: ControllerKind::Sync,
                update_law: UpdateLaw::Jittered { max_jitter: 0.1 },
                dt: 0.01,
                ..sample()
            }),
            "update_law"
        );
    }

    #[test]
    fn json_round_trip_and_defaults() {
        let s = sample();
        let text = serde_json::to_string_pretty(&s).unwrap();
        assert_eq!(serde_json::from_str::<Scenario>(&text).unwrap(), s);

        let minimal = r#"{
            "profile": {"accel_rate": 2, "brake_rate": 2, "limit_speed": 32},
            "levels": [16, 32], "controller": "sync", "sensing_period": 0.1,
            "setting": 2, "lead": {"motion": {"kind": "constant", "speed": 10}},
            "initial_gap": 50, "initial_speed": 0, "duration": 10, "dt": 0.01
        }"#;
        let m: Scenario = serde_json::from_str(minimal).unwrap();
        assert_eq!(m.tick_period, 0.005);
        assert_eq!(m.update_law, UpdateLaw::Periodic);
        assert_eq!(m.lead.brake_rate, 5.0);
        assert_eq!(m.setting, Setting::GapPlusLeadBraking);
        assert!(m.validate().is_ok());

        let unknown = minimal.replace("\"dt\"", "\"extra\": 1, \"dt\"");
        assert!(serde_json::from_str::<Scenario>(&unknown).is_err());
        let bad_setting = minimal.replace("\"setting\": 2", "\"setting\": 3");
        assert!(serde_json::from_str::<Scenario>(&bad_setting).is_err());
    }

    #[test]
    fn fingerprint_tracks_content() {
        let a = sample();
        assert_eq!(a.fingerprint(), sample().fingerprint());
        assert_eq!(a.fingerprint().len(), 16);
        assert_ne!(a.fingerprint(), Scenario { seed: 8, ..sample() }.fingerprint());
    }

    #[test]
    fn steady_window() {
        assert_eq!(sample().steady_from(), 60.0);
        let flat = Scenario {
            lead: LeadProfile::stationary(),
            ..sample()
        };
        assert_eq!(flat.steady_from(), 75.0);
    }
}
