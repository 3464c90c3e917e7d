use super::{check_initial, check_measurement, ActuationCommand, ControllerError, ControllerEvent, Mode};
use crate::kinematics::SpeedLadder;
use crate::policy::{ideal_control, ControlAction, PolicyError};

/// The ideal principle fed with ground-truth samples.
///
/// It uses the un-inflated bounds `D_i` and `B_i`, so it is only safe in the
/// limit of continuous observation. A sample that lands below `B_i` (the
/// threshold was crossed between samples) still brakes one level.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealController {
    ladder: SpeedLadder,
    mode: Mode,
}

impl IdealController {
    pub fn new(ladder: SpeedLadder, initial_level: usize, initial_distance: f64) -> Result<Self, ControllerError> {
        check_initial(&ladder, initial_level, initial_distance)?;
        Ok(IdealController {
            ladder,
            mode: Mode::Cruise(initial_level),
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn ladder(&self) -> &SpeedLadder {
        &self.ladder
    }

    pub fn step(&mut self, event: ControllerEvent) -> Result<Option<ActuationCommand>, ControllerError> {
        match (event, self.mode) {
            (ControllerEvent::UpdateF(f), Mode::Cruise(level)) => {
                check_measurement(f)?;
                let action = match ideal_control(&self.ladder, level, f) {
                    Ok(decision) => decision.action,
                    Err(PolicyError::BelowBrakingBound { .. }) if level > 0 => ControlAction::BrakeToPrevious,
                    Err(_) => ControlAction::Hold,
                };
                let cmd = match action {
                    ControlAction::AccelerateToNext => {
                        self.mode = Mode::Accelerating {
                            from: level,
                            to: level + 1,
                        };
                        ActuationCommand::Accelerate {
                            to: self.ladder.speed(level + 1),
                        }
                    }
                    ControlAction::BrakeToPrevious => {
                        self.mode = Mode::Braking {
                            from: level,
                            to: level - 1,
                        };
                        ActuationCommand::Brake {
                            to: self.ladder.speed(level - 1),
                        }
                    }
                    ControlAction::Hold => ActuationCommand::HoldSpeed {
                        at: self.ladder.speed(level),
                    },
                };
                Ok(Some(cmd))
            }
            (ControllerEvent::UpdateF(f), _) => {
                check_measurement(f)?;
                Ok(None)
            }
            (ControllerEvent::AccelComplete, Mode::Accelerating { to, .. })
            | (ControllerEvent::BrakeComplete, Mode::Braking { to, .. }) => {
                self.mode = Mode::Cruise(to);
                Ok(Some(ActuationCommand::HoldSpeed {
                    at: self.ladder.speed(to),
                }))
            }
            (event, mode) => Err(ControllerError::Protocol { event, mode }),
        }
    }
}
