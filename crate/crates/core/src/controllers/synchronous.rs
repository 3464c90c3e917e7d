use super::{
    check_initial, check_measurement, check_period, ActuationCommand, AdjustedLadder, ControllerError, ControllerEvent,
    Mode,
};
use crate::kinematics::SpeedLadder;

/// Controller driven by periodic free-distance measurements with period `T`.
///
/// Guards are evaluated only on `UpdateF` while cruising, with horizon
/// `ε = v_n * T`. Measurements that arrive during a maneuver refresh `F'`
/// without changing the mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncController {
    ladder: AdjustedLadder,
    period: f64,
    mode: Mode,
    estimate: f64,
}

impl SyncController {
    pub fn new(
        ladder: SpeedLadder,
        period: f64,
        initial_level: usize,
        initial_distance: f64,
    ) -> Result<Self, ControllerError> {
        check_period("sensing period", period)?;
        check_initial(&ladder, initial_level, initial_distance)?;
        // D_i - v_i * T >= B_i: a cruising vehicle cannot cross the braking
        // threshold within one period.
        for level in 1..=ladder.top() {
            let rung = ladder.rung(level);
            let travelled = rung.speed * period;
            if rung.step_accel < travelled {
                return Err(ControllerError::PeriodTooLarge {
                    level,
                    period,
                    travelled,
                    step: rung.step_accel,
                });
            }
        }
        let horizon = ladder.top_speed() * period;
        Ok(SyncController {
            ladder: AdjustedLadder::new(ladder, horizon)?,
            period,
            mode: Mode::Cruise(initial_level),
            estimate: initial_distance,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Most recent measurement `F'`.
    pub fn estimate(&self) -> f64 {
        self.estimate
    }

    pub fn ladder(&self) -> &AdjustedLadder {
        &self.ladder
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn step(&mut self, event: ControllerEvent) -> Result<Option<ActuationCommand>, ControllerError> {
        match (event, self.mode) {
            (ControllerEvent::UpdateF(f), mode) => {
                check_measurement(f)?;
                self.estimate = f;
                match mode {
                    Mode::Cruise(level) => {
                        let (next, cmd) = self.ladder.dispatch(level, f);
                        self.mode = next;
                        Ok(Some(cmd))
                    }
                    _ => Ok(None),
                }
            }
            (ControllerEvent::AccelComplete, Mode::Accelerating { to, .. })
            | (ControllerEvent::BrakeComplete, Mode::Braking { to, .. }) => {
                self.mode = Mode::Cruise(to);
                Ok(Some(ActuationCommand::HoldSpeed {
                    at: self.ladder.base().speed(to),
                }))
            }
            (event, mode) => Err(ControllerError::Protocol { event, mode }),
        }
    }
}
