use super::{
    check_initial, check_measurement, check_period, ActuationCommand, AdjustedLadder, ControllerError, ControllerEvent,
    Mode,
};
use crate::kinematics::SpeedLadder;

/// Controller receiving sporadic free-distance measurements, dead-reckoning
/// `F'` in between.
///
/// - `Tick` while cruising at `v_i`: `F' -= v_i * Δt`, then evaluate guards.
/// - `UpdateF(F)` while cruising: `F' := F`, pass through `Upd` and dispatch.
/// - `ca` / `cb`: `F' -= A(v_i, v_j)` / `B(v_i, v_j)`, then evaluate guards.
///
/// During a maneuver, ticks only count elapsed time and `UpdateF` refreshes
/// `F'` without aborting the maneuver. The completion correction then
/// subtracts only what remains of the maneuver after the refresh, assuming
/// constant-rate speed changes and rounding the elapsed time down to whole
/// ticks. The estimate stays within `[x - ε, x]` either way, provided ticks
/// are counted from the start of the maneuver.
#[derive(Debug, Clone, PartialEq)]
pub struct AsyncController {
    ladder: AdjustedLadder,
    tick_period: f64,
    mode: Mode,
    estimate: f64,
    maneuver_ticks: u64,
    refreshed_at: Option<u64>,
    maneuver_updates: usize,
}

impl AsyncController {
    /// The horizon is `ε = v_n * Δt`.
    pub fn new(
        ladder: SpeedLadder,
        tick_period: f64,
        initial_level: usize,
        initial_distance: f64,
    ) -> Result<Self, ControllerError> {
        check_period("tick period", tick_period)?;
        check_initial(&ladder, initial_level, initial_distance)?;
        let horizon = ladder.top_speed() * tick_period;
        Ok(AsyncController {
            ladder: AdjustedLadder::new(ladder, horizon)?,
            tick_period,
            mode: Mode::Cruise(initial_level),
            estimate: initial_distance,
            maneuver_ticks: 0,
            refreshed_at: None,
            maneuver_updates: 0,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Dead-reckoned free distance `F'`.
    pub fn estimate(&self) -> f64 {
        self.estimate
    }

    pub fn ladder(&self) -> &AdjustedLadder {
        &self.ladder
    }

    pub fn tick_period(&self) -> f64 {
        self.tick_period
    }

    /// Measurements received while accelerating or braking.
    pub fn maneuver_updates(&self) -> usize {
        self.maneuver_updates
    }

    fn evaluate(&mut self, level: usize) -> ActuationCommand {
        let (next, cmd) = self.ladder.dispatch(level, self.estimate);
        self.mode = next;
        self.maneuver_ticks = 0;
        self.refreshed_at = None;
        cmd
    }

    /// Distance still to cover in the maneuver `from -> to` after a refresh
    /// taken `ticks` ticks into it.
    fn remaining(&self, from: usize, to: usize) -> f64 {
        let base = self.ladder.base();
        let (total, duration) = if to > from {
            let time: f64 = base.rungs()[from + 1..=to].iter().map(|r| r.step_accel_time).sum();
            (base.accel_between(from, to), time)
        } else {
            let time: f64 = base.rungs()[to + 1..=from].iter().map(|r| r.step_brake_time).sum();
            (base.brake_between(from, to), time)
        };
        let Some(ticks) = self.refreshed_at else {
            return total;
        };
        let tau = (ticks as f64 * self.tick_period).min(duration);
        let (v0, v1) = (base.speed(from), base.speed(to));
        let covered = v0 * tau + 0.5 * (v1 - v0) / duration * tau * tau;
        (total - covered).max(0.0)
    }

    pub fn step(&mut self, event: ControllerEvent) -> Result<Option<ActuationCommand>, ControllerError> {
        let base = self.ladder.base();
        match (event, self.mode) {
            (ControllerEvent::Tick, Mode::Cruise(level)) => {
                self.estimate -= base.speed(level) * self.tick_period;
                Ok(Some(self.evaluate(level)))
            }
            (ControllerEvent::Tick, _) => {
                self.maneuver_ticks += 1;
                Ok(None)
            }
            (ControllerEvent::UpdateF(f), Mode::Cruise(level)) => {
                check_measurement(f)?;
                self.estimate = f;
                self.mode = Mode::Update(level);
                Ok(Some(self.evaluate(level)))
            }
            (ControllerEvent::UpdateF(f), _) => {
                check_measurement(f)?;
                self.estimate = f;
                self.refreshed_at = Some(self.maneuver_ticks);
                self.maneuver_updates += 1;
                Ok(None)
            }
            (ControllerEvent::AccelComplete, Mode::Accelerating { from, to })
            | (ControllerEvent::BrakeComplete, Mode::Braking { from, to }) => {
                self.estimate -= self.remaining(from, to);
                Ok(Some(self.evaluate(to)))
            }
            (event, mode) => Err(ControllerError::Protocol { event, mode }),
        }
    }

    /// Dead-reckoning soundness while cruising: `F' <= x <= F' + ε`, where
    /// `x` is the free distance to the obstacle as last observed, less the
    /// distance travelled since. Vacuously true outside `Csp`.
    pub fn estimate_is_sound(&self, reference_distance: f64) -> bool {
        estimate_is_sound(self.mode, self.estimate, self.ladder.horizon(), reference_distance)
    }
}

pub(crate) fn estimate_is_sound(mode: Mode, estimate: f64, horizon: f64, reference: f64) -> bool {
    !mode.is_cruise() || estimate_brackets(estimate, horizon, reference)
}

/// `estimate <= reference <= estimate + horizon`, up to round-off.
pub fn estimate_brackets(estimate: f64, horizon: f64, reference: f64) -> bool {
    let tol = 1e-9 * reference.abs().max(1.0);
    estimate <= reference + tol && reference <= estimate + horizon + tol
}
