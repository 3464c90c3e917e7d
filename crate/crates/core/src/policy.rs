//! The ideal control principle under continuous observation of the free
//! distance: the safety predicate, the maximal A/B target speed, the ladder
//! decision function and travel times of the three basic policies.

use thiserror::Error;

use crate::kinematics::{DistanceModel, KinematicProfile, KinematicsError, SpeedLadder};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error("free distance must be finite and non-negative, got {0}")]
    NegativeDistance(f64),
    #[error("speed {speed} m/s is unsafe for free distance {free_distance} m (braking needs {braking} m)")]
    Unsafe {
        speed: f64,
        free_distance: f64,
        braking: f64,
    },
    #[error("free distance {free_distance} m is below the braking bound {bound} m of level {level}")]
    BelowBrakingBound {
        level: usize,
        free_distance: f64,
        bound: f64,
    },
    #[error("level {level} is outside the ladder (top level {top})")]
    LevelOutOfRange { level: usize, top: usize },
    #[error("infeasible policy: {0}")]
    Infeasible(&'static str),
}

/// `B(V) <= F`.
pub fn is_safe(model: &impl DistanceModel, speed: f64, free_distance: f64) -> Result<bool, PolicyError> {
    check_distance(free_distance)?;
    Ok(model.stopping_distance(speed)? <= free_distance)
}

fn check_distance(free_distance: f64) -> Result<(), PolicyError> {
    if free_distance.is_finite() && free_distance >= 0.0 {
        Ok(())
    } else {
        Err(PolicyError::NegativeDistance(free_distance))
    }
}

fn require_safe(model: &impl DistanceModel, speed: f64, free_distance: f64) -> Result<(), PolicyError> {
    if is_safe(model, speed, free_distance)? {
        Ok(())
    } else {
        Err(PolicyError::Unsafe {
            speed,
            free_distance,
            braking: model.stopping_distance(speed)?,
        })
    }
}

/// Largest `v` with `A(V, v) + B(v) <= F`, capped at the limit speed.
///
/// For constant rates the constraint solves to
/// `v <= sqrt((2abF + bV^2) / (a + b))`.
pub fn max_target_speed(profile: &KinematicProfile, speed: f64, free_distance: f64) -> Result<f64, PolicyError> {
    require_safe(profile, speed, free_distance)?;
    let (a, b) = (profile.accel_rate(), profile.brake_rate());
    let unconstrained = ((2.0 * a * b * free_distance + b * speed * speed) / (a + b)).sqrt();
    Ok(unconstrained.clamp(speed, profile.limit_speed()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlAction {
    AccelerateToNext,
    BrakeToPrevious,
    Hold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlDecision {
    pub target_level: usize,
    pub action: ControlAction,
}

/// `Control(F, V)` for `V = v_level`.
///
/// Guards are threshold crossings (`F >= D_{i+1}`, `F <= B_i`) rather than the
/// point equalities of the continuous automaton, so the function is total on
/// sampled inputs. Braking is tested first.
pub fn ideal_control(ladder: &SpeedLadder, level: usize, free_distance: f64) -> Result<ControlDecision, PolicyError> {
    let top = ladder.top();
    if level > top {
        return Err(PolicyError::LevelOutOfRange { level, top });
    }
    check_distance(free_distance)?;
    let bound = ladder.brake_to_stop(level);
    if free_distance < bound {
        return Err(PolicyError::BelowBrakingBound {
            level,
            free_distance,
            bound,
        });
    }
    let decision = if level >= 1 && free_distance <= bound {
        ControlDecision {
            target_level: level - 1,
            action: ControlAction::BrakeToPrevious,
        }
    } else if level < top && free_distance >= ladder.ab_bound(level + 1) {
        ControlDecision {
            target_level: level + 1,
            action: ControlAction::AccelerateToNext,
        }
    } else {
        ControlDecision {
            target_level: level,
            action: ControlAction::Hold,
        }
    };
    Ok(decision)
}

/// The three basic ways of covering a free distance and stopping at its end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TravelPolicy {
    /// Accelerate to the maximal target speed, cruise if capped by the limit
    /// speed, then brake.
    AccelBrake,
    /// Hold the current speed, then brake.
    CruiseBrake,
    /// Brake to `low_speed`, accelerate back (never above the initial speed),
    /// cruise, then brake.
    BrakeAccel { low_speed: f64 },
}

/// Time to cover exactly `free_distance` from `speed` and stop at its end.
pub fn policy_travel_time(
    profile: &KinematicProfile,
    policy: TravelPolicy,
    speed: f64,
    free_distance: f64,
) -> Result<f64, PolicyError> {
    require_safe(profile, speed, free_distance)?;
    match policy {
        TravelPolicy::AccelBrake => accel_brake_time(profile, speed, free_distance),
        TravelPolicy::CruiseBrake => {
            let cruise = cruise_leg(free_distance - profile.stopping_distance(speed)?, free_distance)?;
            Ok(cruise_time(cruise, speed)? + profile.brake_time(speed, 0.0)?)
        }
        TravelPolicy::BrakeAccel { low_speed } => {
            if !(0.0..=speed).contains(&low_speed) {
                return Err(KinematicsError::BrakeDomain {
                    from: speed,
                    to: low_speed,
                    limit: profile.limit_speed(),
                }
                .into());
            }
            // B(V) <= F implies B(low) <= F - B(V, low); snap round-off.
            let remainder = free_distance - profile.brake_distance(speed, low_speed)?;
            let remainder = remainder.max(profile.stopping_distance(low_speed)?);
            let peak = max_target_speed(profile, low_speed, remainder)?.min(speed);
            let cruise = cruise_leg(
                remainder - profile.accel_distance(low_speed, peak)? - profile.stopping_distance(peak)?,
                free_distance,
            )?;
            Ok(profile.brake_time(speed, low_speed)?
                + profile.accel_time(low_speed, peak)?
                + cruise_time(cruise, peak)?
                + profile.brake_time(peak, 0.0)?)
        }
    }
}

fn accel_brake_time(profile: &KinematicProfile, speed: f64, free_distance: f64) -> Result<f64, PolicyError> {
    let peak = max_target_speed(profile, speed, free_distance)?;
    let cruise = cruise_leg(
        free_distance - profile.accel_distance(speed, peak)? - profile.stopping_distance(peak)?,
        free_distance,
    )?;
    Ok(profile.accel_time(speed, peak)? + cruise_time(cruise, peak)? + profile.brake_time(peak, 0.0)?)
}

// Absorbs round-off in a leg length that is zero in exact arithmetic.
fn cruise_leg(length: f64, scale: f64) -> Result<f64, PolicyError> {
    let tol = 1e-9 * scale.max(1.0);
    if length < -tol {
        Err(PolicyError::Infeasible("negative cruise leg"))
    } else if length < tol {
        Ok(0.0)
    } else {
        Ok(length)
    }
}

fn cruise_time(length: f64, speed: f64) -> Result<f64, PolicyError> {
    if length == 0.0 {
        Ok(0.0)
    } else if speed > 0.0 {
        Ok(length / speed)
    } else {
        Err(PolicyError::Infeasible(
            "cannot cover a positive distance at zero speed",
        ))
    }
}

/// Outcome of running the ideal ladder automaton against a fixed obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Traversal {
    pub time: f64,
    pub distance: f64,
    pub peak_level: usize,
    /// Free distance left when the vehicle comes to rest.
    pub remaining: f64,
}

/// Runs [`ideal_control`] with continuous observation against a stationary
/// obstacle `free_distance` ahead, starting at rest or cruising at
/// `start_level`, until the vehicle stops.
pub fn ideal_traversal(ladder: &SpeedLadder, start_level: usize, free_distance: f64) -> Result<Traversal, PolicyError> {
    let mut level = start_level;
    let mut f = free_distance;
    let mut time = 0.0;
    let mut peak_level = level;
    let tol = 1e-9 * free_distance.max(1.0);
    loop {
        // Distances land exactly on bounds in real arithmetic; snap round-off.
        if (f - ladder.brake_to_stop(level)).abs() <= tol {
            f = ladder.brake_to_stop(level);
        }
        let decision = ideal_control(ladder, level, f)?;
        match decision.action {
            ControlAction::AccelerateToNext => {
                let rung = ladder.rung(level + 1);
                f -= rung.step_accel;
                time += rung.step_accel_time;
                level += 1;
                peak_level = peak_level.max(level);
            }
            ControlAction::BrakeToPrevious => {
                let rung = ladder.rung(level);
                f -= rung.step_brake;
                time += rung.step_brake_time;
                level -= 1;
            }
            ControlAction::Hold if level == 0 => break,
            ControlAction::Hold => {
                // Cruise until the braking guard fires.
                let bound = ladder.brake_to_stop(level);
                time += (f - bound) / ladder.speed(level);
                f = bound;
            }
        }
    }
    Ok(Traversal {
        time,
        distance: free_distance - f,
        peak_level,
        remaining: f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> KinematicProfile {
        KinematicProfile::new(2.0, 2.0, 32.0).unwrap()
    }

    fn table_ladder() -> SpeedLadder {
        SpeedLadder::evenly_spaced(&p(), 8).unwrap()
    }

    fn bisect_target(profile: &KinematicProfile, speed: f64, f: f64) -> f64 {
        let total = |v: f64| profile.accel_distance(speed, v).unwrap() + profile.stopping_distance(v).unwrap();
        if total(profile.limit_speed()) <= f {
            return profile.limit_speed();
        }
        let (mut lo, mut hi) = (speed, profile.limit_speed());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if total(mid) <= f {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn safety_predicate() {
        assert!(is_safe(&p(), 16.0, 64.0).unwrap());
        assert!(is_safe(&p(), 0.0, 0.0).unwrap());
        assert!(!is_safe(&p(), 16.0, 63.9).unwrap());
        assert!(matches!(
            is_safe(&p(), 4.0, -1.0),
            Err(PolicyError::NegativeDistance(_))
        ));
        assert!(matches!(is_safe(&p(), 40.0, 1000.0), Err(PolicyError::Kinematics(_))));
    }

    #[test]
    fn max_target_examples() {
        assert_eq!(max_target_speed(&p(), 0.0, 8.0).unwrap(), 4.0);
        // D_8 = 316 is the A/B distance from v_7 = 28 to v_8 = 32.
        assert_eq!(max_target_speed(&p(), 28.0, 316.0).unwrap(), 32.0);
        // From rest, 316 m only reaches sqrt(632).
        assert!((max_target_speed(&p(), 0.0, 316.0).unwrap() - 632f64.sqrt()).abs() < 1e-12);
        assert_eq!(max_target_speed(&p(), 0.0, 600.0).unwrap(), 32.0);
        let v = max_target_speed(&p(), 5.0, 100.0).unwrap();
        assert!((v - bisect_target(&p(), 5.0, 100.0)).abs() < 1e-6);
        assert!(matches!(
            max_target_speed(&p(), 16.0, 10.0),
            Err(PolicyError::Unsafe { .. })
        ));
    }

    #[test]
    fn ideal_control_examples() {
        let ladder = table_ladder();
        assert_eq!(
            ideal_control(&ladder, 0, 8.0).unwrap(),
            ControlDecision {
                target_level: 1,
                action: ControlAction::AccelerateToNext
            }
        );
        assert_eq!(
            ideal_control(&ladder, 2, 20.0).unwrap(),
            ControlDecision {
                target_level: 2,
                action: ControlAction::Hold
            }
        );
        assert_eq!(
            ideal_control(&ladder, 1, 4.0).unwrap(),
            ControlDecision {
                target_level: 0,
                action: ControlAction::BrakeToPrevious
            }
        );
        assert_eq!(ideal_control(&ladder, 8, 1e6).unwrap().action, ControlAction::Hold);
        assert_eq!(ideal_control(&ladder, 0, 0.0).unwrap().action, ControlAction::Hold);
        assert!(matches!(
            ideal_control(&ladder, 4, 60.0),
            Err(PolicyError::BelowBrakingBound { level: 4, .. })
        ));
        assert!(matches!(
            ideal_control(&ladder, 9, 1e3),
            Err(PolicyError::LevelOutOfRange { .. })
        ));
    }

    #[test]
    fn travel_time_examples() {
        assert!((policy_travel_time(&p(), TravelPolicy::AccelBrake, 0.0, 8.0).unwrap() - 4.0).abs() < 1e-12);
        let legs = p().accel_time(0.0, 4.0).unwrap() + p().brake_time(4.0, 0.0).unwrap();
        assert_eq!(legs, 4.0);
        assert_eq!(
            policy_travel_time(&p(), TravelPolicy::CruiseBrake, 4.0, 4.0).unwrap(),
            2.0
        );

        let ab = policy_travel_time(&p(), TravelPolicy::AccelBrake, 4.0, 20.0).unwrap();
        let cb = policy_travel_time(&p(), TravelPolicy::CruiseBrake, 4.0, 20.0).unwrap();
        let ba = policy_travel_time(&p(), TravelPolicy::BrakeAccel { low_speed: 2.0 }, 4.0, 20.0).unwrap();
        // AB: v_M = sqrt(48); CB: 16/4 + 2; BA: 1 + 1 + 10/4 + 2.
        assert!((ab - (48f64.sqrt() - 4.0) / 2.0 - 48f64.sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(cb, 6.0);
        assert!((ba - 6.5).abs() < 1e-12);
        assert!(ab < cb && cb < ba);
    }

    #[test]
    fn travel_time_errors() {
        assert!(matches!(
            policy_travel_time(&p(), TravelPolicy::CruiseBrake, 0.0, 10.0),
            Err(PolicyError::Infeasible(_))
        ));
        assert!(policy_travel_time(&p(), TravelPolicy::BrakeAccel { low_speed: 5.0 }, 4.0, 20.0).is_err());
        assert!(matches!(
            policy_travel_time(&p(), TravelPolicy::AccelBrake, 8.0, 10.0),
            Err(PolicyError::Unsafe { .. })
        ));
    }

    #[test]
    fn traversal_from_rest() {
        // From rest against 400 m every level with v^2 <= 800 is reachable.
        let t = ideal_traversal(&table_ladder(), 0, 400.0).unwrap();
        assert_eq!(t.peak_level, 7);
        assert!(t.remaining.abs() < 1e-9);
        assert!((t.time - (14.0 + 400.0 / 28.0)).abs() < 1e-9);
        let coarse = ideal_traversal(&SpeedLadder::evenly_spaced(&p(), 2).unwrap(), 0, 400.0).unwrap();
        assert!((coarse.time - 33.0).abs() < 1e-9);
        // Too short to ever leave v_0.
        let stuck = ideal_traversal(&table_ladder(), 0, 7.0).unwrap();
        assert_eq!((stuck.time, stuck.distance), (0.0, 0.0));
    }

    proptest! {
        #[test]
        fn target_speed_fits(speed in 0.0f64..32.0, extra in 0.0f64..1500.0) {
            let f = p().stopping_distance(speed).unwrap() + extra;
            let v = max_target_speed(&p(), speed, f).unwrap();
            let used = p().accel_distance(speed, v).unwrap() + p().stopping_distance(v).unwrap();
            prop_assert!(v >= speed);
            prop_assert!(used <= f + 1e-9 * f.max(1.0));
            if v < 32.0 {
                prop_assert!((used - f).abs() <= 1e-6 * f.max(1.0));
            }
        }

        #[test]
        fn acceleration_keeps_next_level_safe(level in 0usize..8, f in 0.0f64..2000.0) {
            let ladder = table_ladder();
            prop_assume!(f >= ladder.brake_to_stop(level));
            let d = ideal_control(&ladder, level, f).unwrap();
            if d.action == ControlAction::AccelerateToNext {
                let after = f - ladder.rung(level + 1).step_accel;
                prop_assert!(after >= ladder.brake_to_stop(level + 1));
            }
            prop_assert!(d.target_level.abs_diff(level) <= 1);
        }
    }
}
