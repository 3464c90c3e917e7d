use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// How the lead vehicle moves. Speeds in m/s, times in s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LeadMotion {
    /// `v(t) = v0 + v0 * sin(2πt / period)`, ranging over `[0, 2 v0]`.
    Sinusoidal {
        base_speed: f64,
        period: f64,
    },
    Constant {
        speed: f64,
    },
    Stationary,
    /// Speed interpolated linearly between `(time, speed)` knots and held
    /// constant outside them.
    Piecewise {
        knots: Vec<[f64; 2]>,
    },
}

/// The lead vehicle: its motion law and the braking rate `b_f` assumed
/// when its braking distance is added to the free distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeadProfile {
    pub motion: LeadMotion,
    #[serde(default = "default_brake_rate")]
    pub brake_rate: f64,
}

fn default_brake_rate() -> f64 {
    5.0
}

impl LeadProfile {
    pub fn sinusoidal(base_speed: f64, period: f64, brake_rate: f64) -> Self {
        LeadProfile {
            motion: LeadMotion::Sinusoidal { base_speed, period },
            brake_rate,
        }
    }

    pub fn stationary() -> Self {
        LeadProfile {
            motion: LeadMotion::Stationary,
            brake_rate: default_brake_rate(),
        }
    }

    /// Problems with the parameters, as `(field, reason)`.
    pub fn check(&self) -> Result<(), (&'static str, String)> {
        let bad = |field, reason: &str| Err((field, reason.to_string()));
        if !(self.brake_rate.is_finite() && self.brake_rate > 0.0) {
            return bad("lead.brake_rate", "must be > 0");
        }
        match &self.motion {
            LeadMotion::Sinusoidal { base_speed, period } => {
                if !(base_speed.is_finite() && *base_speed >= 0.0) {
                    return bad("lead.motion.base_speed", "must be >= 0");
                }
                if !(period.is_finite() && *period > 0.0) {
                    return bad("lead.motion.period", "must be > 0");
                }
            }
            LeadMotion::Constant { speed } => {
                if !(speed.is_finite() && *speed >= 0.0) {
                    return bad("lead.motion.speed", "must be >= 0");
                }
            }
            LeadMotion::Stationary => {}
            LeadMotion::Piecewise { knots } => {
                if knots.is_empty() {
                    return bad("lead.motion.knots", "needs at least one knot");
                }
                for (i, [t, v]) in knots.iter().enumerate() {
                    if !(t.is_finite() && *t >= 0.0 && v.is_finite() && *v >= 0.0) {
                        return bad("lead.motion.knots", "times and speeds must be finite and >= 0");
                    }
                    if i > 0 && *t <= knots[i - 1][0] {
                        return bad("lead.motion.knots", "times must be strictly increasing");
                    }
                }
            }
        }
        Ok(())
    }

    /// Period of the speed law, for sinusoidal motion.
    pub fn period(&self) -> Option<f64> {
        match self.motion {
            LeadMotion::Sinusoidal { period, .. } => Some(period),
            _ => None,
        }
    }

    pub fn speed(&self, t: f64) -> f64 {
        match &self.motion {
            LeadMotion::Sinusoidal { base_speed, period } => {
                (base_speed + base_speed * (2.0 * PI * t / period).sin()).max(0.0)
            }
            LeadMotion::Constant { speed } => *speed,
            LeadMotion::Stationary => 0.0,
            LeadMotion::Piecewise { knots } => piecewise_speed(knots, t),
        }
    }

    /// Distance covered over `[0, t]`, in closed form.
    pub fn displacement(&self, t: f64) -> f64 {
        match &self.motion {
            LeadMotion::Sinusoidal { base_speed, period } => {
                let omega = 2.0 * PI / period;
                base_speed * t + base_speed / omega * (1.0 - (omega * t).cos())
            }
            LeadMotion::Constant { speed } => speed * t,
            LeadMotion::Stationary => 0.0,
            LeadMotion::Piecewise { knots } => piecewise_displacement(knots, t),
        }
    }

    /// Braking distance of the lead at time `t`: `v_f^2 / (2 b_f)`.
    pub fn braking_distance(&self, t: f64) -> f64 {
        let v = self.speed(t);
        v * v / (2.0 * self.brake_rate)
    }
}

/// Speed from the lead's motion law at `t`: `v_f(t)`.
pub fn lead_speed(profile: &LeadProfile, t: f64) -> f64 {
    profile.speed(t)
}

fn piecewise_speed(knots: &[[f64; 2]], t: f64) -> f64 {
    let first = knots[0];
    if t <= first[0] {
        return first[1];
    }
    for w in knots.windows(2) {
        let ([t0, v0], [t1, v1]) = (w[0], w[1]);
        if t <= t1 {
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
    }
    knots[knots.len() - 1][1]
}

fn piecewise_displacement(knots: &[[f64; 2]], t: f64) -> f64 {
    let [t_first, v_first] = knots[0];
    if t <= t_first {
        return v_first * t;
    }
    let mut x = v_first * t_first;
    for w in knots.windows(2) {
        let ([t0, v0], [t1, _]) = (w[0], w[1]);
        let end = t.min(t1);
        x += 0.5 * (v0 + piecewise_speed(knots, end)) * (end - t0);
        if t <= t1 {
            return x;
        }
    }
    let [t_last, v_last] = knots[knots.len() - 1];
    x + v_last * (t - t_last)
}
