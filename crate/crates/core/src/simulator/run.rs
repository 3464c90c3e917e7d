use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scenario::{ControllerKind, Scenario, ScenarioError, UpdateLaw};
use super::trace::{Metrics, Trace, TraceRecord};
use super::world::{free_distance, Maneuver, World, WorldState};
use crate::controllers::{
    estimate_brackets, ActuationCommand, AsyncController, ControllerError, ControllerEvent, IdealController, Mode,
    SyncController,
};
use crate::fmt::round9;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Controller(#[from] ControllerError),
}

/// Counters the trace cannot reconstruct.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Measurements delivered to the controller.
    pub updates: usize,
    /// Measurements that reached the asynchronous controller mid-maneuver.
    pub maneuver_updates: usize,
    /// Times the dead-reckoned estimate was compared with its reference.
    pub estimate_checks: usize,
    /// Comparisons where `F' <= x <= F' + ε` failed.
    pub estimate_violations: usize,
    /// Ticks at which the cruising estimate exceeded the true free distance.
    pub optimistic_estimates: usize,
}

/// One row of a sweep or reproduction table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub scenario_hash: String,
    pub seed: u64,
    #[serde(flatten)]
    pub metrics: Metrics,
    pub total_distance: f64,
    pub mean_speed: f64,
    #[serde(flatten)]
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Trace,
    pub metrics: Metrics,
    pub diagnostics: Diagnostics,
    /// Both vehicles at the last sample.
    pub final_state: WorldState,
    pub summary: RunSummary,
}

#[derive(Debug, Clone)]
enum Active {
    Sync(SyncController),
    Async(AsyncController),
    Ideal(IdealController),
}

impl Active {
    fn step(&mut self, event: ControllerEvent) -> Result<Option<ActuationCommand>, ControllerError> {
        match self {
            Active::Sync(c) => c.step(event),
            Active::Async(c) => c.step(event),
            Active::Ideal(c) => c.step(event),
        }
    }

    fn mode(&self) -> Mode {
        match self {
            Active::Sync(c) => c.mode(),
            Active::Async(c) => c.mode(),
            Active::Ideal(c) => c.mode(),
        }
    }
}

/// Measurement delivery times.
struct Updates {
    period: f64,
    jitter: Option<(f64, ChaCha8Rng)>,
    count: u64,
    next: f64,
}

impl Updates {
    fn new(period: f64, law: UpdateLaw, seed: u64) -> Self {
        let jitter = match law {
            UpdateLaw::Periodic => None,
            UpdateLaw::Jittered { max_jitter } => Some((max_jitter, ChaCha8Rng::seed_from_u64(seed))),
        };
        Updates {
            period,
            jitter,
            count: 0,
            next: 0.0,
        }
    }

    fn advance(&mut self) {
        self.count += 1;
        self.next = match &mut self.jitter {
            None => self.count as f64 * self.period,
            Some((max, rng)) => self.next + self.period + rng.random_range(0.0..=*max),
        };
    }
}

/// Periodic ticks counted from the last cruising update, mode change or
/// maneuver start.
struct Ticks {
    period: f64,
    origin: f64,
    count: u64,
    armed: bool,
}

impl Ticks {
    fn next(&self) -> Option<f64> {
        self.armed.then_some(self.origin + self.count as f64 * self.period)
    }

    fn arm(&mut self, at: f64) {
        self.origin = at;
        self.count = 1;
        self.armed = true;
    }
}

/// The free distance last observed, carried forward by ego travel.
struct Reference {
    distance: f64,
    ego_position: f64,
}

impl Reference {
    fn at(&self, world: &World) -> f64 {
        self.distance - (world.state().ego_position - self.ego_position)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    Completion,
    Update,
    Tick,
    Sample,
}

/// Run a scenario to completion.
///
/// The loop is event driven: maneuver completions, measurement deliveries
/// and controller ticks are handled at their exact times, in that order when
/// they coincide, and the trace is sampled every `dt` without influencing the
/// run. The ideal controller is instead fed the true free distance at every
/// sample.
pub fn run_scenario(scenario: &Scenario) -> Result<RunOutput, SimError> {
    let plan = scenario.validate()?;
    let lead_brake = scenario.lead.brake_rate;
    let mut world = World::new(
        scenario.profile,
        scenario.lead.clone(),
        scenario.initial_gap,
        scenario.initial_speed,
    );
    let sense = |w: &World| free_distance(&w.state(), scenario.setting, lead_brake);
    let f0 = sense(&world);
    let mut controller = match scenario.controller {
        ControllerKind::Sync => Active::Sync(SyncController::new(
            plan.ladder.clone(),
            scenario.sensing_period,
            plan.initial_level,
            f0,
        )?),
        ControllerKind::Async => Active::Async(AsyncController::new(
            plan.ladder.clone(),
            scenario.tick_period,
            plan.initial_level,
            f0,
        )?),
        ControllerKind::Ideal => Active::Ideal(IdealController::new(plan.ladder.clone(), plan.initial_level, f0)?),
    };
    let horizon = match &controller {
        Active::Async(c) => c.ladder().horizon(),
        _ => 0.0,
    };

    let mut updates = (scenario.controller != ControllerKind::Ideal)
        .then(|| Updates::new(scenario.sensing_period, scenario.update_law, scenario.seed));
    let mut ticks = Ticks {
        period: scenario.tick_period,
        origin: 0.0,
        count: 1,
        armed: scenario.controller == ControllerKind::Async,
    };
    let mut reference = Reference {
        distance: f0,
        ego_position: 0.0,
    };
    let mut diagnostics = Diagnostics::default();
    let mut records = Vec::with_capacity(plan.samples);
    let mut sensed = f0;
    let mut pending: Option<ActuationCommand> = None;
    let t_last = (plan.samples - 1) as f64 * scenario.dt;
    let mut sample = 0usize;

    let check = |d: &mut Diagnostics, estimate: f64, x: f64| {
        d.estimate_checks += 1;
        if !estimate_brackets(estimate, horizon, x) {
            d.estimate_violations += 1;
        }
    };
    let issue = |world: &mut World, pending: &mut Option<ActuationCommand>, cmd: Option<ActuationCommand>| {
        if let Some(cmd) = cmd {
            world.actuate(cmd);
            if pending.is_none_or(|p| p.is_hold() && !cmd.is_hold()) {
                *pending = Some(cmd);
            }
        }
    };

    loop {
        let candidates = [
            world.pending_completion().map(|t| (t, Event::Completion)),
            updates.as_ref().map(|u| (u.next, Event::Update)),
            ticks.next().map(|t| (t, Event::Tick)),
            (sample < plan.samples).then_some((sample as f64 * scenario.dt, Event::Sample)),
        ];
        let Some((t, event)) = candidates
            .into_iter()
            .flatten()
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        else {
            break;
        };
        if t > t_last {
            break;
        }
        let completion = world.advance_to(t);
        let mode_before = controller.mode();
        match event {
            Event::Completion => {
                let done = completion.expect("completion due");
                let ev = match done.maneuver {
                    Maneuver::Accelerate => ControllerEvent::AccelComplete,
                    Maneuver::Brake => ControllerEvent::BrakeComplete,
                };
                let cmd = controller.step(ev)?;
                issue(&mut world, &mut pending, cmd);
                if let Active::Async(c) = &controller {
                    check(&mut diagnostics, c.estimate(), reference.at(&world));
                    ticks.arm(t);
                }
            }
            Event::Update => {
                let f = sense(&world);
                sensed = f;
                diagnostics.updates += 1;
                let cmd = controller.step(ControllerEvent::UpdateF(f))?;
                issue(&mut world, &mut pending, cmd);
                if let Active::Async(_) = &controller {
                    reference = Reference {
                        distance: f,
                        ego_position: world.state().ego_position,
                    };
                    if mode_before.is_cruise() {
                        ticks.arm(t);
                    }
                }
                if let Some(u) = updates.as_mut() {
                    u.advance();
                }
            }
            Event::Tick => {
                let cmd = controller.step(ControllerEvent::Tick)?;
                issue(&mut world, &mut pending, cmd);
                if let Active::Async(c) = &controller {
                    if mode_before.is_cruise() {
                        check(&mut diagnostics, c.estimate(), reference.at(&world));
                        let truth = sense(&world);
                        if c.estimate() > truth + 1e-9 * truth.max(1.0) {
                            diagnostics.optimistic_estimates += 1;
                        }
                    }
                    if c.mode() == mode_before {
                        ticks.count += 1;
                    } else {
                        ticks.arm(t);
                    }
                }
            }
            Event::Sample => {
                if let Active::Ideal(_) = controller {
                    let f = sense(&world);
                    sensed = f;
                    diagnostics.updates += 1;
                    let cmd = controller.step(ControllerEvent::UpdateF(f))?;
                    issue(&mut world, &mut pending, cmd);
                }
                let s = world.state();
                // Stored at file precision so a written trace replays exactly.
                records.push(TraceRecord {
                    t: round9(t),
                    ego_speed: round9(s.ego_speed),
                    lead_speed: round9(s.lead_speed),
                    gap: round9(s.gap()),
                    sensed_f: round9(sensed),
                    mode: controller.mode(),
                    command: pending.take(),
                });
                sample += 1;
            }
        }
    }

    if let Active::Async(c) = &controller {
        diagnostics.maneuver_updates = c.maneuver_updates();
    }
    let final_state = world.state();
    let metrics = Metrics::from_records(&records, scenario.steady_from());
    let trace = Trace {
        scenario_hash: scenario.fingerprint(),
        seed: scenario.seed,
        records,
    };
    let summary = RunSummary {
        name: scenario.name.clone(),
        scenario_hash: trace.scenario_hash.clone(),
        seed: scenario.seed,
        metrics,
        total_distance: final_state.ego_position,
        mean_speed: if final_state.time > 0.0 {
            final_state.ego_position / final_state.time
        } else {
            scenario.initial_speed
        },
        diagnostics,
    };
    Ok(RunOutput {
        trace,
        metrics,
        diagnostics,
        final_state,
        summary,
    })
}
