//! Closed-loop simulation of a controlled ego vehicle behind a lead vehicle.

mod lead;
mod run;
mod scenario;
mod trace;
mod world;

pub use lead::{lead_speed, LeadMotion, LeadProfile};
pub use run::{run_scenario, Diagnostics, RunOutput, RunSummary, SimError};
pub use scenario::{ControllerKind, Plan, Scenario, ScenarioError, UpdateLaw};
pub use trace::{Metrics, Trace, TraceRecord};
pub use world::{free_distance, Completion, Maneuver, Setting, World, WorldState};
