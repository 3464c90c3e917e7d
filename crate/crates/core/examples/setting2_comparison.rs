//! Sensing the gap plus the lead's braking distance lets the follower close
//! in further.

use safe_ladder::experiment::paper_scenario;
use safe_ladder::simulator::{run_scenario, ControllerKind, Setting};

fn main() -> anyhow::Result<()> {
    for controller in [ControllerKind::Sync, ControllerKind::Async] {
        for lead_period in [20.0, 30.0] {
            let steady = |setting| -> anyhow::Result<f64> {
                let s = paper_scenario(controller, setting, lead_period, 8, 0.02);
                Ok(run_scenario(&s)?.metrics.steady_min_gap)
            };
            println!(
                "{controller:?} T_f={lead_period}: steady min gap {:.3} m (gap) vs {:.3} m (gap + lead braking)",
                steady(Setting::Gap)?,
                steady(Setting::GapPlusLeadBraking)?
            );
        }
    }
    Ok(())
}
