//! A closed-loop run behind a sinusoidal lead, sensing the plain gap.

use safe_ladder::experiment::paper_scenario;
use safe_ladder::simulator::{run_scenario, ControllerKind, Setting};

fn main() -> anyhow::Result<()> {
    for lead_period in [10.0, 20.0, 30.0] {
        let scenario = paper_scenario(ControllerKind::Sync, Setting::Gap, lead_period, 8, 0.02);
        let out = run_scenario(&scenario)?;
        let m = &out.metrics;
        println!(
            "T_f={lead_period:>4}: min gap {:>7.3} m, steady gap [{:.3}, {:.3}] m, max speed {} m/s, collision {}",
            m.min_gap, m.steady_min_gap, m.steady_max_gap, m.max_ego_speed, m.collision
        );
    }
    Ok(())
}
