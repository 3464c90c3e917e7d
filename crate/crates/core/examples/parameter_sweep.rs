//! Expands a scenario over two axes and runs the grid in parallel.

use safe_ladder::experiment::{expand, paper_scenario, run_grid, Axis};
use safe_ladder::simulator::{ControllerKind, Setting};

fn main() -> anyhow::Result<()> {
    let template = paper_scenario(ControllerKind::Sync, Setting::Gap, 20.0, 8, 0.02);
    let axes: Vec<Axis> = ["ladder_size=2,4,6,8", "sensing_period=0.02,0.1"]
        .iter()
        .map(|a| a.parse())
        .collect::<Result<_, _>>()?;
    let points = expand(&template, &axes)?;
    for row in run_grid(&points, 4, None)? {
        match (&row.summary, &row.error) {
            (Some(s), _) => println!(
                "{:<40} steady min gap {:>8.3} m, mean speed {:>6.3} m/s",
                row.label, s.metrics.steady_min_gap, s.mean_speed
            ),
            (None, Some(e)) => println!("{:<40} {e}", row.label),
            (None, None) => unreachable!(),
        }
    }
    Ok(())
}
