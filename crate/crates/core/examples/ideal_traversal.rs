//! Time for the ideal ladder controller to cover 400 m from rest and stop,
//! as a function of the number of speed levels.

use safe_ladder::kinematics::{KinematicProfile, SpeedLadder};
use safe_ladder::policy::ideal_traversal;

fn main() -> anyhow::Result<()> {
    let profile = KinematicProfile::new(2.0, 2.0, 32.0)?;
    for n in [1, 2, 4, 6, 8, 16] {
        let ladder = SpeedLadder::evenly_spaced(&profile, n)?;
        let t = ideal_traversal(&ladder, 0, 400.0)?;
        println!(
            "n={n:>2}: {:>9.4} s, peak {:>6.3} m/s, stopped {:.4} m short",
            t.time,
            ladder.speed(t.peak_level),
            t.remaining
        );
    }
    Ok(())
}
