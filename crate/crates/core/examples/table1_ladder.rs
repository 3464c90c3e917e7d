//! Braking, acceleration and A/B bounds of the 8-level ladder with
//! `a = b = 2`, `v_L = 32`.

use safe_ladder::kinematics::{KinematicProfile, SpeedLadder};

fn main() -> anyhow::Result<()> {
    let profile = KinematicProfile::new(2.0, 2.0, 32.0)?;
    let ladder = SpeedLadder::evenly_spaced(&profile, 8)?;
    println!("{:>3} {:>6} {:>8} {:>8} {:>8}", "i", "v_i", "B_i", "A_i", "D_i");
    for (i, rung) in ladder.rungs().iter().enumerate().skip(1) {
        println!(
            "{:>3} {:>6} {:>8} {:>8} {:>8}",
            i, rung.speed, rung.brake_to_stop, rung.step_accel, rung.ab_bound
        );
    }
    Ok(())
}
