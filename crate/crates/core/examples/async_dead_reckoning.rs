//! The internal-clock controller decrements its estimate every tick, refreshes
//! it on each measurement and settles the maneuver distance on completion.

use safe_ladder::controllers::{AsyncController, ControllerEvent};
use safe_ladder::kinematics::{KinematicProfile, SpeedLadder};

fn main() -> anyhow::Result<()> {
    let ladder = SpeedLadder::evenly_spaced(&KinematicProfile::new(2.0, 2.0, 32.0)?, 8)?;
    let mut c = AsyncController::new(ladder, 0.005, 2, 57.0)?;
    println!(
        "epsilon = {} m, D'_3 = {} m",
        c.ladder().horizon(),
        c.ladder().accel_bound(3)
    );
    for k in 1..=4 {
        let cmd = c.step(ControllerEvent::Tick)?;
        println!("tick {k}: F' = {:.3} m, {cmd:?}, mode {}", c.estimate(), c.mode());
    }
    let cmd = c.step(ControllerEvent::UpdateF(60.0))?;
    println!("update 60: F' = {:.3} m, {cmd:?}, mode {}", c.estimate(), c.mode());

    // 8 -> 12 m/s at 2 m/s^2 takes 2 s, i.e. 400 ticks.
    for _ in 0..200 {
        c.step(ControllerEvent::Tick)?;
    }
    let cmd = c.step(ControllerEvent::UpdateF(50.0))?;
    println!(
        "update 50 halfway: F' = {:.3} m, {cmd:?}, mode {}",
        c.estimate(),
        c.mode()
    );
    for _ in 0..200 {
        c.step(ControllerEvent::Tick)?;
    }
    let cmd = c.step(ControllerEvent::AccelComplete)?;
    println!("completion: F' = {:.3} m, {cmd:?}, mode {}", c.estimate(), c.mode());
    Ok(())
}
