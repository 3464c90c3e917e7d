//! Drives the periodic-sensing controller by hand and prints each command.

use safe_ladder::controllers::{ControllerEvent, SyncController};
use safe_ladder::kinematics::{KinematicProfile, SpeedLadder};

fn main() -> anyhow::Result<()> {
    let ladder = SpeedLadder::evenly_spaced(&KinematicProfile::new(2.0, 2.0, 32.0)?, 8)?;
    let mut c = SyncController::new(ladder, 0.02, 0, 5.0)?;
    println!(
        "epsilon = {} m, D'_1 = {} m",
        c.ladder().horizon(),
        c.ladder().accel_bound(1)
    );
    let events = [
        ControllerEvent::UpdateF(8.0),
        ControllerEvent::UpdateF(9.0),
        ControllerEvent::UpdateF(8.5),
        ControllerEvent::AccelComplete,
        ControllerEvent::UpdateF(30.0),
        ControllerEvent::AccelComplete,
        ControllerEvent::UpdateF(17.0),
        ControllerEvent::BrakeComplete,
        ControllerEvent::UpdateF(4.5),
        ControllerEvent::BrakeComplete,
    ];
    for e in events {
        let cmd = c.step(e)?;
        println!("{e:?} -> {cmd:?}, mode {}", c.mode());
    }
    match SyncController::new(
        SpeedLadder::evenly_spaced(&KinematicProfile::new(2.0, 2.0, 32.0)?, 8)?,
        10.0,
        0,
        5.0,
    ) {
        Ok(_) => println!("T = 10 accepted"),
        Err(e) => println!("T = 10 rejected: {e}"),
    }
    Ok(())
}
