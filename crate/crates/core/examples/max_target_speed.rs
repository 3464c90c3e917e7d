//! Maximal A/B target speed and the travel time of the three basic policies
//! over the same free distance.

use safe_ladder::kinematics::KinematicProfile;
use safe_ladder::policy::{max_target_speed, policy_travel_time, TravelPolicy};

fn main() -> anyhow::Result<()> {
    let profile = KinematicProfile::new(2.0, 2.0, 32.0)?;
    for (speed, free) in [(0.0, 100.0), (10.0, 100.0), (28.0, 316.0), (20.0, 400.0)] {
        let v_max = max_target_speed(&profile, speed, free)?;
        let ab = policy_travel_time(&profile, TravelPolicy::AccelBrake, speed, free)?;
        print!("V={speed:>4} F={free:>5}: v_M={v_max:>8.4}  AB={ab:>8.4}s");
        // Cruising and re-accelerating below the initial speed need V > 0.
        if speed > 0.0 {
            let cb = policy_travel_time(&profile, TravelPolicy::CruiseBrake, speed, free)?;
            print!("  CB={cb:>8.4}s");
            let ba = policy_travel_time(
                &profile,
                TravelPolicy::BrakeAccel { low_speed: speed / 2.0 },
                speed,
                free,
            )?;
            print!("  BA(V/2)={ba:>8.4}s");
        }
        println!();
    }
    Ok(())
}
