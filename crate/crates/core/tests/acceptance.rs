//! Acceptance gate: one pass/fail line per criterion, nonzero exit on failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use safe_ladder::experiment::{
    load_scenario, paper_scenario, reproduce_paper, write_trace, Outcome, PaperConfig, Verdict,
};
use safe_ladder::kinematics::{DistanceModel, KinematicProfile, SpeedLadder};
use safe_ladder::policy::{ideal_traversal, max_target_speed, policy_travel_time, TravelPolicy};
use safe_ladder::simulator::{run_scenario, ControllerKind, Scenario, Setting};

const RELATIVE_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-6;
const POSITION_TOL: f64 = 1e-9;

struct Criterion {
    name: &'static str,
    budget: Duration,
    check: fn() -> Result<String, String>,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            name: "1 ladder table exact",
            budget: Duration::from_secs(1),
            check: ladder_table,
        },
        Criterion {
            name: "2 kinematic algebra",
            budget: Duration::from_secs(5),
            check: kinematic_algebra,
        },
        Criterion {
            name: "3 max target speed vs bisection",
            budget: Duration::from_secs(5),
            check: target_speed_oracle,
        },
        Criterion {
            name: "4 policy ordering AB <= CB <= BA",
            budget: Duration::from_secs(10),
            check: policy_ordering,
        },
        Criterion {
            name: "5 traversal time vs ladder size",
            budget: Duration::from_secs(5),
            check: traversal_monotonicity,
        },
        Criterion {
            name: "6 closed-loop safety sweep",
            budget: Duration::from_secs(120),
            check: safety_sweep,
        },
        Criterion {
            name: "7 experiment trends",
            budget: Duration::from_secs(120),
            check: experiment_trends,
        },
        Criterion {
            name: "8 determinism and dt robustness",
            budget: Duration::from_secs(60),
            check: determinism,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.check)();
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(d) if elapsed <= c.budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {:?} budget", c.budget)),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "[{}] {} ({:.2} s): {}",
            if ok { "PASS" } else { "FAIL" },
            c.name,
            elapsed.as_secs_f64(),
            detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn paper_profile() -> KinematicProfile {
    KinematicProfile::new(2.0, 2.0, 32.0).unwrap()
}

fn close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
}

fn ladder_table() -> Result<String, String> {
    let ladder = SpeedLadder::evenly_spaced(&paper_profile(), 8).map_err(|e| e.to_string())?;
    let brake = [4.0, 16.0, 36.0, 64.0, 100.0, 144.0, 196.0, 256.0];
    let accel = [4.0, 12.0, 20.0, 28.0, 36.0, 44.0, 52.0, 60.0];
    let bound = [8.0, 28.0, 56.0, 92.0, 136.0, 188.0, 248.0, 316.0];
    let mut matched = 0;
    for i in 1..=8 {
        let r = ladder.rung(i);
        for (got, want, label) in [
            (r.brake_to_stop, brake[i - 1], "B"),
            (r.step_accel, accel[i - 1], "A"),
            (r.ab_bound, bound[i - 1], "D"),
        ] {
            if got != want {
                return Err(format!("{label}_{i} = {got}, expected {want}"));
            }
            matched += 1;
        }
    }
    Ok(format!("{matched}/24 values exact"))
}

fn random_profile(rng: &mut ChaCha8Rng) -> KinematicProfile {
    KinematicProfile::new(
        rng.random_range(0.5..10.0),
        rng.random_range(0.5..10.0),
        rng.random_range(5.0..60.0),
    )
    .unwrap()
}

fn kinematic_algebra() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let err = |e: safe_ladder::kinematics::KinematicsError| e.to_string();
    let triples = 20_000;
    for k in 0..triples {
        let p = random_profile(&mut rng);
        let mut v = [0.0; 3].map(|_| rng.random_range(0.0..=p.limit_speed()));
        v.sort_by(|a, b| b.total_cmp(a));
        let [hi, mid, lo] = v;
        let (a, b) = (p.accel_rate(), p.brake_rate());

        let brake = p.brake_distance(hi, mid).map_err(err)? + p.brake_distance(mid, lo).map_err(err)?;
        let whole = p.brake_distance(hi, lo).map_err(err)?;
        if !close(brake, whole, RELATIVE_TOL) || !close(whole, (hi * hi - lo * lo) / (2.0 * b), RELATIVE_TOL) {
            return Err(format!("braking additivity fails at triple {k}: ({hi}, {mid}, {lo})"));
        }
        let accel = p.accel_distance(lo, mid).map_err(err)? + p.accel_distance(mid, hi).map_err(err)?;
        let whole = p.accel_distance(lo, hi).map_err(err)?;
        if !close(accel, whole, RELATIVE_TOL) || !close(whole, (hi * hi - lo * lo) / (2.0 * a), RELATIVE_TOL) {
            return Err(format!(
                "acceleration additivity fails at triple {k}: ({lo}, {mid}, {hi})"
            ));
        }
        let times = p.brake_time(hi, mid).map_err(err)? + p.brake_time(mid, lo).map_err(err)?;
        if !close(times, p.brake_time(hi, lo).map_err(err)?, RELATIVE_TOL) {
            return Err(format!("braking time additivity fails at triple {k}"));
        }
    }

    let ladders = 2_000;
    for k in 0..ladders {
        let p = random_profile(&mut rng);
        let n = rng.random_range(1..=12);
        let mut levels: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..=p.limit_speed())).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        let ladder = SpeedLadder::build(&p, &levels).map_err(err)?;
        let mut brake_sum = 0.0;
        let mut accel_sum = 0.0;
        for i in 1..=ladder.top() {
            let r = ladder.rung(i);
            brake_sum += r.step_brake;
            accel_sum += r.step_accel;
            if !close(brake_sum, r.brake_to_stop, RELATIVE_TOL)
                || !close(accel_sum, p.accel_distance(0.0, r.speed).map_err(err)?, RELATIVE_TOL)
                || !close(r.ab_bound, r.step_accel + r.brake_to_stop, RELATIVE_TOL)
            {
                return Err(format!("telescoping fails on ladder {k} at level {i}"));
            }
        }
    }

    let grids = 200;
    for k in 0..grids {
        let p = random_profile(&mut rng);
        let steps = 50;
        let grid: Vec<f64> = (0..=steps)
            .map(|j| (p.limit_speed() * j as f64 / steps as f64).min(p.limit_speed()))
            .collect();
        let anchor = grid[rng.random_range(0..=steps)];
        for w in grid.windows(2) {
            let increasing = |f: &dyn Fn(f64) -> f64| f(w[0]) < f(w[1]);
            let above = |x: f64| x >= anchor;
            if above(w[0]) && !increasing(&|x| p.brake_distance(x, anchor).unwrap()) {
                return Err(format!("B(V, v) not increasing in V on grid {k}"));
            }
            if above(w[0]) && !increasing(&|x| p.accel_distance(anchor, x).unwrap()) {
                return Err(format!("A(v, V) not increasing in V on grid {k}"));
            }
            if w[1] <= anchor && !increasing(&|x| -p.brake_distance(anchor, x).unwrap()) {
                return Err(format!("B(V, v) not decreasing in v on grid {k}"));
            }
        }
    }
    Ok(format!(
        "{triples} triples additive, {ladders} ladders telescope, {grids} grids monotone"
    ))
}

// Largest v in [V, v_L] with A(V, v) + B(v) <= F.
fn bisect_target(p: &KinematicProfile, speed: f64, free: f64) -> f64 {
    let total = |v: f64| p.accel_distance(speed, v).unwrap() + p.stopping_distance(v).unwrap();
    if total(p.limit_speed()) <= free {
        return p.limit_speed();
    }
    let (mut lo, mut hi) = (speed, p.limit_speed());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) <= free {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn target_speed_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pairs = 5_000;
    let mut worst: f64 = 0.0;
    for k in 0..pairs {
        let p = random_profile(&mut rng);
        let speed = rng.random_range(0.0..=p.limit_speed());
        let braking = p.stopping_distance(speed).unwrap();
        let free = braking + rng.random_range(0.0..3.0) * braking.max(10.0);
        let closed = max_target_speed(&p, speed, free).map_err(|e| e.to_string())?;
        let oracle = bisect_target(&p, speed, free);
        let diff = (closed - oracle).abs();
        worst = worst.max(diff);
        if diff > ORACLE_TOL {
            return Err(format!(
                "pair {k} (V={speed}, F={free}): closed form {closed}, bisection {oracle}"
            ));
        }
    }
    Ok(format!("{pairs} pairs, worst difference {worst:.2e}"))
}

fn policy_ordering() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let instances = 5_000;
    let mut strict_pairs = 0;
    for k in 0..instances {
        let p = random_profile(&mut rng);
        let speed = rng.random_range(0.05..=1.0) * p.limit_speed();
        let braking = p.stopping_distance(speed).unwrap();
        let free = match rng.random_range(0..10) {
            0 => braking,
            _ => braking + rng.random_range(0.0..5.0) * braking.max(10.0),
        };
        let low = match rng.random_range(0..10) {
            0 => speed,
            _ => speed * rng.random_range(0.0..1.0),
        };
        let time = |policy| policy_travel_time(&p, policy, speed, free).map_err(|e| format!("instance {k}: {e}"));
        let ab = time(TravelPolicy::AccelBrake)?;
        let cb = time(TravelPolicy::CruiseBrake)?;
        let ba = time(TravelPolicy::BrakeAccel { low_speed: low })?;
        let slack = RELATIVE_TOL * cb.max(1.0);
        if ab > cb + slack || cb > ba + slack {
            return Err(format!("instance {k}: AB {ab}, CB {cb}, BA {ba}"));
        }
        let cruise_leg = free > braking;
        if cruise_leg && speed < p.limit_speed() && ab >= cb - slack {
            return Err(format!("instance {k}: AB {ab} not faster than CB {cb}"));
        }
        if cruise_leg && low < speed && cb >= ba - slack {
            return Err(format!(
                "instance {k}: CB {cb} not faster than BA {ba} (low speed {low})"
            ));
        }
        strict_pairs += usize::from(cruise_leg && low < speed);
    }
    Ok(format!("{instances} instances ordered, {strict_pairs} strictly"))
}

fn traversal_monotonicity() -> Result<String, String> {
    let profile = paper_profile();
    // Closed forms for 400 m from rest with a = b = 2, v_L = 32.
    let expected = [(2, 33.0), (4, 86.0 / 3.0), (6, 85.0 / 3.0), (8, 198.0 / 7.0)];
    let mut times = Vec::new();
    for (n, want) in expected {
        let ladder = SpeedLadder::evenly_spaced(&profile, n).map_err(|e| e.to_string())?;
        let t = ideal_traversal(&ladder, 0, 400.0).map_err(|e| e.to_string())?;
        if !close(t.time, want, RELATIVE_TOL) {
            return Err(format!("n={n}: {} s, expected {want} s", t.time));
        }
        times.push(t.time);
    }
    let ordered = times.windows(2).all(|w| w[1] <= w[0]) && times[3] < times[0];
    let listing = times.iter().map(|t| format!("{t:.4}")).collect::<Vec<_>>().join(" > ");
    if ordered {
        Ok(format!("n=2,4,6,8: {listing} s"))
    } else {
        Err(format!("not monotone: {listing}"))
    }
}

fn safety_sweep() -> Result<String, String> {
    let config = PaperConfig {
        sensing_periods: vec![0.02, 0.1],
        ..PaperConfig::default()
    };
    let report = reproduce_paper(&config, jobs(), None, false).map_err(|e| e.to_string())?;
    let mut checks = 0;
    let mut min_gap = f64::INFINITY;
    for run in &report.runs {
        let label = run.key.label();
        let s = match &run.outcome {
            Outcome::Completed { summary } => summary,
            Outcome::Rejected { reason } => return Err(format!("{label} rejected: {reason}")),
            Outcome::Failed { error } => return Err(format!("{label} failed: {error}")),
        };
        if s.metrics.collision || s.metrics.min_gap <= 0.0 {
            return Err(format!("{label}: min gap {}", s.metrics.min_gap));
        }
        if s.diagnostics.estimate_violations > 0 {
            return Err(format!(
                "{label}: {} estimate violations",
                s.diagnostics.estimate_violations
            ));
        }
        checks += s.diagnostics.estimate_checks;
        min_gap = min_gap.min(s.metrics.min_gap);
    }
    if report.runs.len() != 96 {
        return Err(format!("{} runs instead of 96", report.runs.len()));
    }
    Ok(format!(
        "96 runs collision-free (smallest gap {min_gap:.3} m), {checks} estimate checks sound"
    ))
}

fn experiment_trends() -> Result<String, String> {
    let config = PaperConfig {
        controllers: vec![ControllerKind::Sync],
        sensing_periods: vec![0.02, 0.1],
        ..PaperConfig::default()
    };
    let report = reproduce_paper(&config, jobs(), None, false).map_err(|e| e.to_string())?;
    let count = |v| report.checks.iter().filter(|c| c.verdict == v).count();
    for c in &report.checks {
        println!(
            "    {:?}: {} | reference {} | local {}",
            c.verdict, c.name, c.reference, c.local
        );
    }
    if report.passed() && count(Verdict::Pass) > 0 {
        Ok(format!(
            "{} checks passed, {} informational",
            count(Verdict::Pass),
            count(Verdict::Info)
        ))
    } else {
        let failed: Vec<_> = report
            .checks
            .iter()
            .filter(|c| c.verdict == Verdict::Fail)
            .map(|c| c.name.as_str())
            .collect();
        Err(format!("failed: {}", failed.join("; ")))
    }
}

fn trace_bytes(s: &Scenario) -> Result<(Vec<u8>, [f64; 2]), String> {
    let out = run_scenario(s).map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    write_trace(&mut bytes, &out.trace).map_err(|e| e.to_string())?;
    Ok((bytes, [out.final_state.ego_position, out.final_state.lead_position]))
}

fn determinism() -> Result<String, String> {
    let jittered = load_scenario(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/async-jittered.json"))
        .map_err(|e| e.to_string())?;
    let scenarios = [
        paper_scenario(ControllerKind::Sync, Setting::Gap, 20.0, 8, 0.02),
        paper_scenario(ControllerKind::Async, Setting::GapPlusLeadBraking, 10.0, 4, 0.1),
        jittered.clone(),
        Scenario { seed: 7, ..jittered },
    ];
    let mut worst: f64 = 0.0;
    let mut traces = Vec::new();
    for s in &scenarios {
        let (first, end) = trace_bytes(s)?;
        let (second, _) = trace_bytes(s)?;
        if first != second {
            return Err(format!("{}: traces differ between runs", s.name));
        }
        let halved = Scenario {
            dt: s.dt / 2.0,
            ..s.clone()
        };
        let (_, end_fine) = trace_bytes(&halved)?;
        for (x, y) in end.iter().zip(end_fine) {
            let diff = (x - y).abs();
            worst = worst.max(diff);
            if diff > POSITION_TOL * x.abs().max(1.0) {
                return Err(format!("{}: final position {x} vs {y} under dt halving", s.name));
            }
        }
        traces.push(first);
    }
    if traces[2] == traces[3] {
        return Err("different jitter seeds gave identical traces".into());
    }
    Ok(format!(
        "{} scenarios byte-identical on rerun, worst final-position shift {worst:.2e} m",
        scenarios.len()
    ))
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}
