use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sweep::run_to_dir;
use super::ExperimentError;
use crate::controllers::ControllerError;
use crate::fmt::sig9;
use crate::kinematics::{even_levels, KinematicProfile};
use crate::simulator::{run_scenario, ControllerKind, LeadProfile, RunSummary, Scenario, Setting, SimError, UpdateLaw};

/// Lead base speed; the lead oscillates over `[0, 28]` m/s.
pub const LEAD_BASE_SPEED: f64 = 14.0;
pub const LEAD_BRAKE_RATE: f64 = 5.0;
pub const INITIAL_GAP: f64 = 5.0;
pub const TICK_PERIOD: f64 = 0.005;

/// One configuration of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaperKey {
    pub controller: ControllerKind,
    pub setting: Setting,
    pub lead_period: f64,
    pub ladder_size: usize,
    pub sensing_period: f64,
}

impl PaperKey {
    pub fn label(&self) -> String {
        format!(
            "{}-s{}-tf{}-n{}-T{}",
            match self.controller {
                ControllerKind::Sync => "sync",
                ControllerKind::Async => "async",
                ControllerKind::Ideal => "ideal",
            },
            u8::from(self.setting),
            self.lead_period,
            self.ladder_size,
            self.sensing_period
        )
    }
}

/// The experiment grid and the fixed parameters shared by every run.
#[derive(Debug, Clone, PartialEq)]
pub struct PaperConfig {
    pub controllers: Vec<ControllerKind>,
    pub settings: Vec<Setting>,
    pub lead_periods: Vec<f64>,
    pub ladder_sizes: Vec<usize>,
    pub sensing_periods: Vec<f64>,
    /// Replaces the evenly spaced ladder of every run.
    pub levels: Option<Vec<f64>>,
    pub initial_speed: f64,
    /// Run length in lead periods.
    pub lead_cycles: f64,
    pub seed: u64,
}

impl Default for PaperConfig {
    fn default() -> Self {
        PaperConfig {
            controllers: vec![ControllerKind::Sync, ControllerKind::Async],
            settings: vec![Setting::Gap, Setting::GapPlusLeadBraking],
            lead_periods: vec![10.0, 20.0, 30.0],
            ladder_sizes: vec![2, 4, 6, 8],
            sensing_periods: vec![0.02, 0.1, 10.0],
            levels: None,
            initial_speed: 0.0,
            lead_cycles: 10.0,
            seed: 0,
        }
    }
}

impl PaperConfig {
    pub fn keys(&self) -> Vec<PaperKey> {
        let mut keys = Vec::new();
        for &controller in &self.controllers {
            for &setting in &self.settings {
                for &lead_period in &self.lead_periods {
                    for &ladder_size in &self.ladder_sizes {
                        for &sensing_period in &self.sensing_periods {
                            keys.push(PaperKey {
                                controller,
                                setting,
                                lead_period,
                                ladder_size,
                                sensing_period,
                            });
                        }
                    }
                }
            }
        }
        keys
    }

    pub fn scenario(&self, key: &PaperKey) -> Scenario {
        let mut s = paper_scenario(
            key.controller,
            key.setting,
            key.lead_period,
            key.ladder_size,
            key.sensing_period,
        );
        if let Some(levels) = &self.levels {
            s.levels = levels.clone();
        }
        s.initial_speed = self.initial_speed;
        s.duration = self.lead_cycles * key.lead_period;
        s.seed = self.seed;
        s
    }
}

/// `a = b = 2`, `v_L = 32`, lead `14 + 14 sin(2πt/T_f)` with `b_f = 5`,
/// `F(0) = 5` from rest, `n` evenly spaced levels, ten lead periods.
pub fn paper_scenario(
    controller: ControllerKind,
    setting: Setting,
    lead_period: f64,
    ladder_size: usize,
    sensing_period: f64,
) -> Scenario {
    let finest = match controller {
        ControllerKind::Async => sensing_period.min(TICK_PERIOD),
        _ => sensing_period,
    };
    let key = PaperKey {
        controller,
        setting,
        lead_period,
        ladder_size,
        sensing_period,
    };
    Scenario {
        name: key.label(),
        description: String::new(),
        seed: 0,
        profile: KinematicProfile::new(2.0, 2.0, 32.0).expect("valid profile"),
        levels: even_levels(32.0, ladder_size),
        controller,
        sensing_period,
        tick_period: TICK_PERIOD,
        update_law: UpdateLaw::Periodic,
        setting,
        lead: LeadProfile::sinusoidal(LEAD_BASE_SPEED, lead_period, LEAD_BRAKE_RATE),
        initial_gap: INITIAL_GAP,
        initial_speed: 0.0,
        duration: 10.0 * lead_period,
        dt: (finest / 2.0).min(0.01),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Completed {
        summary: RunSummary,
    },
    /// Refused before running, by the period bound or an unsafe start.
    Rejected {
        reason: String,
    },
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperRun {
    pub key: PaperKey,
    pub outcome: Outcome,
}

impl PaperRun {
    pub fn summary(&self) -> Option<&RunSummary> {
        match &self.outcome {
            Outcome::Completed { summary } => Some(summary),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Reported for comparison only.
    Info,
    /// The runs the check needs were not part of the grid.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendCheck {
    pub name: String,
    pub reference: String,
    pub local: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaperReport {
    pub runs: Vec<PaperRun>,
    pub checks: Vec<TrendCheck>,
}

impl PaperReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
            && self.runs.iter().all(|r| !matches!(r.outcome, Outcome::Failed { .. }))
    }

    pub fn find(&self, key: &PaperKey) -> Option<&PaperRun> {
        self.runs.iter().find(|r| r.key == *key)
    }

    pub fn to_markdown(&self) -> String {
        let mut md = String::from(
            "# Experiment reproduction\n\n## Checks\n\n| check | reference | local | verdict |\n|---|---|---|---|\n",
        );
        for c in &self.checks {
            let _ = writeln!(md, "| {} | {} | {} | {:?} |", c.name, c.reference, c.local, c.verdict);
        }
        md.push_str("\n## Runs\n\n| run | status | min gap | steady min | steady max | max speed | emergencies |\n|---|---|---|---|---|---|---|\n");
        for r in &self.runs {
            match &r.outcome {
                Outcome::Completed { summary } => {
                    let m = &summary.metrics;
                    let status = if m.collision { "collision" } else { "safe" };
                    let _ = writeln!(
                        md,
                        "| {} | {status} | {} | {} | {} | {} | {} |",
                        r.key.label(),
                        sig9(m.min_gap),
                        sig9(m.steady_min_gap),
                        sig9(m.steady_max_gap),
                        sig9(m.max_ego_speed),
                        m.emergency_count
                    );
                }
                Outcome::Rejected { reason } => {
                    let _ = writeln!(md, "| {} | rejected: {reason} | | | | | |", r.key.label());
                }
                Outcome::Failed { error } => {
                    let _ = writeln!(md, "| {} | error: {error} | | | | | |", r.key.label());
                }
            }
        }
        md
    }
}

fn classify(result: Result<RunSummary, ExperimentError>) -> Outcome {
    match result {
        Ok(summary) => Outcome::Completed { summary },
        Err(ExperimentError::Sim(SimError::Controller(e @ ControllerError::PeriodTooLarge { .. }))) => {
            Outcome::Rejected {
                reason: format!("period bound: {e}"),
            }
        }
        Err(ExperimentError::Sim(SimError::Scenario(e))) if e.field == "initial_gap" => {
            Outcome::Rejected { reason: e.to_string() }
        }
        Err(e) => Outcome::Failed { error: e.to_string() },
    }
}

/// Run the grid on at most `jobs` threads and evaluate the trend checks.
/// With `out`, the report goes to `out/report.md` and `out/report.json`,
/// and with `traces` as well every run is written under `out/runs/<label>`.
pub fn reproduce_paper(
    config: &PaperConfig,
    jobs: usize,
    out: Option<&Path>,
    traces: bool,
) -> Result<PaperReport, ExperimentError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    let runs: Vec<PaperRun> = pool.install(|| {
        config
            .keys()
            .par_iter()
            .map(|key| {
                let scenario = config.scenario(key);
                let result = match out {
                    Some(dir) if traces => run_to_dir(&scenario, &dir.join("runs").join(key.label())),
                    _ => run_scenario(&scenario).map_err(ExperimentError::from),
                };
                PaperRun {
                    key: *key,
                    outcome: classify(result.map(|o| o.summary)),
                }
            })
            .collect()
    });
    let mut report = PaperReport {
        runs,
        checks: Vec::new(),
    };
    report.checks = trend_checks(&report);
    if let Some(dir) = out {
        let io = |source| ExperimentError::Io {
            path: dir.to_path_buf(),
            source,
        };
        fs::create_dir_all(dir).map_err(io)?;
        fs::write(dir.join("report.md"), report.to_markdown()).map_err(io)?;
        fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)? + "\n").map_err(io)?;
    }
    Ok(report)
}

fn key(
    controller: ControllerKind,
    setting: Setting,
    lead_period: f64,
    ladder_size: usize,
    sensing_period: f64,
) -> PaperKey {
    PaperKey {
        controller,
        setting,
        lead_period,
        ladder_size,
        sensing_period,
    }
}

/// Relative half-width of the band around the published steady gaps.
pub const BAND: f64 = 0.25;

fn steady_min(report: &PaperReport, k: &PaperKey) -> Option<f64> {
    report.find(k)?.summary().map(|s| s.metrics.steady_min_gap)
}

fn ordering(name: &str, reference: &str, report: &PaperReport, larger: PaperKey, smaller: PaperKey) -> TrendCheck {
    let (local, verdict) = match (steady_min(report, &larger), steady_min(report, &smaller)) {
        (Some(a), Some(b)) => (
            format!("{} > {}", sig9(a), sig9(b)),
            if a > b { Verdict::Pass } else { Verdict::Fail },
        ),
        _ => ("not run".to_string(), Verdict::Skipped),
    };
    TrendCheck {
        name: name.to_string(),
        reference: reference.to_string(),
        local,
        verdict,
    }
}

/// The ordering and band checks against the published figures.
pub fn trend_checks(report: &PaperReport) -> Vec<TrendCheck> {
    use ControllerKind::{Async, Sync};
    use Setting::{Gap, GapPlusLeadBraking as Braking};
    let mut checks = Vec::new();

    let completed: Vec<&PaperRun> = report.runs.iter().filter(|r| r.summary().is_some()).collect();
    let collisions = completed
        .iter()
        .filter(|r| r.summary().is_some_and(|s| s.metrics.collision))
        .count();
    let unsound: usize = completed
        .iter()
        .filter_map(|r| r.summary())
        .map(|s| s.diagnostics.estimate_violations)
        .sum();
    checks.push(TrendCheck {
        name: "no collision in any completed run".into(),
        reference: "both controllers are safe".into(),
        local: format!("{collisions} of {} runs collided", completed.len()),
        verdict: if completed.is_empty() {
            Verdict::Skipped
        } else if collisions == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    });
    checks.push(TrendCheck {
        name: "dead-reckoned estimate within [x - ε, x]".into(),
        reference: "F' <= x <= F' + ε".into(),
        local: format!("{unsound} violations"),
        verdict: if completed.is_empty() {
            Verdict::Skipped
        } else if unsound == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    });

    let tf_order = ordering(
        "steady min gap falls from T_f=10 to T_f=30 (sync, setting 1, n=8, T=0.02)",
        "57.27 > 20.11",
        report,
        key(Sync, Gap, 10.0, 8, 0.02),
        key(Sync, Gap, 30.0, 8, 0.02),
    );
    let n_order = ordering(
        "steady min gap falls from n=2 to n=8 (sync, setting 1, T_f=20, T=0.02)",
        "60.49 > 33.32",
        report,
        key(Sync, Gap, 20.0, 2, 0.02),
        key(Sync, Gap, 20.0, 8, 0.02),
    );
    let mut pairs = vec![
        (key(Sync, Gap, 10.0, 8, 0.02), "reduced"),
        (key(Sync, Gap, 30.0, 8, 0.02), "20.11 > 11.26"),
    ];
    for n in [2, 4, 6, 8] {
        pairs.push((
            key(Sync, Gap, 20.0, n, 0.02),
            if n == 8 { "33.32 > 17.29" } else { "reduced" },
        ));
    }
    pairs.push((key(Sync, Gap, 20.0, 8, 0.1), "reduced"));
    let setting_order: Vec<TrendCheck> = pairs
        .into_iter()
        .map(|(k1, reference)| {
            let k2 = PaperKey { setting: Braking, ..k1 };
            ordering(
                &format!(
                    "setting 1 gap > setting 2 gap (sync, T_f={}, n={}, T={})",
                    k1.lead_period, k1.ladder_size, k1.sensing_period
                ),
                reference,
                report,
                k1,
                k2,
            )
        })
        .collect();
    let orderings_hold = std::iter::once(&tf_order)
        .chain(std::iter::once(&n_order))
        .chain(&setting_order)
        .all(|c| c.verdict == Verdict::Pass);

    checks.push(tf_order);
    checks.push(n_order);
    checks.extend(setting_order);

    for (tf, published) in [(10.0, 57.27), (30.0, 20.11)] {
        let k = key(Sync, Gap, tf, 8, 0.02);
        let (local, verdict) = match steady_min(report, &k) {
            Some(v) => {
                let within = (v - published).abs() <= BAND * published;
                let verdict = match (within, orderings_hold) {
                    (true, _) => Verdict::Pass,
                    (false, true) => Verdict::Info,
                    (false, false) => Verdict::Fail,
                };
                (format!("{} ({:+.1}%)", sig9(v), 100.0 * (v / published - 1.0)), verdict)
            }
            None => ("not run".into(), Verdict::Skipped),
        };
        checks.push(TrendCheck {
            name: format!("steady min gap within ±25% (sync, setting 1, T_f={tf}, n=8, T=0.02)"),
            reference: format!("{published}"),
            local,
            verdict,
        });
    }

    let informational = [
        (
            "async steady min gap at T_f=30 (setting 1, n=8, T=0.02)",
            "17.78 (sync 20.11)",
            key(Async, Gap, 30.0, 8, 0.02),
        ),
        (
            "async steady min gap at n=2 (setting 1, T_f=20, T=0.02)",
            "57.61",
            key(Async, Gap, 20.0, 2, 0.02),
        ),
        (
            "async steady min gap at n=8 (setting 1, T_f=20, T=0.02)",
            "33.02",
            key(Async, Gap, 20.0, 8, 0.02),
        ),
    ];
    let max_speed = |k: &PaperKey| {
        report
            .find(k)
            .and_then(|r| r.summary())
            .map(|s| s.metrics.max_ego_speed)
    };
    let speed_pairs = [
        (
            "max ego speed, T_f=10 vs T_f=30 (sync, setting 1, n=8, T=0.02)",
            "16 -> 20",
            key(Sync, Gap, 10.0, 8, 0.02),
            key(Sync, Gap, 30.0, 8, 0.02),
        ),
        (
            "max ego speed, n=2 vs n=8 (sync, setting 1, T_f=20, T=0.02)",
            "16 -> 20",
            key(Sync, Gap, 20.0, 2, 0.02),
            key(Sync, Gap, 20.0, 8, 0.02),
        ),
        (
            "max ego speed, setting 1 vs setting 2 (sync, T_f=10, n=8, T=0.02)",
            "16 -> 20",
            key(Sync, Gap, 10.0, 8, 0.02),
            key(Sync, Braking, 10.0, 8, 0.02),
        ),
    ];
    for (name, reference, a, b) in speed_pairs {
        let (local, verdict) = match (max_speed(&a), max_speed(&b)) {
            (Some(x), Some(y)) => (format!("{} -> {}", sig9(x), sig9(y)), Verdict::Info),
            _ => ("not run".to_string(), Verdict::Skipped),
        };
        checks.push(TrendCheck {
            name: name.into(),
            reference: reference.into(),
            local,
            verdict,
        });
    }

    for (name, reference, k) in informational {
        let local = steady_min(report, &k).map_or("not run".into(), sig9);
        checks.push(TrendCheck {
            name: name.into(),
            reference: reference.into(),
            verdict: if local == "not run" {
                Verdict::Skipped
            } else {
                Verdict::Info
            },
            local,
        });
    }
    checks
}
