use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use safe_ladder::experiment::{
    expand, load_scenario, reproduce_paper, run_grid, run_to_dir, Axis, Outcome, PaperConfig, Verdict,
};
use safe_ladder::fmt::sig9;

/// Speed-ladder collision avoidance: single runs, sweeps and the published
/// experiment grid.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// Override the seed of every scenario.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        scenario: PathBuf,
        /// Output directory [default: out/<scenario file stem>].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario template over a grid of parameter values.
    Sweep {
        template: PathBuf,
        /// `key=v1,v2,...`; keys are dotted scenario paths or `ladder_size`.
        #[arg(long = "axis", required = true)]
        axes: Vec<Axis>,
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
        #[arg(long, default_value = "out/sweep")]
        out: PathBuf,
    },
    /// Run the published experiment grid and compare against its figures.
    ReproducePaper {
        #[arg(long, default_value = "out/paper")]
        out: PathBuf,
        #[arg(long, default_value_t = default_jobs())]
        jobs: usize,
        /// Replace every ladder with these levels (comma separated).
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.0)]
        initial_speed: f64,
        /// Write only the report, not the per-run traces.
        #[arg(long)]
        no_traces: bool,
    },
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` when a run collided or a check failed.
fn execute(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Run { scenario, out } => {
            let mut s = load_scenario(&scenario)?;
            if let Some(seed) = cli.seed {
                s.seed = seed;
            }
            let out = out.unwrap_or_else(|| default_run_dir(&scenario));
            let output = run_to_dir(&s, &out).with_context(|| format!("running {}", scenario.display()))?;
            println!("{}", serde_json::to_string_pretty(&output.summary)?);
            eprintln!("wrote {}", out.display());
            Ok(!output.metrics.collision)
        }
        Command::Sweep {
            template,
            axes,
            jobs,
            out,
        } => {
            let mut t = load_scenario(&template)?;
            if let Some(seed) = cli.seed {
                t.seed = seed;
            }
            let grid = expand(&t, &axes)?;
            let rows = run_grid(&grid, jobs, Some(&out))?;
            for row in &rows {
                match (&row.summary, &row.error) {
                    (Some(s), _) => println!(
                        "{:>4}  {:<40} collision={} min_gap={} steady=[{}, {}]",
                        row.index,
                        row.label,
                        s.metrics.collision,
                        sig9(s.metrics.min_gap),
                        sig9(s.metrics.steady_min_gap),
                        sig9(s.metrics.steady_max_gap)
                    ),
                    (None, e) => println!(
                        "{:>4}  {:<40} error: {}",
                        row.index,
                        row.label,
                        e.as_deref().unwrap_or("")
                    ),
                }
            }
            eprintln!("wrote {}", out.join("summary.csv").display());
            Ok(rows.iter().all(|r| !r.failed()))
        }
        Command::ReproducePaper {
            out,
            jobs,
            levels,
            initial_speed,
            no_traces,
        } => {
            let config = PaperConfig {
                levels,
                initial_speed,
                seed: cli.seed.unwrap_or(0),
                ..PaperConfig::default()
            };
            let report = reproduce_paper(&config, jobs, Some(&out), !no_traces)?;
            let mut reasons: BTreeMap<&str, usize> = BTreeMap::new();
            for run in &report.runs {
                match &run.outcome {
                    Outcome::Completed { .. } => {}
                    Outcome::Rejected { reason } | Outcome::Failed { error: reason } => {
                        *reasons.entry(reason).or_default() += 1;
                    }
                }
            }
            for (reason, count) in &reasons {
                println!("[REJECTED] {count} run(s): {reason}");
            }
            let rejected: usize = reasons.values().sum();
            for c in &report.checks {
                let tag = match c.verdict {
                    Verdict::Pass => "PASS",
                    Verdict::Fail => "FAIL",
                    Verdict::Info => "INFO",
                    Verdict::Skipped => "SKIP",
                };
                println!("[{tag}] {}: reference {} / local {}", c.name, c.reference, c.local);
            }
            println!("{} runs, {rejected} not run (see report)", report.runs.len());
            eprintln!("wrote {}", out.join("report.md").display());
            // A grid with nothing left to run verifies nothing.
            Ok(report.passed() && rejected < report.runs.len())
        }
    }
}

fn default_run_dir(scenario: &Path) -> PathBuf {
    let stem = scenario
        .file_stem()
        .map_or("run".into(), |s| s.to_string_lossy().into_owned());
    Path::new("out").join(stem)
}
