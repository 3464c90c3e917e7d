//! Loads a scenario file, runs it and writes the outputs to a temporary
//! directory.

use std::path::PathBuf;

use safe_ladder::experiment::{load_scenario, read_trace_file, run_to_dir};

fn main() -> anyhow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/async-jittered.json"));
    let scenario = load_scenario(&path)?;
    let dir = std::env::temp_dir().join(format!("safe-ladder-{}", scenario.fingerprint()));
    let out = run_to_dir(&scenario, &dir)?;
    let replay = read_trace_file(&dir.join("trace.csv"))?;
    println!("{}", serde_json::to_string_pretty(&out.summary)?);
    println!("trace: {} rows in {}", replay.records.len(), dir.display());
    Ok(())
}
