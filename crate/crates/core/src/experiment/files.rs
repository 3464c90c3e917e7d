use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::error::Category;

use crate::controllers::{ActuationCommand, Mode};
use crate::fmt::sig9;
use crate::simulator::{Scenario, ScenarioError, Trace, TraceRecord};

/// Why a scenario file could not be used.
#[derive(Debug, thiserror::Error)]
pub enum ScenarioFileError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// Not JSON at all.
    #[error("{path}: malformed JSON at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    /// JSON that does not fit the scenario schema.
    #[error("{path}: schema error at line {line}, column {column}: {message}")]
    Schema {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    /// A well-formed scenario with out-of-range values.
    #[error("{path}: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: ScenarioError,
    },
}

/// Parse and validate scenario text; `path` is only used in diagnostics.
pub fn parse_scenario(text: &str, path: &Path) -> Result<Scenario, ScenarioFileError> {
    let scenario: Scenario = serde_json::from_str(text).map_err(|e| {
        let (line, column, message) = (e.line(), e.column(), e.to_string());
        let path = path.to_path_buf();
        match e.classify() {
            Category::Data => ScenarioFileError::Schema {
                path,
                line,
                column,
                message,
            },
            _ => ScenarioFileError::Parse {
                path,
                line,
                column,
                message,
            },
        }
    })?;
    scenario.validate().map_err(|source| ScenarioFileError::Invalid {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioFileError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioFileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, path)
}

pub fn save_scenario(path: &Path, scenario: &Scenario) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(scenario).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

#[derive(Debug, thiserror::Error)]
pub enum TraceFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("trace line {line}: {message}")]
    Format { line: usize, message: String },
}

const COLUMNS: [&str; 7] = ["t", "ego_speed", "lead_speed", "gap", "sensed_F", "mode", "command"];

/// CSV with a `# scenario_hash=... seed=...` comment line before the header.
pub fn write_trace(mut out: impl Write, trace: &Trace) -> Result<(), TraceFileError> {
    writeln!(out, "# scenario_hash={} seed={}", trace.scenario_hash, trace.seed)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in &trace.records {
        let command = r.command.map(|c| c.to_string()).unwrap_or_default();
        w.write_record([
            sig9(r.t),
            sig9(r.ego_speed),
            sig9(r.lead_speed),
            sig9(r.gap),
            sig9(r.sensed_f),
            r.mode.to_string(),
            command,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_file(path: &Path, trace: &Trace) -> Result<(), TraceFileError> {
    let file = std::io::BufWriter::new(fs::File::create(path)?);
    write_trace(file, trace)
}

pub fn read_trace(text: &str) -> Result<Trace, TraceFileError> {
    let format = |line: usize, message: String| TraceFileError::Format { line, message };
    let (meta, body) = text
        .split_once('\n')
        .ok_or_else(|| format(1, "missing header".into()))?;
    let (scenario_hash, seed) = parse_meta(meta).ok_or_else(|| format(1, format!("bad metadata line {meta:?}")))?;

    let mut reader = csv::Reader::from_reader(body.as_bytes());
    if reader.headers()?.iter().ne(COLUMNS) {
        return Err(format(2, "unexpected columns".into()));
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 3;
        let num = |k: usize| {
            row[k]
                .parse::<f64>()
                .map_err(|e| format(line, format!("{}: {e}", COLUMNS[k])))
        };
        let mode: Mode = row[5].parse().map_err(|e| format(line, format!("mode: {e}")))?;
        let command = match &row[6] {
            "" => None,
            s => Some(
                s.parse::<ActuationCommand>()
                    .map_err(|e| format(line, format!("command: {e}")))?,
            ),
        };
        records.push(TraceRecord {
            t: num(0)?,
            ego_speed: num(1)?,
            lead_speed: num(2)?,
            gap: num(3)?,
            sensed_f: num(4)?,
            mode,
            command,
        });
    }
    Ok(Trace {
        scenario_hash,
        seed,
        records,
    })
}

pub fn read_trace_file(path: &Path) -> Result<Trace, TraceFileError> {
    read_trace(&fs::read_to_string(path)?)
}

fn parse_meta(line: &str) -> Option<(String, u64)> {
    let rest = line.strip_prefix("# ")?;
    let mut hash = None;
    let mut seed = None;
    for part in rest.split_whitespace() {
        match part.split_once('=')? {
            ("scenario_hash", v) => hash = Some(v.to_string()),
            ("seed", v) => seed = v.parse().ok(),
            _ => return None,
        }
    }
    Some((hash?, seed?))
}
