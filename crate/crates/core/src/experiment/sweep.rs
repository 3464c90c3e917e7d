use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::files::{save_scenario, write_trace_file};
use super::ExperimentError;
use crate::fmt::sig9;
use crate::kinematics::{even_levels, DistanceModel};
use crate::simulator::{run_scenario, RunOutput, RunSummary, Scenario};

/// Pseudo-key that replaces `levels` with `n` evenly spaced levels.
pub const LADDER_SIZE: &str = "ladder_size";

/// One sweep dimension: a dotted JSON path into the scenario and its values.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AxisError {
    #[error("axis spec {0:?} is not of the form key=v1,v2,...")]
    Syntax(String),
    #[error("axis key {0:?} does not name a scenario field")]
    UnknownKey(String),
    #[error("grid point {label}: {message}")]
    Point { label: String, message: String },
}

impl std::str::FromStr for Axis {
    type Err = AxisError;

    fn from_str(spec: &str) -> Result<Self, AxisError> {
        let syntax = || AxisError::Syntax(spec.to_string());
        let (key, values) = spec.split_once('=').ok_or_else(syntax)?;
        let key = key.trim();
        if key.is_empty() || values.trim().is_empty() {
            return Err(syntax());
        }
        let values = values
            .split(',')
            .map(|v| {
                let v = v.trim();
                if v.is_empty() {
                    return Err(syntax());
                }
                // Bare words such as `async` are taken as strings.
                Ok(serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string())))
            })
            .collect::<Result<_, _>>()?;
        Ok(Axis {
            key: key.to_string(),
            values,
        })
    }
}

/// A point of the grid: the scenario and the axis values that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub index: usize,
    pub assignment: Vec<(String, Value)>,
    pub scenario: Scenario,
}

impl GridPoint {
    pub fn label(&self) -> String {
        self.assignment
            .iter()
            .map(|(k, v)| format!("{k}={}", display_value(v)))
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn display_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<(), AxisError> {
    let unknown = || AxisError::UnknownKey(key.to_string());
    let mut node = root;
    for part in key.split('.') {
        node = node.as_object_mut().and_then(|o| o.get_mut(part)).ok_or_else(unknown)?;
    }
    *node = value;
    Ok(())
}

fn apply(template: &Scenario, assignment: &[(String, Value)], label: &str) -> Result<Scenario, AxisError> {
    let point = |message: String| AxisError::Point {
        label: label.to_string(),
        message,
    };
    let mut doc = serde_json::to_value(template).map_err(|e| point(e.to_string()))?;
    for (key, value) in assignment {
        if key == LADDER_SIZE {
            let n = value
                .as_u64()
                .filter(|n| *n > 0)
                .ok_or_else(|| point(format!("{LADDER_SIZE} must be a positive integer, got {value}")))?;
            let levels = even_levels(template.profile.limit_speed(), n as usize);
            set_path(
                &mut doc,
                "levels",
                serde_json::to_value(levels).expect("numbers serialize"),
            )?;
        } else {
            set_path(&mut doc, key, value.clone())?;
        }
    }
    let mut scenario: Scenario = serde_json::from_value(doc).map_err(|e| point(e.to_string()))?;
    if !label.is_empty() {
        scenario.name = if template.name.is_empty() {
            label.to_string()
        } else {
            format!("{}[{label}]", template.name)
        };
    }
    scenario.validate().map_err(|e| point(e.to_string()))?;
    Ok(scenario)
}

/// Cartesian product of the axes over `template`, first axis slowest.
pub fn expand(template: &Scenario, axes: &[Axis]) -> Result<Vec<GridPoint>, AxisError> {
    let mut assignments: Vec<Vec<(String, Value)>> = vec![Vec::new()];
    for axis in axes {
        assignments = assignments
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push((axis.key.clone(), v.clone()));
                    next
                })
            })
            .collect();
    }
    assignments
        .into_iter()
        .enumerate()
        .map(|(index, assignment)| {
            let mut point = GridPoint {
                index,
                assignment,
                scenario: template.clone(),
            };
            point.scenario = apply(template, &point.assignment, &point.label())?;
            Ok(point)
        })
        .collect()
}

/// Run a scenario and write `scenario.json`, `trace.csv` and
/// `summary.json` into `dir`.
pub fn run_to_dir(scenario: &Scenario, dir: &Path) -> Result<RunOutput, ExperimentError> {
    let io = |source| ExperimentError::Io {
        path: dir.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(io)?;
    save_scenario(&dir.join("scenario.json"), scenario).map_err(io)?;
    let output = run_scenario(scenario)?;
    write_trace_file(&dir.join("trace.csv"), &output.trace)?;
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&output.summary)? + "\n",
    )
    .map_err(io)?;
    Ok(output)
}

/// Result of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<RunSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.error.is_some() || self.summary.as_ref().is_some_and(|s| s.metrics.collision)
    }
}

/// Run every grid point on at most `jobs` threads. With `out`, each point
/// gets its own directory under `out/runs` and the coordinator writes
/// `summary.csv` and `summary.json` once all runs are done.
pub fn run_grid(points: &[GridPoint], jobs: usize, out: Option<&Path>) -> Result<Vec<SweepRow>, ExperimentError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    let rows: Vec<SweepRow> = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let result = match out {
                    Some(dir) => run_to_dir(&p.scenario, &dir.join("runs").join(format!("{:03}", p.index))),
                    None => run_scenario(&p.scenario).map_err(ExperimentError::from),
                };
                let (summary, error) = match result {
                    Ok(o) => (Some(o.summary), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                SweepRow {
                    index: p.index,
                    label: p.label(),
                    summary,
                    error,
                }
            })
            .collect()
    });
    if let Some(dir) = out {
        write_summaries(dir, points, &rows)?;
    }
    Ok(rows)
}

fn write_summaries(dir: &Path, points: &[GridPoint], rows: &[SweepRow]) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|source| ExperimentError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let keys: Vec<String> = points
        .first()
        .map(|p| p.assignment.iter().map(|(k, _)| k.clone()).collect())
        .unwrap_or_default();
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    let mut header = vec!["index".to_string()];
    header.extend(keys.iter().cloned());
    header.extend(
        [
            "status",
            "min_gap",
            "max_speed",
            "collision",
            "steady_min_gap",
            "steady_max_gap",
            "total_distance",
            "mean_speed",
            "emergency_count",
            "error",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    for (p, row) in points.iter().zip(rows) {
        let mut rec = vec![p.index.to_string()];
        rec.extend(p.assignment.iter().map(|(_, v)| display_value(v)));
        match (&row.summary, &row.error) {
            (Some(s), _) => {
                let m = &s.metrics;
                rec.push(if m.collision { "collision" } else { "ok" }.to_string());
                rec.extend([
                    sig9(m.min_gap),
                    sig9(m.max_ego_speed),
                    m.collision.to_string(),
                    sig9(m.steady_min_gap),
                    sig9(m.steady_max_gap),
                    sig9(s.total_distance),
                    sig9(s.mean_speed),
                    m.emergency_count.to_string(),
                    String::new(),
                ]);
            }
            (None, error) => {
                rec.push("error".to_string());
                rec.extend(std::iter::repeat_n(String::new(), 8));
                rec.push(error.clone().unwrap_or_default());
            }
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| ExperimentError::Io {
        path: dir.join("summary.csv"),
        source,
    })?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(rows)? + "\n").map_err(|source| {
        ExperimentError::Io {
            path: dir.join("summary.json"),
            source,
        }
    })?;
    Ok(())
}
