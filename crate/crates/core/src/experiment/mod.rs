//! Scenario and trace files, parameter sweeps and the reproduction of the
//! published experiment grid.

mod files;
mod paper;
mod sweep;

use std::path::PathBuf;

pub use files::{
    load_scenario, parse_scenario, read_trace, read_trace_file, save_scenario, write_trace, write_trace_file,
    ScenarioFileError, TraceFileError,
};
pub use paper::{
    paper_scenario, reproduce_paper, trend_checks, Outcome, PaperConfig, PaperKey, PaperReport, PaperRun, TrendCheck,
    Verdict, BAND,
};
pub use sweep::{expand, run_grid, run_to_dir, Axis, AxisError, GridPoint, SweepRow, LADDER_SIZE};

use crate::simulator::SimError;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Scenario(#[from] ScenarioFileError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Trace(#[from] TraceFileError),
    #[error(transparent)]
    Axis(#[from] AxisError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Pool(#[from] rayon::ThreadPoolBuildError),
}
