//! Simulation harness for the Stiefel extended Kalman filter: scenario
//! generation, replicated filter runs, CSV traces, summaries and SVG plots.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod plot;
pub mod scenario;

pub use config::{ExperimentConfig, MaxVarSource, MeasurementModel, OUT_DIR_ENV};
pub use error::{SimError, SimResult};
pub use experiment::{run_experiment, ExperimentResult, PanelSummary, RunTrace, SummaryRow, TraceRow};
pub use output::{parse_summary, write_outputs, OutputPaths};
pub use plot::emit_plots;
pub use scenario::Scenario;
