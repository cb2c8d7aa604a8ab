//! Closed-loop simulation: orbit trajectory, gyro and star-tracker emulation,
//! both filters stepped side by side, and the resulting metrics and reports.

mod config;
mod metrics;
mod report;
mod sim;

pub use config::SimConfig;
pub use metrics::{compute_metrics, FilterMetrics, MetricsReport};
pub use report::{write_metrics_json, write_reports, write_timeseries_csv, TIMESERIES_HEADER};
pub use sim::{
    emulate_gyro, run_simulation, trajectory_omega, FilterSample, RunResult, StepRecord,
};

/// One orbit, 88 minutes.
pub const ORBIT_PERIOD_S: f64 = 88.0 * 60.0;
