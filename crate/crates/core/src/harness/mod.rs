//! Episode runner, sweeps, calibration, rate fitting and output formats.

mod calibrate;
mod episode;
mod fit;
mod output;
mod sweep;

pub use calibrate::{calibrate_constants, default_grid, power_of_two_grid, CalibrationReport};
pub use episode::{
    run_episode, run_episode_observed, run_policy, EpisodePolicy, FixedArmPolicy, RegretTrace, TraceRow,
};
pub use fit::{fit_exponents, fit_slope, ExponentFit, RegretMetric};
pub use output::{
    build_id, format_float, load_json, load_trace_csv, read_trace_csv, save_json, save_trace_csv,
    to_json_string, trace_to_csv_string, write_trace_csv, TRACE_HEADER,
};
pub use sweep::{
    parallel_map, quantile, run_sweep, Aggregate, CellKey, CellMetrics, CellResult, EpisodeSummary, InstanceSpec,
    SweepGrid, SweepSummary,
};
