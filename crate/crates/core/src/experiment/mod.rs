//! Configuration, experiment grids and the command implementations behind
//! the `lanefree` binary.

mod commands;
mod config;
mod grid;

pub use commands::{
    calibrate, collect, exit_code, experiment, simulate, train, trajectories, EXIT_CONFIG,
    EXIT_OK, EXIT_PARTIAL, EXIT_RUNTIME,
};
pub use config::{Algorithm, Config, ExperimentPlan, RunSettings, CONFIG_ENV_VAR};
pub use grid::{
    aggregate, aggregate_path, grid_keys, mean_sd, read_results, run_algorithm, run_cell,
    run_grid, timing_path, AggregateRow, GridKey, GridSummary, ResultRow, AGGREGATE_HEADER,
    RAW_HEADER, TIMING_HEADER,
};
