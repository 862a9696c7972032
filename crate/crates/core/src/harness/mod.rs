//! Experiment orchestration: settings files, figure-curve sweeps emitted as
//! CSV, a classical shortest-path baseline, and route comparison.

mod baseline;
mod config;
mod experiment;
mod table;

pub use baseline::{baseline_shortest_path, compare_routes, BaselineWeight, RouteComparison};
pub use config::{Config, Interval, LevelWeights, Sweep};
pub use experiment::{
    load_network, run_experiment, CurveParams, ExperimentConfig, ExperimentKind, NetworkSource,
};
pub use table::CsvTable;
