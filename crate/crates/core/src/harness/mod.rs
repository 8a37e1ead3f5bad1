//! Experiment orchestration: configuration, the fine and multiscale runs,
//! error metrics and file output.

pub mod assets;
mod config;
mod experiment;
mod export;
mod metrics;

pub use config::{BasisConfig, DomainConfig, ExperimentConfig, FractureSource, RunConfig};
pub use experiment::{
    build_mesh, cfl_report, run_experiment, run_schemes, set_param, sweep, write_outputs, CflReport, CoarseModel,
    Outcome, Report, Setup, ERROR_PAIRS, SWEEP_PARAMS,
};
pub use export::{export_cloud_csv, export_csv, export_error_csv, export_vtk, fmt_f64};
pub use metrics::{relative_errors, ErrorSeries};
