//! Configurable runs, sweeps, verification and plot output.
//!
//! Every run integrates twice, once on the state vector and once on the
//! sphere, and refuses to report when the two disagree.

mod config;
mod plot;
mod run;
mod sweep;
mod verify;

pub use config::{
    load_schedule_file, BuiltDrive, DriveConfig, ExperimentConfig, InitialPoint,
    IntegratorSection, OutputConfig, ResolvedExperiment, ScheduleRef,
};
pub use plot::{emit_plot_data, plot_report, read_trace, tangent_coords, PlotFiles, PolarSample};
pub use run::{
    execute, report_path, run, write_trajectory_csv, IntegratorStats, PendulumCheck, RunOutcome,
    RunReport, RunSummary, CSV_COLUMNS, ORACLE_LIMIT,
};
pub use sweep::{config_for_ratio, format_table, sweep, SweepReport, SweepRow, ENVELOPE_MIN_RATIO};
pub use verify::{
    format_verification, random_hamiltonian, random_passage_case, random_point, verify,
    verify_with, CheckSummary, PassageCase, VerificationReport, VerifyOptions,
};
