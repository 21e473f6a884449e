//! Configuration, field files and the experiment driver behind the CLI.

mod config;
mod field_file;
mod run;

pub use config::{
    CoefficientConfig, ExperimentConfig, GridConfig, LocalizeConfig, Mode, ProblemKind, Setup, SimulateConfig,
    SuppressionConfig, TargetConfig, VerifyConfig, SCHEMA_VERSION,
};
pub use field_file::{read_csv_slice, write_csv_slice, FieldFile, DTYPE_F64, MAGIC};
pub use run::{
    diagnostic, exit_code, report_without_timestamp, run, Discretization, RunOptions, RunOutcome, RunReport, Software,
    DOT_TEST_TOLERANCE,
};
