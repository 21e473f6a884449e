//! Boundary data whose waves are large in one space-time window and small in
//! another: localization in space and in time (cases I and II).

mod pipelines;
mod report;

pub use pipelines::{
    build_xi_space, localize_space, localize_time_case_i, localize_time_case_ii, localizing_sequence, window_norms,
    Localization, LocalizeOptions, XiConstruction,
};
pub(crate) use pipelines::{check_disjoint, check_intervals};
pub(crate) use report::standard_notes;
pub use report::{KNorms, LocalizationReport, Parameters, Trends, WindowEcho, XiProvenance, TREND_SLACK};
