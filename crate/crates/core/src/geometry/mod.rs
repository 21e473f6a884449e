//! Grids, regions, excitation patches and the travel-time metric behind every
//! feasibility condition.

mod eikonal;
mod feasibility;
mod field;
mod grid;
mod patch;
mod region;

pub use eikonal::{region_inradius, travel_time_map, travel_times_from, TravelTimeMap};
pub use feasibility::{check_feasibility, Condition, FeasibilityMode, FeasibilityReport, Intervals};
pub use field::{GaussianBump, SmoothField};
pub use grid::{Grid, TimeGrid, MAX_NODES};
pub use patch::{build_patch, BoundaryPatch, Face, PatchNode, PatchSpec};
pub use region::{build_region, Region, Shape};
