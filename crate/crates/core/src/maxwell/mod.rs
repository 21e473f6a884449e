//! Maxwell's equations `ε∂_tE − curl H = 0`, `μ∂_tH + curl E = 0` on a box
//! with tangential E prescribed on a boundary patch, on a Yee grid.

mod coeff;
mod data;
mod ops;
mod project;
mod solver;
mod yee;

pub use coeff::EmCoefficients;
pub use data::{build_em_patch, EmBoundarySeries, EmFieldMovie, EmPatch};
pub use ops::{em_shell, make_em_op, make_em_p_op, make_em_t_op, region_dofs, travel_times_to, EmFinalTimeOp, EmSnapshotOp, EmWindowOp, Observed};
pub use project::{project_div_free, DivFreeProjector};
pub use solver::{
    adjoint_maxwell_solve, electric_divergence, em_energy, forward_maxwell, interior_source_maxwell,
    magnetic_divergence, EmProblem, Field,
};
pub use yee::YeeGrid;
