//! Scalar wave equation `c⁻²u_tt − Δu + qu = 0` on a box, Dirichlet data on a
//! boundary patch, and the restricted solution operators built on it.

mod coeff;
mod data;
mod ops;
mod solver;
pub mod time_ops;

pub use coeff::CoefficientField;
pub use data::{BoundaryTimeSeries, FieldMovie, Sampling, SpaceTimeWindow};
pub use ops::{make_l_op, make_p_op, make_t_op, shell_nodes, AdjointMode, FinalTimeOp, SnapshotOp, WindowOp};
pub use solver::{
    forward_wave, interior_source_wave, normal_derivative_trace, wave_energy, Direction, WaveProblem, CFL_LIMIT,
};

