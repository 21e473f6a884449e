//! Matrix-free operators with declared inner products, conjugate-residual
//! solvers, Tikhonov minimizers and the localizer sequence built on them.

mod dot;
mod localizer;
mod map;
mod solve;

pub use dot::dot_test;
pub use localizer::{localizer_sequence, range_inclusion_probe, LocalizerConfig, LocalizerOutput, LocalizerStep, ProbeResult};
pub use map::{Adjoint, DenseMap, Gram, LinearMap};
pub use solve::{
    accept_unconverged, cg_gram_solve, cg_gram_solve_from, conjugate_residual, tikhonov_solve, Solution, SolveOptions,
};

