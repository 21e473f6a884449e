//! Benchmark fixtures shared by the criterion targets.

use std::sync::Arc;

use wavefocus::geometry::{build_patch, build_region, Face, Grid, PatchSpec, Shape, TimeGrid};
use wavefocus::maxwell::{build_em_patch, EmCoefficients, EmProblem, YeeGrid};
use wavefocus::wave::{CoefficientField, SpaceTimeWindow, WaveProblem};

/// Unit square, unit speed, Γ the left edge, `nt` steps at 0.9 of the CFL limit.
pub fn wave_fixture(n: usize, nt: usize) -> Arc<WaveProblem> {
    let g = Grid::unit(2, n).unwrap();
    let coeff = CoefficientField::constant(&g, 1.0, 0.0).unwrap();
    let gamma = build_patch(&g, &PatchSpec::faces(&[Face::XMin])).unwrap();
    let time = TimeGrid::new(nt, 0.9 * WaveProblem::max_stable_dt(&g, &coeff)).unwrap();
    Arc::new(WaveProblem::new(g, time, coeff, gamma).unwrap())
}

/// Unit cube, vacuum, Γ the `x = 0` face, `nt` steps at 0.9 of the CFL limit.
pub fn em_fixture(n: usize, nt: usize) -> Arc<EmProblem> {
    let yee = YeeGrid::new(&Grid::unit(3, n).unwrap()).unwrap();
    let coeff = EmCoefficients::constant(&yee, 1.0, 1.0).unwrap();
    let gamma = build_em_patch(&yee, &PatchSpec::faces(&[Face::XMin])).unwrap();
    let time = TimeGrid::new(nt, 0.9 * EmProblem::max_stable_dt(&yee, &coeff)).unwrap();
    Arc::new(EmProblem::new(yee, time, coeff, gamma).unwrap())
}

/// A ball of radius 0.15 at `center` over the middle third of the run.
pub fn middle_window(grid: &Grid, time: &TimeGrid, center: &[f64]) -> SpaceTimeWindow {
    let region = build_region(grid, &Shape::ball(center, 0.15)).unwrap();
    let t = time.final_time();
    SpaceTimeWindow::new(region, t / 3.0, 2.0 * t / 3.0, time).unwrap()
}
