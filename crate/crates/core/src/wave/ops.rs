//! Restricted solution operators of the scalar problem as [`LinearMap`]s.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::solver::{interior_source_wave, normal_derivative_trace, Direction, WaveProblem};
use super::{FieldMovie, Sampling, SpaceTimeWindow};
use crate::error::{Error, Result};
use crate::geometry::{travel_times_from, Region};
use crate::linops::{Gram, LinearMap};

/// How `adjoint` is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdjointMode {
    /// Transpose of the discrete pipeline; passes dot tests to rounding.
    #[default]
    Exact,
    /// Backward solve of the adjoint problem plus a normal-derivative trace.
    /// Agrees with the exact mode only up to discretization error.
    Continuous,
}

/// `f ↦ u_f` restricted to a space-time window.
pub struct WindowOp {
    problem: Arc<WaveProblem>,
    obs: Sampling,
    mode: AdjointMode,
    domain: Gram,
    codomain: Gram,
}

pub fn make_l_op(problem: &Arc<WaveProblem>, window: &SpaceTimeWindow, mode: AdjointMode) -> Result<WindowOp> {
    let nodes = window.region.interior_nodes();
    if nodes.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if window.last > problem.time().nt() {
        return Err(Error::InvalidInput(format!("window ends at level {} beyond the time grid", window.last)));
    }
    let obs = Sampling::new(nodes, window.levels());
    let dt = problem.time().dt();
    let domain = Gram::diagonal(problem.boundary_weights(problem.time().nt()));
    let codomain = Gram::diagonal(problem.node_weights(obs.dofs.len(), obs.levels.len(), dt));
    Ok(WindowOp { problem: problem.clone(), obs, mode, domain, codomain })
}

impl WindowOp {
    pub fn sampling(&self) -> &Sampling {
        &self.obs
    }

    pub fn mode(&self) -> AdjointMode {
        self.mode
    }

    /// Restriction of a full movie to the window.
    pub fn restrict(&self, movie: &FieldMovie) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.obs.len());
        for n in self.obs.levels.clone() {
            let u = movie.level(n);
            out.extend(self.obs.dofs.iter().map(|&d| u[d]));
        }
        out
    }

    fn exact_adjoint(&self, y: &[f64]) -> Vec<f64> {
        let wy = self.codomain.apply(y);
        let mut out = vec![0.0; self.domain.dim()];
        if !self.obs.is_empty() {
            let obs = &self.obs;
            self.problem.propagate_transpose(
                obs.levels.end - 1,
                &mut |n, cur| {
                    if let Some(off) = obs.offset(n) {
                        for (i, &d) in obs.dofs.iter().enumerate() {
                            cur[d] += wy[off + i];
                        }
                    }
                },
                Some(&mut out),
                None,
            );
        }
        self.domain.solve(&out)
    }

    fn continuous_adjoint(&self, y: &[f64]) -> Vec<f64> {
        let p = &self.problem;
        let mut g = FieldMovie::zeros(p.grid().node_count(), p.time().nt());
        for n in self.obs.levels.clone() {
            let off = self.obs.offset(n).unwrap();
            let lvl = g.level_mut(n);
            for (i, &d) in self.obs.dofs.iter().enumerate() {
                lvl[d] = y[off + i];
            }
        }
        let v = interior_source_wave(p, &g, Direction::Backward).expect("shapes are fixed at construction");
        let trace = normal_derivative_trace(&v, p.gamma()).expect("shapes are fixed at construction");
        trace.values().iter().map(|t| -t).collect()
    }
}

impl LinearMap for WindowOp {
    fn domain(&self) -> &Gram {
        &self.domain
    }

    fn codomain(&self) -> &Gram {
        &self.codomain
    }

    fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.domain.dim());
        let mut out = vec![0.0; self.obs.len()];
        if self.obs.is_empty() {
            return out;
        }
        let obs = &self.obs;
        self.problem.propagate(obs.levels.end - 1, Some(f), None, &mut |n, u| {
            if let Some(off) = obs.offset(n) {
                for (i, &d) in obs.dofs.iter().enumerate() {
                    out[off + i] = u[d];
                }
            }
        });
        out
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.codomain.dim());
        match self.mode {
            AdjointMode::Exact => self.exact_adjoint(y),
            AdjointMode::Continuous => self.continuous_adjoint(y),
        }
    }
}

/// Source on `B × [0,τ)` ↦ radiated field at `t = τ` on `M^(τ)`, the nodes
/// outside `B` within travel time `τ` of it.
pub struct FinalTimeOp {
    problem: Arc<WaveProblem>,
    src: Sampling,
    obs: Vec<usize>,
    step: usize,
    domain: Gram,
    codomain: Gram,
}

/// Level index of `tau`, rejecting times off the grid.
pub(crate) fn level_of(problem: &WaveProblem, tau: f64) -> Result<usize> {
    let t = problem.time();
    if !(tau > 0.0 && tau <= t.final_time() * (1.0 + 1e-12)) {
        return Err(Error::InvalidInput(format!("τ = {tau} lies outside (0, {}]", t.final_time())));
    }
    Ok(t.snap(tau))
}

/// Interior nodes outside `region` whose travel time to it is below `tau`.
pub fn shell_nodes(problem: &WaveProblem, region: &Region, tau: f64) -> Result<(Vec<usize>, Vec<f64>)> {
    let grid = problem.grid();
    let inside = region.node_mask();
    let seeds: Vec<usize> = (0..inside.len()).filter(|&i| inside[i]).collect();
    if seeds.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let d = travel_times_from(grid, problem.coeff().c(), &seeds)?;
    let nodes = (0..grid.node_count()).filter(|&i| !inside[i] && !grid.is_boundary_node(i) && d[i] < tau).collect();
    Ok((nodes, d))
}

pub fn make_t_op(problem: &Arc<WaveProblem>, tau: f64, region_b: &Region) -> Result<FinalTimeOp> {
    let step = level_of(problem, tau)?;
    let b_nodes = region_b.interior_nodes();
    if b_nodes.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let (obs, _) = shell_nodes(problem, region_b, tau)?;
    let src = Sampling::new(b_nodes, 0..step);
    let dt = problem.time().dt();
    let domain = Gram::diagonal(problem.node_weights(src.dofs.len(), step, dt));
    let codomain = Gram::diagonal(problem.node_weights(obs.len(), 1, 1.0));
    Ok(FinalTimeOp { problem: problem.clone(), src, obs, step, domain, codomain })
}

impl FinalTimeOp {
    /// Nodes of `M^(τ)`, in codomain order.
    pub fn shell(&self) -> &[usize] {
        &self.obs
    }

    /// Source nodes in `B`, in domain order per level.
    pub fn sources(&self) -> &Sampling {
        &self.src
    }

    pub fn step(&self) -> usize {
        self.step
    }
}

impl LinearMap for FinalTimeOp {
    fn domain(&self) -> &Gram {
        &self.domain
    }

    fn codomain(&self) -> &Gram {
        &self.codomain
    }

    fn apply(&self, g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.domain.dim());
        let mut out = vec![0.0; self.obs.len()];
        let step = self.step;
        self.problem.propagate(step, None, Some((&self.src, g)), &mut |n, u| {
            if n == step {
                for (o, &d) in out.iter_mut().zip(&self.obs) {
                    *o = u[d];
                }
            }
        });
        out
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.codomain.dim());
        let wy = self.codomain.apply(y);
        let mut out = vec![0.0; self.src.len()];
        let step = self.step;
        self.problem.propagate_transpose(
            step,
            &mut |n, cur| {
                if n == step {
                    for (v, &d) in wy.iter().zip(&self.obs) {
                        cur[d] += v;
                    }
                }
            },
            None,
            Some((&self.src, &mut out)),
        );
        self.domain.solve(&out)
    }
}

/// Boundary data on `(0,τ]` ↦ field at `t = τ` on every interior node.
pub struct SnapshotOp {
    problem: Arc<WaveProblem>,
    obs: Vec<usize>,
    step: usize,
    domain: Gram,
    codomain: Gram,
}

pub fn make_p_op(problem: &Arc<WaveProblem>, tau: f64) -> Result<SnapshotOp> {
    let step = level_of(problem, tau)?;
    let grid = problem.grid();
    let obs: Vec<usize> = (0..grid.node_count()).filter(|&i| !grid.is_boundary_node(i)).collect();
    let domain = Gram::diagonal(problem.boundary_weights(step));
    let codomain = Gram::diagonal(problem.node_weights(obs.len(), 1, 1.0));
    Ok(SnapshotOp { problem: problem.clone(), obs, step, domain, codomain })
}

impl SnapshotOp {
    pub fn nodes(&self) -> &[usize] {
        &self.obs
    }

    pub fn step(&self) -> usize {
        self.step
    }
}

impl LinearMap for SnapshotOp {
    fn domain(&self) -> &Gram {
        &self.domain
    }

    fn codomain(&self) -> &Gram {
        &self.codomain
    }

    fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.domain.dim());
        let mut out = vec![0.0; self.obs.len()];
        let step = self.step;
        self.problem.propagate(step, Some(f), None, &mut |n, u| {
            if n == step {
                for (o, &d) in out.iter_mut().zip(&self.obs) {
                    *o = u[d];
                }
            }
        });
        out
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.codomain.dim());
        let wy = self.codomain.apply(y);
        let mut out = vec![0.0; self.domain.dim()];
        let step = self.step;
        self.problem.propagate_transpose(
            step,
            &mut |n, cur| {
                if n == step {
                    for (v, &d) in wy.iter().zip(&self.obs) {
                        cur[d] += v;
                    }
                }
            },
            Some(&mut out),
            None,
        );
        self.domain.solve(&out)
    }
}
