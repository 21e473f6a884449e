//! Restricted solution operators of the Maxwell problem as [`LinearMap`]s.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::solver::{adjoint_maxwell_solve, EmProblem, Field};
use super::DivFreeProjector;
use crate::error::{Error, Result};
use crate::geometry::{travel_times_from, Region};
use crate::linops::{Gram, LinearMap};
use crate::wave::{AdjointMode, FieldMovie, SpaceTimeWindow};

/// Which fields a window operator observes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observed {
    /// Both `E` and `H`.
    #[default]
    #[serde(alias = "L", alias = "both")]
    L,
    #[serde(alias = "e")]
    E,
    #[serde(alias = "h")]
    H,
}

impl Observed {
    fn sees(self, field: Field) -> bool {
        matches!((self, field), (Observed::L, _) | (Observed::E, Field::E) | (Observed::H, Field::H))
    }
}

fn level_of(problem: &EmProblem, tau: f64) -> Result<usize> {
    let t = problem.time();
    if !(tau > 0.0 && tau <= t.final_time() * (1.0 + 1e-12)) {
        return Err(Error::InvalidInput(format!("τ = {tau} lies outside (0, {}]", t.final_time())));
    }
    Ok(t.snap(tau))
}

/// Free edges and all faces whose positions lie in `region`.
pub fn region_dofs(problem: &EmProblem, region: &Region) -> (Vec<usize>, Vec<usize>) {
    let y = problem.yee();
    let edges = (0..y.edge_count()).filter(|&e| problem.is_free_edge(e) && region.contains(&y.edge_position(e))).collect();
    let faces = (0..y.face_count()).filter(|&f| region.contains(&y.face_position(f))).collect();
    (edges, faces)
}

/// `f ↦ (E_f, H_f)` restricted to a space-time window. The codomain is
/// level-major, each level holding the `E` edges then the `H` faces; a field
/// that is not observed contributes no entries.
pub struct EmWindowOp {
    problem: Arc<EmProblem>,
    edges: Vec<usize>,
    faces: Vec<usize>,
    levels: std::ops::Range<usize>,
    observed: Observed,
    mode: AdjointMode,
    /// Γ face carrying the tangential `H` paired with each Γ edge.
    trace_faces: Vec<usize>,
    domain: Gram,
    codomain: Gram,
}

pub fn make_em_op(
    problem: &Arc<EmProblem>,
    window: &SpaceTimeWindow,
    observed: Observed,
    mode: AdjointMode,
) -> Result<EmWindowOp> {
    if window.last > problem.time().nt() {
        return Err(Error::InvalidInput(format!("window ends at level {} beyond the time grid", window.last)));
    }
    let (mut edges, mut faces) = region_dofs(problem, &window.region);
    if !observed.sees(Field::E) {
        edges.clear();
    }
    if !observed.sees(Field::H) {
        faces.clear();
    }
    if edges.is_empty() && faces.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let levels = window.levels();
    let dt = problem.time().dt();
    let mut one = problem.edge_weights(&edges, 1, dt);
    one.extend(problem.face_weights(&faces, 1, dt));
    let codomain = Gram::diagonal(one.repeat(levels.len()));
    let domain =
        Gram::TimeDifference { weights: problem.boundary_weights().into(), levels: problem.time().nt(), dt };
    let trace_faces = trace_faces(problem);
    Ok(EmWindowOp { problem: problem.clone(), edges, faces, levels, observed, mode, trace_faces, domain, codomain })
}

/// For a Γ edge `E_t` on the face with normal axis `a`, the `H` face of the
/// other tangential component half a cell inward.
fn trace_faces(problem: &EmProblem) -> Vec<usize> {
    let y = problem.yee();
    let n = y.cells();
    problem
        .gamma()
        .edges()
        .iter()
        .map(|&e| {
            let (t, mut p) = y.edge_of(e);
            let a = (0..3).find(|&a| a != t && (p[a] == 0 || p[a] == n[a])).expect("Γ edges lie on the boundary");
            p[a] = p[a].min(n[a] - 1);
            y.face_index(3 - a - t, p)
        })
        .collect()
}

impl EmWindowOp {
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn faces(&self) -> &[usize] {
        &self.faces
    }

    pub fn levels(&self) -> std::ops::Range<usize> {
        self.levels.clone()
    }

    pub fn observed(&self) -> Observed {
        self.observed
    }

    pub fn mode(&self) -> AdjointMode {
        self.mode
    }

    fn per_level(&self) -> usize {
        self.edges.len() + self.faces.len()
    }

    fn offset(&self, n: usize) -> Option<usize> {
        self.levels.contains(&n).then(|| (n - self.levels.start) * self.per_level())
    }

    fn exact_adjoint(&self, y: &[f64]) -> Vec<f64> {
        let wy = self.codomain.apply(y);
        let mut out = vec![0.0; self.domain.dim()];
        if !self.levels.is_empty() {
            let ne = self.edges.len();
            self.problem.propagate_transpose(
                self.levels.end - 1,
                &mut |n, e, h| {
                    if let Some(off) = self.offset(n) {
                        for (i, &d) in self.edges.iter().enumerate() {
                            e[d] += wy[off + i];
                        }
                        for (i, &d) in self.faces.iter().enumerate() {
                            h[d] += wy[off + ne + i];
                        }
                    }
                },
                Some(&mut out),
                &mut |_, _, _| {},
            );
        }
        self.domain.solve(&out)
    }

    fn continuous_adjoint(&self, y: &[f64]) -> Vec<f64> {
        let p = &self.problem;
        let (nt, dt) = (p.time().nt(), p.time().dt());
        let yee = p.yee();
        let mut j1 = FieldMovie::zeros(yee.edge_count(), nt);
        let mut j2 = FieldMovie::zeros(yee.face_count(), nt);
        let ne = self.edges.len();
        for n in self.levels.clone() {
            let off = self.offset(n).unwrap();
            let lvl = j1.level_mut(n);
            for (i, &d) in self.edges.iter().enumerate() {
                lvl[d] = y[off + i];
            }
            // H is observed at `t_n − dt/2`.
            for m in [n - 1, n] {
                let lvl = j2.level_mut(m);
                for (i, &d) in self.faces.iter().enumerate() {
                    lvl[d] += 0.5 * y[off + ne + i];
                }
            }
        }
        let m = adjoint_maxwell_solve(p, &j1, &j2).expect("shapes are fixed at construction");
        // Tangential H̃ at integer levels, then −∫_0^t.
        let ng = self.trace_faces.len();
        let at = |n: usize| -> Vec<f64> {
            let hi = m.h.level(n);
            if n == 0 {
                return self.trace_faces.iter().map(|&f| hi[f]).collect();
            }
            let lo = m.h.level(n - 1);
            self.trace_faces.iter().map(|&f| 0.5 * (lo[f] + hi[f])).collect()
        };
        let mut out = vec![0.0; ng * nt];
        let mut prev = at(0);
        let mut acc = vec![0.0; ng];
        for n in 1..=nt {
            let cur = at(n);
            for k in 0..ng {
                acc[k] -= 0.5 * dt * (prev[k] + cur[k]);
                out[(n - 1) * ng + k] = acc[k];
            }
            prev = cur;
        }
        out
    }
}

impl LinearMap for EmWindowOp {
    fn domain(&self) -> &Gram {
        &self.domain
    }

    fn codomain(&self) -> &Gram {
        &self.codomain
    }

    fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.domain.dim());
        let mut out = vec![0.0; self.codomain.dim()];
        if self.levels.is_empty() {
            return out;
        }
        let ne = self.edges.len();
        self.problem.propagate(self.levels.end - 1, Some(f), &mut |_, _, _| {}, &mut |n, e, h| {
            if let Some(off) = self.offset(n) {
                for (i, &d) in self.edges.iter().enumerate() {
                    out[off + i] = e[d];
                }
                for (i, &d) in self.faces.iter().enumerate() {
                    out[off + ne + i] = h[d];
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

/// Source `j` on `B × [σ, σ+τ]` ↦ divergence-free part of the field it
/// radiates, observed on the shell `M^(τ)` outside `B`.
///
/// The source is played backwards from `σ+τ` and integrated once in time,
/// matching the adjoint of the window operators; the field observed is
/// `E` or `H` after `τ`. The domain holds `j` level-major at the levels
/// `σ+τ−steps ..= σ+τ` in ascending order.
pub struct EmFinalTimeOp {
    problem: Arc<EmProblem>,
    field: Field,
    src: Vec<usize>,
    shell: Vec<usize>,
    steps: usize,
    first: usize,
    /// `kernel[m·(steps+1) + l]`: weight of the reversed source level `l` in
    /// the increment of step `m`.
    kernel: Vec<f64>,
    projector: DivFreeProjector,
    domain: Gram,
    codomain: Gram,
}

/// Dofs of `field` outside `region` whose mean node travel time to it is
/// below `tau`: free edges for `E`, faces for `H`.
pub fn em_shell(problem: &EmProblem, region: &Region, tau: f64, field: Field) -> Result<Vec<usize>> {
    let y = problem.yee();
    let d = travel_times_to(problem, region)?;
    Ok(match field {
        Field::E => (0..y.edge_count())
            .filter(|&e| problem.is_free_edge(e) && !region.contains(&y.edge_position(e)))
            .filter(|&e| {
                let (a, b) = y.edge_nodes(e);
                0.5 * (d[a] + d[b]) < tau
            })
            .collect(),
        Field::H => (0..y.face_count())
            .filter(|&f| !region.contains(&y.face_position(f)))
            .filter(|&f| y.face_nodes(f).iter().map(|&v| d[v]).sum::<f64>() / 4.0 < tau)
            .collect(),
    })
}

/// Node travel times to the nodes of `region`.
pub fn travel_times_to(problem: &EmProblem, region: &Region) -> Result<Vec<f64>> {
    let y = problem.yee();
    let inside = region.node_mask();
    let seeds: Vec<usize> = (0..inside.len()).filter(|&i| inside[i]).collect();
    if seeds.is_empty() {
        return Err(Error::EmptyRegion);
    }
    travel_times_from(y.grid(), &problem.coeff().node_speed(y), &seeds)
}

pub fn make_em_t_op(
    problem: &Arc<EmProblem>,
    sigma: f64,
    tau: f64,
    region_b: &Region,
    field: Field,
) -> Result<EmFinalTimeOp> {
    let steps = level_of(problem, tau)?;
    if !(sigma >= 0.0) {
        return Err(Error::InvalidInput(format!("σ = {sigma} must be non-negative")));
    }
    let top = level_of(problem, sigma + tau)?;
    let first = top.checked_sub(steps).ok_or_else(|| Error::InvalidInput("σ+τ precedes τ on the grid".into()))?;
    let (edges, faces) = region_dofs(problem, region_b);
    let src = match field {
        Field::E => edges,
        Field::H => faces,
    };
    if src.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let shell = em_shell(problem, region_b, tau, field)?;
    if shell.is_empty() {
        return Err(Error::InvalidInput(format!("no dofs lie within travel time {tau} of the source region")));
    }
    let projector = match field {
        Field::E => DivFreeProjector::electric(problem, &shell)?,
        Field::H => DivFreeProjector::magnetic(problem, &shell)?,
    };
    let dt = problem.time().dt();
    let weights = |dofs: &[usize], levels, scale| match field {
        Field::E => problem.edge_weights(dofs, levels, scale),
        Field::H => problem.face_weights(dofs, levels, scale),
    };
    let domain = Gram::diagonal(weights(&src, steps + 1, dt));
    let codomain = Gram::diagonal(weights(&shell, 1, 1.0));
    Ok(EmFinalTimeOp {
        problem: problem.clone(),
        field,
        src,
        shell,
        steps,
        first,
        kernel: source_kernel(steps, dt),
        projector,
        domain,
        codomain,
    })
}

/// Step `m` adds `dt·½(Sᵐ + Sᵐ⁺¹)` with `Sᵐ` the trapezoid `∫_0^{t_m}` of the
/// reversed source.
fn source_kernel(steps: usize, dt: f64) -> Vec<f64> {
    let w = steps + 1;
    let cumulative = |m: usize| -> Vec<f64> {
        let mut s = vec![0.0; w];
        if m > 0 {
            for (l, v) in s.iter_mut().enumerate().take(m + 1) {
                *v = if l == 0 || l == m { 0.5 * dt } else { dt };
            }
        }
        s
    };
    let mut k = vec![0.0; steps * w];
    for m in 0..steps {
        let (a, b) = (cumulative(m), cumulative(m + 1));
        for l in 0..w {
            k[m * w + l] = dt * 0.5 * (a[l] + b[l]);
        }
    }
    k
}

impl EmFinalTimeOp {
    pub fn field(&self) -> Field {
        self.field
    }

    pub fn sources(&self) -> &[usize] {
        &self.src
    }

    pub fn shell(&self) -> &[usize] {
        &self.shell
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// First source level; the domain covers `first ..= first + steps`.
    pub fn first_level(&self) -> usize {
        self.first
    }

    pub fn projector(&self) -> &DivFreeProjector {
        &self.projector
    }
}

impl LinearMap for EmFinalTimeOp {
    fn domain(&self) -> &Gram {
        &self.domain
    }

    fn codomain(&self) -> &Gram {
        &self.codomain
    }

    fn apply(&self, j: &[f64]) -> Vec<f64> {
        assert_eq!(j.len(), self.domain.dim());
        let (ns, w, steps) = (self.src.len(), self.steps + 1, self.steps);
        // Increments per step, reading the source backwards in time.
        let mut inc = vec![0.0; steps * ns];
        for m in 0..steps {
            let row = &mut inc[m * ns..(m + 1) * ns];
            for l in 0..w {
                let c = self.kernel[m * w + l];
                if c != 0.0 {
                    let lvl = &j[(steps - l) * ns..(steps - l + 1) * ns];
                    for (r, v) in row.iter_mut().zip(lvl) {
                        *r += c * v;
                    }
                }
            }
        }
        let mut snap = vec![0.0; self.shell.len()];
        let field = self.field;
        self.problem.propagate(
            steps,
            None,
            &mut |f, m, state| {
                if f == field {
                    for (&d, v) in self.src.iter().zip(&inc[m * ns..(m + 1) * ns]) {
                        state[d] += v;
                    }
                }
            },
            &mut |n, e, h| {
                if n == steps {
                    let state = if field == Field::E { e } else { h };
                    for (o, &d) in snap.iter_mut().zip(&self.shell) {
                        *o = state[d];
                    }
                }
            },
        );
        self.projector.apply(&snap)
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.codomain.dim());
        let wz = self.codomain.apply(&self.projector.apply(y));
        let (ns, w, steps) = (self.src.len(), self.steps + 1, self.steps);
        let mut g = vec![0.0; steps * ns];
        let field = self.field;
        self.problem.propagate_transpose(
            steps,
            &mut |n, e, h| {
                if n == steps {
                    let state = if field == Field::E { e } else { h };
                    for (v, &d) in wz.iter().zip(&self.shell) {
                        state[d] += v;
                    }
                }
            },
            None,
            &mut |f, m, co| {
                if f == field {
                    for (o, &d) in g[m * ns..(m + 1) * ns].iter_mut().zip(&self.src) {
                        *o = co[d];
                    }
                }
            },
        );
        let mut out = vec![0.0; w * ns];
        for m in 0..steps {
            for l in 0..w {
                let c = self.kernel[m * w + l];
                if c != 0.0 {
                    let lvl = &mut out[(steps - l) * ns..(steps - l + 1) * ns];
                    for (o, v) in lvl.iter_mut().zip(&g[m * ns..(m + 1) * ns]) {
                        *o += c * v;
                    }
                }
            }
        }
        self.domain.solve(&out)
    }
}

/// Boundary data on `(0,τ]` ↦ divergence-free part of `E` at `t = τ` on every
/// free edge.
pub struct EmSnapshotOp {
    problem: Arc<EmProblem>,
    edges: Vec<usize>,
    step: usize,
    projector: DivFreeProjector,
    domain: Gram,
    codomain: Gram,
}

pub fn make_em_p_op(problem: &Arc<EmProblem>, tau: f64) -> Result<EmSnapshotOp> {
    let step = level_of(problem, tau)?;
    let edges: Vec<usize> = (0..problem.yee().edge_count()).filter(|&e| problem.is_free_edge(e)).collect();
    let projector = DivFreeProjector::electric(problem, &edges)?;
    let dt = problem.time().dt();
    let domain = Gram::TimeDifference { weights: problem.boundary_weights().into(), levels: step, dt };
    let codomain = Gram::diagonal(problem.edge_weights(&edges, 1, 1.0));
    Ok(EmSnapshotOp { problem: problem.clone(), edges, step, projector, domain, codomain })
}

impl EmSnapshotOp {
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn projector(&self) -> &DivFreeProjector {
        &self.projector
    }
}

impl LinearMap for EmSnapshotOp {
    fn domain(&self) -> &Gram {
        &self.domain
    }

    fn codomain(&self) -> &Gram {
        &self.codomain
    }

    fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.domain.dim());
        let mut snap = vec![0.0; self.edges.len()];
        let step = self.step;
        self.problem.propagate(step, Some(f), &mut |_, _, _| {}, &mut |n, e, _| {
            if n == step {
                for (o, &d) in snap.iter_mut().zip(&self.edges) {
                    *o = e[d];
                }
            }
        });
        self.projector.apply(&snap)
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.codomain.dim());
        let wz = self.codomain.apply(&self.projector.apply(y));
        let mut out = vec![0.0; self.domain.dim()];
        let step = self.step;
        self.problem.propagate_transpose(
            step,
            &mut |n, e, _| {
                if n == step {
                    for (v, &d) in wz.iter().zip(&self.edges) {
                        e[d] += v;
                    }
                }
            },
            Some(&mut out),
            &mut |_, _, _| {},
        );
        self.domain.solve(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_region, Face, Grid, PatchSpec, Shape, TimeGrid};
    use crate::linops::dot_test;
    use crate::maxwell::{build_em_patch, EmCoefficients, YeeGrid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(n: usize, nt: usize, seed: u64) -> Arc<EmProblem> {
        let yee = YeeGrid::new(&Grid::unit(3, n).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eps = (0..yee.edge_count()).map(|_| rng.gen_range(0.5..2.0)).collect();
        let mu = (0..yee.face_count()).map(|_| rng.gen_range(0.5..2.0)).collect();
        let coeff = EmCoefficients::from_values(&yee, eps, mu).unwrap();
        let gamma = build_em_patch(&yee, &PatchSpec::faces(&[Face::XMin, Face::YMax])).unwrap();
        let dt = EmProblem::max_stable_dt(&yee, &coeff);
        Arc::new(EmProblem::new(yee, TimeGrid::new(nt, dt).unwrap(), coeff, gamma).unwrap())
    }

    #[test]
    fn window_operators_are_adjoint_exact() {
        let p = random_problem(8, 30, 1);
        let b = build_region(p.yee().grid(), &Shape::ball(&[0.6, 0.4, 0.5], 0.25)).unwrap();
        let dt = p.time().dt();
        let w = SpaceTimeWindow::new(b, 10.0 * dt, 25.0 * dt, p.time()).unwrap();
        for which in [Observed::L, Observed::E, Observed::H] {
            let op = make_em_op(&p, &w, which, AdjointMode::Exact).unwrap();
            assert!(dot_test(&op, 3, 7).unwrap() <= 1e-12, "{which:?}");
        }
    }

    #[test]
    fn final_time_operators_are_adjoint_exact() {
        let p = random_problem(8, 30, 2);
        let b = build_region(p.yee().grid(), &Shape::ball(&[0.5, 0.5, 0.5], 0.2)).unwrap();
        let dt = p.time().dt();
        for field in [Field::E, Field::H] {
            let t = make_em_t_op(&p, 5.0 * dt, 8.0 * dt, &b, field).unwrap();
            assert!(!t.shell().is_empty());
            assert_eq!(t.first_level(), 5);
            assert!(dot_test(&t, 3, 3).unwrap() <= 1e-12, "{field:?}");
        }
        let pp = make_em_p_op(&p, 12.0 * dt).unwrap();
        assert!(dot_test(&pp, 3, 4).unwrap() <= 1e-12);
    }

    #[test]
    fn final_time_output_is_divergence_free() {
        let p = random_problem(8, 30, 3);
        let b = build_region(p.yee().grid(), &Shape::ball(&[0.5, 0.5, 0.5], 0.2)).unwrap();
        let t = make_em_t_op(&p, 0.0, 8.0 * p.time().dt(), &b, Field::E).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let j: Vec<f64> = (0..t.domain().dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let out = t.apply(&j);
        let scale = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(scale > 0.0);
        assert!(t.projector().divergence_defect(&out) <= 1e-12 * scale);
    }

    #[test]
    fn empty_time_window_maps_to_nothing() {
        let p = random_problem(6, 20, 4);
        let b = build_region(p.yee().grid(), &Shape::ball(&[0.5, 0.5, 0.5], 0.3)).unwrap();
        let dt = p.time().dt();
        let w = SpaceTimeWindow::new(b, 10.0 * dt, 10.2 * dt, p.time()).unwrap();
        let l = make_em_op(&p, &w, Observed::L, AdjointMode::Exact).unwrap();
        assert!(l.apply(&vec![1.0; l.domain().dim()]).is_empty());
        assert!(l.adjoint(&[]).iter().all(|&v| v == 0.0));
    }

    /// Fields radiated from the boundary are discretely divergence free, so
    /// the adjoint of the `E` window operator ignores discrete gradients of
    /// potentials supported well inside `B`.
    #[test]
    fn electric_adjoint_ignores_gradients() {
        let p = random_problem(8, 24, 5);
        let b = build_region(p.yee().grid(), &Shape::boxed(&[0.2, 0.2, 0.2], &[0.8, 0.8, 0.8])).unwrap();
        let dt = p.time().dt();
        let w = SpaceTimeWindow::new(b.clone(), 8.0 * dt, 20.0 * dt, p.time()).unwrap();
        let op = make_em_op(&p, &w, Observed::E, AdjointMode::Exact).unwrap();
        let yee = p.yee();
        let grid = yee.grid();
        let inner = Shape::boxed(&[0.3, 0.3, 0.3], &[0.7, 0.7, 0.7]);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let index: std::collections::HashMap<usize, usize> =
            op.edges().iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut y = vec![0.0; op.codomain().dim()];
        let mut z = vec![0.0; op.codomain().dim()];
        for (l, _) in op.levels().enumerate() {
            let phi: Vec<f64> = (0..grid.node_count())
                .map(|v| if inner.contains(&grid.node_position(v)) { rng.gen_range(-1.0..1.0) } else { 0.0 })
                .collect();
            let g = yee.grad(&phi);
            for (e, v) in g.iter().enumerate() {
                if *v != 0.0 {
                    let i = index[&e];
                    y[l * op.edges().len() + i] = *v;
                }
            }
            for v in &mut z[l * op.edges().len()..(l + 1) * op.edges().len()] {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
        let reference = op.domain().norm(&op.adjoint(&z));
        assert!(op.domain().norm(&op.adjoint(&y)) <= 1e-12 * reference);
    }

    #[test]
    fn electric_adjoint_sees_only_the_divergence_free_part() {
        let p = random_problem(8, 24, 7);
        let b = build_region(p.yee().grid(), &Shape::ball(&[0.5, 0.5, 0.5], 0.3)).unwrap();
        let dt = p.time().dt();
        let w = SpaceTimeWindow::new(b, 8.0 * dt, 20.0 * dt, p.time()).unwrap();
        let op = make_em_op(&p, &w, Observed::E, AdjointMode::Exact).unwrap();
        let proj = DivFreeProjector::electric_grounded(&p, op.edges()).unwrap();
        assert!(proj.potentials() > 0);
        let ne = op.edges().len();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let j: Vec<f64> = (0..op.codomain().dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let jt: Vec<f64> = j.chunks(ne).flat_map(|l| proj.apply(l)).collect();
        let (a, b) = (op.adjoint(&j), op.adjoint(&jt));
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        assert!(op.domain().norm(&d) <= 1e-10 * op.domain().norm(&a));
    }
}
