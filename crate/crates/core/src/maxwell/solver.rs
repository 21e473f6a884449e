//! Yee leapfrog for `ε∂_tE − curl H = 0`, `μ∂_tH + curl E = 0` and its exact
//! transpose.
//!
//! Level `n` of a forward record holds `(Eⁿ, Hⁿ⁻½)`. One step reads
//!
//! ```text
//! Hⁿ⁺½ = Hⁿ⁻½ − dt μ⁻¹ C Eⁿ + s_H
//! Eⁿ⁺¹ = Eⁿ + dt ε⁻¹ Cᵀ Hⁿ⁺½ + s_E      (edges off the boundary)
//! Eⁿ⁺¹ = sign·fⁿ⁺¹ on Γ edges, 0 on the other boundary edges
//! ```

use serde::{Deserialize, Serialize};

use super::{EmBoundarySeries, EmCoefficients, EmFieldMovie, EmPatch, YeeGrid};
use crate::error::{Error, Result};
use crate::geometry::TimeGrid;
use crate::wave::{Direction, FieldMovie, CFL_LIMIT};

/// The electric or the magnetic field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    #[serde(alias = "e")]
    E,
    #[serde(alias = "h")]
    H,
}

/// Grids, coefficients and excitation patch of a Maxwell problem.
#[derive(Clone, Debug)]
pub struct EmProblem {
    yee: YeeGrid,
    time: TimeGrid,
    coeff: EmCoefficients,
    gamma: EmPatch,
    /// `dt/ε` on edges off the boundary, zero on boundary edges.
    dt_eps: Vec<f64>,
    dt_mu: Vec<f64>,
    boundary_edges: Vec<usize>,
}

impl EmProblem {
    pub fn new(yee: YeeGrid, time: TimeGrid, coeff: EmCoefficients, gamma: EmPatch) -> Result<Self> {
        if coeff.eps().len() != yee.edge_count() || coeff.mu().len() != yee.face_count() {
            return Err(Error::Shape("coefficients were sampled on a different grid".into()));
        }
        if gamma.edges().iter().any(|&e| e >= yee.edge_count() || !yee.is_boundary_edge(e)) {
            return Err(Error::Shape("boundary patch was built on a different grid".into()));
        }
        let max_dt = Self::max_stable_dt(&yee, &coeff);
        if time.dt() > max_dt * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt: time.dt(), max_dt });
        }
        let dt = time.dt();
        let boundary_edges: Vec<usize> = (0..yee.edge_count()).filter(|&e| yee.is_boundary_edge(e)).collect();
        let mut dt_eps: Vec<f64> = coeff.eps().iter().map(|e| dt / e).collect();
        for &e in &boundary_edges {
            dt_eps[e] = 0.0;
        }
        let dt_mu = coeff.mu().iter().map(|m| dt / m).collect();
        Ok(Self { yee, time, coeff, gamma, dt_eps, dt_mu, boundary_edges })
    }

    /// Largest `dt` with `dt·max(1/√(εμ))·√(Σ 1/h²) ≤ 0.95`.
    pub fn max_stable_dt(yee: &YeeGrid, coeff: &EmCoefficients) -> f64 {
        CFL_LIMIT / (coeff.speed_max() * yee.grid().inv_h2_sum().sqrt())
    }

    pub fn yee(&self) -> &YeeGrid {
        &self.yee
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    pub fn coeff(&self) -> &EmCoefficients {
        &self.coeff
    }

    pub fn gamma(&self) -> &EmPatch {
        &self.gamma
    }

    pub fn with_gamma(&self, gamma: EmPatch) -> Result<Self> {
        Self::new(self.yee.clone(), self.time, self.coeff.clone(), gamma)
    }

    /// True for edges that are updated by the scheme (not on the boundary).
    pub fn is_free_edge(&self, e: usize) -> bool {
        self.dt_eps[e] != 0.0
    }

    /// Weights `area` of the H¹-in-time boundary product.
    pub fn boundary_weights(&self) -> Vec<f64> {
        self.gamma.area().to_vec()
    }

    /// `ε·vol·scale` per listed edge, repeated for `levels` levels.
    pub fn edge_weights(&self, edges: &[usize], levels: usize, scale: f64) -> Vec<f64> {
        let v = self.yee.volume() * scale;
        let one: Vec<f64> = edges.iter().map(|&e| self.coeff.eps()[e] * v).collect();
        one.repeat(levels)
    }

    /// `μ·vol·scale` per listed face, repeated for `levels` levels.
    pub fn face_weights(&self, faces: &[usize], levels: usize, scale: f64) -> Vec<f64> {
        let v = self.yee.volume() * scale;
        let one: Vec<f64> = faces.iter().map(|&f| self.coeff.mu()[f] * v).collect();
        one.repeat(levels)
    }

    fn set_boundary(&self, e: &mut [f64], f: Option<&[f64]>, level: usize) {
        for &b in &self.boundary_edges {
            e[b] = 0.0;
        }
        if let Some(f) = f {
            let ng = self.gamma.len();
            let fl = &f[(level - 1) * ng..level * ng];
            for ((&edge, &s), &v) in self.gamma.edges().iter().zip(self.gamma.signs()).zip(fl) {
                // `+ 0.0` turns `−1·0` into a positive zero.
                e[edge] = s * v + 0.0;
            }
        }
    }

    /// Forward march over `steps` steps. `sources(field, n, state)` adds the
    /// raw source increments of step `n`; `observe(n, Eⁿ, Hⁿ⁻½)` runs for
    /// `n = 0..=steps`.
    pub(crate) fn propagate(
        &self,
        steps: usize,
        boundary: Option<&[f64]>,
        sources: &mut dyn FnMut(Field, usize, &mut [f64]),
        observe: &mut dyn FnMut(usize, &[f64], &[f64]),
    ) {
        let (ne, nf) = (self.yee.edge_count(), self.yee.face_count());
        if let Some(f) = boundary {
            assert!(f.len() >= steps * self.gamma.len(), "boundary data shorter than the march");
        }
        let (mut e, mut h) = (vec![0.0; ne], vec![0.0; nf]);
        let (mut te, mut th) = (vec![0.0; ne], vec![0.0; nf]);
        observe(0, &e, &h);
        for n in 0..steps {
            self.yee.curl(&e, &mut th);
            for ((h, c), w) in h.iter_mut().zip(&th).zip(&self.dt_mu) {
                *h -= w * c;
            }
            sources(Field::H, n, &mut h);
            self.yee.curl_t(&h, &mut te);
            for ((e, c), w) in e.iter_mut().zip(&te).zip(&self.dt_eps) {
                *e += w * c;
            }
            sources(Field::E, n, &mut e);
            self.set_boundary(&mut e, boundary, n + 1);
            observe(n + 1, &e, &h);
        }
    }

    /// Transpose of [`EmProblem::propagate`]. `seed(n, Ē, H̄)` adds the
    /// observation weights of level `n`; `sources_out(field, n, co-state)`
    /// receives the gradient with respect to the source increments of step
    /// `n`; boundary gradients accumulate into `boundary_out`.
    pub(crate) fn propagate_transpose(
        &self,
        steps: usize,
        seed: &mut dyn FnMut(usize, &mut [f64], &mut [f64]),
        mut boundary_out: Option<&mut [f64]>,
        sources_out: &mut dyn FnMut(Field, usize, &[f64]),
    ) {
        let (ne, nf) = (self.yee.edge_count(), self.yee.face_count());
        let ng = self.gamma.len();
        let (mut e, mut h) = (vec![0.0; ne], vec![0.0; nf]);
        let (mut te, mut th) = (vec![0.0; ne], vec![0.0; nf]);
        seed(steps, &mut e, &mut h);
        for n in (0..steps).rev() {
            if let Some(out) = boundary_out.as_deref_mut() {
                let fl = &mut out[n * ng..(n + 1) * ng];
                for ((o, &edge), &s) in fl.iter_mut().zip(self.gamma.edges()).zip(self.gamma.signs()) {
                    *o += s * e[edge];
                }
            }
            for &b in &self.boundary_edges {
                e[b] = 0.0;
            }
            sources_out(Field::E, n, &e);
            for ((t, e), w) in te.iter_mut().zip(&e).zip(&self.dt_eps) {
                *t = w * e;
            }
            self.yee.curl(&te, &mut th);
            for (h, c) in h.iter_mut().zip(&th) {
                *h += c;
            }
            sources_out(Field::H, n, &h);
            for ((t, h), w) in th.iter_mut().zip(&h).zip(&self.dt_mu) {
                *t = w * h;
            }
            self.yee.curl_t(&th, &mut te);
            for (e, c) in e.iter_mut().zip(&te) {
                *e -= c;
            }
            seed(n, &mut e, &mut h);
        }
    }

    /// Backward march from zero terminal data, the exact inverse of the
    /// forward step. `observe(n, Eⁿ, Hⁿ⁺½)` runs for `n = steps..=0`.
    fn propagate_backward(
        &self,
        steps: usize,
        sources: &mut dyn FnMut(Field, usize, &mut [f64]),
        observe: &mut dyn FnMut(usize, &[f64], &[f64]),
    ) {
        let (ne, nf) = (self.yee.edge_count(), self.yee.face_count());
        let (mut e, mut h) = (vec![0.0; ne], vec![0.0; nf]);
        let (mut te, mut th) = (vec![0.0; ne], vec![0.0; nf]);
        observe(steps, &e, &h);
        for n in (0..steps).rev() {
            // Hⁿ⁺½ from Hⁿ⁺³ᐟ² and Eⁿ⁺¹.
            self.yee.curl(&e, &mut th);
            for ((h, c), w) in h.iter_mut().zip(&th).zip(&self.dt_mu) {
                *h += w * c;
            }
            sources(Field::H, n + 1, &mut h);
            self.yee.curl_t(&h, &mut te);
            for ((e, c), w) in e.iter_mut().zip(&te).zip(&self.dt_eps) {
                *e -= w * c;
            }
            sources(Field::E, n, &mut e);
            self.set_boundary(&mut e, None, 0);
            observe(n, &e, &h);
        }
    }
}

/// Forward solve with boundary data `f`; level `n` holds `(Eⁿ, Hⁿ⁻½)`.
pub fn forward_maxwell(problem: &EmProblem, f: &EmBoundarySeries) -> Result<EmFieldMovie> {
    let nt = problem.time.nt();
    if f.dofs() != problem.gamma.len() || f.nt() != nt {
        return Err(Error::Shape(format!(
            "boundary series is {}×{}, problem needs {}×{nt}",
            f.dofs(),
            f.nt(),
            problem.gamma.len()
        )));
    }
    let mut movie = EmFieldMovie::zeros(&problem.yee, nt);
    problem.propagate(nt, Some(f.values()), &mut |_, _, _| {}, &mut |n, e, h| {
        movie.e.level_mut(n).copy_from_slice(e);
        movie.h.level_mut(n).copy_from_slice(h);
    });
    Ok(movie)
}

fn check_source(problem: &EmProblem, s_e: &FieldMovie, s_h: &FieldMovie) -> Result<()> {
    let nt = problem.time.nt();
    if s_e.dofs() != problem.yee.edge_count() || s_h.dofs() != problem.yee.face_count() {
        return Err(Error::Shape("sources must live on all edges and all faces".into()));
    }
    if s_e.nt() != nt || s_h.nt() != nt {
        return Err(Error::Shape(format!("sources need levels 0..={nt}")));
    }
    Ok(())
}

/// Solve `∂_tE = ε⁻¹curl H + s_E`, `∂_tH = −μ⁻¹curl E + s_H` with PEC walls
/// and zero initial (`Forward`) or terminal (`Backward`) data. `s_E` enters
/// each step at the half level, `s_H` at the integer level.
///
/// Forward records hold `(Eⁿ, Hⁿ⁻½)` at level `n`, backward records
/// `(Eⁿ, Hⁿ⁺½)`.
pub fn interior_source_maxwell(
    problem: &EmProblem,
    s_e: &FieldMovie,
    s_h: &FieldMovie,
    direction: Direction,
) -> Result<EmFieldMovie> {
    check_source(problem, s_e, s_h)?;
    let nt = problem.time.nt();
    let dt = problem.time.dt();
    let mut movie = EmFieldMovie::zeros(&problem.yee, nt);
    let mut add = |field: Field, n: usize, state: &mut [f64]| match field {
        Field::E => {
            let (a, b) = (s_e.level(n), s_e.level(n + 1));
            for (k, x) in state.iter_mut().enumerate() {
                *x += direction_sign(direction) * 0.5 * dt * (a[k] + b[k]);
            }
        }
        Field::H => {
            for (x, s) in state.iter_mut().zip(s_h.level(n)) {
                *x += direction_sign(direction) * dt * s;
            }
        }
    };
    let mut record = |n: usize, e: &[f64], h: &[f64]| {
        movie.e.level_mut(n).copy_from_slice(e);
        movie.h.level_mut(n).copy_from_slice(h);
    };
    match direction {
        Direction::Forward => problem.propagate(nt, None, &mut add, &mut record),
        Direction::Backward => problem.propagate_backward(nt, &mut add, &mut record),
    }
    Ok(movie)
}

fn direction_sign(d: Direction) -> f64 {
    match d {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    }
}

/// The adjoint system: backward solve of `ε∂_tẼ − curl H̃ = ε𝒮_T[j₁]`,
/// `μ∂_tH̃ + curl Ẽ = μ𝒮_T[j₂]` with `𝒮_T[g](t) = ∫_T^t g`, zero terminal
/// data and PEC walls. Level `n` holds `(Ẽⁿ, H̃ⁿ⁺½)`.
pub fn adjoint_maxwell_solve(problem: &EmProblem, j1: &FieldMovie, j2: &FieldMovie) -> Result<EmFieldMovie> {
    check_source(problem, j1, j2)?;
    let dt = problem.time.dt();
    let s1 = integrate_from_end(j1, dt);
    let s2 = integrate_from_end(j2, dt);
    interior_source_maxwell(problem, &s1, &s2, Direction::Backward)
}

/// Cumulative trapezoid `∫_T^{t_n} g`, zero at the last level.
fn integrate_from_end(g: &FieldMovie, dt: f64) -> FieldMovie {
    let nt = g.nt();
    let mut out = FieldMovie::zeros(g.dofs(), nt);
    for n in (0..nt).rev() {
        let (lo, hi) = (g.level(n), g.level(n + 1));
        let next = out.level(n + 1).to_vec();
        for (k, o) in out.level_mut(n).iter_mut().enumerate() {
            *o = next[k] - 0.5 * dt * (lo[k] + hi[k]);
        }
    }
    out
}

/// `½(ε|Eⁿ|² + μ Hⁿ⁻½·Hⁿ⁺½)`, exactly conserved by the scheme under PEC.
pub fn em_energy(problem: &EmProblem, e: &[f64], h_before: &[f64], h_after: &[f64]) -> f64 {
    let v = problem.yee.volume();
    let ee: f64 = e.iter().zip(problem.coeff.eps()).map(|(e, w)| w * e * e).sum();
    let hh: f64 = h_before.iter().zip(h_after).zip(problem.coeff.mu()).map(|((a, b), w)| w * a * b).sum();
    0.5 * v * (ee + hh)
}

/// `div_h(εE)` at every grid node (meaningful at interior nodes).
pub fn electric_divergence(problem: &EmProblem, e: &[f64]) -> Vec<f64> {
    problem.yee.node_divergence(e, problem.coeff.eps())
}

/// `div_h(μH)` at every cell.
pub fn magnetic_divergence(problem: &EmProblem, h: &[f64]) -> Vec<f64> {
    problem.yee.cell_divergence(h, problem.coeff.mu())
}
