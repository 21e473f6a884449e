//! Leapfrog scheme for `c⁻²u_tt − Δu + qu = s` and its exact transpose.

use rayon::prelude::*;

use super::{BoundaryTimeSeries, CoefficientField, FieldMovie, Sampling};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryPatch, Grid, TimeGrid};

/// Node count above which the stencil sweeps run on the rayon pool.
const PARALLEL_NODES: usize = 1 << 15;

/// CFL safety factor of the leapfrog scheme.
pub const CFL_LIMIT: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Everything a wave solve needs: grids, coefficients and the excitation patch.
#[derive(Clone, Debug)]
pub struct WaveProblem {
    grid: Grid,
    time: TimeGrid,
    coeff: CoefficientField,
    gamma: BoundaryPatch,
    /// `dt²c²` per node.
    c2dt2: Vec<f64>,
    /// `1/h²` per axis, zero for an absent third axis.
    w: [f64; 3],
    /// Patch node, its inward neighbour, and `1/h²` along the normal.
    links: Vec<(usize, usize, f64)>,
    parallel: bool,
}

impl WaveProblem {
    pub fn new(grid: Grid, time: TimeGrid, coeff: CoefficientField, gamma: BoundaryPatch) -> Result<Self> {
        if coeff.c().len() != grid.node_count() {
            return Err(Error::Shape("coefficients were sampled on a different grid".into()));
        }
        if gamma.grid().node_count() != grid.node_count() {
            return Err(Error::Shape("boundary patch was built on a different grid".into()));
        }
        let max_dt = Self::max_stable_dt(&grid, &coeff);
        if time.dt() > max_dt * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt: time.dt(), max_dt });
        }
        let dt2 = time.dt() * time.dt();
        let c2dt2 = coeff.c().iter().map(|c| dt2 * c * c).collect();
        let mut w = [0.0; 3];
        for (a, wa) in w.iter_mut().enumerate().take(grid.dim()) {
            *wa = 1.0 / (grid.spacing(a) * grid.spacing(a));
        }
        let links = (0..gamma.len())
            .map(|k| {
                let p = gamma.nodes()[k];
                (p.node, (p.node as isize + gamma.inward_offset(k)) as usize, w[p.face.axis()])
            })
            .collect();
        let parallel = grid.node_count() >= PARALLEL_NODES;
        Ok(Self { grid, time, coeff, gamma, c2dt2, w, links, parallel })
    }

    /// Largest `dt` with `dt·max(c)·√(Σ 1/h²) ≤ 0.95`.
    pub fn max_stable_dt(grid: &Grid, coeff: &CoefficientField) -> f64 {
        CFL_LIMIT / (coeff.c_max() * grid.inv_h2_sum().sqrt())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    pub fn coeff(&self) -> &CoefficientField {
        &self.coeff
    }

    pub fn gamma(&self) -> &BoundaryPatch {
        &self.gamma
    }

    /// Same problem with another patch.
    pub fn with_gamma(&self, gamma: BoundaryPatch) -> Result<Self> {
        Self::new(self.grid.clone(), self.time, self.coeff.clone(), gamma)
    }

    /// `area·dt` weights of boundary data on `levels` consecutive levels.
    pub fn boundary_weights(&self, levels: usize) -> Vec<f64> {
        let dt = self.time.dt();
        let one: Vec<f64> = self.gamma.area().iter().map(|a| a * dt).collect();
        (0..levels).flat_map(|_| one.iter().copied()).collect()
    }

    /// `vol·scale` weights for `dofs` nodes on `levels` levels.
    pub fn node_weights(&self, dofs: usize, levels: usize, scale: f64) -> Vec<f64> {
        vec![self.grid.cell_volume() * scale; dofs * levels]
    }

    fn is_interior_row(&self, r: usize) -> bool {
        let nn = self.grid.node_dims();
        let j = r % nn[1];
        let k = r / nn[1];
        j > 0 && j + 1 < nn[1] && (self.grid.dim() == 2 || (k > 0 && k + 1 < nn[2]))
    }

    /// Runs `f(base, row, interior)` over every x-row of a node array.
    fn for_rows(&self, out: &mut [f64], f: impl Fn(usize, &mut [f64], bool) + Sync + Send) {
        let len = self.grid.node_dims()[0];
        if self.parallel {
            out.par_chunks_mut(len).enumerate().for_each(|(r, row)| f(r * len, row, self.is_interior_row(r)));
        } else {
            out.chunks_mut(len).enumerate().for_each(|(r, row)| f(r * len, row, self.is_interior_row(r)));
        }
    }

    #[inline]
    fn laplacian(&self, u: &[f64], p: usize) -> f64 {
        let s = self.grid.node_strides();
        let w = self.w;
        let mut lap = w[0] * (u[p - 1] + u[p + 1]) + w[1] * (u[p - s[1]] + u[p + s[1]]);
        if self.grid.dim() == 3 {
            lap += w[2] * (u[p - s[2]] + u[p + s[2]]);
        }
        lap - 2.0 * (w[0] + w[1] + w[2]) * u[p]
    }

    /// `out = 2u − prev + dt²c²(Δu − qu + forcing)` at interior nodes, zero on ∂Ω.
    fn leap(&self, u: &[f64], prev: &[f64], forcing: Option<&[f64]>, out: &mut [f64]) {
        let q = self.coeff.q();
        let c2dt2 = &self.c2dt2;
        self.for_rows(out, |base, row, interior| {
            row.fill(0.0);
            if !interior {
                return;
            }
            let n = row.len();
            for (i, o) in row.iter_mut().enumerate().take(n - 1).skip(1) {
                let p = base + i;
                let mut rhs = self.laplacian(u, p) - q[p] * u[p];
                if let Some(f) = forcing {
                    rhs += f[p];
                }
                *o = 2.0 * u[p] - prev[p] + c2dt2[p] * rhs;
            }
        });
    }

    /// Transpose of [`Self::leap`] with respect to `u`, given the adjoint
    /// states `a1` of level `n+1` and `a2` of level `n+2`: adds
    /// `2a1 − a2 + (Δ − q)(dt²c²a1)` to the interior of `cur`. Leaves
    /// `z = dt²c²a1` in `z`.
    fn leap_transpose(&self, a1: &[f64], a2: &[f64], z: &mut [f64], cur: &mut [f64]) {
        for ((z, a), c) in z.iter_mut().zip(a1).zip(&self.c2dt2) {
            *z = c * a;
        }
        let q = self.coeff.q();
        let z: &[f64] = z;
        self.for_rows(cur, |base, row, interior| {
            if !interior {
                return;
            }
            let n = row.len();
            for (i, o) in row.iter_mut().enumerate().take(n - 1).skip(1) {
                let p = base + i;
                *o += 2.0 * a1[p] - a2[p] + self.laplacian(z, p) - q[p] * z[p];
            }
        });
    }

    fn zero_boundary(&self, v: &mut [f64]) {
        self.for_rows(v, |_, row, interior| {
            if interior {
                let n = row.len();
                row[0] = 0.0;
                row[n - 1] = 0.0;
            } else {
                row.fill(0.0);
            }
        });
    }

    /// Forward sweep over levels `0..=steps`.
    ///
    /// `boundary` holds patch data level-major from level 1; `source` is added
    /// at levels `0..steps` with the `dt²c²` weighting of the scheme.
    /// `observe(n, uⁿ)` sees every level.
    pub(crate) fn propagate(
        &self,
        steps: usize,
        boundary: Option<&[f64]>,
        source: Option<(&Sampling, &[f64])>,
        observe: &mut dyn FnMut(usize, &[f64]),
    ) {
        let nodes = self.grid.node_count();
        let ng = self.links.len();
        let mut prev = vec![0.0; nodes];
        let mut cur = vec![0.0; nodes];
        let mut next = vec![0.0; nodes];
        let mut forcing = source.map(|_| vec![0.0; nodes]);
        observe(0, &cur);
        for n in 0..steps {
            let f = match (source, forcing.as_mut()) {
                (Some((s, vals)), Some(buf)) => s.offset(n).map(|off| {
                    buf.fill(0.0);
                    for (i, &d) in s.dofs.iter().enumerate() {
                        buf[d] = vals[off + i];
                    }
                    &buf[..]
                }),
                _ => None,
            };
            self.leap(&cur, &prev, f, &mut next);
            if let Some(b) = boundary {
                if (n + 1) * ng <= b.len() {
                    let lvl = &b[n * ng..(n + 1) * ng];
                    for (k, &(node, _, _)) in self.links.iter().enumerate() {
                        next[node] = lvl[k];
                    }
                }
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
            observe(n + 1, &cur);
        }
    }

    /// Transpose of [`Self::propagate`].
    ///
    /// `seed(n, ū)` adds the adjoint of the observation at level `n` into `ū`.
    /// Outputs are accumulated into `boundary_out` (patch data from level 1,
    /// at most `steps` levels) and `source_out` (laid out like the source).
    pub(crate) fn propagate_transpose(
        &self,
        steps: usize,
        seed: &mut dyn FnMut(usize, &mut [f64]),
        mut boundary_out: Option<&mut [f64]>,
        mut source_out: Option<(&Sampling, &mut [f64])>,
    ) {
        let nodes = self.grid.node_count();
        let ng = self.links.len();
        let mut a1 = vec![0.0; nodes];
        let mut a2 = vec![0.0; nodes];
        let mut z = vec![0.0; nodes];
        let mut cur = vec![0.0; nodes];
        for n in (0..=steps).rev() {
            cur.fill(0.0);
            seed(n, &mut cur);
            if n < steps {
                self.leap_transpose(&a1, &a2, &mut z, &mut cur);
                for &(node, inner, w) in &self.links {
                    cur[node] += w * z[inner];
                }
                if let Some((s, out)) = source_out.as_mut() {
                    if let Some(off) = s.offset(n) {
                        for (i, &d) in s.dofs.iter().enumerate() {
                            out[off + i] += z[d];
                        }
                    }
                }
            }
            if n >= 1 {
                if let Some(out) = boundary_out.as_mut() {
                    if n * ng <= out.len() {
                        let lvl = &mut out[(n - 1) * ng..n * ng];
                        for (k, &(node, _, _)) in self.links.iter().enumerate() {
                            lvl[k] += cur[node];
                        }
                    }
                }
            }
            self.zero_boundary(&mut cur);
            std::mem::swap(&mut a2, &mut a1);
            std::mem::swap(&mut a1, &mut cur);
        }
    }

    fn check_series(&self, f: &BoundaryTimeSeries) -> Result<()> {
        if f.dofs() != self.gamma.len() || f.nt() != self.time.nt() {
            return Err(Error::Shape(format!(
                "boundary series is {}×{}, problem expects {}×{}",
                f.dofs(),
                f.nt(),
                self.gamma.len(),
                self.time.nt()
            )));
        }
        if f.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("boundary series contains non-finite values".into()));
        }
        Ok(())
    }
}

/// Solution of the Dirichlet problem with data `f` on Γ, zero elsewhere on ∂Ω,
/// and homogeneous initial data.
pub fn forward_wave(problem: &WaveProblem, f: &BoundaryTimeSeries) -> Result<FieldMovie> {
    problem.check_series(f)?;
    let nodes = problem.grid.node_count();
    let mut movie = FieldMovie::zeros(nodes, problem.time.nt());
    problem.propagate(problem.time.nt(), Some(f.values()), None, &mut |n, u| movie.level_mut(n).copy_from_slice(u));
    Ok(movie)
}

/// Solution with interior source `g` and homogeneous Dirichlet data on all of
/// ∂Ω: zero initial data (forward) or zero terminal data (backward).
///
/// The backward sweep runs the same recurrence downwards, so it equals the
/// time reversal of the forward solve of the reversed source.
pub fn interior_source_wave(problem: &WaveProblem, g: &FieldMovie, direction: Direction) -> Result<FieldMovie> {
    let nodes = problem.grid.node_count();
    let nt = problem.time.nt();
    if g.dofs() != nodes || g.nt() != nt {
        return Err(Error::Shape(format!("source is {}×{}, expected {nodes}×{}", g.dofs(), g.nt() + 1, nt + 1)));
    }
    let mut movie = FieldMovie::zeros(nodes, nt);
    let mut next = vec![0.0; nodes];
    let zero = vec![0.0; nodes];
    match direction {
        Direction::Forward => {
            for n in 0..nt {
                let prev = if n == 0 { &zero[..] } else { movie.level(n - 1) };
                problem.leap(movie.level(n), prev, Some(g.level(n)), &mut next);
                movie.level_mut(n + 1).copy_from_slice(&next);
            }
        }
        Direction::Backward => {
            for m in (1..=nt).rev() {
                let prev = if m == nt { &zero[..] } else { movie.level(m + 1) };
                problem.leap(movie.level(m), prev, Some(g.level(m)), &mut next);
                movie.level_mut(m - 1).copy_from_slice(&next);
            }
        }
    }
    Ok(movie)
}

/// Outward normal derivative on Γ by the one-sided second-order stencil
/// `(3v₀ − 4v₁ + v₂)/(2h)`, at levels `1..=nt`.
pub fn normal_derivative_trace(v: &FieldMovie, gamma: &BoundaryPatch) -> Result<BoundaryTimeSeries> {
    let grid = gamma.grid();
    if v.dofs() != grid.node_count() {
        return Err(Error::Shape("movie and patch live on different grids".into()));
    }
    let ng = gamma.len();
    let mut out = Vec::with_capacity(ng * v.nt());
    for n in 1..=v.nt() {
        let u = v.level(n);
        for k in 0..ng {
            let p = gamma.nodes()[k];
            let off = gamma.inward_offset(k);
            let i1 = (p.node as isize + off) as usize;
            let i2 = (p.node as isize + 2 * off) as usize;
            let h = grid.spacing(p.face.axis());
            out.push((3.0 * u[p.node] - 4.0 * u[i1] + u[i2]) / (2.0 * h));
        }
    }
    BoundaryTimeSeries::from_values(ng, v.nt(), out)
}

/// Discrete energy between levels `n` and `n+1`,
/// `½[Σ vol c⁻²((uⁿ⁺¹−uⁿ)/dt)² + Σ vol uⁿ⁺¹(−Δ + q)uⁿ]`,
/// which the scheme conserves exactly once the boundary data vanish.
pub fn wave_energy(problem: &WaveProblem, u_next: &[f64], u: &[f64]) -> f64 {
    let grid = &problem.grid;
    let vol = grid.cell_volume();
    let dt = problem.time.dt();
    let c = problem.coeff.c();
    let q = problem.coeff.q();
    let mut kinetic = 0.0;
    let mut potential = 0.0;
    for p in 0..grid.node_count() {
        if grid.is_boundary_node(p) {
            continue;
        }
        let du = (u_next[p] - u[p]) / dt;
        kinetic += du * du / (c[p] * c[p]);
        potential += u_next[p] * (q[p] * u[p] - problem.laplacian(u, p));
    }
    0.5 * vol * (kinetic + potential)
}
