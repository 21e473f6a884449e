use serde::Serialize;

use crate::error::{Error, Result};

/// Upper bound on the node count of a single grid (about 0.5 GB per f64 field).
pub const MAX_NODES: usize = 64 << 20;

/// Axis-aligned box discretization of the domain.
///
/// Nodes are numbered with x fastest, then y, then z. A 2D grid is stored as a
/// 3D grid with a single node layer along z and unit spacing there, so volumes
/// and areas come out of the same products in both cases.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    dim: usize,
    n: [usize; 3],
    h: [f64; 3],
    origin: [f64; 3],
}

impl Grid {
    pub fn new(cells: &[usize], spacing: &[f64], origin: &[f64]) -> Result<Self> {
        let dim = cells.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidInput(format!("grid dimension must be 2 or 3, got {dim}")));
        }
        if spacing.len() != dim || origin.len() != dim {
            return Err(Error::Shape(format!(
                "grid needs {dim} spacings and origin coordinates, got {} and {}",
                spacing.len(),
                origin.len()
            )));
        }
        let mut n = [0; 3];
        let mut h = [1.0; 3];
        let mut o = [0.0; 3];
        for a in 0..dim {
            if cells[a] < 4 {
                return Err(Error::InvalidInput(format!("axis {a} has {} cells, need at least 4", cells[a])));
            }
            if !(spacing[a] > 0.0 && spacing[a].is_finite()) {
                return Err(Error::InvalidInput(format!("axis {a} spacing {} is not positive", spacing[a])));
            }
            n[a] = cells[a];
            h[a] = spacing[a];
            o[a] = origin[a];
        }
        let grid = Self { dim, n, h, origin: o };
        if grid.node_count() > MAX_NODES {
            return Err(Error::InvalidInput(format!(
                "grid has {} nodes, above the budget of {MAX_NODES}",
                grid.node_count()
            )));
        }
        Ok(grid)
    }

    /// Unit box `[0,1]^dim` with `cells` cells per axis.
    pub fn unit(dim: usize, cells: usize) -> Result<Self> {
        Self::new(&vec![cells; dim], &vec![1.0 / cells as f64; dim], &vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.h[axis]
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn min_spacing(&self) -> f64 {
        self.h[..self.dim].iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Σ 1/h_a²` over the active axes, the factor in every CFL bound.
    pub fn inv_h2_sum(&self) -> f64 {
        self.h[..self.dim].iter().map(|h| 1.0 / (h * h)).sum()
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.n[axis] as f64 * self.h[axis]
    }

    pub fn node_dims(&self) -> [usize; 3] {
        [self.n[0] + 1, self.n[1] + 1, self.n[2] + 1]
    }

    pub fn node_strides(&self) -> [usize; 3] {
        let nn = self.node_dims();
        [1, nn[0], nn[0] * nn[1]]
    }

    pub fn node_count(&self) -> usize {
        self.node_dims().iter().product()
    }

    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        let nn = self.node_dims();
        (k * nn[1] + j) * nn[0] + i
    }

    pub fn node_ijk(&self, idx: usize) -> [usize; 3] {
        let nn = self.node_dims();
        [idx % nn[0], (idx / nn[0]) % nn[1], idx / (nn[0] * nn[1])]
    }

    pub fn node_position(&self, idx: usize) -> [f64; 3] {
        let ijk = self.node_ijk(idx);
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = self.origin[a] + ijk[a] as f64 * self.h[a];
        }
        p
    }

    pub fn is_boundary_node(&self, idx: usize) -> bool {
        let ijk = self.node_ijk(idx);
        (0..self.dim).any(|a| ijk[a] == 0 || ijk[a] == self.n[a])
    }

    pub fn cell_dims(&self) -> [usize; 3] {
        [self.n[0].max(1), self.n[1].max(1), self.n[2].max(1)]
    }

    pub fn cell_count(&self) -> usize {
        self.cell_dims().iter().product()
    }

    pub fn cell_center(&self, idx: usize) -> [f64; 3] {
        let nc = self.cell_dims();
        let ijk = [idx % nc[0], (idx / nc[0]) % nc[1], idx / (nc[0] * nc[1])];
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = self.origin[a] + (ijk[a] as f64 + 0.5) * self.h[a];
        }
        p
    }

    /// Volume of one cell; also the quadrature weight of one node, edge or face.
    pub fn cell_volume(&self) -> f64 {
        self.h[..self.dim].iter().product()
    }

    /// Area of a boundary face element normal to `axis`.
    pub fn face_area(&self, axis: usize) -> f64 {
        self.cell_volume() / self.h[axis]
    }
}

/// Uniform time levels `t_n = n·dt`, `n = 0..=nt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    nt: usize,
    dt: f64,
}

impl TimeGrid {
    pub fn new(nt: usize, dt: f64) -> Result<Self> {
        if nt == 0 || !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("time grid needs nt ≥ 1 and dt > 0, got nt={nt}, dt={dt}")));
        }
        Ok(Self { nt, dt })
    }

    /// Fewest steps reaching `final_time` with a step no larger than `max_dt`.
    pub fn fitting(final_time: f64, max_dt: f64) -> Result<Self> {
        if !(final_time > 0.0 && max_dt > 0.0) {
            return Err(Error::InvalidInput(format!("final time {final_time} and step bound {max_dt} must be positive")));
        }
        let nt = (final_time / max_dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Self::new(nt, final_time / nt as f64)
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn final_time(&self) -> f64 {
        self.nt as f64 * self.dt
    }

    pub fn time(&self, level: usize) -> f64 {
        level as f64 * self.dt
    }

    /// Nearest level to `t`, clamped to `0..=nt`.
    pub fn snap(&self, t: f64) -> usize {
        ((t / self.dt).round().max(0.0) as usize).min(self.nt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_numbering_round_trips() {
        let g = Grid::new(&[4, 5, 6], &[0.25, 0.2, 0.5], &[0.0, 1.0, -1.0]).unwrap();
        for idx in 0..g.node_count() {
            let [i, j, k] = g.node_ijk(idx);
            assert_eq!(g.node_index(i, j, k), idx);
        }
        assert_eq!(g.node_count(), 5 * 6 * 7);
        assert_eq!(g.node_position(g.node_index(4, 5, 6)), [1.0, 2.0, 2.0]);
    }

    #[test]
    fn planar_grid_has_one_layer() {
        let g = Grid::unit(2, 8).unwrap();
        assert_eq!(g.node_dims(), [9, 9, 1]);
        assert_eq!(g.cell_count(), 64);
        assert!((g.cell_volume() - 1.0 / 64.0).abs() < 1e-16);
        assert!((g.face_area(0) - 0.125).abs() < 1e-16);
        assert!(g.is_boundary_node(g.node_index(0, 3, 0)));
        assert!(!g.is_boundary_node(g.node_index(1, 3, 0)));
    }

    #[test]
    fn rejects_coarse_axes() {
        assert!(Grid::unit(2, 3).is_err());
        assert!(Grid::new(&[8, 8], &[0.1, -0.1], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn time_grid_fits_bound() {
        let t = TimeGrid::fitting(2.0, 0.03).unwrap();
        assert!(t.dt() <= 0.03);
        assert!((t.final_time() - 2.0).abs() < 1e-12);
        assert_eq!(t.snap(1.0), (1.0 / t.dt()).round() as usize);
        assert_eq!(t.snap(5.0), t.nt());
    }
}
