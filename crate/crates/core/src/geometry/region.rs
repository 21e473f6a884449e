use serde::{Deserialize, Serialize};

use super::Grid;
use crate::error::{Error, Result};

/// Shape descriptor a region is built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Shape {
    /// Open ball `|x − center| < radius`.
    Ball { center: Vec<f64>, radius: f64 },
    /// Closed box `min ≤ x ≤ max` componentwise.
    Box { min: Vec<f64>, max: Vec<f64> },
    Union { parts: Vec<Shape> },
}

impl Shape {
    pub fn ball(center: &[f64], radius: f64) -> Self {
        Shape::Ball { center: center.to_vec(), radius }
    }

    pub fn boxed(min: &[f64], max: &[f64]) -> Self {
        Shape::Box { min: min.to_vec(), max: max.to_vec() }
    }

    pub fn contains(&self, p: &[f64; 3]) -> bool {
        match self {
            Shape::Ball { center, radius } => {
                let r2: f64 = center.iter().enumerate().map(|(a, c)| (p[a] - c).powi(2)).sum();
                r2 < radius * radius
            }
            Shape::Box { min, max } => min.iter().zip(max).enumerate().all(|(a, (lo, hi))| *lo <= p[a] && p[a] <= *hi),
            Shape::Union { parts } => parts.iter().any(|s| s.contains(p)),
        }
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        match self {
            Shape::Ball { center, radius } => {
                if center.len() != dim {
                    return Err(Error::Shape(format!("ball center has {} coordinates on a {dim}D grid", center.len())));
                }
                if !(*radius >= 0.0) {
                    return Err(Error::InvalidInput(format!("ball radius {radius} is negative")));
                }
            }
            Shape::Box { min, max } => {
                if min.len() != dim || max.len() != dim {
                    return Err(Error::Shape(format!("box corners need {dim} coordinates")));
                }
            }
            Shape::Union { parts } => {
                for p in parts {
                    p.check_dim(dim)?;
                }
            }
        }
        Ok(())
    }
}

/// A set of grid cells together with the shape it was sampled from.
///
/// The mask is over cells; staggered quantities (nodes, edges, faces) test
/// membership of their own positions against the shape.
#[derive(Clone, Debug)]
pub struct Region {
    grid: Grid,
    mask: Vec<bool>,
    shape: Shape,
}

/// Samples `shape` at the cell centers of `grid`.
pub fn build_region(grid: &Grid, shape: &Shape) -> Result<Region> {
    shape.check_dim(grid.dim())?;
    let mask: Vec<bool> = (0..grid.cell_count()).map(|c| shape.contains(&grid.cell_center(c))).collect();
    if !mask.iter().any(|&m| m) {
        return Err(Error::EmptyRegion);
    }
    Ok(Region { grid: grid.clone(), mask, shape: shape.clone() })
}

impl Region {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn cell_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn contains(&self, p: &[f64; 3]) -> bool {
        self.shape.contains(p)
    }

    /// Membership of every grid node (boundary nodes included).
    pub fn node_mask(&self) -> Vec<bool> {
        (0..self.grid.node_count()).map(|i| self.shape.contains(&self.grid.node_position(i))).collect()
    }

    /// Interior grid nodes inside the shape, ascending.
    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.grid.node_count())
            .filter(|&i| !self.grid.is_boundary_node(i) && self.shape.contains(&self.grid.node_position(i)))
            .collect()
    }

    /// True when no boundary node lies in the shape (the discrete `B ⋐ Ω`).
    pub fn is_interior(&self) -> bool {
        (0..self.grid.node_count())
            .filter(|&i| self.grid.is_boundary_node(i))
            .all(|i| !self.shape.contains(&self.grid.node_position(i)))
    }

    /// Number of cells marked in both regions.
    pub fn overlap(&self, other: &Region) -> usize {
        self.mask.iter().zip(&other.mask).filter(|(a, b)| **a && **b).count()
    }
}
