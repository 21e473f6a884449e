use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Grid, SmoothField};

/// Wave speed `c` and potential `q` sampled at the grid nodes.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientField {
    #[serde(skip)]
    c: Vec<f64>,
    #[serde(skip)]
    q: Vec<f64>,
    c_min: f64,
    c_max: f64,
}

impl CoefficientField {
    pub fn from_values(grid: &Grid, c: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        let n = grid.node_count();
        if c.len() != n || q.len() != n {
            return Err(Error::Shape(format!("coefficients need {n} node samples, got {} and {}", c.len(), q.len())));
        }
        if let Some(bad) = c.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidCoefficient(format!("wave speed must be positive, found {bad}")));
        }
        if let Some(bad) = q.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidCoefficient(format!("potential must be finite, found {bad}")));
        }
        let c_min = c.iter().copied().fold(f64::INFINITY, f64::min);
        let c_max = c.iter().copied().fold(0.0, f64::max);
        Ok(Self { c, q, c_min, c_max })
    }

    pub fn constant(grid: &Grid, c: f64, q: f64) -> Result<Self> {
        Self::from_values(grid, vec![c; grid.node_count()], vec![q; grid.node_count()])
    }

    pub fn from_fields(grid: &Grid, c: &SmoothField, q: &SmoothField) -> Result<Self> {
        let pts: Vec<[f64; 3]> = (0..grid.node_count()).map(|i| grid.node_position(i)).collect();
        Self::from_values(grid, pts.iter().map(|p| c.eval(p)).collect(), pts.iter().map(|p| q.eval(p)).collect())
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    pub fn c_max(&self) -> f64 {
        self.c_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_speed() {
        let g = Grid::unit(2, 4).unwrap();
        let n = g.node_count();
        let mut c = vec![1.0; n];
        c[3] = -1.0;
        assert!(matches!(CoefficientField::from_values(&g, c, vec![0.0; n]), Err(Error::InvalidCoefficient(_))));
        assert!(matches!(CoefficientField::from_values(&g, vec![1.0; 3], vec![0.0; n]), Err(Error::Shape(_))));
        let f = CoefficientField::constant(&g, 2.0, 0.5).unwrap();
        assert_eq!((f.c_min(), f.c_max()), (2.0, 2.0));
    }
}
