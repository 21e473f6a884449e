use serde::Serialize;

use super::YeeGrid;
use crate::error::{Error, Result};
use crate::geometry::SmoothField;

/// Permittivity on the E edges and permeability on the H faces.
#[derive(Clone, Debug, Serialize)]
pub struct EmCoefficients {
    #[serde(skip)]
    eps: Vec<f64>,
    #[serde(skip)]
    mu: Vec<f64>,
    eps_min: f64,
    mu_min: f64,
    /// Largest `1/√(εμ)` over co-located samples, bounded by `1/√(ε_min μ_min)`.
    speed_max: f64,
    /// Closed-form generators, when the samples came from them.
    #[serde(skip_serializing_if = "Option::is_none")]
    generators: Option<(SmoothField, SmoothField)>,
}

fn check(name: &str, v: &[f64]) -> Result<f64> {
    if let Some(bad) = v.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidCoefficient(format!("{name} must be positive, found {bad}")));
    }
    Ok(v.iter().copied().fold(f64::INFINITY, f64::min))
}

impl EmCoefficients {
    pub fn from_values(yee: &YeeGrid, eps: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        if eps.len() != yee.edge_count() || mu.len() != yee.face_count() {
            return Err(Error::Shape(format!(
                "need {} edge and {} face samples, got {} and {}",
                yee.edge_count(),
                yee.face_count(),
                eps.len(),
                mu.len()
            )));
        }
        let eps_min = check("permittivity", &eps)?;
        let mu_min = check("permeability", &mu)?;
        Ok(Self { eps, mu, eps_min, mu_min, speed_max: 1.0 / (eps_min * mu_min).sqrt(), generators: None })
    }

    pub fn constant(yee: &YeeGrid, eps: f64, mu: f64) -> Result<Self> {
        Self::from_values(yee, vec![eps; yee.edge_count()], vec![mu; yee.face_count()])
    }

    pub fn from_fields(yee: &YeeGrid, eps: &SmoothField, mu: &SmoothField) -> Result<Self> {
        let e = (0..yee.edge_count()).map(|k| eps.eval(&yee.edge_position(k))).collect();
        let m = (0..yee.face_count()).map(|k| mu.eval(&yee.face_position(k))).collect();
        let mut out = Self::from_values(yee, e, m)?;
        out.generators = Some((eps.clone(), mu.clone()));
        Ok(out)
    }

    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn speed_max(&self) -> f64 {
        self.speed_max
    }

    /// Light speed `1/√(εμ)` at the grid nodes, for the travel-time metric.
    /// Uses the generators when known, else averages of incident samples.
    pub fn node_speed(&self, yee: &YeeGrid) -> Vec<f64> {
        let grid = yee.grid();
        if let Some((eps, mu)) = &self.generators {
            return (0..grid.node_count())
                .map(|i| {
                    let p = grid.node_position(i);
                    1.0 / (eps.eval(&p) * mu.eval(&p)).sqrt()
                })
                .collect();
        }
        let n = grid.node_count();
        let (mut se, mut ce, mut sm, mut cm) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for k in 0..yee.edge_count() {
            let (lo, hi) = yee.edge_nodes(k);
            for v in [lo, hi] {
                se[v] += self.eps[k];
                ce[v] += 1.0;
            }
        }
        for f in 0..yee.face_count() {
            for v in yee.face_nodes(f) {
                sm[v] += self.mu[f];
                cm[v] += 1.0;
            }
        }
        (0..n).map(|v| 1.0 / ((se[v] / ce[v]) * (sm[v] / cm[v])).sqrt()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GaussianBump, Grid};

    #[test]
    fn validates_samples() {
        let y = YeeGrid::new(&Grid::unit(3, 4).unwrap()).unwrap();
        let mut eps = vec![1.0; y.edge_count()];
        eps[5] = 0.0;
        assert!(matches!(
            EmCoefficients::from_values(&y, eps, vec![1.0; y.face_count()]),
            Err(Error::InvalidCoefficient(_))
        ));
        assert!(matches!(EmCoefficients::from_values(&y, vec![1.0; 3], vec![1.0; 3]), Err(Error::Shape(_))));
        let c = EmCoefficients::constant(&y, 4.0, 1.0).unwrap();
        assert!((c.speed_max() - 0.5).abs() < 1e-15);
        assert!(c.node_speed(&y).iter().all(|s| (s - 0.5).abs() < 1e-15));
    }

    #[test]
    fn generators_drive_node_speed() {
        let y = YeeGrid::new(&Grid::unit(3, 4).unwrap()).unwrap();
        let bump = GaussianBump { amplitude: 1.0, center: vec![0.5; 3], width: 0.3 };
        let eps = SmoothField { constant: 1.0, bumps: vec![bump] };
        let c = EmCoefficients::from_fields(&y, &eps, &SmoothField::constant(1.0)).unwrap();
        let mid = y.grid().node_index(2, 2, 2);
        assert!((c.node_speed(&y)[mid] - 0.5f64.sqrt()).abs() < 1e-15);
    }
}
