use std::sync::Arc;

/// Inner product on a coefficient vector space, given by its Gram matrix.
#[derive(Clone, Debug)]
pub enum Gram {
    Euclidean(usize),
    /// Quadrature weights per entry.
    Diagonal(Arc<[f64]>),
    /// Discrete H¹-in-time product `Σ_n Σ_e w_e/dt · Δf·Δg` on level-major data
    /// whose level before the first stored one is identically zero.
    TimeDifference { weights: Arc<[f64]>, levels: usize, dt: f64 },
}

impl Gram {
    pub fn diagonal(w: Vec<f64>) -> Self {
        Gram::Diagonal(w.into())
    }

    pub fn dim(&self) -> usize {
        match self {
            Gram::Euclidean(n) => *n,
            Gram::Diagonal(w) => w.len(),
            Gram::TimeDifference { weights, levels, .. } => weights.len() * levels,
        }
    }

    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        assert_eq!(a.len(), self.dim(), "vector length does not match the inner product");
        assert_eq!(b.len(), self.dim(), "vector length does not match the inner product");
        match self {
            Gram::Euclidean(_) => dot(a, b),
            Gram::Diagonal(w) => a.iter().zip(b).zip(w.iter()).map(|((x, y), w)| w * x * y).sum(),
            Gram::TimeDifference { weights, levels, dt } => {
                let m = weights.len();
                let mut s = 0.0;
                for n in 0..*levels {
                    for e in 0..m {
                        let i = n * m + e;
                        let (da, db) = if n == 0 { (a[i], b[i]) } else { (a[i] - a[i - m], b[i] - b[i - m]) };
                        s += weights[e] / dt * da * db;
                    }
                }
                s
            }
        }
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.dot(a, a).max(0.0).sqrt()
    }

    /// `G x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Gram::Euclidean(_) => x.to_vec(),
            Gram::Diagonal(w) => x.iter().zip(w.iter()).map(|(x, w)| x * w).collect(),
            Gram::TimeDifference { weights, levels, dt } => {
                let m = weights.len();
                let mut diff = x.to_vec();
                for i in (m..x.len()).rev() {
                    diff[i] -= x[i - m];
                }
                let mut out = vec![0.0; x.len()];
                for n in 0..*levels {
                    for e in 0..m {
                        let i = n * m + e;
                        let next = if n + 1 < *levels { diff[i + m] } else { 0.0 };
                        out[i] = weights[e] / dt * (diff[i] - next);
                    }
                }
                out
            }
        }
    }

    /// `G⁻¹ y`, the Riesz representer of the functional `x ↦ yᵀx`.
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        match self {
            Gram::Euclidean(_) => y.to_vec(),
            Gram::Diagonal(w) => y.iter().zip(w.iter()).map(|(y, w)| y / w).collect(),
            Gram::TimeDifference { weights, levels, dt } => {
                let m = weights.len();
                let mut z = y.to_vec();
                for n in (0..levels.saturating_sub(1)).rev() {
                    for e in 0..m {
                        z[n * m + e] += z[(n + 1) * m + e];
                    }
                }
                for i in m..z.len() {
                    z[i] += z[i - m];
                }
                for n in 0..*levels {
                    for e in 0..m {
                        z[n * m + e] *= dt / weights[e];
                    }
                }
                z
            }
        }
    }
}

/// Matrix-free linear operator between two inner-product spaces.
///
/// `adjoint` must be the adjoint with respect to the declared products, not the
/// Euclidean transpose.
pub trait LinearMap: Send + Sync {
    fn domain(&self) -> &Gram;
    fn codomain(&self) -> &Gram;
    fn apply(&self, x: &[f64]) -> Vec<f64>;
    fn adjoint(&self, y: &[f64]) -> Vec<f64>;
}

/// The adjoint of a map, as a map.
pub struct Adjoint<'a>(pub &'a dyn LinearMap);

impl LinearMap for Adjoint<'_> {
    fn domain(&self) -> &Gram {
        self.0.codomain()
    }

    fn codomain(&self) -> &Gram {
        self.0.domain()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.0.adjoint(x)
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.0.apply(y)
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug)]
pub struct DenseMap {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    domain: Gram,
    codomain: Gram,
}

impl DenseMap {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        Self::with_products(rows, cols, data, Gram::Euclidean(cols), Gram::Euclidean(rows))
    }

    pub fn with_products(rows: usize, cols: usize, data: Vec<f64>, domain: Gram, codomain: Gram) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data does not match its shape");
        assert_eq!(domain.dim(), cols);
        assert_eq!(codomain.dim(), rows);
        Self { rows, cols, data, domain, codomain }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self::new(n, n, data)
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::new(rows.len(), cols, rows.iter().flat_map(|r| r.iter().copied()).collect())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { data: self.data.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    fn transpose_apply(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j] += self.data[i * self.cols + j] * y[i];
            }
        }
        out
    }
}

impl LinearMap for DenseMap {
    fn domain(&self) -> &Gram {
        &self.domain
    }

    fn codomain(&self) -> &Gram {
        &self.codomain
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(&self.data[i * self.cols..(i + 1) * self.cols], x)).collect()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        self.domain.solve(&self.transpose_apply(&self.codomain.apply(y)))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y ← y + s·x`.
pub(crate) fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (y, x) in y.iter_mut().zip(x) {
        *y += s * x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h1(levels: usize) -> Gram {
        Gram::TimeDifference { weights: vec![0.5, 2.0].into(), levels, dt: 0.1 }
    }

    #[test]
    fn time_difference_product_by_hand() {
        let g = h1(2);
        let a = [1.0, 2.0, 3.0, 2.0];
        let b = [0.5, 1.0, -1.0, 0.0];
        let expected = 0.5 / 0.1 * (1.0 * 0.5 + 2.0 * -1.5) + 2.0 / 0.1 * (2.0 * 1.0 + 0.0 * -1.0);
        assert!((g.dot(&a, &b) - expected).abs() < 1e-12);
    }

    #[test]
    fn gram_apply_matches_dot_and_solve_inverts() {
        let g = h1(4);
        let x: Vec<f64> = (0..8).map(|i| (i as f64 * 0.7).sin()).collect();
        let y: Vec<f64> = (0..8).map(|i| (i as f64 * 1.3).cos()).collect();
        assert!((dot(&g.apply(&x), &y) - g.dot(&x, &y)).abs() < 1e-12);
        let back = g.apply(&g.solve(&y));
        for (a, b) in back.iter().zip(&y) {
            assert!((a - b).abs() < 1e-12);
        }
        let d = Gram::diagonal(vec![2.0, 4.0]);
        assert_eq!(d.solve(&d.apply(&[3.0, 5.0])), vec![3.0, 5.0]);
    }

    #[test]
    fn dense_adjoint_respects_weights() {
        let a = DenseMap::with_products(
            2,
            3,
            vec![1.0, 2.0, 3.0, -1.0, 0.5, 4.0],
            Gram::diagonal(vec![1.0, 2.0, 3.0]),
            Gram::diagonal(vec![0.5, 5.0]),
        );
        let x = [0.3, -0.2, 0.9];
        let y = [1.1, -0.4];
        let lhs = a.codomain().dot(&a.apply(&x), &y);
        let rhs = a.domain().dot(&x, &a.adjoint(&y));
        assert!((lhs - rhs).abs() < 1e-14);
    }
}
