use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::map::LinearMap;
use crate::error::{Error, Result};

/// Largest relative adjoint defect over `trials` random pairs:
/// `|⟨Af,g⟩ − ⟨f,A*g⟩| / (‖f‖‖g‖ · scale)` with `scale = max ‖Af‖/‖f‖`.
pub fn dot_test(a: &dyn LinearMap, trials: usize, seed: u64) -> Result<f64> {
    let (n, m) = (a.domain().dim(), a.codomain().dim());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1e-300;
    for _ in 0..trials {
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let af = a.apply(&f);
        let ag = a.adjoint(&g);
        if af.len() != m || ag.len() != n {
            return Err(Error::Shape(format!(
                "map declares {n} → {m} but produced {} and {} entries",
                af.len(),
                ag.len()
            )));
        }
        let (fnorm, gnorm) = (a.domain().norm(&f), a.codomain().norm(&g));
        if fnorm == 0.0 || gnorm == 0.0 {
            continue;
        }
        scale = scale.max(a.codomain().norm(&af) / fnorm);
        let defect = (a.codomain().dot(&af, &g) - a.domain().dot(&f, &ag)).abs();
        worst = worst.max(defect / (fnorm * gnorm));
    }
    Ok(worst / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{DenseMap, Gram};

    #[test]
    fn identity_has_no_defect() {
        assert_eq!(dot_test(&DenseMap::identity(5), 20, 0).unwrap(), 0.0);
    }

    #[test]
    fn small_matrix_transpose() {
        let a = DenseMap::from_rows(&[&[1.0, 2.0], &[0.0, 1.0], &[4.0, 0.0]]);
        assert!(dot_test(&a, 20, 7).unwrap() <= 1e-14);
    }

    #[test]
    fn catches_a_wrong_adjoint() {
        struct Broken(DenseMap);
        impl LinearMap for Broken {
            fn domain(&self) -> &Gram {
                self.0.domain()
            }
            fn codomain(&self) -> &Gram {
                self.0.codomain()
            }
            fn apply(&self, x: &[f64]) -> Vec<f64> {
                self.0.apply(x)
            }
            fn adjoint(&self, y: &[f64]) -> Vec<f64> {
                self.0.adjoint(y).iter().map(|v| 1.01 * v).collect()
            }
        }
        let a = Broken(DenseMap::from_rows(&[&[1.0, 2.0], &[3.0, 1.0]]));
        assert!(dot_test(&a, 5, 1).unwrap() > 1e-4);
    }

    proptest::proptest! {
        #[test]
        fn weighted_transpose_passes(rows in 1usize..6, cols in 1usize..6, seed in 0u64..1000) {
            let mut s = seed;
            let mut next = || {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            };
            let data = (0..rows * cols).map(|_| next()).collect();
            let wd = (0..cols).map(|_| 1.0 + next()).collect();
            let wc = (0..rows).map(|_| 1.0 + next()).collect();
            let a = DenseMap::with_products(rows, cols, data, Gram::diagonal(wd), Gram::diagonal(wc));
            proptest::prop_assert!(dot_test(&a, 10, seed).unwrap() <= 1e-13);
        }
    }
}
