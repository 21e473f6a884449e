//! First-order upwind fast marching for `|∇d| = 1/c`.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::Serialize;

use super::{BoundaryPatch, Grid, Region};
use crate::error::{Error, Result};

/// Travel time from Γ to every node, in the metric with line element `|dx|/c`.
#[derive(Clone, Debug, Serialize)]
pub struct TravelTimeMap {
    #[serde(skip)]
    grid: Grid,
    #[serde(skip)]
    speed: Vec<f64>,
    d: Vec<f64>,
    dist_omega_gamma: f64,
}

impl TravelTimeMap {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn speed(&self) -> &[f64] {
        &self.speed
    }

    pub fn values(&self) -> &[f64] {
        &self.d
    }

    /// `dist(Ω,Γ) = max_x d(x)`: the time every point needs to hear from Γ.
    pub fn dist_omega_gamma(&self) -> f64 {
        self.dist_omega_gamma
    }
}

pub fn travel_time_map(grid: &Grid, speed: &[f64], gamma: &BoundaryPatch) -> Result<TravelTimeMap> {
    let d = travel_times_from(grid, speed, &gamma.node_indices())?;
    let dist_omega_gamma = d.iter().copied().fold(0.0, f64::max);
    Ok(TravelTimeMap { grid: grid.clone(), speed: speed.to_vec(), d, dist_omega_gamma })
}

/// Sup over the nodes of `region` of their travel time to the complement.
pub fn region_inradius(grid: &Grid, speed: &[f64], region: &Region) -> Result<f64> {
    let inside = region.node_mask();
    let seeds: Vec<usize> = (0..inside.len()).filter(|&i| !inside[i]).collect();
    if seeds.is_empty() {
        return Err(Error::InvalidInput("region covers every node; its boundary is empty".into()));
    }
    let d = travel_times_from(grid, speed, &seeds)?;
    Ok((0..inside.len()).filter(|&i| inside[i]).map(|i| d[i]).fold(0.0, f64::max))
}

#[derive(PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Travel times from the node set `seeds` (where `d = 0`).
pub fn travel_times_from(grid: &Grid, speed: &[f64], seeds: &[usize]) -> Result<Vec<f64>> {
    let n = grid.node_count();
    if speed.len() != n {
        return Err(Error::Shape(format!("speed has {} samples for {n} nodes", speed.len())));
    }
    if let Some(bad) = speed.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
        return Err(Error::InvalidCoefficient(format!("speed must be positive and finite, found {bad}")));
    }
    let dim = grid.dim();
    let nn = grid.node_dims();
    let strides = grid.node_strides();
    let mut d = vec![f64::INFINITY; n];
    let mut known = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &s in seeds {
        d[s] = 0.0;
        heap.push(Reverse((Key(0.0), s)));
    }

    let neighbors = |p: usize| {
        let ijk = grid.node_ijk(p);
        let mut out = [usize::MAX; 6];
        for a in 0..dim {
            if ijk[a] > 0 {
                out[2 * a] = p - strides[a];
            }
            if ijk[a] + 1 < nn[a] {
                out[2 * a + 1] = p + strides[a];
            }
        }
        out
    };

    while let Some(Reverse((Key(t), p))) = heap.pop() {
        if known[p] || t > d[p] {
            continue;
        }
        known[p] = true;
        for q in neighbors(p) {
            if q == usize::MAX || known[q] {
                continue;
            }
            let nb = neighbors(q);
            let mut cand: Vec<(f64, f64)> = Vec::with_capacity(3);
            for a in 0..dim {
                let m = [nb[2 * a], nb[2 * a + 1]]
                    .iter()
                    .filter(|&&r| r != usize::MAX && known[r])
                    .map(|&r| d[r])
                    .fold(f64::INFINITY, f64::min);
                if m.is_finite() {
                    cand.push((m, grid.spacing(a)));
                }
            }
            let t_new = upwind_update(&mut cand, 1.0 / speed[q]);
            if t_new < d[q] {
                d[q] = t_new;
                heap.push(Reverse((Key(t_new), q)));
            }
        }
    }
    Ok(d)
}

/// Solves `Σ ((t − a_i)/h_i)² = s²` over the largest causal subset of axes.
fn upwind_update(cand: &mut [(f64, f64)], slowness: f64) -> f64 {
    cand.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut t = cand[0].0 + cand[0].1 * slowness;
    for m in 2..=cand.len() {
        if t <= cand[m - 1].0 {
            break;
        }
        let (mut qa, mut qb, mut qc) = (0.0, 0.0, -slowness * slowness);
        for &(a, h) in &cand[..m] {
            let w = 1.0 / (h * h);
            qa += w;
            qb -= 2.0 * a * w;
            qc += a * a * w;
        }
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            break;
        }
        t = (-qb + disc.sqrt()) / (2.0 * qa);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_patch, build_region, Face, PatchSpec, Shape};

    fn square(n: usize) -> Grid {
        Grid::unit(2, n).unwrap()
    }

    #[test]
    fn inradius_of_unit_square() {
        let g = square(40);
        let h = 1.0 / 40.0;
        let gamma = build_patch(&g, &PatchSpec::faces(&Face::all(2))).unwrap();
        let ttm = travel_time_map(&g, &vec![1.0; g.node_count()], &gamma).unwrap();
        assert!((ttm.dist_omega_gamma() - 0.5).abs() <= 2.0 * h);
        let fast = travel_time_map(&g, &vec![2.0; g.node_count()], &gamma).unwrap();
        assert!((fast.dist_omega_gamma() - 0.25).abs() <= 2.0 * h);
    }

    #[test]
    fn left_edge_matches_euclidean_distance() {
        let g = square(32);
        let h = 1.0 / 32.0;
        let gamma = build_patch(&g, &PatchSpec::faces(&[Face::XMin])).unwrap();
        let ttm = travel_time_map(&g, &vec![1.0; g.node_count()], &gamma).unwrap();
        let pts: Vec<[f64; 3]> = gamma.node_indices().iter().map(|&i| g.node_position(i)).collect();
        for i in 0..g.node_count() {
            let x = g.node_position(i);
            let exact = pts
                .iter()
                .map(|p| ((x[0] - p[0]).powi(2) + (x[1] - p[1]).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            assert!((ttm.values()[i] - exact).abs() <= 2.0 * h, "node {i}: {} vs {exact}", ttm.values()[i]);
        }
        assert!((ttm.dist_omega_gamma() - 1.0).abs() <= 2.0 * h);
    }

    #[test]
    fn rejects_nonpositive_speed() {
        let g = square(8);
        let gamma = build_patch(&g, &PatchSpec::faces(&[Face::XMin])).unwrap();
        let mut c = vec![1.0; g.node_count()];
        c[10] = 0.0;
        assert!(matches!(travel_time_map(&g, &c, &gamma), Err(Error::InvalidCoefficient(_))));
    }

    #[test]
    fn ball_inradius() {
        let g = square(64);
        let b = build_region(&g, &Shape::ball(&[0.5, 0.5], 0.1)).unwrap();
        let r = region_inradius(&g, &vec![1.0; g.node_count()], &b).unwrap();
        assert!((r - 0.1).abs() <= 2.0 / 64.0, "inradius {r}");
    }

    #[test]
    fn three_dimensional_plane_front() {
        let g = Grid::unit(3, 10).unwrap();
        let gamma = build_patch(&g, &PatchSpec::faces(&[Face::XMin])).unwrap();
        let ttm = travel_time_map(&g, &vec![1.0; g.node_count()], &gamma).unwrap();
        let i = g.node_index(7, 5, 5);
        assert!((ttm.values()[i] - 0.7).abs() < 1e-12);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn travel_times_are_lipschitz_and_shrink_with_more_seeds(
            a in 0usize..121, b in 0usize..121, speed in 0.5f64..2.0,
        ) {
            let g = square(10);
            let c = vec![speed; g.node_count()];
            let one = travel_times_from(&g, &c, &[a]).unwrap();
            let two = travel_times_from(&g, &c, &[a, b]).unwrap();
            let step = g.spacing(0) / speed * (1.0 + 1e-12);
            for i in 0..g.node_count() {
                proptest::prop_assert!(two[i] <= one[i] && two[i] >= 0.0);
                let [x, y, _] = g.node_ijk(i);
                if x + 1 < 11 {
                    proptest::prop_assert!((one[i] - one[g.node_index(x + 1, y, 0)]).abs() <= step);
                }
                if y + 1 < 11 {
                    proptest::prop_assert!((one[i] - one[g.node_index(x, y + 1, 0)]).abs() <= step);
                }
            }
            proptest::prop_assert_eq!(one[a], 0.0);
        }
    }
}
