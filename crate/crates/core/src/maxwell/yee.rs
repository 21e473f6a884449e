//! Staggered Yee layout: E on cell edges, H on cell faces, and the discrete
//! curl pair `C`, `Cᵀ` that makes the scheme energy-conserving.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Grid;

/// Entry count above which curl sweeps run on the rayon pool.
const PARALLEL_DOFS: usize = 1 << 16;

/// Index bookkeeping of a 3D Yee grid.
///
/// `E_c` lives at edge midpoints (`n+1` points along the two other axes, `n`
/// along `c`); `H_c` at face centers (`n+1` along `c`, `n` along the others).
/// Each field is one flat vector, components concatenated, x fastest inside a
/// component.
#[derive(Clone, Debug, PartialEq)]
pub struct YeeGrid {
    grid: Grid,
    n: [usize; 3],
    h: [f64; 3],
    e_dims: [[usize; 3]; 3],
    h_dims: [[usize; 3]; 3],
    e_off: [usize; 4],
    h_off: [usize; 4],
}

fn offsets(dims: &[[usize; 3]; 3]) -> [usize; 4] {
    let mut off = [0; 4];
    for c in 0..3 {
        off[c + 1] = off[c] + dims[c].iter().product::<usize>();
    }
    off
}

fn flat(d: &[usize; 3], p: [usize; 3]) -> usize {
    p[0] + d[0] * (p[1] + d[1] * p[2])
}

fn unflat(d: &[usize; 3], idx: usize) -> [usize; 3] {
    [idx % d[0], (idx / d[0]) % d[1], idx / (d[0] * d[1])]
}

impl YeeGrid {
    pub fn new(grid: &Grid) -> Result<Self> {
        if grid.dim() != 3 {
            return Err(Error::InvalidInput(format!("the Maxwell solver needs a 3D grid, got {}D", grid.dim())));
        }
        let n = [grid.cells(0), grid.cells(1), grid.cells(2)];
        let h = [grid.spacing(0), grid.spacing(1), grid.spacing(2)];
        let mut e_dims = [[0; 3]; 3];
        let mut h_dims = [[0; 3]; 3];
        for c in 0..3 {
            for a in 0..3 {
                e_dims[c][a] = if a == c { n[a] } else { n[a] + 1 };
                h_dims[c][a] = if a == c { n[a] + 1 } else { n[a] };
            }
        }
        Ok(Self { grid: grid.clone(), n, h, e_off: offsets(&e_dims), h_off: offsets(&h_dims), e_dims, h_dims })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn cells(&self) -> [usize; 3] {
        self.n
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.h
    }

    pub fn edge_count(&self) -> usize {
        self.e_off[3]
    }

    pub fn face_count(&self) -> usize {
        self.h_off[3]
    }

    pub fn cell_count(&self) -> usize {
        self.n.iter().product()
    }

    /// Quadrature weight of one edge, face, node or cell.
    pub fn volume(&self) -> f64 {
        self.h.iter().product()
    }

    pub fn edge_index(&self, c: usize, p: [usize; 3]) -> usize {
        self.e_off[c] + flat(&self.e_dims[c], p)
    }

    pub fn face_index(&self, c: usize, p: [usize; 3]) -> usize {
        self.h_off[c] + flat(&self.h_dims[c], p)
    }

    /// Lattice dims (x, y, z) and index range of the `E_c` block.
    pub fn edge_block(&self, c: usize) -> ([usize; 3], std::ops::Range<usize>) {
        (self.e_dims[c], self.e_off[c]..self.e_off[c + 1])
    }

    pub fn face_block(&self, c: usize) -> ([usize; 3], std::ops::Range<usize>) {
        (self.h_dims[c], self.h_off[c]..self.h_off[c + 1])
    }

    /// Component and lattice index of an edge.
    pub fn edge_of(&self, idx: usize) -> (usize, [usize; 3]) {
        let c = (0..3).find(|&c| idx < self.e_off[c + 1]).expect("edge index out of range");
        (c, unflat(&self.e_dims[c], idx - self.e_off[c]))
    }

    pub fn face_of(&self, idx: usize) -> (usize, [usize; 3]) {
        let c = (0..3).find(|&c| idx < self.h_off[c + 1]).expect("face index out of range");
        (c, unflat(&self.h_dims[c], idx - self.h_off[c]))
    }

    pub fn edge_position(&self, idx: usize) -> [f64; 3] {
        let (c, p) = self.edge_of(idx);
        let o = self.grid.origin();
        std::array::from_fn(|a| o[a] + (p[a] as f64 + if a == c { 0.5 } else { 0.0 }) * self.h[a])
    }

    pub fn face_position(&self, idx: usize) -> [f64; 3] {
        let (c, p) = self.face_of(idx);
        let o = self.grid.origin();
        std::array::from_fn(|a| o[a] + (p[a] as f64 + if a == c { 0.0 } else { 0.5 }) * self.h[a])
    }

    /// Grid nodes at the two ends of an edge, from low to high.
    pub fn edge_nodes(&self, idx: usize) -> (usize, usize) {
        let (c, p) = self.edge_of(idx);
        let mut q = p;
        q[c] += 1;
        (self.grid.node_index(p[0], p[1], p[2]), self.grid.node_index(q[0], q[1], q[2]))
    }

    /// Corner nodes of a face.
    pub fn face_nodes(&self, idx: usize) -> [usize; 4] {
        let (c, p) = self.face_of(idx);
        let (b, d) = ((c + 1) % 3, (c + 2) % 3);
        let node = |db: usize, dd: usize| {
            let mut q = p;
            q[b] += db;
            q[d] += dd;
            self.grid.node_index(q[0], q[1], q[2])
        };
        [node(0, 0), node(1, 0), node(0, 1), node(1, 1)]
    }

    /// Cells on the low and high side of a face; `None` outside the domain.
    pub fn face_cells(&self, idx: usize) -> (Option<usize>, Option<usize>) {
        let (c, p) = self.face_of(idx);
        let cd = self.n;
        let hi = (p[c] < self.n[c]).then(|| flat(&cd, p));
        let lo = (p[c] > 0).then(|| {
            let mut q = p;
            q[c] -= 1;
            flat(&cd, q)
        });
        (lo, hi)
    }

    pub fn cell_position(&self, idx: usize) -> [f64; 3] {
        self.grid.cell_center(idx)
    }

    /// True for edges lying in the boundary of the box (tangential edges).
    pub fn is_boundary_edge(&self, idx: usize) -> bool {
        let (c, p) = self.edge_of(idx);
        (0..3).any(|a| a != c && (p[a] == 0 || p[a] == self.n[a]))
    }

    /// True for faces lying in the boundary of the box.
    pub fn is_boundary_face(&self, idx: usize) -> bool {
        let (c, p) = self.face_of(idx);
        p[c] == 0 || p[c] == self.n[c]
    }

    /// `h ← C e`: `(Ce)_a = Δ_b E_c/h_b − Δ_c E_b/h_c` with `(a,b,c)` cyclic.
    pub fn curl(&self, e: &[f64], out: &mut [f64]) {
        assert_eq!(e.len(), self.edge_count());
        assert_eq!(out.len(), self.face_count());
        let parallel = out.len() >= PARALLEL_DOFS;
        for a in 0..3 {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            let dh = self.h_dims[a];
            let (ec, eb) = (&e[self.e_off[c]..self.e_off[c + 1]], &e[self.e_off[b]..self.e_off[b + 1]]);
            let (dc, db) = (self.e_dims[c], self.e_dims[b]);
            let sc = [1, dc[0], dc[0] * dc[1]];
            let sb = [1, db[0], db[0] * db[1]];
            let (ib, ic) = (1.0 / self.h[b], 1.0 / self.h[c]);
            let slab = |k: usize, row: &mut [f64]| {
                for j in 0..dh[1] {
                    for i in 0..dh[0] {
                        let p = [i, j, k];
                        let pc = flat(&dc, p);
                        let pb = flat(&db, p);
                        row[i + dh[0] * j] = (ec[pc + sc[b]] - ec[pc]) * ib - (eb[pb + sb[c]] - eb[pb]) * ic;
                    }
                }
            };
            let dst = &mut out[self.h_off[a]..self.h_off[a + 1]];
            let plane = dh[0] * dh[1];
            if parallel {
                dst.par_chunks_mut(plane).enumerate().for_each(|(k, row)| slab(k, row));
            } else {
                dst.chunks_mut(plane).enumerate().for_each(|(k, row)| slab(k, row));
            }
        }
    }

    /// `e ← Cᵀ h`, the exact transpose of [`YeeGrid::curl`].
    pub fn curl_t(&self, h: &[f64], out: &mut [f64]) {
        assert_eq!(h.len(), self.face_count());
        assert_eq!(out.len(), self.edge_count());
        let parallel = out.len() >= PARALLEL_DOFS;
        for c in 0..3 {
            // E_c enters (Ce)_a as the Δ_b E_c term and (Ce)_a2 as the −Δ_c2 E_c term.
            let (a, b) = ((c + 1) % 3, (c + 2) % 3);
            let (a2, c2) = ((c + 2) % 3, (c + 1) % 3);
            let de = self.e_dims[c];
            let (ha, ha2) = (&h[self.h_off[a]..self.h_off[a + 1]], &h[self.h_off[a2]..self.h_off[a2 + 1]]);
            let (da, da2) = (self.h_dims[a], self.h_dims[a2]);
            let (ib, ic2) = (1.0 / self.h[b], 1.0 / self.h[c2]);
            let (nb, nc2) = (self.n[b], self.n[c2]);
            let slab = |k: usize, row: &mut [f64]| {
                for j in 0..de[1] {
                    for i in 0..de[0] {
                        let p = [i, j, k];
                        let mut s = 0.0;
                        if p[b] < nb {
                            s -= ha[flat(&da, p)] * ib;
                        }
                        if p[b] > 0 {
                            let mut q = p;
                            q[b] -= 1;
                            s += ha[flat(&da, q)] * ib;
                        }
                        if p[c2] < nc2 {
                            s += ha2[flat(&da2, p)] * ic2;
                        }
                        if p[c2] > 0 {
                            let mut q = p;
                            q[c2] -= 1;
                            s -= ha2[flat(&da2, q)] * ic2;
                        }
                        row[i + de[0] * j] = s;
                    }
                }
            };
            let dst = &mut out[self.e_off[c]..self.e_off[c + 1]];
            let plane = de[0] * de[1];
            if parallel {
                dst.par_chunks_mut(plane).enumerate().for_each(|(k, row)| slab(k, row));
            } else {
                dst.chunks_mut(plane).enumerate().for_each(|(k, row)| slab(k, row));
            }
        }
    }

    /// Discrete gradient of node values onto edges.
    pub fn grad(&self, phi: &[f64]) -> Vec<f64> {
        assert_eq!(phi.len(), self.grid.node_count());
        (0..self.edge_count())
            .map(|e| {
                let (c, _) = self.edge_of(e);
                let (lo, hi) = self.edge_nodes(e);
                (phi[hi] - phi[lo]) / self.h[c]
            })
            .collect()
    }

    /// `div_h(w·e)` at every node (the negative transpose of [`YeeGrid::grad`]).
    pub fn node_divergence(&self, e: &[f64], w: &[f64]) -> Vec<f64> {
        let mut div = vec![0.0; self.grid.node_count()];
        for k in 0..self.edge_count() {
            let (c, _) = self.edge_of(k);
            let (lo, hi) = self.edge_nodes(k);
            let flux = w[k] * e[k] / self.h[c];
            div[hi] -= flux;
            div[lo] += flux;
        }
        div
    }

    /// `div_h(w·h)` at every cell.
    pub fn cell_divergence(&self, h: &[f64], w: &[f64]) -> Vec<f64> {
        let mut div = vec![0.0; self.cell_count()];
        for f in 0..self.face_count() {
            let (c, _) = self.face_of(f);
            let flux = w[f] * h[f] / self.h[c];
            let (lo, hi) = self.face_cells(f);
            if let Some(lo) = lo {
                div[lo] += flux;
            }
            if let Some(hi) = hi {
                div[hi] -= flux;
            }
        }
        div
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn yee() -> YeeGrid {
        YeeGrid::new(&Grid::new(&[4, 5, 6], &[0.25, 0.2, 1.0 / 6.0], &[0.0; 3]).unwrap()).unwrap()
    }

    fn random(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn counts_and_round_trips() {
        let y = yee();
        assert_eq!(y.edge_count(), 4 * 6 * 7 + 5 * 5 * 7 + 5 * 6 * 6);
        assert_eq!(y.face_count(), 5 * 5 * 6 + 4 * 6 * 6 + 4 * 5 * 7);
        for e in 0..y.edge_count() {
            let (c, p) = y.edge_of(e);
            assert_eq!(y.edge_index(c, p), e);
        }
        for f in 0..y.face_count() {
            let (c, p) = y.face_of(f);
            assert_eq!(y.face_index(c, p), f);
        }
        assert!(YeeGrid::new(&Grid::unit(2, 8).unwrap()).is_err());
    }

    #[test]
    fn curl_transpose_is_exact() {
        let y = yee();
        let e = random(y.edge_count(), 1);
        let h = random(y.face_count(), 2);
        let mut ce = vec![0.0; y.face_count()];
        let mut cth = vec![0.0; y.edge_count()];
        y.curl(&e, &mut ce);
        y.curl_t(&h, &mut cth);
        let lhs: f64 = ce.iter().zip(&h).map(|(a, b)| a * b).sum();
        let rhs: f64 = e.iter().zip(&cth).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn exact_sequence_properties() {
        let y = yee();
        let phi = random(y.grid().node_count(), 3);
        let mut c = vec![0.0; y.face_count()];
        y.curl(&y.grad(&phi), &mut c);
        assert!(c.iter().all(|v| v.abs() < 1e-11));
        let e = random(y.edge_count(), 4);
        y.curl(&e, &mut c);
        let div = y.cell_divergence(&c, &vec![1.0; y.face_count()]);
        assert!(div.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn curl_of_linear_field() {
        // E = (0, x, 0) has curl (0, 0, 1).
        let y = yee();
        let e: Vec<f64> = (0..y.edge_count())
            .map(|k| if y.edge_of(k).0 == 1 { y.edge_position(k)[0] } else { 0.0 })
            .collect();
        let mut h = vec![0.0; y.face_count()];
        y.curl(&e, &mut h);
        for f in 0..y.face_count() {
            let want = if y.face_of(f).0 == 2 { 1.0 } else { 0.0 };
            assert!((h[f] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_classification() {
        let y = yee();
        let bd = (0..y.edge_count()).filter(|&e| y.is_boundary_edge(e)).count();
        assert_eq!(y.edge_count() - bd, 4 * 4 * 5 + 3 * 5 * 5 + 3 * 4 * 6);
        let bf = (0..y.face_count()).filter(|&f| y.is_boundary_face(f)).count();
        assert_eq!(bf, 2 * (5 * 6 + 4 * 6 + 4 * 5));
    }
}
