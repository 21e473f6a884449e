//! Weighted orthogonal projection onto discretely divergence-free fields.
//!
//! For E-type fields on a set of edges the constraint is `div_h(εg) = 0` at
//! every interior node; the complement is spanned by gradients of node
//! potentials vanishing on the boundary. H-type fields on faces use cell
//! potentials and `div_h(μg) = 0` in every cell. The potential equation
//! `Bᵀ W B φ = Bᵀ W g` is solved by a banded Cholesky factorization, so the
//! projector is linear and self-adjoint to rounding.

use super::{EmProblem, Field};
use crate::error::{Error, Result};

/// Cholesky factor of a symmetric positive definite band matrix.
#[derive(Clone, Debug)]
struct BandCholesky {
    n: usize,
    bw: usize,
    /// Row `i` holds columns `i−bw..=i` at `i·(bw+1) + (j + bw − i)`.
    l: Vec<f64>,
}

impl BandCholesky {
    fn factor(n: usize, bw: usize, mut a: Vec<f64>) -> Result<Self> {
        let w = bw + 1;
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let k0 = j0.max(j.saturating_sub(bw));
                let ri = i * w + bw - i;
                let rj = j * w + bw - j;
                let s: f64 = (k0..j).map(|k| a[ri + k] * a[rj + k]).sum();
                let v = a[ri + j] - s;
                if i == j {
                    if !(v > 0.0) {
                        return Err(Error::NumericalBreakdown(format!("potential matrix lost definiteness at row {i}")));
                    }
                    a[ri + j] = v.sqrt();
                } else {
                    a[ri + j] = v / a[rj + j];
                }
            }
        }
        Ok(Self { n, bw, l: a })
    }

    fn solve(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let ri = i * w + bw - i;
            let s: f64 = (i.saturating_sub(bw)..i).map(|k| self.l[ri + k] * b[k]).sum();
            b[i] = (b[i] - s) / self.l[ri + i];
        }
        for i in (0..n).rev() {
            b[i] /= self.l[i * w + bw];
            let ri = i * w + bw - i;
            let bi = b[i];
            for k in i.saturating_sub(bw)..i {
                b[k] -= self.l[ri + k] * bi;
            }
        }
    }
}

/// Projector onto the divergence-free fields supported on a set of edges
/// (E-type) or faces (H-type).
#[derive(Clone, Debug)]
pub struct DivFreeProjector {
    field: Field,
    dofs: Vec<usize>,
    weights: Vec<f64>,
    /// Potential unknowns at the low and high end of each dof, and `1/h`.
    links: Vec<(Option<usize>, Option<usize>, f64)>,
    chol: BandCholesky,
    pinned: Vec<usize>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl DivFreeProjector {
    /// E-type fields on `edges`, which must avoid the boundary.
    pub fn electric(problem: &EmProblem, edges: &[usize]) -> Result<Self> {
        let yee = problem.yee();
        let grid = yee.grid();
        let mut raw = Vec::with_capacity(edges.len());
        for &e in edges {
            if e >= yee.edge_count() || !problem.is_free_edge(e) {
                return Err(Error::InvalidInput(format!("edge {e} is not an interior edge")));
            }
            let (c, _) = yee.edge_of(e);
            let (lo, hi) = yee.edge_nodes(e);
            let pot = |v: usize| (!grid.is_boundary_node(v)).then_some(v);
            raw.push((pot(lo), pot(hi), 1.0 / yee.spacing()[c]));
        }
        let weights = edges.iter().map(|&e| problem.coeff().eps()[e]).collect();
        Self::build(Field::E, edges.to_vec(), weights, raw)
    }

    /// E-type fields on `edges` that are divergence free only at nodes whose
    /// six edges all lie in the set: the split `g = g̃ + ∇φ` with `φ`
    /// vanishing on the rim of the support.
    pub fn electric_grounded(problem: &EmProblem, edges: &[usize]) -> Result<Self> {
        let yee = problem.yee();
        let grid = yee.grid();
        let set: std::collections::HashSet<usize> = edges.iter().copied().collect();
        let enclosed = |v: usize| {
            if grid.is_boundary_node(v) {
                return false;
            }
            let p = grid.node_ijk(v);
            (0..3).all(|c| {
                let mut q = p;
                q[c] -= 1;
                set.contains(&yee.edge_index(c, p)) && set.contains(&yee.edge_index(c, q))
            })
        };
        let mut raw = Vec::with_capacity(edges.len());
        for &e in edges {
            if e >= yee.edge_count() || !problem.is_free_edge(e) {
                return Err(Error::InvalidInput(format!("edge {e} is not an interior edge")));
            }
            let (c, _) = yee.edge_of(e);
            let (lo, hi) = yee.edge_nodes(e);
            let pot = |v: usize| enclosed(v).then_some(v);
            raw.push((pot(lo), pot(hi), 1.0 / yee.spacing()[c]));
        }
        let weights = edges.iter().map(|&e| problem.coeff().eps()[e]).collect();
        Self::build(Field::E, edges.to_vec(), weights, raw)
    }

    /// H-type fields on `faces`.
    pub fn magnetic(problem: &EmProblem, faces: &[usize]) -> Result<Self> {
        let yee = problem.yee();
        let mut raw = Vec::with_capacity(faces.len());
        for &f in faces {
            if f >= yee.face_count() {
                return Err(Error::InvalidInput(format!("face {f} is out of range")));
            }
            let (c, _) = yee.face_of(f);
            let (lo, hi) = yee.face_cells(f);
            raw.push((lo, hi, 1.0 / yee.spacing()[c]));
        }
        let weights = faces.iter().map(|&f| problem.coeff().mu()[f]).collect();
        Self::build(Field::H, faces.to_vec(), weights, raw)
    }

    /// Whole-domain projector for E (all interior edges) or H (all faces).
    pub fn domain(problem: &EmProblem, field: Field) -> Result<Self> {
        let yee = problem.yee();
        match field {
            Field::E => {
                let edges: Vec<usize> = (0..yee.edge_count()).filter(|&e| problem.is_free_edge(e)).collect();
                Self::electric(problem, &edges)
            }
            Field::H => Self::magnetic(problem, &(0..yee.face_count()).collect::<Vec<_>>()),
        }
    }

    fn build(
        field: Field,
        dofs: Vec<usize>,
        weights: Vec<f64>,
        raw: Vec<(Option<usize>, Option<usize>, f64)>,
    ) -> Result<Self> {
        if dofs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("projector support must be strictly ascending".into()));
        }
        let mut pots: Vec<usize> = raw.iter().flat_map(|r| [r.0, r.1]).flatten().collect();
        pots.sort_unstable();
        pots.dedup();
        let pos = |v: usize| pots.binary_search(&v).expect("potential is listed");
        let links: Vec<_> = raw.iter().map(|&(lo, hi, ih)| (lo.map(pos), hi.map(pos), ih)).collect();
        let n = pots.len();

        // Components without a grounded link keep a constant null vector; pin one potential in each.
        let mut parent: Vec<usize> = (0..n).collect();
        let mut grounded = vec![false; n];
        for &(lo, hi, _) in &links {
            match (lo, hi) {
                (Some(a), Some(b)) => {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra.max(rb)] = ra.min(rb);
                }
                (Some(a), None) | (None, Some(a)) => grounded[a] = true,
                (None, None) => {}
            }
        }
        let mut root_grounded = vec![false; n];
        for v in 0..n {
            let r = find(&mut parent, v);
            root_grounded[r] |= grounded[v];
        }
        let pinned: Vec<usize> = (0..n).filter(|&v| find(&mut parent, v) == v && !root_grounded[v]).collect();

        let bw = links
            .iter()
            .filter_map(|&(lo, hi, _)| Some(lo?.abs_diff(hi?)))
            .max()
            .unwrap_or(0);
        let w = bw + 1;
        let mut a = vec![0.0; n * w];
        let at = |i: usize, j: usize| i * w + bw - i + j;
        for (&(lo, hi, ih), &wt) in links.iter().zip(&weights) {
            let k = wt * ih * ih;
            if let Some(l) = lo {
                a[at(l, l)] += k;
            }
            if let Some(h) = hi {
                a[at(h, h)] += k;
            }
            if let (Some(l), Some(h)) = (lo, hi) {
                a[at(l.max(h), l.min(h))] -= k;
            }
        }
        for &p in &pinned {
            for j in p.saturating_sub(bw)..p {
                a[at(p, j)] = 0.0;
            }
            for i in p + 1..(p + w).min(n) {
                a[at(i, p)] = 0.0;
            }
            a[at(p, p)] = 1.0;
        }
        let chol = BandCholesky::factor(n, bw, a)?;
        Ok(Self { field, dofs, weights, links, chol, pinned })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    /// Edges or faces the projected fields live on, ascending.
    pub fn support(&self) -> &[usize] {
        &self.dofs
    }

    pub fn potentials(&self) -> usize {
        self.chol.n
    }

    /// `g − Bφ` for `g` given on [`DivFreeProjector::support`].
    pub fn apply(&self, g: &[f64]) -> Vec<f64> {
        assert_eq!(g.len(), self.dofs.len(), "field does not match the projector support");
        let mut r = vec![0.0; self.chol.n];
        for ((&(lo, hi, ih), &w), &v) in self.links.iter().zip(&self.weights).zip(g) {
            let flux = w * v * ih;
            if let Some(h) = hi {
                r[h] += flux;
            }
            if let Some(l) = lo {
                r[l] -= flux;
            }
        }
        for &p in &self.pinned {
            r[p] = 0.0;
        }
        self.chol.solve(&mut r);
        self.links
            .iter()
            .zip(g)
            .map(|(&(lo, hi, ih), &v)| {
                let grad = (hi.map_or(0.0, |h| r[h]) - lo.map_or(0.0, |l| r[l])) * ih;
                v - grad
            })
            .collect()
    }

    /// Largest `|div_h(w·g)|` over the potential unknowns.
    pub fn divergence_defect(&self, g: &[f64]) -> f64 {
        let mut r = vec![0.0; self.chol.n];
        for ((&(lo, hi, ih), &w), &v) in self.links.iter().zip(&self.weights).zip(g) {
            let flux = w * v * ih;
            if let Some(h) = hi {
                r[h] += flux;
            }
            if let Some(l) = lo {
                r[l] -= flux;
            }
        }
        r.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Whole-domain projection of an E-type field given on all edges; boundary
/// edges come back as zero.
pub fn project_div_free(problem: &EmProblem, g: &[f64]) -> Result<Vec<f64>> {
    let yee = problem.yee();
    if g.len() != yee.edge_count() {
        return Err(Error::Shape(format!("field has {} entries, grid has {} edges", g.len(), yee.edge_count())));
    }
    let p = DivFreeProjector::domain(problem, Field::E)?;
    let sub: Vec<f64> = p.support().iter().map(|&e| g[e]).collect();
    let mut out = vec![0.0; g.len()];
    for (&e, v) in p.support().iter().zip(p.apply(&sub)) {
        out[e] = v;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Face, GaussianBump, Grid, PatchSpec, SmoothField, TimeGrid};
    use crate::maxwell::{build_em_patch, EmCoefficients, YeeGrid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem() -> EmProblem {
        let yee = YeeGrid::new(&Grid::new(&[6, 7, 5], &[1.0 / 6.0, 1.0 / 7.0, 0.2], &[0.0; 3]).unwrap()).unwrap();
        let bump = |a| SmoothField { constant: 1.0, bumps: vec![GaussianBump { amplitude: a, center: vec![0.5; 3], width: 0.3 }] };
        let coeff = EmCoefficients::from_fields(&yee, &bump(1.5), &bump(0.7)).unwrap();
        let gamma = build_em_patch(&yee, &PatchSpec::faces(&[Face::XMin])).unwrap();
        let dt = EmProblem::max_stable_dt(&yee, &coeff);
        EmProblem::new(yee, TimeGrid::new(4, dt).unwrap(), coeff, gamma).unwrap()
    }

    fn random(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn wdot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
        w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
    }

    #[test]
    fn band_cholesky_solves_tridiagonal() {
        // [2 -1 0; -1 2 -1; 0 -1 2] x = [1 0 1] → x = [1 1 1]
        let a = vec![0.0, 2.0, -1.0, 2.0, -1.0, 2.0];
        let c = BandCholesky::factor(3, 1, a).unwrap();
        let mut b = vec![1.0, 0.0, 1.0];
        c.solve(&mut b);
        assert!(b.iter().all(|v| (v - 1.0).abs() < 1e-15));
        assert!(BandCholesky::factor(2, 1, vec![0.0, 1.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn idempotent_orthogonal_and_divergence_free() {
        let p = problem();
        for field in [Field::E, Field::H] {
            let proj = DivFreeProjector::domain(&p, field).unwrap();
            let w = &proj.weights;
            let g = random(proj.support().len(), 7);
            let pg = proj.apply(&g);
            let ppg = proj.apply(&pg);
            let scale = wdot(w, &g, &g).sqrt();
            let diff: Vec<f64> = pg.iter().zip(&ppg).map(|(a, b)| a - b).collect();
            assert!(wdot(w, &diff, &diff).sqrt() <= 1e-12 * scale);
            let rest: Vec<f64> = g.iter().zip(&pg).map(|(a, b)| a - b).collect();
            assert!(wdot(w, &pg, &rest).abs() <= 1e-12 * scale * scale);
            assert!(proj.divergence_defect(&pg) <= 1e-10 * scale / p.yee().spacing()[0]);
        }
    }

    #[test]
    fn gradients_vanish_and_curls_survive() {
        let p = problem();
        let yee = p.yee();
        let grid = yee.grid();
        let phi: Vec<f64> = (0..grid.node_count())
            .map(|v| if grid.is_boundary_node(v) { 0.0 } else { (v as f64 * 0.37).sin() })
            .collect();
        let out = project_div_free(&p, &yee.grad(&phi)).unwrap();
        assert!(out.iter().all(|v| v.abs() < 1e-12));

        let psi: Vec<f64> = (0..yee.face_count())
            .map(|f| if yee.is_boundary_face(f) { 0.0 } else { (f as f64 * 0.11).cos() })
            .collect();
        let mut curl = vec![0.0; yee.edge_count()];
        yee.curl_t(&psi, &mut curl);
        let g: Vec<f64> = (0..yee.edge_count())
            .map(|e| if p.is_free_edge(e) { curl[e] / p.coeff().eps()[e] } else { 0.0 })
            .collect();
        let out = project_div_free(&p, &g).unwrap();
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(g.iter().zip(&out).all(|(a, b)| (a - b).abs() <= 1e-10 * scale));
    }

    #[test]
    fn floating_components_are_pinned() {
        let p = problem();
        let yee = p.yee();
        // Edges of one interior cell cube: a closed component with no grounded link.
        let mut edges: Vec<usize> = Vec::new();
        for c in 0..3 {
            for d1 in 0..2 {
                for d2 in 0..2 {
                    let mut q = [2, 3, 2];
                    q[(c + 1) % 3] += d1;
                    q[(c + 2) % 3] += d2;
                    edges.push(yee.edge_index(c, q));
                }
            }
        }
        edges.sort_unstable();
        let proj = DivFreeProjector::electric(&p, &edges).unwrap();
        assert_eq!(proj.pinned.len(), 1);
        let g = random(edges.len(), 3);
        let pg = proj.apply(&g);
        assert!(proj.divergence_defect(&pg) < 1e-10);
        let again = proj.apply(&pg);
        assert!(pg.iter().zip(&again).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}
