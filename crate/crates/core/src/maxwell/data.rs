use super::YeeGrid;
use crate::error::{Error, Result};
use crate::geometry::{build_patch, BoundaryPatch, PatchSpec};
use crate::wave::{BoundaryTimeSeries, FieldMovie};

/// Tangential boundary data `ν×E` on Γ: one scalar per tangential boundary
/// edge and level `1..=nt`, level-major.
pub type EmBoundarySeries = BoundaryTimeSeries;

/// Tangential boundary edges carrying the excitation.
///
/// On a face with outward normal `s·x̂_a` and cyclic tangents `b, c`, the
/// datum stored on an `E_b` edge is `(ν×E)_c = s·E_b` and on an `E_c` edge it
/// is `(ν×E)_b = −s·E_c`. Edges on the rim of a face are left out, as nodes
/// are in the scalar patch.
#[derive(Clone, Debug)]
pub struct EmPatch {
    spec: PatchSpec,
    edges: Vec<usize>,
    /// `E[edge] = sign · f`.
    sign: Vec<f64>,
    area: Vec<f64>,
    /// Γ node patch, used for travel times.
    nodes: BoundaryPatch,
}

pub fn build_em_patch(yee: &YeeGrid, spec: &PatchSpec) -> Result<EmPatch> {
    let grid = yee.grid();
    let nodes = build_patch(grid, spec)?;
    let n = yee.cells();
    let mut found: Vec<(usize, f64, f64)> = Vec::new();
    for &face in &spec.faces {
        let a = face.axis();
        let s = face.outward();
        let fixed = if s < 0.0 { 0 } else { n[a] };
        for (t, sign) in [((a + 1) % 3, s), ((a + 2) % 3, -s)] {
            let other = 3 - a - t;
            for k in 0..yee.edge_count() {
                let (c, p) = yee.edge_of(k);
                if c != t || p[a] != fixed || p[other] == 0 || p[other] == n[other] {
                    continue;
                }
                if let Some(w) = &spec.window {
                    if !w.contains(&yee.edge_position(k)) {
                        continue;
                    }
                }
                found.push((k, sign, grid.face_area(a)));
            }
        }
    }
    found.sort_by_key(|e| e.0);
    found.dedup_by_key(|e| e.0);
    if found.is_empty() {
        return Err(Error::InvalidInput("boundary patch contains no tangential edges".into()));
    }
    Ok(EmPatch {
        spec: spec.clone(),
        edges: found.iter().map(|e| e.0).collect(),
        sign: found.iter().map(|e| e.1).collect(),
        area: found.iter().map(|e| e.2).collect(),
        nodes,
    })
}

impl EmPatch {
    pub fn spec(&self) -> &PatchSpec {
        &self.spec
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn signs(&self) -> &[f64] {
        &self.sign
    }

    pub fn area(&self) -> &[f64] {
        &self.area
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn node_patch(&self) -> &BoundaryPatch {
        &self.nodes
    }
}

/// E on edges at levels `0..=nt` and H on faces; see the solver for which
/// half level each H record holds.
#[derive(Clone, Debug, PartialEq)]
pub struct EmFieldMovie {
    pub e: FieldMovie,
    pub h: FieldMovie,
}

impl EmFieldMovie {
    pub fn zeros(yee: &YeeGrid, nt: usize) -> Self {
        Self { e: FieldMovie::zeros(yee.edge_count(), nt), h: FieldMovie::zeros(yee.face_count(), nt) }
    }

    pub fn nt(&self) -> usize {
        self.e.nt()
    }

    pub fn max_abs(&self) -> f64 {
        self.e.max_abs().max(self.h.max_abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Face, Grid, Shape};

    #[test]
    fn patch_counts_and_signs() {
        let y = YeeGrid::new(&Grid::unit(3, 5).unwrap()).unwrap();
        let p = build_em_patch(&y, &PatchSpec::faces(&[Face::XMin])).unwrap();
        // E_y edges: 5 along y, 4 interior z positions; E_z likewise.
        assert_eq!(p.len(), 2 * 5 * 4);
        for (k, &e) in p.edges().iter().enumerate() {
            let (c, q) = y.edge_of(e);
            assert_eq!(q[0], 0);
            assert_eq!(p.signs()[k], if c == 1 { -1.0 } else { 1.0 });
            assert!(y.is_boundary_edge(e));
        }
        let both = build_em_patch(&y, &PatchSpec::faces(&[Face::XMin, Face::ZMax])).unwrap();
        assert_eq!(both.len(), 80);
        let cut = PatchSpec { faces: vec![Face::XMin], window: Some(Shape::boxed(&[-1.0, 0.0, 0.0], &[1.0, 0.5, 1.0])) };
        assert!(build_em_patch(&y, &cut).unwrap().len() < p.len());
    }
}
