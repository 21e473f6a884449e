use serde::{Deserialize, Serialize};

use super::{Grid, Shape};
use crate::error::{Error, Result};

/// One face of the box domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Face {
    #[serde(rename = "x-")]
    XMin,
    #[serde(rename = "x+")]
    XMax,
    #[serde(rename = "y-")]
    YMin,
    #[serde(rename = "y+")]
    YMax,
    #[serde(rename = "z-")]
    ZMin,
    #[serde(rename = "z+")]
    ZMax,
}

impl Face {
    pub const ALL: [Face; 6] = [Face::XMin, Face::XMax, Face::YMin, Face::YMax, Face::ZMin, Face::ZMax];

    pub fn axis(self) -> usize {
        self as usize / 2
    }

    /// Sign of the outward normal along [`Face::axis`].
    pub fn outward(self) -> f64 {
        if self as usize % 2 == 0 {
            -1.0
        } else {
            1.0
        }
    }

    /// Every face of a `dim`-dimensional box.
    pub fn all(dim: usize) -> Vec<Face> {
        Self::ALL[..2 * dim].to_vec()
    }
}

/// Descriptor of the excitation patch Γ: a set of faces, optionally cut down to
/// the part inside `window`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchSpec {
    pub faces: Vec<Face>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Shape>,
}

impl PatchSpec {
    pub fn faces(faces: &[Face]) -> Self {
        Self { faces: faces.to_vec(), window: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatchNode {
    pub node: usize,
    pub face: Face,
}

/// Boundary nodes carrying Dirichlet data.
///
/// Only nodes in the relative interior of a face are used: rim nodes shared by
/// two faces never influence the interior stencil, and excluding them gives
/// every patch node a unique outward normal.
#[derive(Clone, Debug)]
pub struct BoundaryPatch {
    grid: Grid,
    spec: PatchSpec,
    nodes: Vec<PatchNode>,
    area: Vec<f64>,
}

pub fn build_patch(grid: &Grid, spec: &PatchSpec) -> Result<BoundaryPatch> {
    let dim = grid.dim();
    let mut nodes = Vec::new();
    for &face in &spec.faces {
        let axis = face.axis();
        if axis >= dim {
            return Err(Error::InvalidInput(format!("face {face:?} does not exist on a {dim}D grid")));
        }
        let fixed = if face.outward() < 0.0 { 0 } else { grid.cells(axis) };
        for idx in 0..grid.node_count() {
            let ijk = grid.node_ijk(idx);
            if ijk[axis] != fixed {
                continue;
            }
            let inner = (0..dim).filter(|&a| a != axis).all(|a| ijk[a] > 0 && ijk[a] < grid.cells(a));
            if !inner {
                continue;
            }
            if let Some(w) = &spec.window {
                if !w.contains(&grid.node_position(idx)) {
                    continue;
                }
            }
            nodes.push(PatchNode { node: idx, face });
        }
    }
    nodes.sort_by_key(|p| p.node);
    nodes.dedup_by_key(|p| p.node);
    if nodes.is_empty() {
        return Err(Error::InvalidInput("boundary patch contains no grid nodes".into()));
    }
    let area = nodes.iter().map(|p| grid.face_area(p.face.axis())).collect();
    Ok(BoundaryPatch { grid: grid.clone(), spec: spec.clone(), nodes, area })
}

impl BoundaryPatch {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spec(&self) -> &PatchSpec {
        &self.spec
    }

    pub fn nodes(&self) -> &[PatchNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn area(&self) -> &[f64] {
        &self.area
    }

    pub fn node_indices(&self) -> Vec<usize> {
        self.nodes.iter().map(|p| p.node).collect()
    }

    /// Index offset from a patch node one step into the domain.
    pub fn inward_offset(&self, k: usize) -> isize {
        let p = self.nodes[k];
        let s = self.grid.node_strides()[p.face.axis()] as isize;
        if p.face.outward() < 0.0 {
            s
        } else {
            -s
        }
    }
}
