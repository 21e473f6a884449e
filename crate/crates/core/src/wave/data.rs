use std::ops::Range;

use crate::error::{Error, Result};
use crate::geometry::{Region, TimeGrid};

/// Degrees of freedom sampled over a contiguous range of time levels.
/// Values tied to a sampling are stored level-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampling {
    pub dofs: Vec<usize>,
    pub levels: Range<usize>,
}

impl Sampling {
    pub fn new(dofs: Vec<usize>, levels: Range<usize>) -> Self {
        Self { dofs, levels }
    }

    pub fn len(&self) -> usize {
        self.dofs.len() * self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Offset of `level` in a level-major value vector, if sampled.
    pub fn offset(&self, level: usize) -> Option<usize> {
        self.levels.contains(&level).then(|| (level - self.levels.start) * self.dofs.len())
    }
}

/// Boundary data on the excitation patch at levels `1..=nt`; the level-0 value
/// is zero by convention (homogeneous initial data).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryTimeSeries {
    dofs: usize,
    nt: usize,
    values: Vec<f64>,
}

impl BoundaryTimeSeries {
    pub fn zeros(dofs: usize, nt: usize) -> Self {
        Self { dofs, nt, values: vec![0.0; dofs * nt] }
    }

    pub fn from_values(dofs: usize, nt: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != dofs * nt {
            return Err(Error::Shape(format!("series needs {dofs}×{nt} values, got {}", values.len())));
        }
        Ok(Self { dofs, nt, values })
    }

    /// Samples `f(dof, t)` at `t = n·dt`, `n = 1..=nt`.
    pub fn from_fn(dofs: usize, time: &TimeGrid, f: impl Fn(usize, f64) -> f64) -> Self {
        let nt = time.nt();
        let values = (1..=nt).flat_map(|n| (0..dofs).map(move |k| (k, n))).map(|(k, n)| f(k, time.time(n))).collect();
        Self { dofs, nt, values }
    }

    pub fn dofs(&self) -> usize {
        self.dofs
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Values at level `n ≥ 1`.
    pub fn level(&self, n: usize) -> &[f64] {
        &self.values[(n - 1) * self.dofs..n * self.dofs]
    }
}

/// Full space-time record at levels `0..=nt`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldMovie {
    dofs: usize,
    nt: usize,
    values: Vec<f64>,
}

impl FieldMovie {
    pub fn zeros(dofs: usize, nt: usize) -> Self {
        Self { dofs, nt, values: vec![0.0; dofs * (nt + 1)] }
    }

    pub fn from_values(dofs: usize, nt: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != dofs * (nt + 1) {
            return Err(Error::Shape(format!("movie needs {dofs}×{} values, got {}", nt + 1, values.len())));
        }
        Ok(Self { dofs, nt, values })
    }

    pub fn dofs(&self) -> usize {
        self.dofs
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn level(&self, n: usize) -> &[f64] {
        &self.values[n * self.dofs..(n + 1) * self.dofs]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut [f64] {
        &mut self.values[n * self.dofs..(n + 1) * self.dofs]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `region × (a,b)`, with `(a,b)` snapped to levels; the window holds the
/// levels `first+1 ..= last`.
#[derive(Clone, Debug)]
pub struct SpaceTimeWindow {
    pub region: Region,
    pub a: f64,
    pub b: f64,
    pub first: usize,
    pub last: usize,
}

impl SpaceTimeWindow {
    pub fn new(region: Region, a: f64, b: f64, time: &TimeGrid) -> Result<Self> {
        let eps = 1e-9 * time.final_time();
        if !(a >= -eps && a <= b && b <= time.final_time() + eps) {
            return Err(Error::InvalidInput(format!(
                "window ({a}, {b}) is not ordered inside [0, {}]",
                time.final_time()
            )));
        }
        Ok(Self { region, a, b, first: time.snap(a), last: time.snap(b) })
    }

    pub fn levels(&self) -> Range<usize> {
        self.first + 1..self.last + 1
    }

    pub fn snapped(&self, time: &TimeGrid) -> (f64, f64) {
        (time.time(self.first), time.time(self.last))
    }
}
