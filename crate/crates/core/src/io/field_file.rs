//! `WFOC1` field files and 2D CSV slices.
//!
//! Layout, all integers little-endian:
//!
//! | bytes | content |
//! |---|---|
//! | 5 | magic `WFOC1` |
//! | 1 | `ndim` |
//! | 1 | dtype, `1` = float64 LE |
//! | 8·ndim | dims as u64, slowest axis first (z, y, x) |
//! | 8 | time index (u64) |
//! | 8·Πdims | payload, row-major, float64 LE |
//!
//! A 2×2 field `[[1,2],[3,4]]` (rows are the slow axis) stores the payload
//! `1, 2, 3, 4`. Boundary series use dims `[levels, dofs]` and store the first
//! level as time index.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 5] = b"WFOC1";
pub const DTYPE_F64: u8 = 1;

/// A dense float64 array with its time index.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    /// Slowest axis first.
    pub dims: Vec<usize>,
    pub time_index: u64,
    pub data: Vec<f64>,
}

impl FieldFile {
    pub fn new(dims: Vec<usize>, time_index: u64, data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.len() > u8::MAX as usize {
            return Err(Error::Format(format!("{} axes; need 1 to 255", dims.len())));
        }
        let len: usize = dims.iter().product();
        if len != data.len() {
            return Err(Error::Format(format!("dims {dims:?} hold {len} values, got {}", data.len())));
        }
        Ok(Self { dims, time_index, data })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(7 + 8 * (self.dims.len() + 1 + self.data.len()));
        out.extend_from_slice(MAGIC);
        out.push(self.dims.len() as u8);
        out.push(DTYPE_F64);
        for &d in &self.dims {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        out.extend_from_slice(&self.time_index.to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parses a whole file; anything short, long or mislabelled is rejected.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(5)? != MAGIC {
            return Err(Error::Format("bad magic; not a WFOC1 file".into()));
        }
        let ndim = r.take(1)?[0] as usize;
        let dtype = r.take(1)?[0];
        if dtype != DTYPE_F64 {
            return Err(Error::Format(format!("dtype {dtype} is not float64 ({DTYPE_F64})")));
        }
        if ndim == 0 {
            return Err(Error::Format("zero axes".into()));
        }
        let dims = (0..ndim).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        let time_index = r.u64()?;
        let len = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        let len = len.filter(|l| l.checked_mul(8).is_some()).ok_or_else(|| Error::Format(format!("dims {dims:?} overflow")))?;
        if bytes.len() - r.pos != 8 * len {
            return Err(Error::Format(format!(
                "payload has {} bytes, dims {dims:?} need {}",
                bytes.len() - r.pos,
                8 * len
            )));
        }
        let data = r.rest().chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Self { dims, time_index, data })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        let s = self.bytes.get(self.pos..end).ok_or_else(|| Error::Format("truncated header".into()))?;
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn rest(&self) -> &'a [u8] {
        &self.bytes[self.pos..]
    }
}

/// One CSV row per point of a 2D slice: `x,y,value`, x fastest.
pub fn write_csv_slice(path: &Path, nx: usize, ny: usize, point: impl Fn(usize, usize) -> [f64; 2], values: &[f64]) -> Result<()> {
    if values.len() != nx * ny {
        return Err(Error::Format(format!("{}×{} slice needs {} values, got {}", nx, ny, nx * ny, values.len())));
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.write_record(["x", "y", "value"]).map_err(csv_error)?;
    for j in 0..ny {
        for i in 0..nx {
            let [x, y] = point(i, j);
            w.serialize((x, y, values[i + nx * j])).map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Rows `(x, y, value)` of a CSV slice.
pub fn read_csv_slice(path: &Path) -> Result<Vec<[f64; 3]>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    let header = r.headers().map_err(csv_error)?;
    if header != vec!["x", "y", "value"] {
        return Err(Error::Format(format!("CSV header {header:?} is not x,y,value")));
    }
    r.deserialize::<(f64, f64, f64)>().map(|row| row.map(|(x, y, v)| [x, y, v]).map_err(csv_error)).collect()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format(format!("CSV: {e}"))
}
