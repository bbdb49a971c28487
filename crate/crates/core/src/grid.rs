//! Uniformly sampled space-time fields and their binary file format.
//!
//! A file starts with the 8-byte magic `GRIDFLD\0`, then the header length
//! as a little-endian `u64`, then the JSON header, then the payload as
//! little-endian `f64` values ordered component-major, then time-major, then
//! row-major in space (last axis fastest).

use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"GRIDFLD\0";

#[derive(Debug, Error)]
pub enum GridError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid header: {0}")]
    Header(#[from] serde_json::Error),
    #[error("not a grid field file (bad magic)")]
    BadMagic,
    #[error("inconsistent grid: {0}")]
    Shape(String),
}

/// Spatial grid on the periodic box `[-L, L)^n`: `x_i = -L + i h`, `h = 2L / points`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub n: usize,
    pub extent: f64,
    pub points: usize,
}

impl SpatialGrid {
    pub fn new(n: usize, extent: f64, points: usize) -> Result<Self, GridError> {
        if !(1..=3).contains(&n) {
            return Err(GridError::Shape(format!("dimension {n} not in 1..=3")));
        }
        if !(extent > 0.0) || points < 2 {
            return Err(GridError::Shape(format!("extent {extent} / points {points}")));
        }
        Ok(Self { n, extent, points })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points as f64
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.spacing()
    }

    /// Multi-index of a flat row-major position.
    pub fn unflatten(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for a in (0..self.n).rev() {
            idx[a] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let idx = self.unflatten(flat);
        (0..self.n).map(|a| self.coord(idx[a])).collect()
    }
}

/// Uniform time grid `t_k = start + k dt`, `k < count`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl TimeGrid {
    /// `count` times uniformly covering `[-span, 0]`.
    pub fn past(span: f64, count: usize) -> Self {
        let step = if count > 1 { span / (count - 1) as f64 } else { 0.0 };
        Self { start: -span, step, count }
    }

    pub fn single(t: f64) -> Self {
        Self { start: t, step: 0.0, count: 1 }
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.time(k)).collect()
    }
}

/// Where a field came from; stored in the header.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub seed: u64,
    #[serde(default)]
    pub parameters: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub components: usize,
    pub space: SpatialGrid,
    pub time: TimeGrid,
    #[serde(default)]
    pub divergence_free: bool,
    pub provenance: Provenance,
}

/// A vector (or flattened tensor) field sampled on a space-time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub header: GridHeader,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn zeros(components: usize, space: SpatialGrid, time: TimeGrid, provenance: Provenance) -> Self {
        let len = components * time.count * space.len();
        Self { header: GridHeader { components, space, time, divergence_free: false, provenance }, values: vec![0.0; len] }
    }

    /// Sample `f(x, t, out)` at every node.
    pub fn from_fn(
        components: usize,
        space: SpatialGrid,
        time: TimeGrid,
        provenance: Provenance,
        mut f: impl FnMut(&[f64], f64, &mut [f64]),
    ) -> Self {
        let mut g = Self::zeros(components, space, time, provenance);
        let mut buf = vec![0.0; components];
        for k in 0..g.header.time.count {
            let t = g.header.time.time(k);
            for p in 0..g.header.space.len() {
                let x = g.header.space.point(p);
                buf.iter_mut().for_each(|v| *v = 0.0);
                f(&x, t, &mut buf);
                for c in 0..components {
                    let i = g.index(c, k, p);
                    g.values[i] = buf[c];
                }
            }
        }
        g
    }

    pub fn dim(&self) -> usize {
        self.header.space.n
    }

    pub fn components(&self) -> usize {
        self.header.components
    }

    #[inline]
    pub fn index(&self, component: usize, time: usize, flat: usize) -> usize {
        (component * self.header.time.count + time) * self.header.space.len() + flat
    }

    /// One component at one time, row-major in space.
    pub fn slice(&self, component: usize, time: usize) -> &[f64] {
        let len = self.header.space.len();
        let s = self.index(component, time, 0);
        &self.values[s..s + len]
    }

    pub fn slice_mut(&mut self, component: usize, time: usize) -> &mut [f64] {
        let len = self.header.space.len();
        let s = self.index(component, time, 0);
        &mut self.values[s..s + len]
    }

    pub fn validate(&self) -> Result<(), GridError> {
        let h = &self.header;
        if !(h.space.spacing() > 0.0) || (h.time.count > 1 && !(h.time.step > 0.0)) {
            return Err(GridError::Shape("non-positive spacing".into()));
        }
        let want = h.components * h.time.count * h.space.len();
        if self.values.len() != want {
            return Err(GridError::Shape(format!("payload has {} values, grid needs {want}", self.values.len())));
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), GridError> {
        self.validate()?;
        let header = serde_json::to_vec(&self.header)?;
        w.write_all(MAGIC)?;
        w.write_all(&(header.len() as u64).to_le_bytes())?;
        w.write_all(&header)?;
        let mut buf = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, GridError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(GridError::BadMagic);
        }
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let mut header = vec![0u8; u64::from_le_bytes(len) as usize];
        r.read_exact(&mut header)?;
        let header: GridHeader = serde_json::from_slice(&header)?;
        let mut payload = Vec::new();
        r.read_to_end(&mut payload)?;
        if payload.len() % 8 != 0 {
            return Err(GridError::Shape("payload length is not a multiple of 8".into()));
        }
        let values = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        let g = Self { header, values };
        g.validate()?;
        Ok(g)
    }

    pub fn save(&self, path: &Path) -> Result<(), GridError> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self, GridError> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// CSV of one time slice of a 1D or 2D field: coordinates then components.
    pub fn write_slice_csv<W: Write>(&self, time: usize, out: W) -> Result<(), GridError> {
        let n = self.dim();
        if n > 2 {
            return Err(GridError::Shape("CSV export supports 1D and 2D slices".into()));
        }
        let mut w = csv::Writer::from_writer(out);
        let mut head: Vec<String> = (0..n).map(|a| format!("x{}", a + 1)).collect();
        head.push("t".into());
        head.extend((0..self.components()).map(|c| format!("c{c}")));
        w.write_record(&head).map_err(csv_io)?;
        let t = self.header.time.time(time);
        for p in 0..self.header.space.len() {
            let mut row: Vec<String> = self.header.space.point(p).iter().map(|v| format!("{v:e}")).collect();
            row.push(format!("{t:e}"));
            row.extend((0..self.components()).map(|c| format!("{:e}", self.values[self.index(c, time, p)])));
            w.write_record(&row).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> GridError {
    GridError::Io(std::io::Error::other(e.to_string()))
}
