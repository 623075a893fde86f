//! Binary container shared by risk tables and controller policies.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic    b"RPCT"
//! version  u32 (currently 1)
//! kind     4 ASCII bytes identifying the payload, e.g. b"RISK"
//! payload  sequence of grid blocks and float arrays, defined per kind
//! ```
//!
//! A grid block is `u32 axis count` followed by, per axis, `u8 kind`
//! (0 continuous, 1 discrete), `u32 name length`, the UTF-8 name, `u32 point
//! count` and the points as `f64`. A float array is `u64 length` then the
//! values. Readers reject trailing bytes, so truncation and concatenation are
//! both detected.

use std::io::Write;

use super::grid::{Axis, AxisKind, Grid};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"RPCT";
pub const VERSION: u32 = 1;

pub struct ContainerWriter<W: Write> {
    inner: W,
}

impl<W: Write> ContainerWriter<W> {
    pub fn new(mut inner: W, kind: &[u8; 4]) -> Result<Self> {
        inner.write_all(MAGIC)?;
        inner.write_all(&VERSION.to_le_bytes())?;
        inner.write_all(kind)?;
        Ok(Self { inner })
    }

    pub fn grid(&mut self, grid: &Grid) -> Result<()> {
        self.u32(grid.ndim() as u32)?;
        for axis in grid.axes() {
            let tag = match axis.kind {
                AxisKind::Continuous => 0u8,
                AxisKind::Discrete => 1u8,
            };
            self.inner.write_all(&[tag])?;
            self.u32(axis.name.len() as u32)?;
            self.inner.write_all(axis.name.as_bytes())?;
            self.u32(axis.len() as u32)?;
            for p in axis.points() {
                self.inner.write_all(&p.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn floats(&mut self, values: &[f64]) -> Result<()> {
        self.inner.write_all(&(values.len() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(values.len() * 8);
        for v in values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        self.inner.write_all(&buf)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }

    fn u32(&mut self, v: u32) -> Result<()> {
        self.inner.write_all(&v.to_le_bytes())?;
        Ok(())
    }
}

pub struct ContainerReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ContainerReader<'a> {
    pub fn new(bytes: &'a [u8], kind: &[u8; 4]) -> Result<Self> {
        let mut r = Self { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!(
                "unsupported version {version}, expected {VERSION}"
            )));
        }
        let k = r.take(4)?;
        if k != kind {
            return Err(Error::Format(format!(
                "payload kind {:?}, expected {:?}",
                String::from_utf8_lossy(k),
                String::from_utf8_lossy(kind)
            )));
        }
        Ok(r)
    }

    pub fn grid(&mut self) -> Result<Grid> {
        let n = self.u32()? as usize;
        let mut axes = Vec::with_capacity(n.min(64));
        for _ in 0..n {
            let kind = match self.take(1)?[0] {
                0 => AxisKind::Continuous,
                1 => AxisKind::Discrete,
                other => return Err(Error::Format(format!("unknown axis kind {other}"))),
            };
            let len = self.u32()? as usize;
            let name = String::from_utf8(self.take(len)?.to_vec())
                .map_err(|_| Error::Format("axis name is not UTF-8".into()))?;
            let count = self.u32()? as usize;
            let pts = self.f64s(count)?;
            axes.push(Axis::new(name, kind, pts)?);
        }
        Grid::new(axes)
    }

    pub fn floats(&mut self) -> Result<Vec<f64>> {
        let raw = self.take(8)?;
        let n = u64::from_le_bytes(raw.try_into().unwrap());
        let n = usize::try_from(n).map_err(|_| Error::Format("array too long".into()))?;
        self.f64s(n)
    }

    pub fn finish(self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes",
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let len = n
            .checked_mul(8)
            .ok_or_else(|| Error::Format("array too long".into()))?;
        let raw = self.take(len)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn u32(&mut self) -> Result<u32> {
        let raw = self.take(4)?;
        Ok(u32::from_le_bytes(raw.try_into().unwrap()))
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|e| *e <= self.bytes.len())
            .ok_or_else(|| Error::Format("truncated file".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
}
