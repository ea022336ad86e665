//! Binary vertex streams.
//!
//! Layout: magic `CVTX`, format version (u16 LE), index width in bytes (u8),
//! record size in bytes (u32 LE), SHA-256 of the scenario JSON, JSON length
//! (u32 LE) and the scenario JSON itself. Records follow until end of file;
//! each holds the output-tuple index of every input tuple in canonical order.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::strategy::{DeterministicStrategy, VertexSet};

const MAGIC: &[u8; 4] = b"CVTX";
const VERSION: u16 = 1;

fn index_width(s: &Scenario) -> u8 {
    let max = (0..s.num_inputs()).map(|xi| s.block_size(xi)).max().unwrap_or(1);
    match max {
        0..=256 => 1,
        257..=65536 => 2,
        _ => 4,
    }
}

pub struct VertexWriter<W: Write> {
    inner: W,
    width: u8,
    buf: Vec<u8>,
    count: usize,
}

impl<W: Write> VertexWriter<W> {
    pub fn new(mut inner: W, scenario: &Scenario) -> Result<Self> {
        let json = serde_json::to_vec(scenario)?;
        let width = index_width(scenario);
        let record = scenario.num_inputs() * width as usize;
        inner.write_all(MAGIC)?;
        inner.write_all(&VERSION.to_le_bytes())?;
        inner.write_all(&[width])?;
        inner.write_all(&(record as u32).to_le_bytes())?;
        inner.write_all(&scenario.content_hash())?;
        inner.write_all(&(json.len() as u32).to_le_bytes())?;
        inner.write_all(&json)?;
        Ok(Self { inner, width, buf: Vec::with_capacity(record), count: 0 })
    }

    pub fn write_indices(&mut self, indices: &[u32]) -> Result<()> {
        self.buf.clear();
        for &i in indices {
            match self.width {
                1 => self.buf.push(i as u8),
                2 => self.buf.extend_from_slice(&(i as u16).to_le_bytes()),
                _ => self.buf.extend_from_slice(&i.to_le_bytes()),
            }
        }
        self.inner.write_all(&self.buf)?;
        self.count += 1;
        Ok(())
    }

    pub fn write(&mut self, strategy: &DeterministicStrategy) -> Result<()> {
        self.write_indices(&strategy.block_indices())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub struct VertexReader<R: Read> {
    inner: R,
    scenario: Scenario,
    width: u8,
    buf: Vec<u8>,
}

impl<R: Read> VertexReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        inner.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not a vertex stream".into()));
        }
        let mut b2 = [0u8; 2];
        inner.read_exact(&mut b2)?;
        let version = u16::from_le_bytes(b2);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported vertex stream version {version}")));
        }
        let mut b1 = [0u8; 1];
        inner.read_exact(&mut b1)?;
        let width = b1[0];
        let mut b4 = [0u8; 4];
        inner.read_exact(&mut b4)?;
        let record = u32::from_le_bytes(b4) as usize;
        let mut hash = [0u8; 32];
        inner.read_exact(&mut hash)?;
        inner.read_exact(&mut b4)?;
        let mut json = vec![0u8; u32::from_le_bytes(b4) as usize];
        inner.read_exact(&mut json)?;
        let scenario: Scenario = serde_json::from_slice(&json)?;
        if scenario.content_hash() != hash {
            return Err(Error::Format("scenario hash does not match header".into()));
        }
        if width != index_width(&scenario) || record != scenario.num_inputs() * width as usize {
            return Err(Error::Format("record layout does not match scenario".into()));
        }
        Ok(Self { inner, scenario, width, buf: vec![0u8; record] })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Reads the next record into `out`; returns false at end of stream.
    pub fn read_indices(&mut self, out: &mut [u32]) -> Result<bool> {
        let mut filled = 0;
        while filled < self.buf.len() {
            match self.inner.read(&mut self.buf[filled..]) {
                Ok(0) if filled == 0 => return Ok(false),
                Ok(0) => return Err(Error::Format("truncated vertex record".into())),
                Ok(n) => filled += n,
                Err(e) if e.kind() == ErrorKind::Interrupted => {}
                Err(e) => return Err(e.into()),
            }
        }
        let w = self.width as usize;
        for (xi, o) in out.iter_mut().enumerate() {
            let c = &self.buf[xi * w..(xi + 1) * w];
            *o = match w {
                1 => c[0] as u32,
                2 => u16::from_le_bytes([c[0], c[1]]) as u32,
                _ => u32::from_le_bytes([c[0], c[1], c[2], c[3]]),
            };
            if *o as usize >= self.scenario.block_size(xi) {
                return Err(Error::Format(format!("output index {o} out of range in block {xi}")));
            }
        }
        Ok(true)
    }

    pub fn strategies(self) -> impl Iterator<Item = Result<DeterministicStrategy>> {
        let mut me = self;
        let mut digits = vec![0u32; me.scenario.num_inputs()];
        std::iter::from_fn(move || match me.read_indices(&mut digits) {
            Ok(true) => Some(DeterministicStrategy::from_block_indices(me.scenario.clone(), &digits)),
            Ok(false) => None,
            Err(e) => Some(Err(e)),
        })
    }
}

/// Writes a whole vertex set to `path`.
pub fn write_vertex_file(path: &Path, set: &VertexSet) -> Result<()> {
    let mut w = VertexWriter::new(BufWriter::new(File::create(path)?), set.scenario())?;
    let mut digits = vec![0u32; set.scenario().num_inputs()];
    for i in 0..set.len() {
        set.decode_into(i, &mut digits);
        w.write_indices(&digits)?;
    }
    w.finish()?;
    Ok(())
}

pub fn open_vertex_file(path: &Path) -> Result<VertexReader<BufReader<File>>> {
    VertexReader::new(BufReader::with_capacity(1 << 20, File::open(path)?))
}

/// Loads a vertex file fully into memory.
pub fn read_vertex_file(path: &Path) -> Result<VertexSet> {
    let r = open_vertex_file(path)?;
    let s = r.scenario().clone();
    VertexSet::from_block_indices(s, r.into_records())
}

impl<R: Read> VertexReader<R> {
    /// Iterator over raw records.
    pub fn into_records(self) -> impl Iterator<Item = Result<Vec<u32>>> {
        let mut me = self;
        std::iter::from_fn(move || {
            let mut digits = vec![0u32; me.scenario.num_inputs()];
            match me.read_indices(&mut digits) {
                Ok(true) => Some(Ok(digits)),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::{enumerate_causal_vertices, EnumerationOptions};

    #[test]
    fn round_trip_through_bytes() {
        let s = Scenario::lazy(3);
        let set = enumerate_causal_vertices(&s, &EnumerationOptions::default()).unwrap();
        let mut w = VertexWriter::new(Vec::new(), &s).unwrap();
        for st in set.iter() {
            w.write(&st).unwrap();
        }
        let bytes = w.finish().unwrap();
        let r = VertexReader::new(&bytes[..]).unwrap();
        assert_eq!(r.scenario(), &s);
        let back: Vec<_> = r.strategies().collect::<Result<_>>().unwrap();
        assert_eq!(back, set.iter().collect::<Vec<_>>());
    }

    #[test]
    fn rejects_corrupt_headers() {
        let s = Scenario::lazy(1);
        let mut bytes = VertexWriter::new(Vec::new(), &s).unwrap().finish().unwrap();
        bytes[12] ^= 1;
        assert!(VertexReader::new(&bytes[..]).is_err());
        assert!(VertexReader::new(&b"XXXX"[..]).is_err());
    }

    #[test]
    fn truncated_record_is_an_error() {
        let s = Scenario::lazy(2);
        let mut w = VertexWriter::new(Vec::new(), &s).unwrap();
        w.write_indices(&[0, 1, 1, 2]).unwrap();
        let mut bytes = w.finish().unwrap();
        bytes.pop();
        let mut r = VertexReader::new(&bytes[..]).unwrap();
        let mut out = [0u32; 4];
        assert!(r.read_indices(&mut out).is_err());
    }
}
