//! Binary snapshot format.
//!
//! ```text
//! "PVRL" | u32 version | u32 components | u32 n | f64 L | u8 domain | f64 data…
//! ```
//! All integers and floats are little-endian; each component is stored
//! row-major with `x` fastest.

use std::fs;
use std::path::Path;

use super::IoError;
use crate::field::{Domain, Grid3, ScalarField, VectorField};

pub const MAGIC: &[u8; 4] = b"PVRL";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8 + 1;

#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotData {
    Scalar(ScalarField<f64>),
    Vector(VectorField<f64>),
}

impl SnapshotData {
    pub fn grid(&self) -> &Grid3 {
        match self {
            SnapshotData::Scalar(f) => f.grid(),
            SnapshotData::Vector(v) => v.grid(),
        }
    }

    fn slices(&self) -> Vec<&[f64]> {
        match self {
            SnapshotData::Scalar(f) => vec![f.values()],
            SnapshotData::Vector(v) => v.components().iter().map(|c| c.values()).collect(),
        }
    }
}

pub fn encode_snapshot(data: &SnapshotData) -> Vec<u8> {
    let grid = data.grid();
    let slices = data.slices();
    let mut out = Vec::with_capacity(HEADER_LEN + slices.len() * grid.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(slices.len() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&grid.box_length().to_le_bytes());
    out.push(grid.domain().tag());
    for s in slices {
        for v in s {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<SnapshotData, IoError> {
    if bytes.len() < HEADER_LEN {
        return Err(IoError::Format("truncated header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(IoError::Format("bad magic bytes".into()));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(IoError::VersionMismatch { found: version, expected: VERSION });
    }
    let comps = u32_at(bytes, 8) as usize;
    if comps != 1 && comps != 3 {
        return Err(IoError::Format(format!("component count {comps} is neither 1 nor 3")));
    }
    let n = u32_at(bytes, 12) as usize;
    let box_length = f64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
    let domain =
        Domain::from_tag(bytes[24]).ok_or_else(|| IoError::Format(format!("unknown domain tag {}", bytes[24])))?;
    let grid = Grid3::new(n, box_length, domain).map_err(|e| IoError::Format(e.to_string()))?;
    let expected = HEADER_LEN + comps * grid.len() * 8;
    if bytes.len() != expected {
        return Err(IoError::Format(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let mut fields = bytes[HEADER_LEN..].chunks_exact(grid.len() * 8).map(|chunk| {
        let vals = chunk.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect();
        ScalarField::new(grid, vals).map_err(|e| IoError::Format(e.to_string()))
    });
    if comps == 1 {
        Ok(SnapshotData::Scalar(fields.next().expect("one component")?))
    } else {
        let a = fields.next().expect("x")?;
        let b = fields.next().expect("y")?;
        let c = fields.next().expect("z")?;
        Ok(SnapshotData::Vector(VectorField::new([a, b, c]).map_err(|e| IoError::Format(e.to_string()))?))
    }
}

pub fn write_snapshot(path: &Path, data: &SnapshotData) -> Result<(), IoError> {
    fs::write(path, encode_snapshot(data)).map_err(|e| IoError::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<SnapshotData, IoError> {
    let bytes = fs::read(path).map_err(|e| IoError::io(path, e))?;
    decode_snapshot(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SnapshotData {
        let g = Grid3::new(8, 10.0, Domain::WindowedR3).unwrap();
        SnapshotData::Vector(VectorField::from_fn(g, |x, y, z| [x.sin(), y * z, -0.1 * x]))
    }

    #[test]
    fn header_layout() {
        let bytes = encode_snapshot(&sample());
        assert_eq!(&bytes[..4], b"PVRL");
        assert_eq!(u32_at(&bytes, 4), 1);
        assert_eq!(u32_at(&bytes, 8), 3);
        assert_eq!(u32_at(&bytes, 12), 8);
        assert_eq!(f64::from_le_bytes(bytes[16..24].try_into().unwrap()), 10.0);
        assert_eq!(bytes[24], 1);
        assert_eq!(bytes.len(), 25 + 3 * 512 * 8);
    }

    #[test]
    fn bitwise_round_trip() {
        let s = sample();
        let bytes = encode_snapshot(&s);
        let back = decode_snapshot(&bytes).unwrap();
        assert_eq!(encode_snapshot(&back), bytes);
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_corruption() {
        let mut bytes = encode_snapshot(&sample());
        bytes[0] = b'X';
        assert!(matches!(decode_snapshot(&bytes), Err(IoError::Format(_))));
        let mut bytes = encode_snapshot(&sample());
        bytes[4] = 2;
        assert!(matches!(decode_snapshot(&bytes), Err(IoError::VersionMismatch { found: 2, expected: 1 })));
        let bytes = encode_snapshot(&sample());
        assert!(matches!(decode_snapshot(&bytes[..bytes.len() - 1]), Err(IoError::Format(_))));
        assert!(matches!(decode_snapshot(&bytes[..10]), Err(IoError::Format(_))));
    }
}
