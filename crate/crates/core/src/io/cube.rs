//! `CUBE1` training corpora.
//!
//! ```text
//! magic      6 bytes  "CUBE1\0"
//! count      u32
//! edge N     u32
//! channels   u32      always 4
//! per sample:
//!   f32 phi_g, f32 sigma, f32 dsf, f32 thickness ratio
//!   u32 case id, u32 split (0 train, 1 val), u32 time index, u32 cube index
//!   4 x N^3 f32       c_tilde, phi_tilde, thickness ratio, omega_bar
//! ```

use std::path::Path;

use super::{read_bytes, write_atomic, ByteReader};
use crate::error::{Error, Result};
use crate::sample::{CubeMeta, CubeSample, Split};

pub const MAGIC: &[u8; 6] = b"CUBE1\0";
pub const CHANNELS: u32 = 4;
pub const HEADER_BYTES: usize = 6 + 12;
pub const META_BYTES: usize = 32;

pub fn encode_cubes(samples: &[CubeSample]) -> Result<Vec<u8>> {
    let edge = samples.first().map_or(0, |s| s.edge);
    if let Some(s) = samples.iter().find(|s| s.edge != edge) {
        return Err(Error::Shape(format!(
            "heterogeneous cube edges {edge} and {}",
            s.edge
        )));
    }
    let n3 = edge.pow(3);
    let mut out = Vec::with_capacity(HEADER_BYTES + samples.len() * (META_BYTES + 16 * n3));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(samples.len() as u32).to_le_bytes());
    out.extend_from_slice(&(edge as u32).to_le_bytes());
    out.extend_from_slice(&CHANNELS.to_le_bytes());
    for s in samples {
        let m = &s.meta;
        for v in [m.phi_g, m.sigma, m.dsf, m.thickness_ratio] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in [m.case_id, m.split.tag(), m.time_index, m.cube_index] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for ch in &s.channels {
            if ch.len() != n3 {
                return Err(Error::Shape(format!("cube channel holds {} values, expected {n3}", ch.len())));
            }
            for v in ch {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(out)
}

pub fn decode_cubes(bytes: &[u8]) -> Result<Vec<CubeSample>> {
    let mut r = ByteReader::new(bytes);
    if r.take(MAGIC.len()).ok() != Some(MAGIC.as_slice()) {
        return Err(Error::Format("not a CUBE1 file (bad magic)".into()));
    }
    let count = r.u32()? as usize;
    let edge = r.u32()? as usize;
    let channels = r.u32()?;
    if channels != CHANNELS {
        return Err(Error::Format(format!("expected {CHANNELS} channels, found {channels}")));
    }
    let n3 = edge
        .checked_pow(3)
        .ok_or_else(|| Error::Format(format!("cube edge {edge} is too large")))?;
    let per_sample = META_BYTES + 16 * n3;
    if count.saturating_mul(per_sample) > r.remaining() {
        return Err(Error::Truncated {
            expected: r.position() + count.saturating_mul(per_sample),
            found: bytes.len(),
        });
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let phi_g = r.f32()?;
        let sigma = r.f32()?;
        let dsf = r.f32()?;
        let thickness_ratio = r.f32()?;
        let case_id = r.u32()?;
        let tag = r.u32()?;
        let split = Split::from_tag(tag).ok_or_else(|| Error::Format(format!("unknown split tag {tag}")))?;
        let time_index = r.u32()?;
        let cube_index = r.u32()?;
        let mut chans: [Vec<f32>; 4] = Default::default();
        for ch in chans.iter_mut() {
            let raw = r.take(4 * n3)?;
            *ch = raw
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect();
        }
        out.push(CubeSample {
            edge,
            channels: chans,
            meta: CubeMeta {
                phi_g,
                sigma,
                dsf,
                thickness_ratio,
                case_id,
                split,
                time_index,
                cube_index,
            },
        });
    }
    if r.remaining() != 0 {
        return Err(Error::Format(format!("{} trailing bytes after last sample", r.remaining())));
    }
    Ok(out)
}

pub fn write_cube_dataset(samples: &[CubeSample], path: &Path) -> Result<()> {
    write_atomic(path, &encode_cubes(samples)?)
}

pub fn read_cube_dataset(path: &Path) -> Result<Vec<CubeSample>> {
    decode_cubes(&read_bytes(path)?)
}
