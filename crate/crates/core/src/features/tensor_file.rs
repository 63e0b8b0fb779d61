//! Binary feature-pyramid files.
//!
//! Little-endian: magic `FPYR`, `u32` version (1), `u32` level count, then
//! for each level `u32` C, H, W followed by `C*H*W` `f32` values in
//! channel-major order.

use std::fs;
use std::path::Path;

use super::{FeaturePyramid, FeatureVolume, Provenance};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"FPYR";
pub const VERSION: u32 = 1;

pub fn encode_pyramid(pyr: &FeaturePyramid) -> Vec<u8> {
    let payload: usize = pyr.levels().iter().map(|l| 12 + 4 * l.data().len()).sum();
    let mut out = Vec::with_capacity(12 + payload);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(pyr.num_levels() as u32).to_le_bytes());
    for level in pyr.levels() {
        let (c, h, w) = level.shape();
        for d in [c, h, w] {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in level.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Format(format!(
                "truncated file reading {what}: expected at least {} bytes, found {}",
                self.pos.saturating_add(n),
                self.bytes.len()
            ))),
        }
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

pub fn decode_pyramid(bytes: &[u8]) -> Result<FeaturePyramid> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {magic:?}, expected {MAGIC:?}"
        )));
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n_levels = r.u32("level count")? as usize;
    let mut levels = Vec::with_capacity(n_levels.min(64));
    for l in 1..=n_levels {
        let c = r.u32("level header")? as usize;
        let h = r.u32("level header")? as usize;
        let w = r.u32("level header")? as usize;
        let count = c
            .checked_mul(h)
            .and_then(|v| v.checked_mul(w))
            .ok_or_else(|| Error::Format(format!("level {l} dimensions overflow")))?;
        let raw = r.take(count * 4, &format!("level {l} data"))?;
        let data: Vec<f32> = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format(format!("level {l} contains non-finite values")));
        }
        levels.push(
            FeatureVolume::new(c, h, w, data)
                .map_err(|e| Error::Format(format!("level {l}: {e}")))?,
        );
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!(
            "dimension mismatch with header: expected {} bytes, found {}",
            r.pos,
            bytes.len()
        )));
    }
    FeaturePyramid::new(levels, Provenance::External).map_err(|e| Error::Format(e.to_string()))
}

pub fn load_external_features(path: impl AsRef<Path>) -> Result<FeaturePyramid> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pyramid(&bytes).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn save_pyramid(pyr: &FeaturePyramid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pyramid(pyr)).map_err(|e| Error::io(path, e))
}
