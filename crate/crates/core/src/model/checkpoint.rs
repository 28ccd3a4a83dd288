//! Binary checkpoint format.
//!
//! ```text
//! "CTST1" | u32 record count
//! per record: u32 name length | UTF-8 name | u32 rank | u32 dims[rank] | f32 payload (row-major)
//! ```
//!
//! All integers and floats are little-endian. The model configuration lives
//! in a JSON sidecar next to the binary file (`<path>.json`).

use std::fs;
use std::path::{Path, PathBuf};

use super::config::ModelConfig;
use super::network::Forecaster;
use super::params::{Params, Visit};
use crate::error::{Error, Result};

const MAGIC: &[u8; 5] = b"CTST1";

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode(params: &Params) -> Vec<u8> {
    let registry = params.registry();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(registry.len() as u32).to_le_bytes());
    params.visit("", &mut |name, shape, data| {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(shape.len() as u32).to_le_bytes());
        for &dim in shape {
            out.extend_from_slice(&(dim as u32).to_le_bytes());
        }
        for &v in data {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    });
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Checkpoint("truncated file".into()))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
}

/// Decode records into `template`, which fixes the expected registry.
pub fn decode_into(bytes: &[u8], template: &mut Params) -> Result<()> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::Checkpoint("bad magic header".into()));
    }
    let count = r.u32()? as usize;
    let expected = template.registry();
    if count != expected.len() {
        return Err(Error::Checkpoint(format!(
            "file has {count} records, model expects {}",
            expected.len()
        )));
    }
    let mut slots = template.slices_mut();
    for ((name, shape), slot) in expected.iter().zip(slots.iter_mut()) {
        let name_len = r.u32()? as usize;
        let got_name = std::str::from_utf8(r.take(name_len)?)
            .map_err(|_| Error::Checkpoint("record name is not UTF-8".into()))?;
        if got_name != name {
            return Err(Error::Checkpoint(format!("expected record `{name}`, found `{got_name}`")));
        }
        let rank = r.u32()? as usize;
        let dims = (0..rank).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        if &dims != shape {
            return Err(Error::Checkpoint(format!(
                "record `{name}` has shape {dims:?}, expected {shape:?}"
            )));
        }
        for v in slot.iter_mut() {
            *v = f32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes")) as f64;
        }
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint("trailing bytes after last record".into()));
    }
    Ok(())
}

pub fn save(path: impl AsRef<Path>, model: &Forecaster) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(&model.params)).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let mut text = serde_json::to_string_pretty(&model.config)?;
    text.push('\n');
    fs::write(&side, text).map_err(|e| Error::io(side, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<Forecaster> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let config: ModelConfig = serde_json::from_str(&text)?;
    let mut model = Forecaster::new(config, 0)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_into(&bytes, &mut model.params)?;
    Ok(model)
}
