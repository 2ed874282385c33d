//! Binary checkpoint format.
//!
//! All integers and floats are little-endian.
//!
//! | bytes            | content                                         |
//! |------------------|-------------------------------------------------|
//! | 8                | magic `GVCKPT\0\0`                              |
//! | 4 (u32)          | format version, currently 1                     |
//! | 4 (u32)          | upscaling ratio `s`                             |
//! | 4 (u32)          | layer count `L`                                 |
//! | `L` × 13         | per layer: in_ch u32, out_ch u32, kernel u32, activation u8 (0 none, 1 tanh, 2 relu) |
//! | 8 (u64)          | optimizer step counter                          |
//! | 8 (u64)          | parameter count `P`                             |
//! | `P` × 8 (f64)    | parameters, layer by layer, weights then biases |
//! | `P` × 8 (f64)    | Adam first moments                              |
//! | `P` × 8 (f64)    | Adam second moments                             |
//!
//! Weights of one layer are stored `out_ch × in_ch × k × k`, row-major.
//! Values are always written as f64, whatever the build's scalar type.

use std::fs;
use std::path::Path;

use gradvar_core::model::{Activation, Architecture, ConvSpec, ModelParams};
use gradvar_core::{ScaleFactor, Scalar};

use crate::error::{Error, Result};
use crate::io::ensure_parent;

pub const MAGIC: &[u8; 8] = b"GVCKPT\0\0";
pub const VERSION: u32 = 1;

pub fn encode(params: &ModelParams) -> Vec<u8> {
    let arch = &params.arch;
    let n = params.values.len();
    let mut out = Vec::with_capacity(40 + arch.layers.len() * 13 + 24 * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(arch.scale.get() as u32).to_le_bytes());
    out.extend_from_slice(&(arch.layers.len() as u32).to_le_bytes());
    for l in &arch.layers {
        out.extend_from_slice(&(l.in_ch as u32).to_le_bytes());
        out.extend_from_slice(&(l.out_ch as u32).to_le_bytes());
        out.extend_from_slice(&(l.kernel as u32).to_le_bytes());
        out.push(l.activation.code());
    }
    out.extend_from_slice(&params.step.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for blob in [&params.values, &params.first_moment, &params.second_moment] {
        for v in blob.iter() {
            out.extend_from_slice(&(*v as f64).to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| format!("truncated at byte {}", self.pos))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> std::result::Result<u8, String> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> std::result::Result<u32, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64s(&mut self, n: usize) -> std::result::Result<Vec<Scalar>, String> {
        let raw = self.take(n.checked_mul(8).ok_or("parameter count overflows")?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()) as Scalar)
            .collect())
    }
}

pub fn decode(bytes: &[u8]) -> std::result::Result<ModelParams, String> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(8)? != MAGIC {
        return Err("not a gradvar checkpoint (bad magic)".into());
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(format!("unsupported checkpoint version {version}"));
    }
    let scale = ScaleFactor::new(c.u32()? as usize).map_err(|e| e.to_string())?;
    let count = c.u32()? as usize;
    let mut layers = Vec::new();
    for _ in 0..count {
        let in_ch = c.u32()? as usize;
        let out_ch = c.u32()? as usize;
        let kernel = c.u32()? as usize;
        let code = c.u8()?;
        let act = Activation::from_code(code).ok_or(format!("unknown activation code {code}"))?;
        layers.push(ConvSpec::new(in_ch, out_ch, kernel, act));
    }
    let arch = Architecture::new(layers, scale).map_err(|e| e.to_string())?;
    let step = c.u64()?;
    let n = c.u64()? as usize;
    if n != arch.param_count() {
        return Err(format!(
            "parameter count {n} does not match the architecture ({})",
            arch.param_count()
        ));
    }
    let values = c.f64s(n)?;
    let first = c.f64s(n)?;
    let second = c.f64s(n)?;
    if c.pos != bytes.len() {
        return Err(format!("{} trailing bytes", bytes.len() - c.pos));
    }
    if !values.iter().all(|v| v.is_finite()) {
        return Err("non-finite parameter".into());
    }
    let mut params = ModelParams::from_values(arch, values).map_err(|e| e.to_string())?;
    params.first_moment = first;
    params.second_moment = second;
    params.step = step;
    Ok(params)
}

pub fn save(params: &ModelParams, path: &Path) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, encode(params)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<ModelParams> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|m| Error::format(path, m))
}
