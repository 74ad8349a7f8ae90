//! Binary snapshot files.
//!
//! Layout (little-endian): magic `WSNP`, `u8` dimension, three pad bytes,
//! `u32` n₁ n₂ n₃ (unused axes = 1), `f64` Δx, then n₁·…·n_d `f64` values in
//! row-major order. One file per snapshot, named `snap_<k>.bin`.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::tensor::{Field, SpatialGrid};

pub const MAGIC: &[u8; 4] = b"WSNP";
pub const HEADER_LEN: usize = 28;

pub fn encode(field: &Field) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * grid.len());
    out.extend_from_slice(MAGIC);
    out.push(grid.dim() as u8);
    out.extend_from_slice(&[0u8; 3]);
    for n in grid.shape3() {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    out.extend_from_slice(&grid.dx().to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Decodes a snapshot. `dt` and `step` are not stored in the file and come
/// from the manifest and the file name respectively.
pub fn decode(bytes: &[u8], dt: f64, step: u64) -> Result<Field> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("header truncated ({} bytes)", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let d = bytes[4] as usize;
    if !(1..=3).contains(&d) {
        return Err(Error::Format(format!("bad dimension {d}")));
    }
    let mut n = [0usize; 3];
    for (i, slot) in n.iter_mut().enumerate() {
        let off = 8 + 4 * i;
        *slot = u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as usize;
    }
    if n[d..].iter().any(|&x| x != 1) {
        return Err(Error::Format(format!("unused axes must be 1, got {n:?}")));
    }
    let dx = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    let grid = SpatialGrid::new(&n[..d], dx, dt)?;
    let expected = HEADER_LEN + 8 * grid.len();
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "expected {expected} bytes, found {}",
            bytes.len()
        )));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Field::new(grid, values, step)
}

pub fn file_name(step: u64) -> String {
    format!("snap_{step}.bin")
}

pub fn write(dir: &Path, field: &Field) -> Result<PathBuf> {
    let path = dir.join(file_name(field.step()));
    let mut f = fs::File::create(&path)?;
    f.write_all(&encode(field))?;
    Ok(path)
}

pub fn read(path: &Path, dt: f64) -> Result<Field> {
    let step = parse_step(path)
        .ok_or_else(|| Error::Format(format!("not a snapshot file name: {}", path.display())))?;
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes, dt, step)
}

pub fn parse_step(path: &Path) -> Option<u64> {
    path.file_name()?
        .to_str()?
        .strip_prefix("snap_")?
        .strip_suffix(".bin")?
        .parse()
        .ok()
}

/// Next frame from a stream of concatenated snapshots; `None` at a clean end.
pub fn read_frame<R: Read>(r: &mut R, dt: f64, step: u64) -> Result<Option<Field>> {
    let mut header = [0u8; HEADER_LEN];
    let mut got = 0;
    while got < HEADER_LEN {
        match r.read(&mut header[got..])? {
            0 if got == 0 => return Ok(None),
            0 => return Err(Error::Format(format!("stream ended inside a header ({got} bytes)"))),
            n => got += n,
        }
    }
    if &header[..4] != MAGIC {
        return Err(Error::Format("bad magic in stream".into()));
    }
    let mut len = 1usize;
    for i in 0..3 {
        let off = 8 + 4 * i;
        len = len.saturating_mul(u32::from_le_bytes(header[off..off + 4].try_into().unwrap()) as usize);
    }
    let mut bytes = header.to_vec();
    bytes.resize(HEADER_LEN + 8 * len, 0);
    r.read_exact(&mut bytes[HEADER_LEN..])?;
    decode(&bytes, dt, step).map(Some)
}

/// Snapshot files in `dir`, sorted by step.
pub fn list(dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    let mut out: Vec<(u64, PathBuf)> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let p = e.path();
            parse_step(&p).map(|k| (k, p))
        })
        .collect();
    out.sort_by_key(|(k, _)| *k);
    Ok(out)
}
