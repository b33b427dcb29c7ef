//! Field snapshot container.
//!
//! Binary layout (little-endian):
//!
//! ```text
//! magic  5 bytes  "GSQG1"
//! N      u32      modes per axis
//! s      f64      differentiability index (metadata)
//! count  u64      number of records
//! then   count x (k1: i32, k2: i32, re: f64, im: f64)
//! ```
//!
//! Records list every nonzero coefficient (both Hermitian mirrors) in
//! row-major order. The dealias cutoff is not stored; readers get the
//! default 2/3-rule grid. A text CSV export with columns `k1,k2,re,im`
//! is provided for inspection.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::FourierField;
use crate::grid::SpectralGrid;

pub const MAGIC: &[u8; 5] = b"GSQG1";

pub fn to_bytes(field: &FourierField, s: f64) -> Vec<u8> {
    let modes = field.nonzero_modes();
    let mut out = Vec::with_capacity(25 + 24 * modes.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(field.grid().n() as u32).to_le_bytes());
    out.extend_from_slice(&s.to_le_bytes());
    out.extend_from_slice(&(modes.len() as u64).to_le_bytes());
    for (k, c) in modes {
        out.extend_from_slice(&k.0.to_le_bytes());
        out.extend_from_slice(&k.1.to_le_bytes());
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<(FourierField, f64)> {
    let take = |range: std::ops::Range<usize>| -> Result<&[u8]> {
        bytes
            .get(range)
            .ok_or_else(|| Error::SnapshotFormat("truncated snapshot".into()))
    };
    if take(0..5)? != MAGIC {
        return Err(Error::SnapshotFormat("bad magic".into()));
    }
    let n = u32::from_le_bytes(take(5..9)?.try_into().unwrap()) as usize;
    let s = f64::from_le_bytes(take(9..17)?.try_into().unwrap());
    let count = u64::from_le_bytes(take(17..25)?.try_into().unwrap()) as usize;
    let grid = SpectralGrid::new(n)
        .map_err(|e| Error::SnapshotFormat(format!("bad grid size {n}: {e}")))?;
    if bytes.len() != 25 + 24 * count {
        return Err(Error::SnapshotFormat(format!(
            "size mismatch: {} bytes for {count} records",
            bytes.len()
        )));
    }
    let mut field = FourierField::zero(grid);
    for i in 0..count {
        let off = 25 + 24 * i;
        let k1 = i32::from_le_bytes(take(off..off + 4)?.try_into().unwrap());
        let k2 = i32::from_le_bytes(take(off + 4..off + 8)?.try_into().unwrap());
        let re = f64::from_le_bytes(take(off + 8..off + 16)?.try_into().unwrap());
        let im = f64::from_le_bytes(take(off + 16..off + 24)?.try_into().unwrap());
        let k = (k1, k2);
        if !grid.contains_mode(k) {
            return Err(Error::SnapshotFormat(format!(
                "record {i} holds non-representable mode {k:?}"
            )));
        }
        field.set_coeff(k, Complex64::new(re, im));
    }
    let defect = field.hermitian_defect();
    let scale = field.max_abs_coeff().max(1e-300);
    if defect > 1e-12 * scale {
        return Err(Error::SnapshotFormat(format!(
            "Hermitian symmetry violated: defect {defect:.3e}"
        )));
    }
    if field.coeff((0, 0)) != Complex64::new(0.0, 0.0) {
        return Err(Error::SnapshotFormat("nonzero mean".into()));
    }
    Ok((field, s))
}

pub fn save(field: &FourierField, s: f64, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&to_bytes(field, s))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<(FourierField, f64)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}

/// CSV inspection export, columns `k1,k2,re,im`.
pub fn to_csv(field: &FourierField) -> String {
    let mut out = String::from("k1,k2,re,im\n");
    for (k, c) in field.nonzero_modes() {
        out.push_str(&format!("{},{},{},{}\n", k.0, k.1, c.re, c.im));
    }
    out
}

pub fn from_csv(grid: SpectralGrid, text: &str) -> Result<FourierField> {
    let mut modes = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || lineno == 0 && line.starts_with("k1") {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(Error::SnapshotFormat(format!(
                "line {}: expected 4 columns",
                lineno + 1
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|e| Error::SnapshotFormat(format!("line {}: {e}", lineno + 1)))
        };
        let k1 = parse(parts[0])? as i32;
        let k2 = parse(parts[1])? as i32;
        modes.push(((k1, k2), Complex64::new(parse(parts[2])?, parse(parts[3])?)));
    }
    FourierField::from_modes(grid, &modes)
}
