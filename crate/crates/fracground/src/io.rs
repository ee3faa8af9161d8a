//! The "FSF1" binary field file format.
//!
//! Layout, all little-endian:
//! - bytes 0-3: magic ASCII `FSF1`
//! - byte 4: version (1)
//! - byte 5: dimension N
//! - bytes 6-7: reserved, zero
//! - bytes 8-15: box half-width L, float64
//! - bytes 16-19: points per axis M, uint32
//! - bytes 20-27: fractional order s metadata, float64 (NaN if unset)
//! - then M^N float64 values, row-major, last axis fastest

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{make_grid, ScalarField};

pub const MAGIC: [u8; 4] = *b"FSF1";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 28;

pub fn write_field(f: &ScalarField, path: &Path, s: Option<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(&MAGIC);
    header[4] = VERSION;
    header[5] = f.grid().dim() as u8;
    header[8..16].copy_from_slice(&f.grid().half_width().to_le_bytes());
    header[16..20].copy_from_slice(&(f.grid().points_per_axis() as u32).to_le_bytes());
    header[20..28].copy_from_slice(&s.unwrap_or(f64::NAN).to_le_bytes());
    w.write_all(&header)?;
    for v in f.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// A field read back from disk together with its optional order metadata.
#[derive(Debug, Clone)]
pub struct FieldFile {
    pub field: ScalarField,
    pub s: Option<f64>,
}

pub fn read_field(path: &Path) -> Result<FieldFile> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; HEADER_LEN];
    let got = read_up_to(&mut r, &mut header)?;
    if got < 4 {
        return Err(Error::Truncated { expected: HEADER_LEN, got });
    }
    let magic: [u8; 4] = header[0..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if got < HEADER_LEN {
        return Err(Error::Truncated { expected: HEADER_LEN, got });
    }
    if header[4] != VERSION {
        return Err(Error::UnsupportedVersion(header[4]));
    }
    let dim = header[5] as usize;
    let half_width = f64::from_le_bytes(header[8..16].try_into().unwrap());
    let m = u32::from_le_bytes(header[16..20].try_into().unwrap()) as usize;
    let s_meta = f64::from_le_bytes(header[20..28].try_into().unwrap());
    let grid = make_grid(dim, m, half_width)?;

    let expected = grid.len();
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != expected * 8 {
        return Err(Error::Truncated { expected, got: payload.len() / 8 });
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let field = ScalarField::new(grid, values)?;
    let s = if s_meta.is_nan() { None } else { Some(s_meta) };
    Ok(FieldFile { field, s })
}

fn read_up_to(r: &mut impl Read, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        let n = r.read(&mut buf[filled..])?;
        if n == 0 {
            break;
        }
        filled += n;
    }
    Ok(filled)
}
