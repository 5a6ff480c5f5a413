//! Binary grid dumps and 8-bit PGM rendering.
//!
//! Grid dump layout: a 32-byte header (`"OSAR"`, version `u32`, rows `u64`,
//! columns `u64`, stage `u8`, 7 reserved zero bytes) followed by row-major
//! interleaved `f64` real/imaginary pairs, all little-endian.

use num_complex::Complex64;
use std::io::{Read, Write};

use crate::error::{Result, SarError};
use crate::imaging::Stage;
use crate::Grid;

pub const MAGIC: &[u8; 4] = b"OSAR";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

/// Stage byte of a dump; raw echoes precede every imaging stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpStage {
    Echo,
    Image(Stage),
}

impl DumpStage {
    pub fn code(self) -> u8 {
        match self {
            DumpStage::Echo => 0,
            DumpStage::Image(Stage::Tf) => 1,
            DumpStage::Image(Stage::Rc) => 2,
            DumpStage::Image(Stage::Rd) => 3,
            DumpStage::Image(Stage::Rcmc) => 4,
            DumpStage::Image(Stage::Ac) => 5,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        Some(match c {
            0 => DumpStage::Echo,
            1 => DumpStage::Image(Stage::Tf),
            2 => DumpStage::Image(Stage::Rc),
            3 => DumpStage::Image(Stage::Rd),
            4 => DumpStage::Image(Stage::Rcmc),
            5 => DumpStage::Image(Stage::Ac),
            _ => return None,
        })
    }
}

pub fn write_grid<W: Write>(mut w: W, grid: &Grid, stage: DumpStage) -> Result<()> {
    let (n, m) = grid.dim();
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(MAGIC);
    header[4..8].copy_from_slice(&VERSION.to_le_bytes());
    header[8..16].copy_from_slice(&(n as u64).to_le_bytes());
    header[16..24].copy_from_slice(&(m as u64).to_le_bytes());
    header[24] = stage.code();
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(16 * m);
    for row in grid.rows() {
        buf.clear();
        for v in row {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_grid<R: Read>(mut r: R) -> Result<(Grid, DumpStage)> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    let parse = |offset: usize, msg: &str| SarError::Parse {
        offset,
        msg: msg.to_string(),
    };
    if &header[..4] != MAGIC {
        return Err(parse(0, "bad magic"));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(parse(4, &format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(header[8..16].try_into().expect("8 bytes")) as usize;
    let m = u64::from_le_bytes(header[16..24].try_into().expect("8 bytes")) as usize;
    let stage = DumpStage::from_code(header[24]).ok_or_else(|| parse(24, "unknown stage code"))?;
    let len = n
        .checked_mul(m)
        .and_then(|c| c.checked_mul(16))
        .ok_or_else(|| parse(8, "grid dimensions overflow"))?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != len {
        return Err(parse(
            HEADER_LEN + payload.len().min(len),
            &format!("payload has {} bytes, expected {len}", payload.len()),
        ));
    }
    let vals: Vec<Complex64> = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
            )
        })
        .collect();
    let grid = Grid::from_shape_vec((n, m), vals).map_err(|e| parse(HEADER_LEN, &e.to_string()))?;
    Ok((grid, stage))
}

/// Magnitude image as binary PGM: `255·(dB − floor)/(−floor)` with
/// `dB = 20 log10(|y| / peak)`, clamped to `0..=255`.
pub fn emit_pgm(grid: &Grid, db_floor: f64) -> Result<Vec<u8>> {
    let (rows, cols) = grid.dim();
    if rows == 0 || cols == 0 {
        return Err(SarError::InvalidParameter("empty image".into()));
    }
    if !(db_floor < 0.0) {
        return Err(SarError::InvalidParameter(format!(
            "dB floor must be negative, got {db_floor}"
        )));
    }
    let peak = grid.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let peak = if peak > 0.0 { peak } else { 1.0 };
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.reserve(rows * cols);
    for v in grid.iter() {
        let a = v.norm();
        let px = if a > 0.0 {
            let db = 20.0 * (a / peak).log10();
            (255.0 * (db - db_floor) / -db_floor).round().clamp(0.0, 255.0) as u8
        } else {
            0
        };
        out.push(px);
    }
    Ok(out)
}
