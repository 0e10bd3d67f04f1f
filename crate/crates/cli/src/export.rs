//! Grid files and norm images.
//!
//! Grid file layout (all little-endian):
//!
//! ```text
//! "SABG" | version: u16 | nx: u32 | ny: u32 | channels: u32 | f32 * nx*ny*channels
//! ```
//!
//! Values are row-major with `iy` outermost, then `ix`, then channel.

use std::fs;
use std::io::Write;
use std::path::Path;

use sabev::pooling::BevGrid;

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 4] = b"SABG";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 4 + 2 + 3 * 4;

pub fn encode_grid(grid: &BevGrid<f32>) -> Vec<u8> {
    let (nx, ny, c) = grid.dims();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * grid.data().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for d in [nx, ny, c] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in grid.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_grid(bytes: &[u8]) -> Result<BevGrid<f32>, String> {
    if bytes.len() < HEADER_LEN {
        return Err(format!("file is {} bytes, shorter than the {HEADER_LEN}-byte header", bytes.len()));
    }
    if &bytes[..4] != MAGIC {
        return Err("bad magic, not a grid file".into());
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(format!("unsupported grid file version {version}"));
    }
    let dim = |k: usize| u32::from_le_bytes(bytes[6 + 4 * k..10 + 4 * k].try_into().unwrap()) as usize;
    let (nx, ny, c) = (dim(0), dim(1), dim(2));
    let n = nx
        .checked_mul(ny)
        .and_then(|v| v.checked_mul(c))
        .ok_or("grid dimensions overflow")?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 4 * n {
        return Err(format!("expected {} payload bytes for {nx}x{ny}x{c}, found {}", 4 * n, body.len()));
    }
    let data = body.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
    BevGrid::from_vec(nx, ny, c, data).map_err(|e| e.to_string())
}

pub fn export_grid(grid: &BevGrid<f32>, path: &Path) -> Result<()> {
    write_file(path, &encode_grid(grid))
}

pub fn import_grid(path: &Path) -> Result<BevGrid<f32>> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode_grid(&bytes).map_err(|msg| CliError::io(path, std::io::Error::new(std::io::ErrorKind::InvalidData, msg)))
}

/// Binary 8-bit graymap. Row `r` of the image is `iy = r`.
pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Vec<u8> {
    debug_assert_eq!(pixels.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

/// Per-pillar L2 norms linearly rescaled so the largest maps to 255.
pub fn norm_image(grid: &BevGrid<f32>) -> Vec<u8> {
    gray_scale(&grid.pillar_norms())
}

/// Linear map of nonnegative values onto `0..=255`; all-zero input stays black.
pub fn gray_scale(values: &[f64]) -> Vec<u8> {
    let max = values.iter().copied().fold(0.0, f64::max);
    values
        .iter()
        .map(|&v| if max > 0.0 { (255.0 * v / max).round().clamp(0.0, 255.0) as u8 } else { 0 })
        .collect()
}

pub fn render_norm_image(grid: &BevGrid<f32>, path: &Path) -> Result<()> {
    write_file(path, &encode_pgm(grid.nx(), grid.ny(), &norm_image(grid)))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))
}

/// Lowercase hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value_file() {
        let g = BevGrid::from_vec(1, 1, 1, vec![2.0f32]).unwrap();
        let bytes = encode_grid(&g);
        assert_eq!(bytes.len(), HEADER_LEN + 4);
        assert_eq!(&bytes[..6], b"SABG\x01\x00");
        assert_eq!(&bytes[HEADER_LEN..], &2.0f32.to_le_bytes());
        assert_eq!(decode_grid(&bytes).unwrap().data(), &[2.0]);
    }

    #[test]
    fn truncated_and_foreign_files() {
        let g = BevGrid::from_vec(2, 1, 1, vec![1.0f32, -3.5]).unwrap();
        let bytes = encode_grid(&g);
        assert!(decode_grid(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_grid(b"PNG").is_err());
        let mut v2 = bytes.clone();
        v2[4] = 2;
        assert!(decode_grid(&v2).unwrap_err().contains("version"));
    }

    #[test]
    fn black_image_for_zero_grid() {
        let g = BevGrid::<f32>::zeros(3, 2, 4);
        let img = encode_pgm(3, 2, &norm_image(&g));
        assert_eq!(&img[..11], b"P5\n3 2\n255\n");
        assert!(img[11..].iter().all(|&p| p == 0));
    }

    #[test]
    fn brightest_pillar_is_white() {
        let g = BevGrid::from_vec(2, 1, 2, vec![3.0f32, 4.0, 0.0, 2.5]).unwrap();
        assert_eq!(norm_image(&g), vec![255, 128]);
    }

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
