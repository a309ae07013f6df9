//! Viewable exports: binary PPM (P6) for false-colour composites and class
//! maps, binary PGM (P5) for boolean masks.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::{ClassMap, MultibandImage};

fn p6_header(width: usize, height: usize) -> String {
    format!("P6\n{width} {height}\n255\n")
}

/// Writes a false-colour composite as binary PPM.
///
/// Display mapping is the 2,1,1 band combination: R←NIR, G←Red, B←Red.
pub fn export_ppm_fcc(img: &MultibandImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let header = p6_header(img.width(), img.height());
    let mut out = vec![0u8; header.len() + 3 * img.pixels().len()];
    out[..header.len()].copy_from_slice(header.as_bytes());

    let row_bytes = 3 * img.width();
    out[header.len()..]
        .par_chunks_mut(row_bytes)
        .zip(img.pixels().par_chunks(img.width()))
        .for_each(|(dst, src)| {
            for (t, p) in dst.chunks_exact_mut(3).zip(src) {
                t[0] = p.nir;
                t[1] = p.red;
                t[2] = p.red;
            }
        });

    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes a class map as binary PPM using the fixed class palette.
pub fn export_ppm_classmap(cm: &ClassMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let header = p6_header(cm.width(), cm.height());
    let mut out = vec![0u8; header.len() + 3 * cm.codes().len()];
    out[..header.len()].copy_from_slice(header.as_bytes());

    let row_bytes = 3 * cm.width();
    out[header.len()..]
        .par_chunks_mut(row_bytes)
        .zip(cm.codes().par_chunks(cm.width()))
        .for_each(|(dst, src)| {
            for (t, c) in dst.chunks_exact_mut(3).zip(src) {
                t.copy_from_slice(&c.rgb());
            }
        });

    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes a boolean mask as binary PGM (true = 255, false = 0).
pub fn write_pgm_mask(mask: &[bool], width: usize, height: usize, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if width == 0 || height == 0 || mask.len() != width * height {
        return Err(Error::ImageGeometry {
            width,
            height,
            len: mask.len(),
        });
    }
    let header = format!("P5\n{width} {height}\n255\n");
    let mut out = Vec::with_capacity(header.len() + mask.len());
    out.extend_from_slice(header.as_bytes());
    out.extend(mask.iter().map(|&m| if m { 255u8 } else { 0u8 }));
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a binary PGM mask written by [`write_pgm_mask`]. Any non-zero sample
/// counts as true.
pub fn read_pgm_mask(path: impl AsRef<Path>) -> Result<(Vec<bool>, usize, usize)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let malformed = |offset: usize, detail: &str| Error::MalformedHeader {
        path: path.to_path_buf(),
        offset,
        detail: detail.into(),
    };

    let mut pos = 0usize;
    let line = |pos: &mut usize| -> Result<String> {
        let start = *pos;
        let nl = bytes[start..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| malformed(start, "unterminated PGM header line"))?;
        let s = std::str::from_utf8(&bytes[start..start + nl])
            .map_err(|_| malformed(start, "PGM header is not UTF-8"))?;
        *pos = start + nl + 1;
        Ok(s.to_string())
    };

    if line(&mut pos)? != "P5" {
        return Err(malformed(0, "expected P5 magic"));
    }
    let dims = line(&mut pos)?;
    let (w_str, h_str) = dims
        .split_once(' ')
        .ok_or_else(|| malformed(3, "expected `<width> <height>`"))?;
    let width: usize = w_str.parse().map_err(|_| malformed(3, "bad width"))?;
    let height: usize = h_str.parse().map_err(|_| malformed(3, "bad height"))?;
    if line(&mut pos)? != "255" {
        return Err(malformed(pos, "expected maxval 255"));
    }

    let payload = &bytes[pos..];
    if payload.len() != width * height {
        return Err(Error::PayloadSize {
            path: path.to_path_buf(),
            offset: pos,
            expected: (width * height) as u64,
            found: payload.len() as u64,
        });
    }
    Ok((payload.iter().map(|&b| b != 0).collect(), width, height))
}
