//! Separable cubic-convolution resampling with the Keys kernel (a = -0.5).
//!
//! Output sample `i` reads source coordinate `i / scale`; samples outside the
//! grid are clamped to the border. The kernel interpolates (weight 1 at offset
//! 0, weight 0 at other integers), so scale 1.0 reproduces the input exactly,
//! and its weights sum to 1 at every phase, so constant inputs stay constant.

use crate::error::{Error, Result};
use crate::raster::{Band, MultibandImage, NdviRaster, Pixel};

const A: f64 = -0.5;

fn keys_kernel(x: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 {
        (A + 2.0) * x * x * x - (A + 3.0) * x * x + 1.0
    } else if x < 2.0 {
        A * x * x * x - 5.0 * A * x * x + 8.0 * A * x - 4.0 * A
    } else {
        0.0
    }
}

/// Kernel weights for the four taps around a sample at phase `t` in [0, 1):
/// taps sit at offsets -1, 0, 1, 2 relative to `floor(x)`.
pub fn tap_weights(t: f64) -> [f64; 4] {
    [
        keys_kernel(t + 1.0),
        keys_kernel(t),
        keys_kernel(1.0 - t),
        keys_kernel(2.0 - t),
    ]
}

/// Precomputed taps for one output coordinate: clamped source indices plus
/// the four kernel weights.
struct Taps {
    idx: [usize; 4],
    w: [f64; 4],
}

fn axis_taps(out_len: usize, src_len: usize, scale: f64) -> Vec<Taps> {
    (0..out_len)
        .map(|o| {
            let x = o as f64 / scale;
            let base = x.floor();
            let t = x - base;
            let b = base as isize;
            let clamp = |i: isize| i.clamp(0, src_len as isize - 1) as usize;
            Taps {
                idx: [clamp(b - 1), clamp(b), clamp(b + 1), clamp(b + 2)],
                w: tap_weights(t),
            }
        })
        .collect()
}

fn out_dim(src: usize, scale: f64) -> usize {
    ((src as f64 * scale).round() as usize).max(1)
}

/// Resamples a row-major plane of values by `scale` along both axes.
///
/// Returns the resampled plane and its dimensions,
/// `round(width * scale) x round(height * scale)` (at least 1x1).
pub fn resample_plane(values: &[f32], width: usize, height: usize, scale: f64) -> Result<(Vec<f32>, usize, usize)> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidScale { scale });
    }
    if width == 0 || height == 0 || values.len() != width * height {
        return Err(Error::ImageGeometry {
            width,
            height,
            len: values.len(),
        });
    }

    let out_w = out_dim(width, scale);
    let out_h = out_dim(height, scale);
    let xt = axis_taps(out_w, width, scale);
    let yt = axis_taps(out_h, height, scale);

    // horizontal pass: height x out_w, accumulated in f64
    let mut mid = vec![0.0f64; height * out_w];
    for y in 0..height {
        let row = &values[y * width..(y + 1) * width];
        let dst = &mut mid[y * out_w..(y + 1) * out_w];
        for (o, taps) in xt.iter().enumerate() {
            let mut acc = 0.0;
            for k in 0..4 {
                acc += taps.w[k] * row[taps.idx[k]] as f64;
            }
            dst[o] = acc;
        }
    }

    // vertical pass
    let mut out = vec![0.0f32; out_h * out_w];
    for (o, taps) in yt.iter().enumerate() {
        let dst = &mut out[o * out_w..(o + 1) * out_w];
        for x in 0..out_w {
            let mut acc = 0.0;
            for k in 0..4 {
                acc += taps.w[k] * mid[taps.idx[k] * out_w + x];
            }
            dst[x] = acc as f32;
        }
    }

    Ok((out, out_w, out_h))
}

/// Resamples an NDVI surface; results are clamped back into [-1, 1] where the
/// kernel overshoots.
pub fn resample_ndvi(nv: &NdviRaster, scale: f64) -> Result<NdviRaster> {
    let (vals, w, h) = resample_plane(nv.values(), nv.width(), nv.height(), scale)?;
    let clamped = vals.into_iter().map(|v| v.clamp(-1.0, 1.0)).collect();
    NdviRaster::new(w, h, clamped)
}

/// Resamples a 3-band image band by band; samples are rounded and clamped
/// back to 8-bit DNs. The date is preserved.
pub fn resample_image(img: &MultibandImage, scale: f64) -> Result<MultibandImage> {
    let mut planes = Vec::with_capacity(3);
    let mut out_w = 0;
    let mut out_h = 0;
    for band in Band::ALL {
        let plane: Vec<f32> = img.pixels().iter().map(|p| p.band(band) as f32).collect();
        let (vals, w, h) = resample_plane(&plane, img.width(), img.height(), scale)?;
        out_w = w;
        out_h = h;
        planes.push(
            vals.into_iter()
                .map(|v| v.round().clamp(0.0, 255.0) as u8)
                .collect::<Vec<u8>>(),
        );
    }
    let data = (0..out_w * out_h)
        .map(|i| Pixel::new(planes[0][i], planes[1][i], planes[2][i]))
        .collect();
    MultibandImage::new(out_w, out_h, img.date(), data)
}
