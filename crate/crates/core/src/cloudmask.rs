//! Cloud detection and recoding.
//!
//! Clouds scatter strongly in the Red band, so cloud pixels fall in a Red DN
//! bracket (default [150, 255]). Bright fallow land overlaps that bracket,
//! but its SWIR DN exceeds its Red DN while clouds keep Red >= SWIR; the
//! predicate combines both tests. Detected pixels are recoded to a uniform
//! fill DN on all bands: 0 for max-compositing, 255 for the hybrid method.

use crate::error::{Error, Result};
use crate::raster::{ImageStack, MultibandImage, Pixel};

/// Red-band DN bracket within which cloud pixels fall, inclusive on both ends.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CloudBracket {
    lo: u8,
    hi: u8,
}

impl CloudBracket {
    pub fn new(lo: u8, hi: u8) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidBracket { lo, hi });
        }
        Ok(CloudBracket { lo, hi })
    }

    pub fn lo(self) -> u8 {
        self.lo
    }

    pub fn hi(self) -> u8 {
        self.hi
    }
}

impl Default for CloudBracket {
    /// The general bracket, [150, 255].
    fn default() -> Self {
        CloudBracket { lo: 150, hi: 255 }
    }
}

impl std::fmt::Display for CloudBracket {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

/// True iff the pixel's Red DN lies in the bracket and is not below its SWIR
/// DN (the screen that spares bright fallow land). Equality counts as cloud.
pub fn is_cloud(p: Pixel, b: CloudBracket) -> bool {
    p.red >= b.lo && p.red <= b.hi && p.red >= p.swir
}

pub(crate) fn mask_pixel(p: Pixel, b: CloudBracket, fill: u8) -> Pixel {
    if is_cloud(p, b) {
        Pixel::splat(fill)
    } else {
        p
    }
}

/// Recodes every cloud pixel to `(fill, fill, fill)`; everything else is
/// untouched. Only the two recode targets in use are accepted: 0 and 255.
pub fn mask_clouds(img: &MultibandImage, b: CloudBracket, fill: u8) -> Result<MultibandImage> {
    if fill != 0 && fill != 255 {
        return Err(Error::InvalidFill { fill });
    }
    Ok(img.map_pixels(|p| mask_pixel(p, b, fill)))
}

/// Masks every image of a stack with the same bracket and fill.
pub fn mask_stack(stack: &ImageStack, b: CloudBracket, fill: u8) -> Result<ImageStack> {
    if fill != 0 && fill != 255 {
        return Err(Error::InvalidFill { fill });
    }
    let masked = stack
        .images()
        .iter()
        .map(|img| img.map_pixels(|p| mask_pixel(p, b, fill)))
        .collect();
    ImageStack::new(masked)
}

/// Share of pixels satisfying [`is_cloud`], in [0, 1].
pub fn cloud_fraction(img: &MultibandImage, b: CloudBracket) -> f64 {
    let hits = img.pixels().iter().filter(|&&p| is_cloud(p, b)).count();
    hits as f64 / img.pixels().len() as f64
}
