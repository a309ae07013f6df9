//! Time compositing over a dated image stack.
//!
//! Four methods are provided:
//!
//! - [`composite_max`]: per-band maximum over zero-masked inputs. Cloud
//!   pixels recoded to 0 lose every band comparison; sites clouded on all
//!   dates stay at the retrievable 0 marker.
//! - [`composite_min_naive`]: per-band minimum over unmasked inputs. This
//!   deliberately reproduces the per-band defect: the output pixel can mix
//!   bands from different dates and belong to no source scene.
//! - [`composite_min_refined`]: per site, copies the entire pixel from the
//!   date with minimum Red DN, so every output pixel is one of the inputs.
//!   Images are combined two at a time, hierarchically, in date order.
//! - [`composite_hybrid`]: recodes clouds to 255 on all bands, then runs the
//!   refined minimum. Persistent clouds survive as the exact (255,255,255)
//!   marker, which maps to NDVI 0.
//!
//! All methods are pure functions of the stack; outputs carry the earliest
//! acquisition date of their inputs. Red-band ties in the refined minimum
//! resolve toward the earliest date, which makes the hierarchical pairwise
//! reduction equal a left-to-right scan.

use rayon::prelude::*;

use crate::cloudmask::{mask_pixel, CloudBracket};
use crate::raster::{ImageStack, MultibandImage, Pixel};

/// Keeps `a` (the earlier date) unless `b` is strictly lower in Red.
#[inline]
fn pick_min_red(a: Pixel, b: Pixel) -> Pixel {
    if b.red < a.red {
        b
    } else {
        a
    }
}

/// Combines two co-registered images site by site; `a` must be the earlier.
fn combine_min_red(a: &MultibandImage, b: &MultibandImage) -> MultibandImage {
    let data: Vec<Pixel> = a
        .pixels()
        .par_iter()
        .zip(b.pixels().par_iter())
        .map(|(&pa, &pb)| pick_min_red(pa, pb))
        .collect();
    MultibandImage::new(a.width(), a.height(), a.date(), data)
        .expect("combining equal-sized images preserves geometry")
}

fn fold_per_band(stack: &ImageStack, f: impl Fn(u8, u8) -> u8 + Sync) -> MultibandImage {
    let images = stack.images();
    let first = &images[0];
    let data: Vec<Pixel> = (0..first.pixels().len())
        .into_par_iter()
        .map(|i| {
            let mut acc = first.pixels()[i];
            for img in &images[1..] {
                let p = img.pixels()[i];
                acc = Pixel::new(f(acc.swir, p.swir), f(acc.nir, p.nir), f(acc.red, p.red));
            }
            acc
        })
        .collect();
    MultibandImage::new(first.width(), first.height(), first.date(), data)
        .expect("per-band fold preserves geometry")
}

/// Per-band maximum composite.
///
/// Inputs are expected to be cloud-masked with fill 0 already; the masked
/// pixels then lose every band comparison to any unmasked DN.
pub fn composite_max(stack: &ImageStack) -> MultibandImage {
    fold_per_band(stack, u8::max)
}

/// Per-band minimum composite, band compared and copied individually.
///
/// The output is a synthesized image rather than a composite: pixel purity is
/// not preserved. Kept as a faithful baseline for comparison.
pub fn composite_min_naive(stack: &ImageStack) -> MultibandImage {
    fold_per_band(stack, u8::min)
}

/// Refined minimum composite: per site, the whole 3-band pixel from the date
/// with minimum Red DN. Ties resolve toward the earliest date.
pub fn composite_min_refined(stack: &ImageStack) -> MultibandImage {
    let mut round: Vec<MultibandImage> = stack.images().to_vec();
    while round.len() > 1 {
        round = round
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => combine_min_red(a, b),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    round.into_iter().next().expect("stack is non-empty")
}

/// Hybrid composite: recode clouds in every input to 255 on all bands, then
/// take the refined minimum.
///
/// A site comes out as (255,255,255) iff the cloud predicate held on every
/// input at that site.
pub fn composite_hybrid(stack: &ImageStack, bracket: CloudBracket) -> MultibandImage {
    let masked: Vec<MultibandImage> = stack
        .images()
        .iter()
        .map(|img| img.map_pixels(|p| mask_pixel(p, bracket, 255)))
        .collect();
    let masked_stack = ImageStack::new(masked).expect("masking preserves stack geometry");
    composite_min_refined(&masked_stack)
}

/// Feeds hybrid composites back through the hybrid method.
///
/// The (255,255,255) cloud markers satisfy the cloud predicate, re-mask to
/// themselves and lose the Red comparison to any clear pixel, so each pass
/// can only reduce the residual cloud cover. `bracket` must be the bracket
/// the composites were produced with.
pub fn recomposite(composites: &ImageStack, bracket: CloudBracket) -> MultibandImage {
    composite_hybrid(composites, bracket)
}
