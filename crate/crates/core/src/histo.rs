//! Band histograms and inflection-point detection.
//!
//! On heavily clouded scenes the Red-band histogram shows a sharp rise above
//! DN 150. Treating the histogram as a series of line segments and scanning
//! for the first segment whose slope exceeds a threshold locates that rise;
//! its DN refines the lower bound of the cloud bracket. Off-monsoon scenes
//! show no such rise and keep the general bracket.
//!
//! Frequencies are measured in per-mille of the total pixel count and slopes
//! in per-mille per DN, which makes detection independent of image size.

use rayon::prelude::*;

use crate::cloudmask::CloudBracket;
use crate::raster::{Band, MultibandImage};

/// DN histogram of one band: 256 counts plus the pixel total.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BandHistogram {
    counts: [u64; 256],
    total: u64,
}

impl BandHistogram {
    pub fn from_counts(counts: [u64; 256]) -> Self {
        let total = counts.iter().sum();
        BandHistogram { counts, total }
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    pub fn count(&self, dn: u8) -> u64 {
        self.counts[dn as usize]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Frequency of one DN in per-mille of the total.
    pub fn frequency_per_mille(&self, dn: u8) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            (self.count(dn) * 1000) as f64 / self.total as f64
        }
    }

    /// 256 CSV lines `dn,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(256 * 8);
        for (dn, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{dn},{c}\n"));
        }
        out
    }
}

/// Histogram of one band of an image.
pub fn band_histogram(img: &MultibandImage, band: Band) -> BandHistogram {
    let counts = img
        .pixels()
        .par_chunks(img.width().max(1))
        .fold(
            || [0u64; 256],
            |mut acc, row| {
                for p in row {
                    acc[p.band(band) as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || [0u64; 256],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b.iter()) {
                    *x += y;
                }
                a
            },
        );
    BandHistogram::from_counts(counts)
}

/// Parameters of the segment-slope scan.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct InflectionParams {
    /// First DN considered; segments start here.
    pub start: u8,
    /// Segment length in DN. Must be >= 1.
    pub seg_width: u8,
    /// Slope threshold in per-mille of total per DN; a segment detects when
    /// its slope is strictly greater.
    pub slope_thresh: f64,
}

impl Default for InflectionParams {
    fn default() -> Self {
        InflectionParams {
            start: 150,
            seg_width: 5,
            slope_thresh: 1.0,
        }
    }
}

/// Finds the first point of inflection at or above `params.start`.
///
/// The DN axis from `start` to 255 is split into consecutive segments of
/// `seg_width` DN. A segment starting at `s` has slope
/// `(freq(s + seg_width) - freq(s)) / seg_width` with frequencies in
/// per-mille of the total. The start DN of the first segment whose slope
/// exceeds `slope_thresh` is returned; `None` when no segment qualifies.
pub fn detect_inflection(h: &BandHistogram, params: InflectionParams) -> Option<u8> {
    assert!(params.seg_width >= 1, "segment width must be >= 1");
    if h.total() == 0 {
        return None;
    }

    let w = params.seg_width as usize;
    let mut s = params.start as usize;
    while s + w <= 255 {
        // slope as a single division of exact integers, so that scaling all
        // counts by a constant cannot change the comparison
        let rise = h.counts[s + w] as i128 - h.counts[s] as i128;
        let slope = (rise * 1000) as f64 / (w as u128 * h.total() as u128) as f64;
        if slope > params.slope_thresh {
            return Some(s as u8);
        }
        s += w;
    }
    None
}

/// Refines the cloud bracket from the image's Red-band histogram.
///
/// The lower bound becomes the detected inflection DN when one exists;
/// otherwise the defaults are kept unchanged. The upper bound is always
/// `defaults.hi()`. A detection above `defaults.hi()` cannot form a valid
/// bracket and also falls back to the defaults.
pub fn adaptive_bracket(img: &MultibandImage, defaults: CloudBracket) -> CloudBracket {
    let hist = band_histogram(img, Band::Red);
    match detect_inflection(&hist, InflectionParams::default()) {
        Some(lo) if lo <= defaults.hi() => {
            CloudBracket::new(lo, defaults.hi()).expect("lo <= hi checked above")
        }
        _ => defaults,
    }
}
