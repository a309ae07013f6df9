//! Raster data model: pixels, dated multiband images, stacks, NDVI surfaces
//! and class maps, together with file I/O and resampling.
//!
//! All types are immutable after construction, so values can be shared freely
//! across threads. Constructors validate the structural invariants once;
//! everything downstream relies on them.

mod io;
mod ppm;
mod resample;

pub use io::{load_stack, read_classmap, read_ndvi, read_raster, write_classmap, write_ndvi, write_raster};
pub use ppm::{export_ppm_classmap, export_ppm_fcc, read_pgm_mask, write_pgm_mask};
pub use resample::{resample_image, resample_ndvi, resample_plane, tap_weights};

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// One 3-sample pixel: 8-bit digital numbers for SWIR, NIR and Red.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Pixel {
    pub swir: u8,
    pub nir: u8,
    pub red: u8,
}

impl Pixel {
    pub const fn new(swir: u8, nir: u8, red: u8) -> Self {
        Pixel { swir, nir, red }
    }

    /// Pixel with the same DN in all three bands (mask fills are this shape).
    pub const fn splat(dn: u8) -> Self {
        Pixel::new(dn, dn, dn)
    }

    pub const fn band(self, band: Band) -> u8 {
        match band {
            Band::Swir => self.swir,
            Band::Nir => self.nir,
            Band::Red => self.red,
        }
    }
}

/// Spectral band of a [`Pixel`], in storage order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Band {
    Swir,
    Nir,
    Red,
}

impl Band {
    pub const ALL: [Band; 3] = [Band::Swir, Band::Nir, Band::Red];

    pub const fn name(self) -> &'static str {
        match self {
            Band::Swir => "SWIR",
            Band::Nir => "NIR",
            Band::Red => "RED",
        }
    }
}

impl std::str::FromStr for Band {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "swir" => Ok(Band::Swir),
            "nir" => Ok(Band::Nir),
            "red" => Ok(Band::Red),
            other => Err(format!("unknown band `{other}` (expected swir, nir or red)")),
        }
    }
}

/// A dated W×H raster of [`Pixel`]s. Band order is fixed to (SWIR, NIR, RED).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultibandImage {
    width: usize,
    height: usize,
    date: NaiveDate,
    data: Vec<Pixel>,
}

impl MultibandImage {
    /// Builds an image from row-major pixel data.
    ///
    /// Fails unless `width >= 1`, `height >= 1` and `data.len() == width * height`.
    pub fn new(width: usize, height: usize, date: NaiveDate, data: Vec<Pixel>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::ImageGeometry {
                width,
                height,
                len: data.len(),
            });
        }
        Ok(MultibandImage {
            width,
            height,
            date,
            data,
        })
    }

    /// Image filled with a single pixel value.
    pub fn filled(width: usize, height: usize, date: NaiveDate, pixel: Pixel) -> Result<Self> {
        Self::new(width, height, date, vec![pixel; width * height])
    }

    /// Builds an image by evaluating `f(x, y)` at every site, row-major.
    pub fn from_fn(
        width: usize,
        height: usize,
        date: NaiveDate,
        mut f: impl FnMut(usize, usize) -> Pixel,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, date, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    /// Row-major pixel data.
    pub fn pixels(&self) -> &[Pixel] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> Pixel {
        debug_assert!(x < self.width && y < self.height);
        self.data[y * self.width + x]
    }

    /// Extracts one band as a contiguous row-major plane.
    pub fn band_plane(&self, band: Band) -> Vec<u8> {
        self.data.iter().map(|p| p.band(band)).collect()
    }

    /// New image with the same geometry and date, pixels mapped one-to-one.
    pub fn map_pixels(&self, f: impl Fn(Pixel) -> Pixel) -> MultibandImage {
        MultibandImage {
            width: self.width,
            height: self.height,
            date: self.date,
            data: self.data.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn same_dims(&self, other: &MultibandImage) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Date-ordered list of co-registered images: the compositing window.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ImageStack {
    images: Vec<MultibandImage>,
}

impl ImageStack {
    /// Validates and wraps a list of images already in ascending date order.
    ///
    /// Requires at least one image, identical dimensions throughout, and
    /// strictly ascending acquisition dates.
    pub fn new(images: Vec<MultibandImage>) -> Result<Self> {
        let first = images.first().ok_or(Error::EmptyStack)?;
        let (w, h) = (first.width, first.height);
        for (i, img) in images.iter().enumerate().skip(1) {
            if img.width != w || img.height != h {
                return Err(Error::DimensionMismatch {
                    expected_ctx: "stack image #0".into(),
                    expected_w: w,
                    expected_h: h,
                    found_ctx: format!("stack image #{i}"),
                    found_w: img.width,
                    found_h: img.height,
                });
            }
            let prev = images[i - 1].date;
            if img.date == prev {
                return Err(Error::DuplicateDate {
                    date: img.date,
                    first: format!("stack image #{}", i - 1),
                    second: format!("stack image #{i}"),
                });
            }
            if img.date < prev {
                return Err(Error::DatesNotAscending {
                    prev,
                    next: img.date,
                });
            }
        }
        Ok(ImageStack { images })
    }

    /// Sorts the images by acquisition date, then validates as [`ImageStack::new`].
    pub fn from_unordered(mut images: Vec<MultibandImage>) -> Result<Self> {
        images.sort_by_key(|img| img.date);
        Self::new(images)
    }

    pub fn images(&self) -> &[MultibandImage] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn width(&self) -> usize {
        self.images[0].width
    }

    pub fn height(&self) -> usize {
        self.images[0].height
    }
}

/// W×H surface of NDVI values, each in [-1, 1].
#[derive(Clone, PartialEq, Debug)]
pub struct NdviRaster {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

impl NdviRaster {
    /// Builds a raster from row-major values, rejecting anything outside [-1, 1].
    pub fn new(width: usize, height: usize, values: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::ImageGeometry {
                width,
                height,
                len: values.len(),
            });
        }
        for (i, &v) in values.iter().enumerate() {
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::SampleRange {
                    path: "<memory>".into(),
                    index: i,
                    value: v as f64,
                    expected: "[-1, 1]".into(),
                });
            }
        }
        Ok(NdviRaster {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn value(&self, x: usize, y: usize) -> f32 {
        debug_assert!(x < self.width && y < self.height);
        self.values[y * self.width + x]
    }
}

/// Land-cover class of an NDVI slice, with its fixed display colour.
#[repr(u8)]
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum LandClass {
    Water = 0,
    Cloud = 1,
    Fallow = 2,
    Moderate = 3,
    Dense = 4,
}

impl LandClass {
    pub const COUNT: usize = 5;
    pub const ALL: [LandClass; 5] = [
        LandClass::Water,
        LandClass::Cloud,
        LandClass::Fallow,
        LandClass::Moderate,
        LandClass::Dense,
    ];

    pub const fn code(self) -> u8 {
        self as u8
    }

    pub const fn from_code(code: u8) -> Option<LandClass> {
        match code {
            0 => Some(LandClass::Water),
            1 => Some(LandClass::Cloud),
            2 => Some(LandClass::Fallow),
            3 => Some(LandClass::Moderate),
            4 => Some(LandClass::Dense),
            _ => None,
        }
    }

    /// Display palette: water blue, clouds grey, fallow pale yellow,
    /// moderate vegetation mild green, dense vegetation dark green.
    pub const fn rgb(self) -> [u8; 3] {
        match self {
            LandClass::Water => [0, 0, 255],
            LandClass::Cloud => [128, 128, 128],
            LandClass::Fallow => [255, 255, 153],
            LandClass::Moderate => [144, 238, 144],
            LandClass::Dense => [0, 100, 0],
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            LandClass::Water => "water",
            LandClass::Cloud => "cloud",
            LandClass::Fallow => "fallow",
            LandClass::Moderate => "moderate",
            LandClass::Dense => "dense",
        }
    }
}

/// W×H raster of land-cover class codes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ClassMap {
    width: usize,
    height: usize,
    codes: Vec<LandClass>,
}

impl ClassMap {
    pub fn new(width: usize, height: usize, codes: Vec<LandClass>) -> Result<Self> {
        if width == 0 || height == 0 || codes.len() != width * height {
            return Err(Error::ImageGeometry {
                width,
                height,
                len: codes.len(),
            });
        }
        Ok(ClassMap {
            width,
            height,
            codes,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn codes(&self) -> &[LandClass] {
        &self.codes
    }

    pub fn code(&self, x: usize, y: usize) -> LandClass {
        debug_assert!(x < self.width && y < self.height);
        self.codes[y * self.width + x]
    }
}
