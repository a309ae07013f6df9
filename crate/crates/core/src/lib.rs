//! Cloud removal from time series of co-registered 3-band satellite rasters.
//!
//! The library works on dated stacks of (SWIR, NIR, Red) images with 8-bit
//! samples. Cloud pixels are detected from a Red-band DN bracket refined by a
//! SWIR comparison, recoded to a fill value, and removed by per-pixel time
//! compositing. Downstream, NDVI extraction and slicing turn composites into
//! land-cover class maps, and a Red-band histogram scan refines the cloud
//! bracket's lower threshold on heavily clouded scenes.
//!
//! Modules:
//! - [`raster`]: data model, CRAST container I/O, PPM export, cubic resampling
//! - [`cloudmask`]: cloud predicate and recoding
//! - [`compositor`]: the four compositing methods plus re-compositing
//! - [`vegindex`]: NDVI, class slicing, histograms, vegetated statistics
//! - [`histo`]: Red-band histogram and inflection-based threshold refinement
//! - [`scenegen`]: deterministic synthetic scenes with ground-truth masks

pub mod cloudmask;
pub mod compositor;
mod error;
pub mod histo;
pub mod raster;
pub mod scenegen;
pub mod vegindex;

pub use error::{Error, Result};
pub use raster::{Band, ClassMap, ImageStack, LandClass, MultibandImage, NdviRaster, Pixel};
