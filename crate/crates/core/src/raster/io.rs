//! CRAST v1 container: a minimal bit-exact format for aligned DN grids.
//!
//! Layout is an ASCII header followed by raw band-sequential samples:
//!
//! ```text
//! CRAST v1
//! width <W>
//! height <H>
//! bands <N>
//! dtype u8|f32
//! order SWIR,NIR,RED     (3-band images)
//! value NDVI|CLASS       (single-band rasters)
//! date YYYY-MM-DD
//! <blank line>
//! <payload>
//! ```
//!
//! Images store three planes of `W*H` bytes in SWIR, NIR, RED order. NDVI
//! rasters store `W*H` little-endian f32 values; class maps store `W*H` u8
//! codes. The header is strict: the writer emits exactly one canonical form
//! and the reader accepts nothing else, so read-write round trips are
//! byte-identical.

use std::fs;
use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::raster::{Band, ClassMap, ImageStack, LandClass, MultibandImage, NdviRaster, Pixel};

const MAGIC: &str = "CRAST v1";

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Dtype {
    U8,
    F32,
}

impl Dtype {
    fn size(self) -> u64 {
        match self {
            Dtype::U8 => 1,
            Dtype::F32 => 4,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    Image,
    Ndvi,
    Class,
}

struct RawHeader {
    width: usize,
    height: usize,
    bands: u64,
    bands_offset: usize,
    dtype: Dtype,
    dtype_offset: usize,
    kind: Kind,
    kind_offset: usize,
    date: NaiveDate,
    payload_offset: usize,
}

/// Line-oriented cursor over the header bytes, tracking byte offsets.
struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> HeaderCursor<'a> {
    fn new(bytes: &'a [u8], path: &'a Path) -> Self {
        HeaderCursor { bytes, pos: 0, path }
    }

    fn malformed(&self, offset: usize, detail: impl Into<String>) -> Error {
        Error::MalformedHeader {
            path: self.path.to_path_buf(),
            offset,
            detail: detail.into(),
        }
    }

    /// Next `\n`-terminated line; returns (line start offset, content).
    fn line(&mut self) -> Result<(usize, &'a str)> {
        let start = self.pos;
        let rest = &self.bytes[start..];
        let nl = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| self.malformed(start, "unterminated header line"))?;
        let content = std::str::from_utf8(&rest[..nl])
            .map_err(|_| self.malformed(start, "header line is not valid UTF-8"))?;
        self.pos = start + nl + 1;
        Ok((start, content))
    }

    /// Line of the form `<key> <value>`; returns (line offset, value).
    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (offset, line) = self.line()?;
        match line.strip_prefix(key).and_then(|r| r.strip_prefix(' ')) {
            Some(value) if !value.is_empty() => Ok((offset, value)),
            _ => Err(self.malformed(offset, format!("expected `{key} <value>`, got `{line}`"))),
        }
    }
}

fn parse_header(bytes: &[u8], path: &Path) -> Result<RawHeader> {
    let mut cur = HeaderCursor::new(bytes, path);

    let (offset, magic) = cur.line()?;
    if magic != MAGIC {
        return Err(Error::BadMagic {
            path: path.to_path_buf(),
            offset,
        });
    }

    let (w_off, w_str) = cur.field("width")?;
    let width: u64 = w_str
        .parse()
        .map_err(|_| cur.malformed(w_off, format!("width `{w_str}` is not an integer")))?;
    let (h_off, h_str) = cur.field("height")?;
    let height: u64 = h_str
        .parse()
        .map_err(|_| cur.malformed(h_off, format!("height `{h_str}` is not an integer")))?;
    if width == 0 {
        return Err(cur.malformed(w_off, "width must be >= 1"));
    }
    if height == 0 {
        return Err(cur.malformed(h_off, "height must be >= 1"));
    }

    let (bands_offset, bands_str) = cur.field("bands")?;
    let bands: u64 = bands_str
        .parse()
        .map_err(|_| cur.malformed(bands_offset, format!("bands `{bands_str}` is not an integer")))?;

    let (dtype_offset, dtype_str) = cur.field("dtype")?;
    let dtype = match dtype_str {
        "u8" => Dtype::U8,
        "f32" => Dtype::F32,
        other => {
            return Err(Error::UnsupportedDtype {
                path: path.to_path_buf(),
                offset: dtype_offset,
                found: other.to_string(),
                detail: "supported dtypes are u8 and f32".into(),
            })
        }
    };

    let (kind_offset, kind_line) = cur.line()?;
    let kind = match kind_line {
        "order SWIR,NIR,RED" => Kind::Image,
        "value NDVI" => Kind::Ndvi,
        "value CLASS" => Kind::Class,
        other => {
            return Err(cur.malformed(
                kind_offset,
                format!("expected `order SWIR,NIR,RED`, `value NDVI` or `value CLASS`, got `{other}`"),
            ))
        }
    };

    let (d_off, d_str) = cur.field("date")?;
    let date = NaiveDate::parse_from_str(d_str, "%Y-%m-%d")
        .map_err(|_| cur.malformed(d_off, format!("date `{d_str}` is not YYYY-MM-DD")))?;

    let (blank_off, blank) = cur.line()?;
    if !blank.is_empty() {
        return Err(cur.malformed(blank_off, "expected blank line before payload"));
    }

    if width.checked_mul(height).is_none() || usize::try_from(width).is_err() || usize::try_from(height).is_err() {
        return Err(cur.malformed(w_off, "dimensions overflow the address space"));
    }

    Ok(RawHeader {
        width: width as usize,
        height: height as usize,
        bands,
        bands_offset,
        dtype,
        dtype_offset,
        kind,
        kind_offset,
        date,
        payload_offset: cur.pos,
    })
}

/// Checks the payload is exactly `width * height * bands * dtype` bytes long.
fn check_payload(bytes: &[u8], header: &RawHeader, path: &Path) -> Result<u64> {
    let expected = (header.width as u64)
        .checked_mul(header.height as u64)
        .and_then(|n| n.checked_mul(header.bands))
        .and_then(|n| n.checked_mul(header.dtype.size()))
        .ok_or_else(|| Error::MalformedHeader {
            path: path.to_path_buf(),
            offset: 0,
            detail: "payload size overflows".into(),
        })?;
    let found = (bytes.len() - header.payload_offset) as u64;
    if found != expected {
        return Err(Error::PayloadSize {
            path: path.to_path_buf(),
            offset: header.payload_offset,
            expected,
            found,
        });
    }
    Ok(expected)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn header_string(width: usize, height: usize, bands: u64, dtype: &str, kind_line: &str, date: NaiveDate) -> String {
    format!(
        "{MAGIC}\nwidth {width}\nheight {height}\nbands {bands}\ndtype {dtype}\n{kind_line}\ndate {}\n\n",
        date.format("%Y-%m-%d")
    )
}

/// Reads a 3-band image from a CRAST v1 file.
///
/// Rejects files whose header declares anything other than a 3-band u8 image;
/// malformed headers, unsupported dtypes, wrong band counts, and truncated or
/// oversized payloads are reported with the byte offset of the problem.
pub fn read_raster(path: impl AsRef<Path>) -> Result<MultibandImage> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    let header = parse_header(&bytes, path)?;

    if header.bands != 3 {
        return Err(Error::BadBandCount {
            path: path.to_path_buf(),
            offset: header.bands_offset,
            expected: 3,
            found: header.bands,
        });
    }
    if header.dtype != Dtype::U8 {
        return Err(Error::UnsupportedDtype {
            path: path.to_path_buf(),
            offset: header.dtype_offset,
            found: "f32".into(),
            detail: "3-band images store u8 samples".into(),
        });
    }
    if header.kind != Kind::Image {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            offset: header.kind_offset,
            detail: "3-band payload requires `order SWIR,NIR,RED`".into(),
        });
    }
    check_payload(&bytes, &header, path)?;

    let n = header.width * header.height;
    let payload = &bytes[header.payload_offset..];
    let (swir, rest) = payload.split_at(n);
    let (nir, red) = rest.split_at(n);
    let data = (0..n)
        .map(|i| Pixel::new(swir[i], nir[i], red[i]))
        .collect();
    MultibandImage::new(header.width, header.height, header.date, data)
}

/// Writes a 3-band image as a CRAST v1 file (band-sequential SWIR, NIR, RED).
pub fn write_raster(img: &MultibandImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let header = header_string(img.width(), img.height(), 3, "u8", "order SWIR,NIR,RED", img.date());
    let n = img.pixels().len();
    let mut out = Vec::with_capacity(header.len() + 3 * n);
    out.extend_from_slice(header.as_bytes());
    for band in Band::ALL {
        out.extend(img.pixels().iter().map(|p| p.band(band)));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads an NDVI raster; returns the surface and the acquisition date stored
/// in its header.
pub fn read_ndvi(path: impl AsRef<Path>) -> Result<(NdviRaster, NaiveDate)> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    let header = parse_header(&bytes, path)?;

    if header.bands != 1 {
        return Err(Error::BadBandCount {
            path: path.to_path_buf(),
            offset: header.bands_offset,
            expected: 1,
            found: header.bands,
        });
    }
    if header.dtype != Dtype::F32 || header.kind != Kind::Ndvi {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            offset: header.kind_offset,
            detail: "NDVI rasters require `dtype f32` and `value NDVI`".into(),
        });
    }
    check_payload(&bytes, &header, path)?;

    let payload = &bytes[header.payload_offset..];
    let values: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    for (i, &v) in values.iter().enumerate() {
        if !(-1.0..=1.0).contains(&v) {
            return Err(Error::SampleRange {
                path: path.to_path_buf(),
                index: i,
                value: v as f64,
                expected: "[-1, 1]".into(),
            });
        }
    }
    let raster = NdviRaster::new(header.width, header.height, values)?;
    Ok((raster, header.date))
}

/// Writes an NDVI raster with the given acquisition date.
pub fn write_ndvi(nv: &NdviRaster, date: NaiveDate, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let header = header_string(nv.width(), nv.height(), 1, "f32", "value NDVI", date);
    let mut out = Vec::with_capacity(header.len() + 4 * nv.values().len());
    out.extend_from_slice(header.as_bytes());
    for v in nv.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a class map; returns the map and the date stored in its header.
pub fn read_classmap(path: impl AsRef<Path>) -> Result<(ClassMap, NaiveDate)> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    let header = parse_header(&bytes, path)?;

    if header.bands != 1 {
        return Err(Error::BadBandCount {
            path: path.to_path_buf(),
            offset: header.bands_offset,
            expected: 1,
            found: header.bands,
        });
    }
    if header.dtype != Dtype::U8 || header.kind != Kind::Class {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            offset: header.kind_offset,
            detail: "class maps require `dtype u8` and `value CLASS`".into(),
        });
    }
    check_payload(&bytes, &header, path)?;

    let payload = &bytes[header.payload_offset..];
    let mut codes = Vec::with_capacity(payload.len());
    for (i, &b) in payload.iter().enumerate() {
        let class = LandClass::from_code(b).ok_or(Error::SampleRange {
            path: path.to_path_buf(),
            index: i,
            value: b as f64,
            expected: "class codes 0..=4".into(),
        })?;
        codes.push(class);
    }
    let map = ClassMap::new(header.width, header.height, codes)?;
    Ok((map, header.date))
}

/// Writes a class map with the given acquisition date.
pub fn write_classmap(cm: &ClassMap, date: NaiveDate, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let header = header_string(cm.width(), cm.height(), 1, "u8", "value CLASS", date);
    let mut out = Vec::with_capacity(header.len() + cm.codes().len());
    out.extend_from_slice(header.as_bytes());
    out.extend(cm.codes().iter().map(|c| c.code()));
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Loads a compositing window from a list of CRAST files.
///
/// Images are sorted by their header date. All must share the dimensions of
/// the first path given; duplicate dates are rejected.
pub fn load_stack<P: AsRef<Path>>(paths: &[P]) -> Result<ImageStack> {
    if paths.is_empty() {
        return Err(Error::EmptyStack);
    }

    let mut loaded: Vec<(MultibandImage, &Path)> = Vec::with_capacity(paths.len());
    for p in paths {
        let path = p.as_ref();
        let img = read_raster(path)?;
        if let Some((first, first_path)) = loaded.first() {
            if !first.same_dims(&img) {
                return Err(Error::DimensionMismatch {
                    expected_ctx: first_path.display().to_string(),
                    expected_w: first.width(),
                    expected_h: first.height(),
                    found_ctx: path.display().to_string(),
                    found_w: img.width(),
                    found_h: img.height(),
                });
            }
        }
        loaded.push((img, path));
    }

    loaded.sort_by_key(|(img, _)| img.date());
    for pair in loaded.windows(2) {
        if pair[0].0.date() == pair[1].0.date() {
            return Err(Error::DuplicateDate {
                date: pair[0].0.date(),
                first: pair[0].1.display().to_string(),
                second: pair[1].1.display().to_string(),
            });
        }
    }

    ImageStack::new(loaded.into_iter().map(|(img, _)| img).collect())
}
