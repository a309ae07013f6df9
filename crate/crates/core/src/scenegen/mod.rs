//! Deterministic synthetic scenes with ground truth.
//!
//! A base scene is laid out as contiguous land-cover regions (water, fallow,
//! moderate and dense vegetation) whose per-band DN signatures are drawn from
//! configurable ranges. A cloudy stack overlays filled cloud disks on the
//! base day by day, optionally with cast shadows and per-day misregistration
//! jitter, while recording exact per-day cloud and shadow masks. Everything
//! is generated from a single [`rng::SplitMix64`] stream, so a (spec, seed)
//! pair reproduces bit-identical output anywhere.
//!
//! Base signatures are constrained to fail the cloud predicate, which makes
//! ground-truth scoring unambiguous: a composite pixel equal to the cloud
//! fill marker can only have come from masking, never from the ground.

mod config;
pub mod rng;

pub use config::{parse_config, GenConfig};

use chrono::Duration;

use crate::cloudmask::{is_cloud, CloudBracket};
use crate::error::{Error, Result};
use crate::raster::{ImageStack, MultibandImage, Pixel};
use rng::SplitMix64;

/// Inclusive DN range.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DnRange {
    pub lo: u8,
    pub hi: u8,
}

impl DnRange {
    pub const fn new(lo: u8, hi: u8) -> Self {
        DnRange { lo, hi }
    }
}

/// Per-band DN ranges of one land-cover class.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct BandSignature {
    pub swir: DnRange,
    pub nir: DnRange,
    pub red: DnRange,
}

impl BandSignature {
    pub const fn new(swir: DnRange, nir: DnRange, red: DnRange) -> Self {
        BandSignature { swir, nir, red }
    }
}

/// Layout and radiometry of a synthetic base scene.
///
/// Region fractions must sum to 1; the image is split into contiguous
/// row-major runs of water, fallow, moderate and dense pixels in that order.
/// When `bright_fallow` is set, the fallow region uses the bright signature
/// (Red inside the cloud bracket but SWIR above Red), which the cloud
/// predicate must leave unmasked.
#[derive(Clone, Debug)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub start_date: chrono::NaiveDate,
    pub water_frac: f64,
    pub fallow_frac: f64,
    pub moderate_frac: f64,
    pub dense_frac: f64,
    pub bright_fallow: bool,
    pub water_sig: BandSignature,
    pub fallow_sig: BandSignature,
    pub bright_fallow_sig: BandSignature,
    pub moderate_sig: BandSignature,
    pub dense_sig: BandSignature,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            width: 128,
            height: 128,
            seed: 1,
            start_date: chrono::NaiveDate::from_ymd_opt(2000, 1, 1).unwrap(),
            water_frac: 0.2,
            fallow_frac: 0.3,
            moderate_frac: 0.3,
            dense_frac: 0.2,
            bright_fallow: false,
            // water: dark, NIR below Red (negative index)
            water_sig: BandSignature::new(
                DnRange::new(5, 25),
                DnRange::new(8, 28),
                DnRange::new(35, 60),
            ),
            // fallow: index lands in [0.09, 0.25)
            fallow_sig: BandSignature::new(
                DnRange::new(95, 130),
                DnRange::new(106, 128),
                DnRange::new(80, 88),
            ),
            // bright fallow: Red overlaps the cloud bracket, SWIR above Red
            bright_fallow_sig: BandSignature::new(
                DnRange::new(201, 240),
                DnRange::new(240, 249),
                DnRange::new(150, 200),
            ),
            // moderate vegetation: index in [0.25, 0.5)
            moderate_sig: BandSignature::new(
                DnRange::new(30, 70),
                DnRange::new(78, 100),
                DnRange::new(36, 44),
            ),
            // dense vegetation: index in [0.5, 1]
            dense_sig: BandSignature::new(
                DnRange::new(10, 40),
                DnRange::new(90, 140),
                DnRange::new(15, 25),
            ),
        }
    }
}

impl SceneSpec {
    fn active_fallow_sig(&self) -> &BandSignature {
        if self.bright_fallow {
            &self.bright_fallow_sig
        } else {
            &self.fallow_sig
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |detail: String| Err(Error::InvalidSceneSpec { detail });

        if self.width == 0 || self.height == 0 {
            return bad(format!("dimensions {}x{} must be >= 1", self.width, self.height));
        }
        let fracs = [
            self.water_frac,
            self.fallow_frac,
            self.moderate_frac,
            self.dense_frac,
        ];
        if fracs.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return bad("region fractions must lie in [0, 1]".into());
        }
        let sum: f64 = fracs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return bad(format!("region fractions sum to {sum}, expected 1"));
        }

        let sigs: [(&str, &BandSignature); 4] = [
            ("water", &self.water_sig),
            ("fallow", self.active_fallow_sig()),
            ("moderate", &self.moderate_sig),
            ("dense", &self.dense_sig),
        ];
        for (name, sig) in sigs {
            for (band, r) in [("swir", sig.swir), ("nir", sig.nir), ("red", sig.red)] {
                if r.lo > r.hi {
                    return bad(format!("{name} {band} range {}:{} is inverted", r.lo, r.hi));
                }
            }
            // no draw may satisfy the cloud predicate under the general bracket
            if sig.red.hi >= 150 && sig.swir.lo <= sig.red.hi {
                return bad(format!(
                    "{name} signature can satisfy the cloud predicate \
                     (red up to {} with swir from {})",
                    sig.red.hi, sig.swir.lo
                ));
            }
            // keep base pixels away from the (0,0,0) fill marker
            if sig.red.lo == 0 {
                return bad(format!("{name} red range must not include 0"));
            }
        }

        // water is dark with a strictly negative index
        let w = &self.water_sig;
        if w.nir.hi >= w.red.lo {
            return bad("water signature must keep NIR below Red".into());
        }
        if w.swir.hi > 100 || w.nir.hi > 100 || w.red.hi > 100 {
            return bad("water signature must stay dark (DN <= 100)".into());
        }
        // vegetated classes carry a strictly positive index
        for (name, sig) in [
            ("fallow", self.active_fallow_sig()),
            ("moderate", &self.moderate_sig),
            ("dense", &self.dense_sig),
        ] {
            if sig.nir.lo <= sig.red.hi {
                return bad(format!("{name} signature must keep NIR above Red"));
            }
        }
        Ok(())
    }
}

/// Cloud field layout for [`gen_cloudy_stack`].
///
/// Each day carries `count` filled disks. A disk persists to the next day
/// (same place, same size) with probability `persistence`; otherwise it is
/// replaced by a fresh one. Pixel DNs inside a disk are drawn from
/// `signature` with SWIR clamped to stay at or below Red, so every cloud
/// pixel satisfies the cloud predicate under the general bracket.
#[derive(Clone, Debug)]
pub struct CloudSpec {
    pub count: usize,
    pub radius_min: usize,
    pub radius_max: usize,
    pub persistence: f64,
    pub signature: BandSignature,
    /// Cast shadows: offset from the cloud centre and a DN multiplier.
    pub shadow: Option<ShadowSpec>,
    /// Maximum absolute per-day misregistration in pixels; 0 disables it.
    pub jitter: usize,
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ShadowSpec {
    pub dx: i64,
    pub dy: i64,
    pub darken: f64,
}

impl Default for CloudSpec {
    fn default() -> Self {
        CloudSpec {
            count: 6,
            radius_min: 6,
            radius_max: 18,
            persistence: 0.0,
            signature: BandSignature::new(
                DnRange::new(120, 255),
                DnRange::new(150, 255),
                DnRange::new(160, 255),
            ),
            shadow: None,
            jitter: 0,
        }
    }
}

impl CloudSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |detail: String| Err(Error::InvalidCloudSpec { detail });
        if self.radius_min == 0 || self.radius_min > self.radius_max {
            return bad(format!(
                "radius range {}:{} must satisfy 1 <= min <= max",
                self.radius_min, self.radius_max
            ));
        }
        if !(0.0..=1.0).contains(&self.persistence) {
            return bad(format!("persistence {} must lie in [0, 1]", self.persistence));
        }
        let sig = &self.signature;
        for (band, r) in [("swir", sig.swir), ("nir", sig.nir), ("red", sig.red)] {
            if r.lo > r.hi {
                return bad(format!("cloud {band} range {}:{} is inverted", r.lo, r.hi));
            }
        }
        if sig.red.lo < 150 {
            return bad(format!(
                "cloud red range starts at {}, below the general bracket",
                sig.red.lo
            ));
        }
        if sig.swir.lo > sig.red.lo {
            return bad("cloud swir range must start at or below the red range".into());
        }
        if let Some(sh) = &self.shadow {
            if !(sh.darken > 0.0 && sh.darken <= 1.0) {
                return bad(format!("shadow darken {} must lie in (0, 1]", sh.darken));
            }
        }
        Ok(())
    }
}

/// Exact record of what [`gen_cloudy_stack`] did: the clean base plus per-day
/// cloud and shadow masks.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    base: MultibandImage,
    cloud_masks: Vec<Vec<bool>>,
    shadow_masks: Vec<Vec<bool>>,
}

impl GroundTruth {
    pub fn new(
        base: MultibandImage,
        cloud_masks: Vec<Vec<bool>>,
        shadow_masks: Vec<Vec<bool>>,
    ) -> Result<Self> {
        let n = base.pixels().len();
        for mask in cloud_masks.iter().chain(shadow_masks.iter()) {
            if mask.len() != n {
                return Err(Error::ImageGeometry {
                    width: base.width(),
                    height: base.height(),
                    len: mask.len(),
                });
            }
        }
        Ok(GroundTruth {
            base,
            cloud_masks,
            shadow_masks,
        })
    }

    pub fn base(&self) -> &MultibandImage {
        &self.base
    }

    pub fn days(&self) -> usize {
        self.cloud_masks.len()
    }

    pub fn cloud_mask(&self, day: usize) -> &[bool] {
        &self.cloud_masks[day]
    }

    pub fn shadow_mask(&self, day: usize) -> &[bool] {
        &self.shadow_masks[day]
    }

    /// True iff every day of the stack was cloudy at this site.
    pub fn all_days_cloudy(&self, site: usize) -> bool {
        self.cloud_masks.iter().all(|m| m[site])
    }

    /// True iff at least one day was clear at this site.
    pub fn ever_clear(&self, site: usize) -> bool {
        !self.all_days_cloudy(site)
    }
}

/// Generates the clean base scene. Deterministic for a given spec and seed;
/// per pixel, the SWIR, NIR and Red DNs are drawn in that order.
pub fn gen_base_scene(spec: &SceneSpec) -> Result<MultibandImage> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let n = spec.width * spec.height;

    let cum1 = spec.water_frac;
    let cum2 = cum1 + spec.fallow_frac;
    let cum3 = cum2 + spec.moderate_frac;
    let b1 = (cum1 * n as f64).round() as usize;
    let b2 = (cum2 * n as f64).round() as usize;
    let b3 = (cum3 * n as f64).round() as usize;

    let fallow = *spec.active_fallow_sig();
    let data: Vec<Pixel> = (0..n)
        .map(|i| {
            let sig = if i < b1 {
                &spec.water_sig
            } else if i < b2 {
                &fallow
            } else if i < b3 {
                &spec.moderate_sig
            } else {
                &spec.dense_sig
            };
            let swir = rng.range_u8(sig.swir.lo, sig.swir.hi);
            let nir = rng.range_u8(sig.nir.lo, sig.nir.hi);
            let red = rng.range_u8(sig.red.lo, sig.red.hi);
            Pixel::new(swir, nir, red)
        })
        .collect();
    MultibandImage::new(spec.width, spec.height, spec.start_date, data)
}

#[derive(Clone, Copy)]
struct Disk {
    cx: i64,
    cy: i64,
    r: i64,
}

impl Disk {
    fn covers(&self, x: i64, y: i64) -> bool {
        let dx = x - self.cx;
        let dy = y - self.cy;
        dx * dx + dy * dy <= self.r * self.r
    }

    fn for_each_site(&self, w: usize, h: usize, mut f: impl FnMut(usize)) {
        let y0 = (self.cy - self.r).max(0);
        let y1 = (self.cy + self.r).min(h as i64 - 1);
        for y in y0..=y1 {
            let x0 = (self.cx - self.r).max(0);
            let x1 = (self.cx + self.r).min(w as i64 - 1);
            for x in x0..=x1 {
                if self.covers(x, y) {
                    f(y as usize * w + x as usize);
                }
            }
        }
    }
}

/// Overlays `days` days of synthetic clouds on the base scene.
///
/// Day `i` carries date `base.date() + i`. Its content is the base, shifted
/// by the day's misregistration jitter when enabled (border pixels
/// replicate), darkened under cast shadows when enabled, and overwritten
/// with cloud DNs inside each disk. Ground truth records every cloud and
/// shadow pixel exactly.
///
/// The RNG consumption order per day is fixed: persistence decisions and
/// fresh-disk draws (from day 2 on), then the jitter offsets, then cloud
/// pixel DNs disk by disk in row-major order (Red, then SWIR clamped to
/// Red, then NIR).
pub fn gen_cloudy_stack(
    base: &MultibandImage,
    days: usize,
    cs: &CloudSpec,
    seed: u64,
) -> Result<(ImageStack, GroundTruth)> {
    cs.validate()?;
    if days == 0 {
        return Err(Error::InvalidCloudSpec {
            detail: "stack needs at least one day".into(),
        });
    }

    let (w, h) = (base.width(), base.height());
    let n = w * h;
    let mut rng = SplitMix64::new(seed);

    let fresh = |rng: &mut SplitMix64| Disk {
        cx: rng.range_i64(0, w as i64 - 1),
        cy: rng.range_i64(0, h as i64 - 1),
        r: rng.range_i64(cs.radius_min as i64, cs.radius_max as i64),
    };

    let mut disks: Vec<Disk> = (0..cs.count).map(|_| fresh(&mut rng)).collect();
    let mut images = Vec::with_capacity(days);
    let mut cloud_masks = Vec::with_capacity(days);
    let mut shadow_masks = Vec::with_capacity(days);

    for day in 0..days {
        if day > 0 {
            for d in disks.iter_mut() {
                if !rng.chance(cs.persistence) {
                    *d = fresh(&mut rng);
                }
            }
        }

        let (jx, jy) = if cs.jitter > 0 {
            let j = cs.jitter as i64;
            (rng.range_i64(-j, j), rng.range_i64(-j, j))
        } else {
            (0, 0)
        };

        // base content, displaced by the day's registration error
        let mut pixels: Vec<Pixel> = if jx == 0 && jy == 0 {
            base.pixels().to_vec()
        } else {
            let mut v = Vec::with_capacity(n);
            for y in 0..h as i64 {
                for x in 0..w as i64 {
                    let sx = (x - jx).clamp(0, w as i64 - 1) as usize;
                    let sy = (y - jy).clamp(0, h as i64 - 1) as usize;
                    v.push(base.pixel(sx, sy));
                }
            }
            v
        };

        let mut cmask = vec![false; n];
        for d in &disks {
            d.for_each_site(w, h, |i| cmask[i] = true);
        }

        let mut smask = vec![false; n];
        if let Some(sh) = &cs.shadow {
            for d in &disks {
                let cast = Disk {
                    cx: d.cx + sh.dx,
                    cy: d.cy + sh.dy,
                    r: d.r,
                };
                cast.for_each_site(w, h, |i| {
                    if !cmask[i] {
                        smask[i] = true;
                    }
                });
            }
            for (i, p) in pixels.iter_mut().enumerate() {
                if smask[i] {
                    let dim = |dn: u8| ((dn as f64) * sh.darken).round() as u8;
                    *p = Pixel::new(dim(p.swir), dim(p.nir), dim(p.red));
                }
            }
        }

        let sig = &cs.signature;
        for d in &disks {
            d.for_each_site(w, h, |i| {
                let red = rng.range_u8(sig.red.lo, sig.red.hi);
                let swir = rng.range_u8(sig.swir.lo, sig.swir.hi.min(red));
                let nir = rng.range_u8(sig.nir.lo, sig.nir.hi);
                pixels[i] = Pixel::new(swir, nir, red);
            });
        }

        let date = base.date() + Duration::days(day as i64);
        images.push(MultibandImage::new(w, h, date, pixels)?);
        cloud_masks.push(cmask);
        shadow_masks.push(smask);
    }

    let stack = ImageStack::new(images)?;
    let truth = GroundTruth::new(base.clone(), cloud_masks, shadow_masks)?;
    Ok((stack, truth))
}

/// Quality of a composite measured against ground truth.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct CompositeScore {
    /// Among sites clouded on at least one day: share restored to the base
    /// pixel exactly. 1.0 when no site was ever clouded.
    pub recovered: f64,
    /// Share of all sites that had at least one clear day yet still carry a
    /// cloud fill marker in the composite.
    pub residual_cloud: f64,
    /// Share of all sites equal to the base pixel exactly.
    pub exact_match: f64,
}

fn is_fill_marker(p: Pixel) -> bool {
    p == Pixel::splat(255) || p == Pixel::splat(0)
}

/// Scores a composite against the ground truth of its stack.
pub fn score_composite(c: &MultibandImage, gt: &GroundTruth) -> Result<CompositeScore> {
    if !c.same_dims(gt.base()) {
        return Err(Error::DimensionMismatch {
            expected_ctx: "ground-truth base".into(),
            expected_w: gt.base().width(),
            expected_h: gt.base().height(),
            found_ctx: "composite".into(),
            found_w: c.width(),
            found_h: c.height(),
        });
    }

    let n = c.pixels().len();
    let mut exact = 0usize;
    let mut residual = 0usize;
    let mut affected = 0usize;
    let mut affected_recovered = 0usize;

    for i in 0..n {
        let matches_base = c.pixels()[i] == gt.base().pixels()[i];
        if matches_base {
            exact += 1;
        }
        if gt.ever_clear(i) && is_fill_marker(c.pixels()[i]) {
            residual += 1;
        }
        let ever_cloudy = (0..gt.days()).any(|d| gt.cloud_mask(d)[i]);
        if ever_cloudy {
            affected += 1;
            if matches_base {
                affected_recovered += 1;
            }
        }
    }

    Ok(CompositeScore {
        recovered: if affected == 0 {
            1.0
        } else {
            affected_recovered as f64 / affected as f64
        },
        residual_cloud: residual as f64 / n as f64,
        exact_match: exact as f64 / n as f64,
    })
}

/// Convenience check used by generator tests: no pixel of the base may look
/// like a cloud under the given bracket.
pub fn base_is_cloud_free(base: &MultibandImage, bracket: CloudBracket) -> bool {
    base.pixels().iter().all(|&p| !is_cloud(p, bracket))
}
