//! NDVI extraction, class slicing, class histograms and vegetated statistics.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::{ClassMap, LandClass, MultibandImage, NdviRaster};

/// Upper bounds of the NDVI slices, in index units.
///
/// The partition is: water `[-1, water_hi)`, cloud `[water_hi, cloud_hi)`,
/// fallow `[cloud_hi, fallow_hi)`, moderate `[fallow_hi, moderate_hi)`,
/// dense `[moderate_hi, 1]`. Lower bounds are inclusive, upper bounds
/// exclusive, except that dense includes 1 and water includes -1.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ClassBreaks {
    water_hi: f32,
    cloud_hi: f32,
    fallow_hi: f32,
    moderate_hi: f32,
}

impl ClassBreaks {
    pub fn new(water_hi: f32, cloud_hi: f32, fallow_hi: f32, moderate_hi: f32) -> Result<Self> {
        let seq = [-1.0, water_hi, cloud_hi, fallow_hi, moderate_hi, 1.0];
        let ascending = |w: &[f32]| matches!(w[0].partial_cmp(&w[1]), Some(std::cmp::Ordering::Less));
        if !seq.windows(2).all(ascending) {
            return Err(Error::InvalidBreaks {
                detail: format!(
                    "breaks must be strictly ascending within [-1, 1], got \
                     {water_hi}, {cloud_hi}, {fallow_hi}, {moderate_hi}"
                ),
            });
        }
        Ok(ClassBreaks {
            water_hi,
            cloud_hi,
            fallow_hi,
            moderate_hi,
        })
    }

    pub fn water_hi(self) -> f32 {
        self.water_hi
    }

    pub fn cloud_hi(self) -> f32 {
        self.cloud_hi
    }

    pub fn fallow_hi(self) -> f32 {
        self.fallow_hi
    }

    pub fn moderate_hi(self) -> f32 {
        self.moderate_hi
    }
}

impl Default for ClassBreaks {
    /// Water to 0, clouds to 0.09, fallow to 0.25, moderate to 0.5.
    fn default() -> Self {
        ClassBreaks {
            water_hi: 0.0,
            cloud_hi: 0.09,
            fallow_hi: 0.25,
            moderate_hi: 0.5,
        }
    }
}

/// NDVI of one image: `(NIR - Red) / (NIR + Red)` per pixel.
///
/// A zero denominator (both bands 0, e.g. a zero-masked cloud) yields 0,
/// which lands in the cloud slice. The SWIR band plays no part.
pub fn ndvi(img: &MultibandImage) -> NdviRaster {
    let values: Vec<f32> = img
        .pixels()
        .par_iter()
        .map(|p| {
            let nir = p.nir as f32;
            let red = p.red as f32;
            if nir + red == 0.0 {
                0.0
            } else {
                (nir - red) / (nir + red)
            }
        })
        .collect();
    NdviRaster::new(img.width(), img.height(), values)
        .expect("ndvi values lie in [-1, 1] by construction")
}

/// Slices one NDVI value into its land-cover class.
///
/// In hybrid mode the cloud class is reserved for the exact value 0 (the
/// marker produced by 255-masked clouds); the rest of `[0, cloud_hi)` falls
/// to fallow. Standard mode gives the whole `[water_hi, cloud_hi)` slice to
/// clouds.
pub fn classify_value(v: f32, breaks: ClassBreaks, hybrid_mode: bool) -> LandClass {
    if v < breaks.water_hi {
        return LandClass::Water;
    }
    if hybrid_mode {
        if v == 0.0 {
            return LandClass::Cloud;
        }
    } else if v < breaks.cloud_hi {
        return LandClass::Cloud;
    }
    if v < breaks.fallow_hi {
        return LandClass::Fallow;
    }
    if v < breaks.moderate_hi {
        return LandClass::Moderate;
    }
    LandClass::Dense
}

/// Slices an NDVI surface into a class map.
pub fn classify(nv: &NdviRaster, breaks: ClassBreaks, hybrid_mode: bool) -> ClassMap {
    let codes: Vec<LandClass> = nv
        .values()
        .par_iter()
        .map(|&v| classify_value(v, breaks, hybrid_mode))
        .collect();
    ClassMap::new(nv.width(), nv.height(), codes).expect("classify preserves geometry")
}

/// Pixel counts per land-cover class.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct ClassHistogram {
    counts: [u64; LandClass::COUNT],
}

impl ClassHistogram {
    pub fn count(&self, class: LandClass) -> u64 {
        self.counts[class.code() as usize]
    }

    pub fn counts(&self) -> &[u64; LandClass::COUNT] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Counts pixels per class.
pub fn class_histogram(cm: &ClassMap) -> ClassHistogram {
    let mut counts = [0u64; LandClass::COUNT];
    for c in cm.codes() {
        counts[c.code() as usize] += 1;
    }
    ClassHistogram { counts }
}

/// Summary of the vegetated portion (moderate + dense classes) of an NDVI
/// surface.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct VegStats {
    pub mean: f64,
    pub min: f32,
    pub max: f32,
    pub count: usize,
}

/// Mean, min, max and count of NDVI over pixels classed moderate or dense.
/// Returns `None` when no pixel is vegetated.
pub fn ndvi_stats(nv: &NdviRaster, cm: &ClassMap) -> Option<VegStats> {
    assert_eq!(
        (nv.width(), nv.height()),
        (cm.width(), cm.height()),
        "ndvi surface and class map must share dimensions"
    );

    let mut sum = 0.0f64;
    let mut count = 0usize;
    let mut min = f32::INFINITY;
    let mut max = f32::NEG_INFINITY;
    for (&v, &c) in nv.values().iter().zip(cm.codes()) {
        if matches!(c, LandClass::Moderate | LandClass::Dense) {
            sum += v as f64;
            count += 1;
            min = min.min(v);
            max = max.max(v);
        }
    }
    if count == 0 {
        return None;
    }
    Some(VegStats {
        mean: sum / count as f64,
        min,
        max,
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Pixel;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn day(d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2008, 5, d).unwrap()
    }

    #[test]
    fn ndvi_formula_and_conventions() {
        let img = MultibandImage::new(
            4,
            1,
            day(1),
            vec![
                Pixel::new(10, 100, 50),
                Pixel::new(0, 70, 70),
                Pixel::splat(255),
                Pixel::splat(0),
            ],
        )
        .unwrap();
        let nv = ndvi(&img);
        assert!((nv.values()[0] - 1.0 / 3.0).abs() < 1e-6);
        assert_eq!(nv.values()[1], 0.0); // nir == red
        assert_eq!(nv.values()[2], 0.0); // hybrid marker
        assert_eq!(nv.values()[3], 0.0); // zero denominator
    }

    #[test]
    fn ndvi_ignores_swir() {
        let a = MultibandImage::new(1, 1, day(1), vec![Pixel::new(0, 120, 40)]).unwrap();
        let b = MultibandImage::new(1, 1, day(1), vec![Pixel::new(255, 120, 40)]).unwrap();
        assert_eq!(ndvi(&a).values(), ndvi(&b).values());
    }

    #[test]
    fn classify_table_values() {
        let b = ClassBreaks::default();
        assert_eq!(classify_value(-0.2, b, false), LandClass::Water);
        assert_eq!(classify_value(-1.0, b, false), LandClass::Water);
        assert_eq!(classify_value(0.0, b, false), LandClass::Cloud);
        assert_eq!(classify_value(0.316, b, false), LandClass::Moderate);
        assert_eq!(classify_value(0.316, b, true), LandClass::Moderate);
        assert_eq!(classify_value(1.0, b, false), LandClass::Dense);
        // boundary ownership: lower bound inclusive
        assert_eq!(classify_value(0.09, b, false), LandClass::Fallow);
        assert_eq!(classify_value(0.25, b, false), LandClass::Moderate);
        assert_eq!(classify_value(0.5, b, false), LandClass::Dense);
    }

    #[test]
    fn hybrid_mode_narrows_the_cloud_slice_to_exact_zero() {
        let b = ClassBreaks::default();
        assert_eq!(classify_value(0.05, b, false), LandClass::Cloud);
        assert_eq!(classify_value(0.05, b, true), LandClass::Fallow);
        assert_eq!(classify_value(0.0, b, true), LandClass::Cloud);
    }

    #[test]
    fn breaks_must_ascend() {
        assert!(ClassBreaks::new(0.0, 0.09, 0.25, 0.5).is_ok());
        assert!(ClassBreaks::new(0.0, 0.0, 0.25, 0.5).is_err());
        assert!(ClassBreaks::new(0.2, 0.1, 0.25, 0.5).is_err());
        assert!(ClassBreaks::new(0.0, 0.09, 0.25, 1.0).is_err());
    }

    #[test]
    fn histogram_counts_and_sums() {
        let cm = ClassMap::new(10, 10, vec![LandClass::Water; 100]).unwrap();
        let h = class_histogram(&cm);
        assert_eq!(h.counts(), &[100, 0, 0, 0, 0]);
        assert_eq!(h.total(), 100);

        let one_each = ClassMap::new(5, 1, LandClass::ALL.to_vec()).unwrap();
        assert_eq!(class_histogram(&one_each).counts(), &[1, 1, 1, 1, 1]);
    }

    #[test]
    fn histogram_matches_counting_oracle() {
        let codes: Vec<LandClass> = (0..97)
            .map(|i| LandClass::from_code(((i * 13 + 5) % 5) as u8).unwrap())
            .collect();
        let cm = ClassMap::new(97, 1, codes.clone()).unwrap();
        let h = class_histogram(&cm);
        for class in LandClass::ALL {
            let expected = codes.iter().filter(|&&c| c == class).count() as u64;
            assert_eq!(h.count(class), expected);
        }
    }

    #[test]
    fn vegetated_stats() {
        let nv = NdviRaster::new(4, 1, vec![0.3, 0.4, -0.5, 0.05]).unwrap();
        let cm = classify(&nv, ClassBreaks::default(), false);
        let stats = ndvi_stats(&nv, &cm).unwrap();
        assert!((stats.mean - 0.35).abs() < 1e-7);
        assert_eq!(stats.count, 2);
        assert!((stats.min - 0.3).abs() < 1e-7);
        assert!((stats.max - 0.4).abs() < 1e-7);

        // constant dense surface
        let dense = NdviRaster::new(3, 1, vec![0.6; 3]).unwrap();
        let dense_cm = classify(&dense, ClassBreaks::default(), false);
        let s = ndvi_stats(&dense, &dense_cm).unwrap();
        assert!((s.mean - 0.6).abs() < 1e-6);

        // nothing vegetated
        let bare = NdviRaster::new(2, 1, vec![-0.2, 0.05]).unwrap();
        let bare_cm = classify(&bare, ClassBreaks::default(), false);
        assert_eq!(ndvi_stats(&bare, &bare_cm), None);
    }

    fn arb_pixel() -> impl Strategy<Value = Pixel> {
        (any::<u8>(), any::<u8>(), any::<u8>()).prop_map(|(s, n, r)| Pixel::new(s, n, r))
    }

    proptest! {
        #[test]
        fn ndvi_stays_in_range(px in proptest::collection::vec(arb_pixel(), 1..64)) {
            let img = MultibandImage::new(px.len(), 1, day(1), px).unwrap();
            let nv = ndvi(&img);
            prop_assert!(nv.values().iter().all(|v| (-1.0..=1.0).contains(v)));
        }

        #[test]
        fn swapping_nir_and_red_negates_ndvi(n in any::<u8>(), r in any::<u8>()) {
            let a = MultibandImage::new(1, 1, day(1), vec![Pixel::new(0, n, r)]).unwrap();
            let b = MultibandImage::new(1, 1, day(1), vec![Pixel::new(0, r, n)]).unwrap();
            let va = ndvi(&a).values()[0];
            let vb = ndvi(&b).values()[0];
            prop_assert!((va + vb).abs() < 1e-6);
        }

        #[test]
        fn classification_is_total_and_histogram_sums(
            vals in proptest::collection::vec(-1.0f32..=1.0, 1..128),
            hybrid in any::<bool>(),
        ) {
            let n = vals.len();
            let nv = NdviRaster::new(n, 1, vals).unwrap();
            let cm = classify(&nv, ClassBreaks::default(), hybrid);
            prop_assert_eq!(class_histogram(&cm).total(), n as u64);
        }

        #[test]
        fn modes_agree_outside_the_low_positive_slice(v in -1.0f32..=1.0) {
            let b = ClassBreaks::default();
            let std = classify_value(v, b, false);
            let hyb = classify_value(v, b, true);
            if v > 0.0 && v < b.cloud_hi() {
                prop_assert_eq!(std, LandClass::Cloud);
                prop_assert_eq!(hyb, LandClass::Fallow);
            } else {
                prop_assert_eq!(std, hyb);
            }
        }
    }
}
