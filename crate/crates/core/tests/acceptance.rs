//! Acceptance suite: every contract the library ships with, one test per
//! criterion, each printing a PASS line (visible with `--nocapture`).

use std::time::Instant;

use chrono::NaiveDate;
use crast_core::cloudmask::{mask_stack, CloudBracket};
use crast_core::compositor::{
    composite_hybrid, composite_max, composite_min_naive, composite_min_refined,
};
use crast_core::histo::{adaptive_bracket, detect_inflection, BandHistogram, InflectionParams};
use crast_core::raster::{
    export_ppm_fcc, read_raster, resample_image, resample_ndvi, resample_plane, write_raster,
};
use crast_core::scenegen::rng::SplitMix64;
use crast_core::scenegen::{gen_base_scene, gen_cloudy_stack, score_composite, CloudSpec, SceneSpec};
use crast_core::vegindex::{class_histogram, classify, classify_value, ndvi, ClassBreaks};
use crast_core::{ImageStack, LandClass, MultibandImage, NdviRaster, Pixel};

fn day(d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(2008, 5, 1).unwrap() + chrono::Duration::days(d as i64 - 1)
}

/// Deterministic random stack: 1..=9 images of up to 32x32, sequential dates.
fn random_stack(seed: u64) -> ImageStack {
    let mut rng = SplitMix64::new(seed);
    let w = rng.range_i64(1, 32) as usize;
    let h = rng.range_i64(1, 32) as usize;
    let n = rng.range_i64(1, 9) as usize;
    let images = (0..n)
        .map(|k| {
            let data = (0..w * h)
                .map(|_| {
                    Pixel::new(
                        rng.range_u8(0, 255),
                        rng.range_u8(0, 255),
                        rng.range_u8(0, 255),
                    )
                })
                .collect();
            MultibandImage::new(w, h, day(1 + k as u32), data).unwrap()
        })
        .collect();
    ImageStack::new(images).unwrap()
}

fn golden_window() -> ImageStack {
    let pixels = [
        Pixel::new(81, 181, 68),
        Pixel::new(44, 158, 53),
        Pixel::new(76, 175, 49),
    ];
    ImageStack::new(
        pixels
            .iter()
            .enumerate()
            .map(|(i, &p)| MultibandImage::new(1, 1, day(2 + i as u32), vec![p]).unwrap())
            .collect(),
    )
    .unwrap()
}

#[test]
fn golden_three_day_minimum_composites() {
    let started = Instant::now();
    let stack = golden_window();

    let naive = composite_min_naive(&stack);
    assert_eq!(naive.pixels()[0], Pixel::new(44, 158, 49));

    let refined = composite_min_refined(&stack);
    assert_eq!(refined.pixels()[0], Pixel::new(76, 175, 49));

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("PASS | golden three-day window: naive min (44,158,49), refined min (76,175,49) in {elapsed:?}");
}

#[test]
fn refined_and_hybrid_outputs_keep_pixel_purity() {
    let bracket = CloudBracket::default();
    for seed in 0..500u64 {
        let stack = random_stack(seed);
        let n_sites = stack.width() * stack.height();

        let refined = composite_min_refined(&stack);
        for i in 0..n_sites {
            let out = refined.pixels()[i];
            assert!(
                stack.images().iter().any(|img| img.pixels()[i] == out),
                "seed {seed} site {i}: refined output not among inputs"
            );
        }

        let hybrid = composite_hybrid(&stack, bracket);
        let masked = mask_stack(&stack, bracket, 255).unwrap();
        for i in 0..n_sites {
            let out = hybrid.pixels()[i];
            assert!(
                masked.images().iter().any(|img| img.pixels()[i] == out),
                "seed {seed} site {i}: hybrid output not among masked inputs"
            );
            // the 255 marker appears iff every input was cloud at the site
            let all_cloudy = stack
                .images()
                .iter()
                .all(|img| crast_core::cloudmask::is_cloud(img.pixels()[i], bracket));
            assert_eq!(out == Pixel::splat(255), all_cloudy, "seed {seed} site {i}");
        }
    }

    // the per-band minimum violates membership on the golden window
    let stack = golden_window();
    let naive = composite_min_naive(&stack);
    let out = naive.pixels()[0];
    assert_eq!(out, Pixel::new(44, 158, 49));
    assert!(
        stack.images().iter().all(|img| img.pixels()[0] != out),
        "the synthesized pixel must not be any input pixel"
    );

    println!("PASS | pixel purity holds on 500 random stacks; naive min violates it");
}

#[test]
fn hierarchical_fold_equals_global_argmin_oracle() {
    for seed in 0..500u64 {
        let stack = random_stack(seed);
        let refined = composite_min_refined(&stack);

        // independent oracle: earliest global argmin of the Red DN per site
        let images = stack.images();
        for i in 0..stack.width() * stack.height() {
            let mut best = images[0].pixels()[i];
            for img in &images[1..] {
                let p = img.pixels()[i];
                if p.red < best.red {
                    best = p;
                }
            }
            assert_eq!(
                refined.pixels()[i], best,
                "seed {seed} site {i}: fold disagrees with scan"
            );
        }
        assert_eq!(refined.date(), images[0].date());
    }
    println!("PASS | hierarchical pairwise fold equals brute-force argmin on 500 stacks");
}

#[test]
fn hybrid_persistence_theorem_at_full_scale() {
    let started = Instant::now();
    let bracket = CloudBracket::default();
    let spec = SceneSpec {
        width: 256,
        height: 256,
        seed: 406,
        ..SceneSpec::default()
    };
    let base = gen_base_scene(&spec).unwrap();
    let n = base.pixels().len();

    // static clouds: day-one disks persist through all seven days
    let static_clouds = CloudSpec {
        persistence: 1.0,
        ..CloudSpec::default()
    };
    let (stack, gt) = gen_cloudy_stack(&base, 7, &static_clouds, 71).unwrap();
    let composite = composite_hybrid(&stack, bracket);

    let mut marker_sites = 0usize;
    for i in 0..n {
        let all_cloudy = gt.all_days_cloudy(i);
        let is_marker = composite.pixels()[i] == Pixel::splat(255);
        assert_eq!(
            is_marker, all_cloudy,
            "site {i}: marker {is_marker} vs all-days-cloudy {all_cloudy}"
        );
        if all_cloudy {
            marker_sites += 1;
        } else {
            assert_eq!(
                composite.pixels()[i],
                base.pixels()[i],
                "site {i}: composite must restore the base exactly"
            );
        }
    }
    assert!(marker_sites > 0, "static clouds must leave persistent sites");

    // moving clouds: every site sees at least one clear day
    let moving_clouds = CloudSpec {
        persistence: 0.0,
        ..CloudSpec::default()
    };
    let (stack, gt) = gen_cloudy_stack(&base, 7, &moving_clouds, 72).unwrap();
    assert!(
        (0..n).all(|i| gt.ever_clear(i)),
        "moving-cloud stack must leave no always-cloudy site"
    );
    let composite = composite_hybrid(&stack, bracket);
    let score = score_composite(&composite, &gt).unwrap();
    assert_eq!(score.residual_cloud, 0.0);
    assert_eq!(score.exact_match, 1.0);

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!("PASS | hybrid persistence theorem at 256x256x7 in {elapsed:?} (marker sites: {marker_sites})");
}

#[test]
fn per_band_extrema_match_naive_oracles() {
    for seed in 0..500u64 {
        let stack = random_stack(seed);
        let maxed = composite_max(&stack);
        let minned = composite_min_naive(&stack);
        for i in 0..stack.width() * stack.height() {
            let mut smax = (0u8, 0u8, 0u8);
            let mut smin = (255u8, 255u8, 255u8);
            for img in stack.images() {
                let p = img.pixels()[i];
                smax = (smax.0.max(p.swir), smax.1.max(p.nir), smax.2.max(p.red));
                smin = (smin.0.min(p.swir), smin.1.min(p.nir), smin.2.min(p.red));
            }
            assert_eq!(maxed.pixels()[i], Pixel::new(smax.0, smax.1, smax.2));
            assert_eq!(minned.pixels()[i], Pixel::new(smin.0, smin.1, smin.2));
        }
    }
    println!("PASS | per-band max/min equal exact extrema on 500 random stacks");
}

#[test]
fn ndvi_range_zero_rule_and_class_slices() {
    // range over random pixels, and exact zero whenever NIR equals Red
    let mut rng = SplitMix64::new(606);
    let data: Vec<Pixel> = (0..4096)
        .map(|_| {
            Pixel::new(
                rng.range_u8(0, 255),
                rng.range_u8(0, 255),
                rng.range_u8(0, 255),
            )
        })
        .collect();
    let img = MultibandImage::new(64, 64, day(1), data).unwrap();
    let nv = ndvi(&img);
    assert!(nv.values().iter().all(|v| (-1.0..=1.0).contains(v)));

    for v in 0..=255u8 {
        let one = MultibandImage::new(1, 1, day(1), vec![Pixel::new(9, v, v)]).unwrap();
        assert_eq!(ndvi(&one).values()[0], 0.0, "nir = red = {v}");
    }

    // classification is a partition whose totals match the pixel count
    let breaks = ClassBreaks::default();
    for hybrid in [false, true] {
        let cm = classify(&nv, breaks, hybrid);
        assert_eq!(class_histogram(&cm).total(), 4096);
    }

    // named slice values
    assert_eq!(classify_value(-0.2, breaks, false), LandClass::Water);
    assert_eq!(classify_value(0.316, breaks, false), LandClass::Moderate);
    assert_eq!(classify_value(0.0, breaks, false), LandClass::Cloud);
    assert_eq!(classify_value(0.0, breaks, true), LandClass::Cloud);

    // exhaustive sweep: the two modes differ exactly on 0 < v < 0.09
    let mut differences = 0usize;
    for i in 0..=10_000i32 {
        let v = (i - 5_000) as f32 / 5_000.0;
        let std = classify_value(v, breaks, false);
        let hyb = classify_value(v, breaks, true);
        if v > 0.0 && v < breaks.cloud_hi() {
            assert_eq!(std, LandClass::Cloud, "v = {v}");
            assert_eq!(hyb, LandClass::Fallow, "v = {v}");
            differences += 1;
        } else {
            assert_eq!(std, hyb, "v = {v}");
        }
    }
    assert!(differences > 0);

    println!("PASS | ndvi range, exact-zero rule, slice values, and mode sweep over 10001 values ({differences} differ)");
}

#[test]
fn inflection_detection_and_bracket_fallback() {
    // 5% of pixels surge over [180, 210] with a steep front; flat elsewhere
    // above 150
    let mut counts = [0u64; 256];
    counts[90] = 190_000;
    for (i, c) in [0u64, 400, 800, 1200, 1600, 2000].iter().enumerate() {
        counts[180 + i] = *c;
    }
    counts[186..=210].fill(160);
    let surge = BandHistogram::from_counts(counts);
    assert_eq!(surge.total(), 200_000);
    let in_surge: u64 = (180..=210).map(|dn| surge.count(dn as u8)).sum();
    assert_eq!(in_surge, 10_000);

    let dn = detect_inflection(&surge, InflectionParams::default()).expect("surge detected");
    assert!(
        (175..=185).contains(&dn),
        "detected {dn}, expected within 5 of 180"
    );

    let flat = BandHistogram::from_counts([100; 256]);
    assert_eq!(detect_inflection(&flat, InflectionParams::default()), None);

    // an off-monsoon image keeps the general bracket
    let calm = MultibandImage::filled(64, 64, day(1), Pixel::new(40, 90, 60)).unwrap();
    let bracket = adaptive_bracket(&calm, CloudBracket::default());
    assert_eq!((bracket.lo(), bracket.hi()), (150, 255));

    println!("PASS | inflection detected at {dn} on the surge; flat histogram falls back to 150:255");
}

#[test]
fn misregistration_grows_dark_features() {
    let breaks = ClassBreaks::default();
    for seed in 1..=20u64 {
        let spec = SceneSpec {
            seed,
            ..SceneSpec::default()
        };
        let base = gen_base_scene(&spec).unwrap();
        let base_water =
            class_histogram(&classify(&ndvi(&base), breaks, false)).count(LandClass::Water);

        let cs = CloudSpec {
            count: 0,
            jitter: 1,
            ..CloudSpec::default()
        };
        let (stack, _) = gen_cloudy_stack(&base, 7, &cs, seed * 31 + 7).unwrap();
        let composite = composite_min_refined(&stack);
        let water =
            class_histogram(&classify(&ndvi(&composite), breaks, false)).count(LandClass::Water);
        assert!(
            water >= base_water,
            "seed {seed}: water area shrank from {base_water} to {water}"
        );
    }
    println!("PASS | refined-min water area never shrinks under 1-pixel jitter (20 runs)");
}

#[test]
fn determinism_round_trip_and_resampling() {
    let dir = tempfile::tempdir().unwrap();

    // byte-identical outputs across repeated runs and across thread counts
    let stack = {
        let base = gen_base_scene(&SceneSpec::default()).unwrap();
        let (stack, _) = gen_cloudy_stack(&base, 7, &CloudSpec::default(), 99).unwrap();
        stack
    };
    let bracket = CloudBracket::default();
    let reference = composite_hybrid(&stack, bracket);
    assert_eq!(reference, composite_hybrid(&stack, bracket));

    let mut export_bytes: Vec<Vec<u8>> = Vec::new();
    for threads in [1usize, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let composites = pool.install(|| {
            [
                composite_hybrid(&stack, bracket),
                composite_max(&stack),
                composite_min_naive(&stack),
                composite_min_refined(&stack),
            ]
        });
        assert_eq!(composites[0], reference, "{threads} threads");
        let nv = pool.install(|| ndvi(&composites[0]));
        assert_eq!(nv, ndvi(&reference));

        let mut bytes = Vec::new();
        for (k, c) in composites.iter().enumerate() {
            let crast_path = dir.path().join(format!("c{threads}_{k}.crast"));
            write_raster(c, &crast_path).unwrap();
            bytes.extend(std::fs::read(&crast_path).unwrap());
        }
        let ppm_path = dir.path().join(format!("c{threads}.ppm"));
        pool.install(|| export_ppm_fcc(&composites[0], &ppm_path)).unwrap();
        bytes.extend(std::fs::read(&ppm_path).unwrap());
        export_bytes.push(bytes);
    }
    assert!(export_bytes.windows(2).all(|w| w[0] == w[1]));

    // container round trip on 100 random images
    let mut rng = SplitMix64::new(2025);
    for i in 0..100 {
        let w = rng.range_i64(1, 24) as usize;
        let h = rng.range_i64(1, 24) as usize;
        let data = (0..w * h)
            .map(|_| {
                Pixel::new(
                    rng.range_u8(0, 255),
                    rng.range_u8(0, 255),
                    rng.range_u8(0, 255),
                )
            })
            .collect();
        let img = MultibandImage::new(w, h, day(1 + (i % 20)), data).unwrap();
        let p1 = dir.path().join("rt1.crast");
        let p2 = dir.path().join("rt2.crast");
        write_raster(&img, &p1).unwrap();
        let back = read_raster(&p1).unwrap();
        assert_eq!(back, img);
        write_raster(&back, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    // cubic resampling: identity at scale 1, linear ramps reproduced
    let nv = NdviRaster::new(
        16,
        4,
        (0..64).map(|i| (i as f32 - 32.0) / 40.0).collect(),
    )
    .unwrap();
    assert_eq!(resample_ndvi(&nv, 1.0).unwrap(), nv);

    let img = MultibandImage::from_fn(9, 7, day(3), |x, y| {
        Pixel::new((x * 11) as u8, (y * 13) as u8, ((x * y) % 251) as u8)
    })
    .unwrap();
    assert_eq!(resample_image(&img, 1.0).unwrap(), img);

    let ramp: Vec<f32> = (0..32).map(|i| i as f32 * 10.0).collect();
    let (out, ow, _) = resample_plane(&ramp, 32, 1, 2.0).unwrap();
    for (o, &v) in out.iter().enumerate().take(ow) {
        let x = o as f64 / 2.0;
        if (1.0..=30.0).contains(&x) {
            let expected = 10.0 * x;
            assert!(
                (v as f64 - expected).abs() < 1e-4,
                "sample {o}: {v} vs {expected}"
            );
        }
    }

    println!("PASS | byte-identical across runs and 1/4/8-thread pools; 100 round trips; cubic identity and ramps");
}
