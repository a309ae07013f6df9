//! Acceptance: the full command-line chain on a generated 256x256, 7-day
//! stack with moving clouds — generate, composite, extract, classify, score.

use std::fs;
use std::process::Command;
use std::time::Instant;

use crast_core::cloudmask::CloudBracket;
use crast_core::compositor::composite_hybrid;
use crast_core::raster::{load_stack, read_classmap, read_raster, write_raster};
use crast_core::vegindex::class_histogram;
use crast_core::LandClass;

fn crast(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_crast"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn end_to_end_chain_scores_zero_residual_cloud() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();

    let cfg_path = dir.path().join("scene.cfg");
    fs::write(
        &cfg_path,
        "width = 256\nheight = 256\nseed = 2008\ndays = 7\npersistence = 0.0\n",
    )
    .unwrap();

    let truth = dir.path().join("truth");
    let out = crast(&[
        "gen",
        "--config",
        cfg_path.to_str().unwrap(),
        "-o",
        truth.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "gen: {out:?}");

    let day_paths: Vec<String> = (0..7)
        .map(|d| truth.join(format!("day_{d:02}.crast")).display().to_string())
        .collect();
    let day_strs: Vec<&str> = day_paths.iter().map(|s| s.as_str()).collect();

    let composite_path = dir.path().join("composite.crast");
    let mut args = vec![
        "composite",
        "--method",
        "hybrid",
        "--bracket",
        "150:255",
        "-o",
        composite_path.to_str().unwrap(),
    ];
    args.extend(&day_strs);
    let out = crast(&args);
    assert_eq!(out.status.code(), Some(0), "composite: {out:?}");

    // the CLI output is byte-identical to the library call
    let stack = load_stack(&day_paths).unwrap();
    let lib = composite_hybrid(&stack, CloudBracket::default());
    let lib_path = dir.path().join("lib.crast");
    write_raster(&lib, &lib_path).unwrap();
    assert_eq!(
        fs::read(&composite_path).unwrap(),
        fs::read(&lib_path).unwrap()
    );

    let ndvi_path = dir.path().join("composite_ndvi.crast");
    let out = crast(&[
        "ndvi",
        "-o",
        ndvi_path.to_str().unwrap(),
        composite_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "ndvi: {out:?}");

    let class_path = dir.path().join("composite_class.crast");
    let out = crast(&[
        "classify",
        "--hybrid-mode",
        "-o",
        class_path.to_str().unwrap(),
        ndvi_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "classify: {out:?}");

    let out = crast(&[
        "score",
        "--truth",
        truth.to_str().unwrap(),
        composite_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "score: {out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    let residual: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("residual_cloud_fraction "))
        .expect("score prints residual_cloud_fraction")
        .parse()
        .unwrap();
    assert_eq!(residual, 0.0, "score output:\n{stdout}");

    // with moving clouds fully removed, no marker survives and the class map
    // carries no cloud class
    let composite = read_raster(&composite_path).unwrap();
    assert!(composite
        .pixels()
        .iter()
        .all(|&p| p != crast_core::Pixel::splat(255)));
    let (cm, _) = read_classmap(&class_path).unwrap();
    assert_eq!(class_histogram(&cm).count(LandClass::Cloud), 0);

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!("PASS | gen > composite > ndvi > classify > score at 256x256x7 in {elapsed:?}, residual 0");
}
