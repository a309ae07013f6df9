//! `crast` — batch front end for cloud removal by time compositing.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors (unreadable
//! or malformed files, invalid specs). Diagnostics go to stderr; output files
//! carry nothing but data.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use crast_core::cloudmask::{cloud_fraction, mask_clouds, CloudBracket};
use crast_core::compositor::{
    composite_hybrid, composite_max, composite_min_naive, composite_min_refined,
};
use crast_core::histo::{adaptive_bracket, band_histogram};
use crast_core::raster::{
    export_ppm_classmap, export_ppm_fcc, load_stack, read_classmap, read_ndvi, read_pgm_mask,
    read_raster, resample_image, resample_ndvi, write_classmap, write_ndvi, write_pgm_mask,
    write_raster,
};
use crast_core::scenegen::{
    gen_base_scene, gen_cloudy_stack, parse_config, score_composite, GenConfig, GroundTruth,
};
use crast_core::vegindex::{classify, ndvi, ClassBreaks};
use crast_core::{Band, ImageStack, MultibandImage};

#[derive(Parser)]
#[command(
    name = "crast",
    version,
    about = "Cloud removal from co-registered satellite image time series",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Method {
    /// Mask clouds to 0, then per-band maximum
    Max,
    /// Per-band minimum (synthesizes pixels; kept as a baseline)
    MinNaive,
    /// Whole pixel from the date with minimum Red DN
    MinRefined,
    /// Mask clouds to 255, then refined minimum
    Hybrid,
}

fn parse_bracket(s: &str) -> Result<CloudBracket, String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: u8 = lo.parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
    let hi: u8 = hi.parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
    CloudBracket::new(lo, hi).map_err(|e| e.to_string())
}

fn parse_fill(s: &str) -> Result<u8, String> {
    match s {
        "0" => Ok(0),
        "255" => Ok(255),
        other => Err(format!("fill must be 0 or 255, got `{other}`")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Cloud-mask one image: recode cloud pixels to the fill DN on all bands
    Mask {
        /// Red-band cloud bracket, inclusive
        #[arg(long, value_parser = parse_bracket, default_value = "150:255")]
        bracket: CloudBracket,
        /// Recode target: 0 (max compositing) or 255 (hybrid)
        #[arg(long, default_value = "0", value_parser = parse_fill)]
        fill: u8,
        /// Refine the bracket from the image's Red-band histogram first
        #[arg(long)]
        adaptive: bool,
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
        input: PathBuf,
    },
    /// Composite a stack of images into one
    Composite {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, value_parser = parse_bracket, default_value = "150:255")]
        bracket: CloudBracket,
        /// Refine the bracket per image before masking (max and hybrid)
        #[arg(long)]
        adaptive: bool,
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Extract NDVI from a 3-band image
    Ndvi {
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
        input: PathBuf,
    },
    /// Slice an NDVI raster into land-cover classes
    Classify {
        /// Reserve the cloud class for NDVI exactly 0 (hybrid composites)
        #[arg(long)]
        hybrid_mode: bool,
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
        input: PathBuf,
    },
    /// Dump a band histogram as 256 CSV lines `dn,count`
    Hist {
        #[arg(long, default_value = "red")]
        band: Band,
        /// Output file; stdout when omitted
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
        input: PathBuf,
    },
    /// Report the adaptive cloud bracket for an image
    Bracket {
        #[arg(long, value_parser = parse_bracket, default_value = "150:255")]
        bracket: CloudBracket,
        input: PathBuf,
    },
    /// Generate a synthetic scene stack with ground-truth masks
    Gen {
        /// key = value config file; built-in defaults when omitted
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Override the scene seed from the config
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long, value_name = "DIR")]
        output: PathBuf,
    },
    /// Score a composite against generated ground truth
    Score {
        /// Directory written by `gen`
        #[arg(long, value_name = "DIR")]
        truth: PathBuf,
        composite: PathBuf,
    },
    /// Export a viewable PPM (false colour for images, palette for class maps)
    Export {
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
        input: PathBuf,
    },
    /// Resample an image or NDVI raster by cubic convolution
    Resample {
        #[arg(long)]
        scale: f64,
        #[arg(short, long, value_name = "FILE")]
        output: PathBuf,
        input: PathBuf,
    },
    /// Composite, extract NDVI, classify and export in one run
    Pipeline {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, value_parser = parse_bracket, default_value = "150:255")]
        bracket: CloudBracket,
        #[arg(long)]
        adaptive: bool,
        #[arg(long)]
        hybrid_mode: bool,
        /// Output prefix: writes `<prefix>_composite.crast`, `_ndvi.crast`,
        /// `_class.crast` and `_class.ppm`
        #[arg(short, long, value_name = "PREFIX")]
        output: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

/// Data-level failure: anything that is not a usage error.
#[derive(Debug)]
struct DataError(String);

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<crast_core::Error> for DataError {
    fn from(e: crast_core::Error) -> Self {
        DataError(e.to_string())
    }
}

impl From<std::io::Error> for DataError {
    fn from(e: std::io::Error) -> Self {
        DataError(e.to_string())
    }
}

type CmdResult = Result<(), DataError>;

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}

fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version are successful exits
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("crast: {e}");
            2
        }
    }
}

fn composite_stack(
    stack: &ImageStack,
    method: Method,
    bracket: CloudBracket,
    adaptive: bool,
) -> Result<MultibandImage, DataError> {
    // per-image bracket refinement, when asked for
    let bracket_for = |img: &MultibandImage| {
        if adaptive {
            adaptive_bracket(img, bracket)
        } else {
            bracket
        }
    };

    let masked_with = |fill: u8| -> Result<ImageStack, DataError> {
        let masked = stack
            .images()
            .iter()
            .map(|img| mask_clouds(img, bracket_for(img), fill))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ImageStack::new(masked)?)
    };

    if adaptive && matches!(method, Method::MinNaive | Method::MinRefined) {
        eprintln!("note: --adaptive has no effect on unmasked minimum methods");
    }

    Ok(match method {
        Method::Max => composite_max(&masked_with(0)?),
        Method::MinNaive => composite_min_naive(stack),
        Method::MinRefined => composite_min_refined(stack),
        Method::Hybrid => {
            if adaptive {
                composite_min_refined(&masked_with(255)?)
            } else {
                composite_hybrid(stack, bracket)
            }
        }
    })
}

fn execute(cmd: Command) -> CmdResult {
    match cmd {
        Command::Mask {
            bracket,
            fill,
            adaptive,
            output,
            input,
        } => {
            let img = read_raster(&input)?;
            let b = if adaptive {
                adaptive_bracket(&img, bracket)
            } else {
                bracket
            };
            let masked = mask_clouds(&img, b, fill)?;
            eprintln!(
                "bracket {b}: {:.2}% of pixels recoded to {fill}",
                100.0 * cloud_fraction(&img, b)
            );
            write_raster(&masked, &output)?;
            Ok(())
        }

        Command::Composite {
            method,
            bracket,
            adaptive,
            output,
            inputs,
        } => {
            let stack = load_stack(&inputs)?;
            let composite = composite_stack(&stack, method, bracket, adaptive)?;
            write_raster(&composite, &output)?;
            Ok(())
        }

        Command::Ndvi { output, input } => {
            let img = read_raster(&input)?;
            write_ndvi(&ndvi(&img), img.date(), &output)?;
            Ok(())
        }

        Command::Classify {
            hybrid_mode,
            output,
            input,
        } => {
            let (nv, date) = read_ndvi(&input)?;
            let cm = classify(&nv, ClassBreaks::default(), hybrid_mode);
            write_classmap(&cm, date, &output)?;
            Ok(())
        }

        Command::Hist {
            band,
            output,
            input,
        } => {
            let img = read_raster(&input)?;
            let csv = band_histogram(&img, band).to_csv();
            match output {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(())
        }

        Command::Bracket { bracket, input } => {
            let img = read_raster(&input)?;
            println!("{}", adaptive_bracket(&img, bracket));
            Ok(())
        }

        Command::Gen {
            config,
            seed,
            output,
        } => {
            let mut cfg = match config {
                Some(path) => parse_config(&std::fs::read_to_string(&path)?)?,
                None => GenConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.scene.seed = seed;
                cfg.stack_seed = None;
            }
            run_gen(&cfg, &output)
        }

        Command::Score { truth, composite } => {
            let gt = load_ground_truth(&truth)?;
            let c = read_raster(&composite)?;
            let score = score_composite(&c, &gt)?;
            println!("recovered_fraction {:.6}", score.recovered);
            println!("residual_cloud_fraction {:.6}", score.residual_cloud);
            println!("exact_match_fraction {:.6}", score.exact_match);
            Ok(())
        }

        Command::Export { output, input } => match read_raster(&input) {
            Ok(img) => {
                export_ppm_fcc(&img, &output)?;
                Ok(())
            }
            Err(image_err) => {
                if let Ok((cm, _)) = read_classmap(&input) {
                    export_ppm_classmap(&cm, &output)?;
                    Ok(())
                } else if read_ndvi(&input).is_ok() {
                    Err(DataError(format!(
                        "{}: NDVI rasters have no direct export; classify first",
                        input.display()
                    )))
                } else {
                    Err(image_err.into())
                }
            }
        },

        Command::Resample {
            scale,
            output,
            input,
        } => match read_raster(&input) {
            Ok(img) => {
                write_raster(&resample_image(&img, scale)?, &output)?;
                Ok(())
            }
            Err(image_err) => {
                if let Ok((nv, date)) = read_ndvi(&input) {
                    write_ndvi(&resample_ndvi(&nv, scale)?, date, &output)?;
                    Ok(())
                } else if read_classmap(&input).is_ok() {
                    Err(DataError(format!(
                        "{}: class maps cannot be resampled",
                        input.display()
                    )))
                } else {
                    Err(image_err.into())
                }
            }
        },

        Command::Pipeline {
            method,
            bracket,
            adaptive,
            hybrid_mode,
            output,
            inputs,
        } => {
            let stack = load_stack(&inputs)?;
            let composite = composite_stack(&stack, method, bracket, adaptive)?;
            let nv = ndvi(&composite);
            let cm = classify(&nv, ClassBreaks::default(), hybrid_mode);

            let prefix = output.display();
            write_raster(&composite, format!("{prefix}_composite.crast"))?;
            write_ndvi(&nv, composite.date(), format!("{prefix}_ndvi.crast"))?;
            write_classmap(&cm, composite.date(), format!("{prefix}_class.crast"))?;
            export_ppm_classmap(&cm, format!("{prefix}_class.ppm"))?;
            Ok(())
        }
    }
}

fn run_gen(cfg: &GenConfig, dir: &Path) -> CmdResult {
    std::fs::create_dir_all(dir)?;
    let base = gen_base_scene(&cfg.scene)?;
    let (stack, gt) = gen_cloudy_stack(&base, cfg.days, &cfg.clouds, cfg.stack_seed())?;

    write_raster(&base, dir.join("base.crast"))?;
    for (i, img) in stack.images().iter().enumerate() {
        write_raster(img, dir.join(format!("day_{i:02}.crast")))?;
    }
    let (w, h) = (base.width(), base.height());
    for day in 0..gt.days() {
        write_pgm_mask(gt.cloud_mask(day), w, h, dir.join(format!("cloud_mask_{day:02}.pgm")))?;
        if cfg.clouds.shadow.is_some() {
            write_pgm_mask(
                gt.shadow_mask(day),
                w,
                h,
                dir.join(format!("shadow_mask_{day:02}.pgm")),
            )?;
        }
    }
    eprintln!(
        "wrote base, {} days and masks to {}",
        gt.days(),
        dir.display()
    );
    Ok(())
}

fn load_ground_truth(dir: &Path) -> Result<GroundTruth, DataError> {
    let base = read_raster(dir.join("base.crast"))?;
    let mut cloud_masks = Vec::new();
    let mut shadow_masks = Vec::new();
    for day in 0.. {
        let path = dir.join(format!("cloud_mask_{day:02}.pgm"));
        if !path.exists() {
            break;
        }
        let (mask, w, h) = read_pgm_mask(&path)?;
        if (w, h) != (base.width(), base.height()) {
            return Err(DataError(format!(
                "{}: mask is {w}x{h}, base is {}x{}",
                path.display(),
                base.width(),
                base.height()
            )));
        }
        cloud_masks.push(mask);

        let shadow = dir.join(format!("shadow_mask_{day:02}.pgm"));
        if shadow.exists() {
            shadow_masks.push(read_pgm_mask(&shadow)?.0);
        }
    }
    if cloud_masks.is_empty() {
        return Err(DataError(format!(
            "{}: no cloud_mask_NN.pgm files found",
            dir.display()
        )));
    }
    Ok(GroundTruth::new(base, cloud_masks, shadow_masks)?)
}
