//! Plain-text `key = value` configuration for the scene generator.
//!
//! Blank lines are skipped and `#` starts a comment, whole-line or inline.
//! Unknown keys are errors. DN ranges use `lo:hi`, shadow offsets `dx:dy`,
//! dates `YYYY-MM-DD`. Every key is optional and defaults to the built-in
//! specs.
//!
//! Recognised keys:
//!
//! ```text
//! width, height, seed, start_date
//! water_frac, fallow_frac, moderate_frac, dense_frac, bright_fallow
//! water_swir, water_nir, water_red            (and the same trio for
//! fallow_*, bright_fallow_*, moderate_*, dense_*, cloud_*)
//! days, stack_seed
//! cloud_count, cloud_radius, persistence
//! shadow_offset, shadow_darken, jitter
//! ```

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::scenegen::{CloudSpec, DnRange, SceneSpec, ShadowSpec};

/// Everything the generator needs for one `gen` run.
#[derive(Clone, Debug)]
pub struct GenConfig {
    pub scene: SceneSpec,
    pub clouds: CloudSpec,
    pub days: usize,
    /// Seed of the cloud overlay stream; defaults to `scene.seed + 1`.
    pub stack_seed: Option<u64>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            scene: SceneSpec::default(),
            clouds: CloudSpec::default(),
            days: 7,
            stack_seed: None,
        }
    }
}

impl GenConfig {
    pub fn stack_seed(&self) -> u64 {
        self.stack_seed.unwrap_or(self.scene.seed.wrapping_add(1))
    }
}

fn err(line: usize, detail: impl Into<String>) -> Error {
    Error::Config {
        line,
        detail: detail.into(),
    }
}

fn parse_range(line: usize, key: &str, v: &str) -> Result<DnRange> {
    let (lo, hi) = v
        .split_once(':')
        .ok_or_else(|| err(line, format!("{key}: expected `lo:hi`, got `{v}`")))?;
    let lo: u8 = lo
        .trim()
        .parse()
        .map_err(|_| err(line, format!("{key}: bad lower bound `{lo}`")))?;
    let hi: u8 = hi
        .trim()
        .parse()
        .map_err(|_| err(line, format!("{key}: bad upper bound `{hi}`")))?;
    Ok(DnRange::new(lo, hi))
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| err(line, format!("{key}: cannot parse `{v}`")))
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(err(line, format!("{key}: expected true/false, got `{other}`"))),
    }
}

/// Parses a config file body. Specs are validated after all keys are applied.
pub fn parse_config(text: &str) -> Result<GenConfig> {
    let mut cfg = GenConfig::default();
    let mut shadow_offset: Option<(i64, i64)> = None;
    let mut shadow_darken: f64 = 0.6;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        // strip comments, inline or whole-line
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let v = value.trim();

        match key {
            "width" => cfg.scene.width = parse_num(line_no, key, v)?,
            "height" => cfg.scene.height = parse_num(line_no, key, v)?,
            "seed" => cfg.scene.seed = parse_num(line_no, key, v)?,
            "start_date" => {
                cfg.scene.start_date = NaiveDate::parse_from_str(v, "%Y-%m-%d")
                    .map_err(|_| err(line_no, format!("start_date `{v}` is not YYYY-MM-DD")))?
            }
            "water_frac" => cfg.scene.water_frac = parse_num(line_no, key, v)?,
            "fallow_frac" => cfg.scene.fallow_frac = parse_num(line_no, key, v)?,
            "moderate_frac" => cfg.scene.moderate_frac = parse_num(line_no, key, v)?,
            "dense_frac" => cfg.scene.dense_frac = parse_num(line_no, key, v)?,
            "bright_fallow" => cfg.scene.bright_fallow = parse_bool(line_no, key, v)?,

            "water_swir" => cfg.scene.water_sig.swir = parse_range(line_no, key, v)?,
            "water_nir" => cfg.scene.water_sig.nir = parse_range(line_no, key, v)?,
            "water_red" => cfg.scene.water_sig.red = parse_range(line_no, key, v)?,
            "fallow_swir" => cfg.scene.fallow_sig.swir = parse_range(line_no, key, v)?,
            "fallow_nir" => cfg.scene.fallow_sig.nir = parse_range(line_no, key, v)?,
            "fallow_red" => cfg.scene.fallow_sig.red = parse_range(line_no, key, v)?,
            "bright_fallow_swir" => cfg.scene.bright_fallow_sig.swir = parse_range(line_no, key, v)?,
            "bright_fallow_nir" => cfg.scene.bright_fallow_sig.nir = parse_range(line_no, key, v)?,
            "bright_fallow_red" => cfg.scene.bright_fallow_sig.red = parse_range(line_no, key, v)?,
            "moderate_swir" => cfg.scene.moderate_sig.swir = parse_range(line_no, key, v)?,
            "moderate_nir" => cfg.scene.moderate_sig.nir = parse_range(line_no, key, v)?,
            "moderate_red" => cfg.scene.moderate_sig.red = parse_range(line_no, key, v)?,
            "dense_swir" => cfg.scene.dense_sig.swir = parse_range(line_no, key, v)?,
            "dense_nir" => cfg.scene.dense_sig.nir = parse_range(line_no, key, v)?,
            "dense_red" => cfg.scene.dense_sig.red = parse_range(line_no, key, v)?,

            "days" => cfg.days = parse_num(line_no, key, v)?,
            "stack_seed" => cfg.stack_seed = Some(parse_num(line_no, key, v)?),
            "cloud_count" => cfg.clouds.count = parse_num(line_no, key, v)?,
            "cloud_radius" => {
                let r = parse_range(line_no, key, v)?;
                cfg.clouds.radius_min = r.lo as usize;
                cfg.clouds.radius_max = r.hi as usize;
            }
            "persistence" => cfg.clouds.persistence = parse_num(line_no, key, v)?,
            "cloud_swir" => cfg.clouds.signature.swir = parse_range(line_no, key, v)?,
            "cloud_nir" => cfg.clouds.signature.nir = parse_range(line_no, key, v)?,
            "cloud_red" => cfg.clouds.signature.red = parse_range(line_no, key, v)?,
            "shadow_offset" => {
                let (dx, dy) = v
                    .split_once(':')
                    .ok_or_else(|| err(line_no, format!("shadow_offset: expected `dx:dy`, got `{v}`")))?;
                let dx = parse_num(line_no, key, dx.trim())?;
                let dy = parse_num(line_no, key, dy.trim())?;
                shadow_offset = Some((dx, dy));
            }
            "shadow_darken" => shadow_darken = parse_num(line_no, key, v)?,
            "jitter" => cfg.clouds.jitter = parse_num(line_no, key, v)?,

            other => return Err(err(line_no, format!("unknown key `{other}`"))),
        }
    }

    if let Some((dx, dy)) = shadow_offset {
        cfg.clouds.shadow = Some(ShadowSpec {
            dx,
            dy,
            darken: shadow_darken,
        });
    }

    if cfg.days == 0 {
        return Err(Error::Config {
            line: 0,
            detail: "days must be >= 1".into(),
        });
    }
    cfg.scene.validate()?;
    cfg.clouds.validate()?;
    Ok(cfg)
}
