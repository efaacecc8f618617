//! Experiment description: a flat TOML key-value file, optionally
//! overridden field by field from the command line.
//!
//! ```toml
//! n = 2
//! m = 4
//! l = [3, 4, 5, "inf"]     # one CSV per value
//! snr_db = "0:5:40"        # or "0,10,20" or [0.0, 10.0, 20.0]
//! trials = 1000000
//! seed = 1
//! min_errors = 200         # 0 disables early stopping
//! alpha_samples = 100000   # 0 skips the bound columns
//! fit_window = "20:40"
//! out = "results"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use qce_core::{QuantLevels, SystemConfig};

use crate::error::{LabError, Result};

pub const DEFAULT_ALPHA_SAMPLES: usize = 100_000;
pub const DEFAULT_TRIALS: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    /// One configuration per quantization level; all share the SNR grid.
    pub variants: Vec<SystemConfig>,
    pub out_dir: PathBuf,
    /// Safety-margin samples for the averaged bound columns (`None` skips them).
    pub alpha_samples: Option<usize>,
    /// Slope-fit window in dB; the upper half of the grid when `None`.
    pub fit_window: Option<(f64, f64)>,
    pub workers: Option<usize>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let first = self
            .variants
            .first()
            .ok_or_else(|| LabError::Config("experiment has no variants".into()))?;
        for v in &self.variants {
            v.validate()?;
            if v.snr_grid_db != first.snr_grid_db {
                return Err(LabError::Config("variants must share one SNR grid".into()));
            }
        }
        if let Some((lo, hi)) = self.fit_window {
            if lo.is_nan() || hi.is_nan() || lo >= hi {
                return Err(LabError::Config(format!(
                    "field `fit_window`: lower end {lo} must be below upper end {hi}"
                )));
            }
        }
        Ok(())
    }

    /// The slope-fit window actually used.
    pub fn effective_fit_window(&self) -> (f64, f64) {
        self.fit_window.unwrap_or_else(|| {
            let grid = &self.variants[0].snr_grid_db;
            (grid[grid.len() / 2], grid[grid.len() - 1])
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum LevelValue {
    Int(i64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum LevelsValue {
    One(LevelValue),
    Many(Vec<LevelValue>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GridValue {
    Text(String),
    List(Vec<f64>),
}

/// Raw settings from a file and/or the command line, before validation.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSettings {
    n: Option<i64>,
    m: Option<i64>,
    l: Option<LevelsValue>,
    total_power: Option<f64>,
    snr_db: Option<GridValue>,
    trials: Option<i64>,
    seed: Option<u64>,
    min_errors: Option<i64>,
    alpha_samples: Option<i64>,
    fit_window: Option<GridValue>,
    out: Option<PathBuf>,
    workers: Option<i64>,
}

/// Command-line values; each one replaces the file value when present.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n: Option<u32>,
    pub m: Option<u32>,
    pub l: Option<String>,
    pub snr_db: Option<String>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub min_errors: Option<u64>,
    pub out: Option<PathBuf>,
    pub alpha_samples: Option<u64>,
    pub fit_window: Option<String>,
    pub workers: Option<usize>,
}

impl RawSettings {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string().trim_end().to_owned()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_toml_str(&text)
            .map_err(|e| LabError::Config(format!("{}: {}", path.display(), strip(e))))
    }

    pub fn apply(&mut self, o: &Overrides) {
        let int = |v: u64| i64::try_from(v).unwrap_or(i64::MAX);
        if let Some(v) = o.n {
            self.n = Some(v.into());
        }
        if let Some(v) = o.m {
            self.m = Some(v.into());
        }
        if let Some(v) = &o.l {
            self.l = Some(LevelsValue::One(LevelValue::Text(v.clone())));
        }
        if let Some(v) = &o.snr_db {
            self.snr_db = Some(GridValue::Text(v.clone()));
        }
        if let Some(v) = o.trials {
            self.trials = Some(int(v));
        }
        if let Some(v) = o.seed {
            self.seed = Some(v);
        }
        if let Some(v) = o.min_errors {
            self.min_errors = Some(int(v));
        }
        if let Some(v) = &o.out {
            self.out = Some(v.clone());
        }
        if let Some(v) = o.alpha_samples {
            self.alpha_samples = Some(int(v));
        }
        if let Some(v) = &o.fit_window {
            self.fit_window = Some(GridValue::Text(v.clone()));
        }
        if let Some(v) = o.workers {
            self.workers = Some(int(v as u64));
        }
    }

    pub fn into_spec(self) -> Result<ExperimentSpec> {
        let n = positive_u32("n", required("n", self.n)?)?;
        let m = positive_u32("m", required("m", self.m)?)?;
        let levels = parse_levels(required("l", self.l)?)?;
        let grid = match required("snr_db", self.snr_db)? {
            GridValue::Text(s) => parse_grid(&s).map_err(|e| field_error("snr_db", e))?,
            GridValue::List(v) => v,
        };
        let trials = match self.trials {
            Some(t) if t > 0 => t as u64,
            Some(t) => return Err(field_error("trials", format!("must be positive, got {t}"))),
            None => DEFAULT_TRIALS,
        };
        let min_errors = match self.min_errors {
            None => Some(SystemConfig::DEFAULT_MIN_ERRORS),
            Some(0) => None,
            Some(v) if v > 0 => Some(v as u64),
            Some(v) => return Err(field_error("min_errors", format!("must be >= 0, got {v}"))),
        };
        let alpha_samples = match self.alpha_samples {
            None => Some(DEFAULT_ALPHA_SAMPLES),
            Some(0) => None,
            Some(v) if v >= 2 => Some(v as usize),
            Some(v) => {
                return Err(field_error("alpha_samples", format!("must be 0 or >= 2, got {v}")))
            }
        };
        let fit_window = match self.fit_window {
            None => None,
            Some(GridValue::Text(s)) => Some(parse_window(&s)?),
            Some(GridValue::List(v)) if v.len() == 2 => Some((v[0], v[1])),
            Some(GridValue::List(_)) => {
                return Err(field_error("fit_window", "expected two values [lo, hi]"))
            }
        };
        let workers = match self.workers {
            None => None,
            Some(w) if w > 0 => Some(w as usize),
            Some(w) => return Err(field_error("workers", format!("must be positive, got {w}"))),
        };
        let variants = levels
            .into_iter()
            .map(|l| {
                let mut c = SystemConfig::new(n, m, l)
                    .with_snr_grid(grid.clone())
                    .with_trials(trials)
                    .with_seed(self.seed.unwrap_or(0))
                    .with_min_errors(min_errors);
                if let Some(p) = self.total_power {
                    c.total_power = p;
                }
                c
            })
            .collect();
        let spec = ExperimentSpec {
            variants,
            out_dir: self.out.unwrap_or_else(|| PathBuf::from("qce-results")),
            alpha_samples,
            fit_window,
            workers,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn strip(e: LabError) -> String {
    match e {
        LabError::Config(s) => s,
        other => other.to_string(),
    }
}

fn field_error(field: &str, reason: impl std::fmt::Display) -> LabError {
    LabError::Config(format!("field `{field}`: {reason}"))
}

fn required<T>(field: &str, v: Option<T>) -> Result<T> {
    v.ok_or_else(|| field_error(field, "missing"))
}

fn positive_u32(field: &str, v: i64) -> Result<u32> {
    u32::try_from(v)
        .ok()
        .filter(|&x| x > 0)
        .ok_or_else(|| field_error(field, format!("must be a positive integer, got {v}")))
}

fn parse_level(v: LevelValue) -> Result<Vec<QuantLevels>> {
    match v {
        LevelValue::Int(i) => Ok(vec![QuantLevels::Finite(positive_u32("l", i)?)]),
        LevelValue::Text(s) => s
            .split(',')
            .map(|part| part.parse::<QuantLevels>().map_err(|e| field_error("l", e)))
            .collect(),
    }
}

fn parse_levels(v: LevelsValue) -> Result<Vec<QuantLevels>> {
    let items = match v {
        LevelsValue::One(x) => vec![x],
        LevelsValue::Many(xs) => xs,
    };
    let mut out = Vec::new();
    for item in items {
        out.extend(parse_level(item)?);
    }
    if out.is_empty() {
        return Err(field_error("l", "no quantization levels given"));
    }
    Ok(out)
}

/// Parses `"a,b,c"` or `"lo:step:hi"` (inclusive of `hi`).
pub fn parse_grid(text: &str) -> std::result::Result<Vec<f64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{}` is not a number", s.trim()))
    };
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [lo, step, hi] = parts[..] else {
            return Err(format!("range `{text}` must look like lo:step:hi"));
        };
        let (lo, step, hi) = (num(lo)?, num(step)?, num(hi)?);
        if step.is_nan() || step <= 0.0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
            return Err(format!("range `{text}` needs step > 0 and lo <= hi"));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| lo + k as f64 * step).collect())
    } else {
        text.split(',').map(num).collect()
    }
}

fn parse_window(text: &str) -> Result<(f64, f64)> {
    let sep = if text.contains(':') { ':' } else { ',' };
    let parts: Vec<&str> = text.split(sep).collect();
    let parsed: std::result::Result<Vec<f64>, _> =
        parts.iter().map(|p| p.trim().parse::<f64>()).collect();
    match parsed.as_deref() {
        Ok([lo, hi]) => Ok((*lo, *hi)),
        _ => Err(field_error("fit_window", format!("expected `lo:hi`, got `{text}`"))),
    }
}

/// Loads the optional file and applies command-line overrides.
pub fn load(config: Option<&Path>, overrides: &Overrides) -> Result<ExperimentSpec> {
    let mut raw = match config {
        Some(p) => RawSettings::from_file(p)?,
        None => RawSettings::default(),
    };
    raw.apply(overrides);
    raw.into_spec()
}
