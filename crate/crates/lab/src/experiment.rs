//! Sweeps every variant of an experiment, writes one CSV per variant and a
//! `summary.csv` with fitted and predicted diversity orders.

use std::path::{Path, PathBuf};

use qce_core::analytics::{predicted_diversity, AlphaSamples, DiversityOrder};
use qce_core::diversity::{fit_diversity, floor_detect, DiversityEstimate, FloorDecision};
use qce_core::engine::attach_bounds_with;
use qce_core::{SerCurve, SystemConfig};

use crate::config::ExperimentSpec;
use crate::error::{LabError, Result};
use crate::runner::{build_pool, run_ser_in};
use crate::table::{emit_csv, format_f64};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const SUMMARY_HEADER: [&str; 13] = [
    "file",
    "n",
    "m",
    "l",
    "predicted_diversity",
    "fit_lo_db",
    "fit_hi_db",
    "fitted_diversity",
    "residual_rms",
    "fit_points",
    "floor_detected",
    "floor_estimate",
    "floor_ratio",
];

#[derive(Clone, Debug)]
pub struct VariantResult {
    pub curve: SerCurve,
    pub csv_path: PathBuf,
    pub predicted: DiversityOrder,
    pub fit_window: (f64, f64),
    /// `None` when the window holds too few usable points.
    pub fit: Option<DiversityEstimate>,
    pub floor: Option<FloorDecision>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub variants: Vec<VariantResult>,
    pub summary_path: PathBuf,
}

impl ExperimentOutput {
    pub fn files(&self) -> Vec<&Path> {
        self.variants
            .iter()
            .map(|v| v.csv_path.as_path())
            .chain(std::iter::once(self.summary_path.as_path()))
            .collect()
    }
}

pub fn variant_file_name(config: &SystemConfig) -> String {
    format!(
        "ser_n{}_m{}_l{}.csv",
        config.n_antennas, config.psk_order, config.quant_levels
    )
}

/// Simulates one variant and attaches the analytic columns.
pub fn run_variant(
    pool: &rayon::ThreadPool,
    config: &SystemConfig,
    alpha_samples: Option<usize>,
) -> Result<SerCurve> {
    let curve = run_ser_in(pool, config)?;
    match alpha_samples {
        Some(n) => {
            let samples = AlphaSamples::draw_seeded(config, n, config.seed)?;
            Ok(attach_bounds_with(&curve, &samples)?)
        }
        None => Ok(curve),
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    std::fs::create_dir_all(&spec.out_dir).map_err(|e| LabError::io(&spec.out_dir, e))?;
    let pool = build_pool(spec.workers)?;
    let window = spec.effective_fit_window();
    let mut variants = Vec::with_capacity(spec.variants.len());
    for config in &spec.variants {
        let curve = run_variant(&pool, config, spec.alpha_samples)?;
        let csv_path = spec.out_dir.join(variant_file_name(config));
        emit_csv(&curve.points, &csv_path)?;
        variants.push(VariantResult {
            predicted: predicted_diversity(config),
            fit_window: window,
            fit: fit_diversity(&curve, window).ok(),
            floor: floor_detect(&curve).ok(),
            curve,
            csv_path,
        });
    }
    let summary_path = spec.out_dir.join(SUMMARY_FILE);
    write_summary(&variants, &summary_path)?;
    Ok(ExperimentOutput {
        variants,
        summary_path,
    })
}

fn write_summary(variants: &[VariantResult], path: &Path) -> Result<()> {
    let csv_err = |source| LabError::Csv {
        path: path.to_owned(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for v in variants {
        let c = &v.curve.config;
        let name = v
            .csv_path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let fit = v.fit.as_ref();
        let floor = v.floor.as_ref();
        w.write_record([
            name,
            c.n_antennas.to_string(),
            c.psk_order.to_string(),
            c.quant_levels.to_string(),
            v.predicted.to_string(),
            format_f64(v.fit_window.0),
            format_f64(v.fit_window.1),
            fit.map(|f| format_f64(f.slope)).unwrap_or_default(),
            fit.map(|f| format_f64(f.residual_rms)).unwrap_or_default(),
            fit.map(|f| f.points_used.to_string()).unwrap_or_default(),
            floor.map(|f| f.detected.to_string()).unwrap_or_default(),
            floor.map(|f| format_f64(f.estimate)).unwrap_or_default(),
            floor.map(|f| format_f64(f.ratio)).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| LabError::io(path, e))?;
    Ok(())
}
