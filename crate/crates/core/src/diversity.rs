//! Empirical diversity order: the negated least-squares slope of
//! `log10(SER)` against `log10(ρ)`, and high-SNR error-floor detection.

use alloc::format;
use alloc::vec::Vec;

use crate::analytics::{predicted_diversity, DiversityOrder};
use crate::engine::SerCurve;
use crate::error::{Error, Result};

/// Points with fewer errors than this are left out of a slope fit.
pub const MIN_FIT_ERRORS: u64 = 50;
const WINDOW_SLACK_DB: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    /// `d log10(value) / d log10(ρ)`.
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub points: usize,
}

/// Least-squares line through `(snr_db/10, log10 value)`.
pub fn fit_loglog(snr_db: &[f64], values: &[f64]) -> Result<LineFit> {
    if snr_db.len() != values.len() {
        return Err(Error::InvalidArgument("abscissa and ordinate lengths differ"));
    }
    let pts: Vec<(f64, f64)> = snr_db
        .iter()
        .zip(values)
        .filter(|(_, &v)| v > 0.0 && v.is_finite())
        .map(|(&s, &v)| (s / 10.0, libm::log10(v)))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "slope fit needs 3 positive points, have {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    Ok(LineFit {
        slope,
        intercept,
        residual_rms: libm::sqrt(ss / n),
        points: pts.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiversityEstimate {
    /// Fitted order `d̂` (negated log-log slope).
    pub slope: f64,
    pub fit_window_db: (f64, f64),
    pub residual_rms: f64,
    pub points_used: usize,
    pub predicted: DiversityOrder,
}

/// Fits the diversity order over the points with `snr_db` inside `window_db`
/// (inclusive) that carry at least [`MIN_FIT_ERRORS`] errors.
pub fn fit_diversity(curve: &SerCurve, window_db: (f64, f64)) -> Result<DiversityEstimate> {
    let (lo, hi) = window_db;
    let (snr, ser): (Vec<f64>, Vec<f64>) = curve
        .points
        .iter()
        .filter(|p| p.snr_db >= lo - WINDOW_SLACK_DB && p.snr_db <= hi + WINDOW_SLACK_DB)
        .filter(|p| p.errors >= MIN_FIT_ERRORS)
        .map(|p| (p.snr_db, p.ser))
        .unzip();
    if snr.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable points in [{lo}, {hi}] dB, need 3 with at least {MIN_FIT_ERRORS} errors",
            snr.len()
        )));
    }
    let fit = fit_loglog(&snr, &ser)?;
    Ok(DiversityEstimate {
        slope: -fit.slope,
        fit_window_db: window_db,
        residual_rms: fit.residual_rms,
        points_used: fit.points,
        predicted: predicted_diversity(&curve.config),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloorDecision {
    pub detected: bool,
    /// SER at the highest SNR.
    pub estimate: f64,
    /// SER(highest SNR) / SER(about 10 dB lower).
    pub ratio: f64,
    pub reference_snr_db: f64,
}

/// Declares an error floor when the SER falls by less than 20% over the
/// top decade of the grid and both end points are significantly nonzero.
pub fn floor_detect(curve: &SerCurve) -> Result<FloorDecision> {
    let top = curve
        .points
        .last()
        .ok_or_else(|| Error::InsufficientData("curve has no points".into()))?;
    let target = top.snr_db - 10.0;
    let reference = curve.points[..curve.points.len() - 1]
        .iter()
        .filter(|p| p.snr_db >= target - WINDOW_SLACK_DB)
        .min_by(|a, b| {
            libm::fabs(a.snr_db - target).total_cmp(&libm::fabs(b.snr_db - target))
        })
        .ok_or_else(|| {
            Error::InsufficientData("floor detection needs 2 points in the top decade".into())
        })?;
    let ratio = if reference.ser > 0.0 { top.ser / reference.ser } else { f64::NAN };
    let significant = |ser: f64, ci: f64| ser - ci > 0.0;
    let detected = ratio > 0.8
        && significant(top.ser, top.ci_half_width)
        && significant(reference.ser, reference.ci_half_width);
    Ok(FloorDecision {
        detected,
        estimate: top.ser,
        ratio,
        reference_snr_db: reference.snr_db,
    })
}
