//! System description, constellations, the QCE transmit alphabet, the
//! phase quantizer and the nearest-neighbour PSK decoder.
//!
//! Phases are handled in the canonical range `(-π, π]`. Both the quantizer
//! and the decoder resolve exact sector-boundary ties toward the candidate
//! with the smaller index, so every phase maps to exactly one point.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{PI, TAU};
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A complex baseband value (channel tap, transmit sample, noise, ...).
pub type ComplexSample = Complex64;

/// Magnitudes below this are treated as exactly zero.
pub const ZERO_MAGNITUDE: f64 = 1e-300;

/// Number of quantization levels per antenna, or the unquantized
/// constant-envelope limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuantLevels {
    Finite(u32),
    Infinite,
}

impl QuantLevels {
    /// Compares the number of levels against a PSK order `m`.
    pub fn cmp_order(self, m: u32) -> Ordering {
        match self {
            QuantLevels::Finite(l) => l.cmp(&m),
            QuantLevels::Infinite => Ordering::Greater,
        }
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            QuantLevels::Finite(l) => Some(l),
            QuantLevels::Infinite => None,
        }
    }

    /// Half-width `π/L` of the quantization error interval (0 for the CE limit).
    pub fn max_error(self) -> f64 {
        match self {
            QuantLevels::Finite(l) => PI / l as f64,
            QuantLevels::Infinite => 0.0,
        }
    }
}

impl fmt::Display for QuantLevels {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantLevels::Finite(l) => write!(f, "{l}"),
            QuantLevels::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for QuantLevels {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinite") || s == "∞" {
            return Ok(QuantLevels::Infinite);
        }
        match s.parse::<u32>() {
            Ok(l) if l >= 1 => Ok(QuantLevels::Finite(l)),
            _ => Err(Error::config(
                "l",
                alloc::format!("expected a positive integer or `inf`, got `{s}`"),
            )),
        }
    }
}

/// Full description of one simulated system and its sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    pub n_antennas: u32,
    pub psk_order: u32,
    pub quant_levels: QuantLevels,
    pub total_power: f64,
    pub snr_grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    /// Stop a point early once this many errors are counted. `None` runs
    /// the full trial budget.
    pub min_errors: Option<u64>,
}

impl SystemConfig {
    pub const DEFAULT_MIN_ERRORS: u64 = 200;

    pub fn new(n_antennas: u32, psk_order: u32, quant_levels: QuantLevels) -> Self {
        SystemConfig {
            n_antennas,
            psk_order,
            quant_levels,
            total_power: 1.0,
            snr_grid_db: Vec::new(),
            trials: 1_000_000,
            seed: 0,
            min_errors: Some(Self::DEFAULT_MIN_ERRORS),
        }
    }

    pub fn with_snr_grid(mut self, grid: impl Into<Vec<f64>>) -> Self {
        self.snr_grid_db = grid.into();
        self
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_min_errors(mut self, min_errors: Option<u64>) -> Self {
        self.min_errors = min_errors;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_antennas == 0 {
            return Err(Error::config("n", "number of antennas must be at least 1"));
        }
        if self.psk_order < 2 {
            return Err(Error::config("m", "PSK order must be at least 2"));
        }
        if self.quant_levels == QuantLevels::Finite(0) {
            return Err(Error::config("l", "number of quantization levels must be at least 1"));
        }
        if !(self.total_power.is_finite() && self.total_power > 0.0) {
            return Err(Error::config("total_power", "must be positive and finite"));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::config("snr_db", "SNR grid is empty"));
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::config("snr_db", "SNR grid contains a non-finite value"));
        }
        if self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("snr_db", "SNR grid must be strictly increasing"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be positive"));
        }
        Ok(())
    }

    pub fn constellation(&self) -> Result<PskConstellation> {
        PskConstellation::new(self.psk_order)
    }

    /// Transmit alphabet, or `None` in the CE limit.
    pub fn alphabet(&self) -> Result<Option<QceAlphabet>> {
        match self.quant_levels {
            QuantLevels::Finite(l) => {
                QceAlphabet::new(l, self.n_antennas, self.total_power).map(Some)
            }
            QuantLevels::Infinite => Ok(None),
        }
    }
}

/// Noise variance for an SNR given in dB (`ρ = 1/σ²`).
pub fn sigma2_from_snr_db(snr_db: f64) -> f64 {
    libm::pow(10.0, -snr_db / 10.0)
}

/// Linear SNR `ρ` for an SNR given in dB.
pub fn rho_from_snr_db(snr_db: f64) -> f64 {
    libm::pow(10.0, snr_db / 10.0)
}

/// Wraps a phase into `(-π, π]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let mut p = libm::remainder(phase, TAU);
    if p <= -PI {
        p += TAU;
    }
    p
}

#[derive(Clone, Debug, PartialEq)]
pub struct PskConstellation {
    order: u32,
    points: Vec<ComplexSample>,
}

impl PskConstellation {
    pub fn new(order: u32) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidArgument("PSK order must be at least 2"));
        }
        let step = TAU / order as f64;
        let points = (0..order)
            .map(|m| ComplexSample::from_polar(1.0, step * m as f64))
            .collect();
        Ok(PskConstellation { order, points })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn points(&self) -> &[ComplexSample] {
        &self.points
    }

    pub fn point(&self, index: usize) -> ComplexSample {
        self.points[index]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QceAlphabet {
    levels: u32,
    amplitude: f64,
    points: Vec<ComplexSample>,
}

impl QceAlphabet {
    /// `levels` points of magnitude `sqrt(total_power / n_antennas)` at
    /// phases `(2l - 1)π/L`, `l = 1..=L`.
    pub fn new(levels: u32, n_antennas: u32, total_power: f64) -> Result<Self> {
        if levels == 0 {
            return Err(Error::InvalidArgument("alphabet needs at least one level"));
        }
        if n_antennas == 0 {
            return Err(Error::InvalidArgument("alphabet needs at least one antenna"));
        }
        if !(total_power.is_finite() && total_power > 0.0) {
            return Err(Error::InvalidArgument("total power must be positive and finite"));
        }
        let amplitude = libm::sqrt(total_power / n_antennas as f64);
        let points = (0..levels)
            .map(|l| ComplexSample::from_polar(amplitude, Self::phase_of(levels, l)))
            .collect();
        Ok(QceAlphabet {
            levels,
            amplitude,
            points,
        })
    }

    fn phase_of(levels: u32, index: u32) -> f64 {
        wrap_phase((2 * index + 1) as f64 * PI / levels as f64)
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn points(&self) -> &[ComplexSample] {
        &self.points
    }

    /// Phase of the point with zero-based index `index`.
    pub fn phase(&self, index: usize) -> f64 {
        Self::phase_of(self.levels, index as u32)
    }

    /// Nearest alphabet point to a phase: `(index, phase - point phase)`, the
    /// second value wrapped into `(-π, π]` and bounded by `π/L`.
    pub fn nearest(&self, phase: f64) -> (usize, f64) {
        let l = self.levels as f64;
        // Point k sits at u = k on this axis.
        let u = wrap_phase(phase) * l / TAU - 0.5;
        let below = libm::floor(u);
        let pick = match (u - below).partial_cmp(&0.5) {
            Some(Ordering::Less) => below,
            Some(Ordering::Greater) => below + 1.0,
            _ => {
                let a = self.index_of(below);
                let b = self.index_of(below + 1.0);
                return self.with_error(a.min(b), phase);
            }
        };
        self.with_error(self.index_of(pick), phase)
    }

    fn index_of(&self, u: f64) -> usize {
        let l = self.levels as i64;
        (u as i64).rem_euclid(l) as usize
    }

    fn with_error(&self, index: usize, phase: f64) -> (usize, f64) {
        (index, wrap_phase(phase - self.phase(index)))
    }
}

/// Maps `z` to the alphabet point nearest in phase.
pub fn quantize_qce(z: ComplexSample, alphabet: &QceAlphabet) -> Result<ComplexSample> {
    if z.norm() < ZERO_MAGNITUDE {
        return Err(Error::ZeroInput);
    }
    let (index, _) = alphabet.nearest(z.arg());
    Ok(alphabet.points[index])
}

/// Result of a nearest-neighbour PSK decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub index: usize,
    /// Set when the received value was zero and the decision is arbitrary.
    pub degenerate: bool,
}

/// Index of the constellation point nearest to `y`. Sector `m` is the
/// half-open phase interval `(2πm/M - π/M, 2πm/M + π/M]`.
pub fn nearest_psk_decode(y: ComplexSample, constellation: &PskConstellation) -> Decision {
    if y.norm() < ZERO_MAGNITUDE {
        return Decision {
            index: 0,
            degenerate: true,
        };
    }
    let m = constellation.order as f64;
    let w = y.arg() * m / TAU - 0.5;
    let index = (libm::ceil(w) as i64).rem_euclid(constellation.order as i64) as usize;
    Decision {
        index,
        degenerate: false,
    }
}
