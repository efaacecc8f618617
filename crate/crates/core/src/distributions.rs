//! Distributions of the per-antenna margin factor `v_i`, of
//! `α_i = |h_i| v_i` and of their sums, plus samplers for them.
//!
//! With `θ_i` uniform on `[-π/L, π/L]`,
//! `v_i = cos θ_i - |sin θ_i| cot(π/M) = sin(π/M - |θ_i|) / sin(π/M)`,
//! so `v_i` is the sine of a uniform angle on `[π/M - π/L, π/M]` rescaled by
//! `1/sin(π/M)`. The CDF and PDF below follow from that.
//!
//! Only the `L = M` case has a closed-form PDF for `α_i`; for other `L`
//! only samplers are provided.

use core::f64::consts::PI;

use crate::analytics::q_function;
use crate::error::{Error, Result};
use crate::model::{QuantLevels, SystemConfig};
use crate::rng::RandomStream;

/// One draw of the per-antenna quantities entering the safety margin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantGainSample {
    /// Channel magnitude `|h_i|`.
    pub magnitude: f64,
    pub v: f64,
    pub alpha_i: f64,
    pub theta: f64,
}

pub fn v_from_theta(theta: f64, m: u32) -> f64 {
    let t = PI / m as f64;
    libm::cos(theta) - libm::fabs(libm::sin(theta)) / libm::tan(t)
}

/// Angle range `[lo, hi]` such that `v = sin(φ)/sin(π/M)` with φ uniform on it.
fn angle_range(m: u32, l: u32) -> (f64, f64) {
    let hi = PI / m as f64;
    (hi - PI / l as f64, hi)
}

/// Lower end of the support of `v_i`: `sin(π/M - π/L)/sin(π/M)`, or
/// `-1/sin(π/M)` when the angle range passes `-π/2` (only possible for `L = 1`).
pub fn v_support_min(m: u32, levels: QuantLevels) -> f64 {
    match levels {
        QuantLevels::Infinite => 1.0,
        QuantLevels::Finite(l) => {
            let (lo, hi) = angle_range(m, l);
            let s = libm::sin(hi);
            if lo <= -PI / 2.0 {
                -1.0 / s
            } else {
                libm::sin(lo) / s
            }
        }
    }
}

/// CDF of `v_i`. For `L <= M` and `L >= 2` this is
/// `1 - L/M + L asin(x sin(π/M))/π` on the support; the CE limit is a unit
/// step at 1.
pub fn cdf_v(x: f64, m: u32, levels: QuantLevels) -> f64 {
    let l = match levels {
        QuantLevels::Infinite => return if x >= 1.0 { 1.0 } else { 0.0 },
        QuantLevels::Finite(l) => l,
    };
    if x >= 1.0 {
        return 1.0;
    }
    let (lo, hi) = angle_range(m, l);
    let y = (x * libm::sin(hi)).clamp(-1.0, 1.0);
    let asin = libm::asin(y);
    // sin φ <= y on [-π, π/2] exactly for φ in [-π - asin y, asin y].
    let covered = (hi.min(asin) - lo.max(-PI - asin)).max(0.0);
    (covered / (hi - lo)).clamp(0.0, 1.0)
}

/// PDF of `v_i`: `L sin(π/M) / (π sqrt(1 - sin²(π/M) x²))` on the support
/// (for `L >= 2`). Errors in the CE limit, where `v_i = 1` surely.
pub fn pdf_v(x: f64, m: u32, levels: QuantLevels) -> Result<f64> {
    let l = match levels {
        QuantLevels::Infinite => {
            return Err(Error::DegenerateDistribution("v is identically 1 without quantization"))
        }
        QuantLevels::Finite(l) => l,
    };
    let (lo, hi) = angle_range(m, l);
    let s = libm::sin(hi);
    if !(v_support_min(m, levels)..=1.0).contains(&x) {
        return Ok(0.0);
    }
    let y = x * s;
    let asin = libm::asin(y.clamp(-1.0, 1.0));
    let branches = [asin, -PI - asin]
        .iter()
        .filter(|&&phi| phi >= lo && phi <= hi)
        .count();
    Ok(branches as f64 * s / ((hi - lo) * libm::sqrt((1.0 - y) * (1.0 + y))))
}

/// PDF of `α_i = |h_i| v_i` when `L = M`:
/// `(2M sin(π/M)/√π) exp(-sin²(π/M) x²) Q(√2 cos(π/M) x)` for `x >= 0`.
pub fn pdf_alpha_i(x: f64, m: u32) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let t = PI / m as f64;
    let s = libm::sin(t);
    2.0 * m as f64 * s / libm::sqrt(PI)
        * libm::exp(-s * s * x * x)
        * q_function(core::f64::consts::SQRT_2 * libm::cos(t) * x)
}

/// Constant bound `M^N sin(π/M)/√π` on the PDF of `α` when `L = M`.
pub fn pdf_alpha_bound(m: u32, n: u32) -> f64 {
    libm::pow(m as f64, n as f64) * libm::sin(PI / m as f64) / libm::sqrt(PI)
}

/// Gaussian-envelope bound on the PDF of `S_n = α_1 + ... + α_n` when `L = M`:
/// `(M^n sin(π/M)/sqrt(nπ)) exp(-sin²(π/M) x²/n)`.
pub fn pdf_partial_sum_bound(x: f64, m: u32, n_terms: u32) -> f64 {
    let n = n_terms as f64;
    let s = libm::sin(PI / m as f64);
    libm::pow(m as f64, n) * s / libm::sqrt(n * PI) * libm::exp(-s * s * x * x / n)
}

/// Quantization error angle, uniform on `[-π/L, π/L]` (0 in the CE limit).
pub fn sample_theta(levels: QuantLevels, stream: &mut RandomStream) -> f64 {
    match levels {
        QuantLevels::Infinite => 0.0,
        QuantLevels::Finite(_) => {
            let w = levels.max_error();
            stream.uniform_in(-w, w)
        }
    }
}

pub fn sample_v(m: u32, levels: QuantLevels, stream: &mut RandomStream) -> f64 {
    match levels {
        QuantLevels::Infinite => 1.0,
        QuantLevels::Finite(_) => v_from_theta(sample_theta(levels, stream), m),
    }
}

/// Draws `|h_i|` (Rayleigh, from a CN(0,1) tap) and an independent `θ_i`.
pub fn sample_quant_gain(m: u32, levels: QuantLevels, stream: &mut RandomStream) -> QuantGainSample {
    let h = stream.complex_normal().norm();
    let theta = sample_theta(levels, stream);
    let v = match levels {
        QuantLevels::Infinite => 1.0,
        QuantLevels::Finite(_) => v_from_theta(theta, m),
    };
    QuantGainSample {
        magnitude: h,
        v,
        alpha_i: h * v,
        theta,
    }
}

/// `sqrt(P_T/N) Σ |h_i| v_i` with fresh channel and angle draws.
///
/// This per-antenna sum never exceeds the true safety margin of the gain
/// (see [`sample_margin`]) and equals it for one antenna.
pub fn sample_alpha(config: &SystemConfig, stream: &mut RandomStream) -> f64 {
    let sum: f64 = (0..config.n_antennas)
        .map(|_| sample_quant_gain(config.psk_order, config.quant_levels, stream).alpha_i)
        .sum();
    sum * libm::sqrt(config.total_power / config.n_antennas as f64)
}

/// Exact margin `R(β) - |I(β)| cot(π/M)` of `β = sqrt(P_T/N) Σ |h_i| e^{jθ_i}`,
/// consuming the stream exactly like [`sample_alpha`].
pub fn sample_margin(config: &SystemConfig, stream: &mut RandomStream) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for _ in 0..config.n_antennas {
        let g = sample_quant_gain(config.psk_order, config.quant_levels, stream);
        re += g.magnitude * libm::cos(g.theta);
        im += g.magnitude * libm::sin(g.theta);
    }
    let scale = libm::sqrt(config.total_power / config.n_antennas as f64);
    scale * (re - libm::fabs(im) / libm::tan(PI / config.psk_order as f64))
}
