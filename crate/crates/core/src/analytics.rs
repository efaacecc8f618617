//! Closed-form and semi-analytic quantities: safety margin, Q-function,
//! the fixed-gain SEP sandwich `Q(·) <= SEP <= 2Q(·)`, its average over the
//! fading and quantization errors, the `L > M` closed-form bounds, the
//! `L < M` error floor and the predicted diversity order.
//!
//! With total power `P_T` the effective SNR is `P_T ρ`; all closed forms
//! below use it.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use core::fmt;

use crate::distributions::sample_margin;
use crate::error::{Error, Result};
use crate::model::{rho_from_snr_db, sigma2_from_snr_db, ComplexSample, QuantLevels, SystemConfig};
use crate::rng::RandomStream;

pub const DEFAULT_CRAIG_PANELS: u32 = 40;

/// Distance from the noise-free received point to the nearest decision
/// boundary of the transmitted symbol. Negative when it lies outside.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct SafetyMargin(pub f64);

impl SafetyMargin {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn safety_margin(beta: ComplexSample, m: u32) -> SafetyMargin {
    SafetyMargin(beta.re - beta.im.abs() * cot_pi_over(m))
}

fn cot_pi_over(m: u32) -> f64 {
    1.0 / libm::tan(PI / m as f64)
}

fn sin_pi_over(m: u32) -> f64 {
    libm::sin(PI / m as f64)
}

/// Standard Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// 8-point Gauss-Legendre nodes (positive half) and weights on `[-1, 1]`.
const GL8: [(f64, f64); 4] = [
    (0.18343464249564978, 0.36268378337836177),
    (0.525532409916329, 0.31370664587788705),
    (0.7966664774136267, 0.22238103445337434),
    (0.9602898564975362, 0.10122853629037669),
];

/// Craig's finite-range form `(1/π) ∫_0^{π/2} exp(-x²/(2 sin²θ)) dθ`.
///
/// For small `x` the integrand climbs from 0 to 1 within `θ ≈ x`, so a
/// uniform rule needs `O(1/x)` nodes. Instead `[0, π/2]` is cut into
/// `panels` dyadic pieces `[π/2^{k+2}, π/2^{k+1}]`, each integrated by
/// 8-point Gauss-Legendre; the omitted sliver near 0 costs at most
/// `2^-(panels+1)`.
pub fn q_function_craig(x: f64, panels: u32) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidArgument("Craig form needs x >= 0"));
    }
    if !(8..=1000).contains(&panels) {
        return Err(Error::InvalidArgument("Craig quadrature needs 8 to 1000 panels"));
    }
    let half_x2 = 0.5 * x * x;
    let f = |t: f64| {
        let s = libm::sin(t);
        libm::exp(-half_x2 / (s * s))
    };
    let mut hi = FRAC_PI_2;
    let mut sum = 0.0;
    for _ in 0..panels {
        let (mid, half) = (0.75 * hi, 0.25 * hi);
        sum += half * GL8.iter().map(|&(g, w)| w * (f(mid - half * g) + f(mid + half * g))).sum::<f64>();
        hi *= 0.5;
    }
    Ok(sum / PI)
}

/// Lower and upper SEP bounds. `upper` is clipped to 1; `upper_raw = 2 lower`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SepBounds {
    pub lower: f64,
    pub upper: f64,
    pub upper_raw: f64,
}

impl SepBounds {
    fn from_lower(lower: f64) -> Self {
        let upper_raw = 2.0 * lower;
        SepBounds {
            lower,
            upper: upper_raw.min(1.0),
            upper_raw,
        }
    }
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2.is_finite() && sigma2 > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSigma(sigma2))
    }
}

/// SEP bounds for `y = βs + n` with a fixed gain `β`.
pub fn sep_sandwich_fixed_beta(beta: ComplexSample, m: u32, sigma2: f64) -> Result<SepBounds> {
    if m < 2 {
        return Err(Error::InvalidArgument("PSK order must be at least 2"));
    }
    check_sigma2(sigma2)?;
    let alpha = safety_margin(beta, m).value();
    let arg = SQRT_2 * sin_pi_over(m) * alpha / libm::sqrt(sigma2);
    Ok(SepBounds::from_lower(q_function(arg)))
}

/// Averaged SEP bounds with the Monte Carlo standard error of the
/// estimated expectation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemiAnalyticBounds {
    pub bounds: SepBounds,
    /// Standard error of `bounds.lower`.
    pub std_error: f64,
    pub samples: usize,
}

/// A reusable set of exact safety-margin draws `R(β) - |I(β)| cot(π/M)`
/// for one configuration. The per-antenna sum from `sample_alpha` would
/// understate the margin for `N > 1` and break the lower bound.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaSamples {
    psk_order: u32,
    values: Vec<f64>,
}

impl AlphaSamples {
    pub fn draw(config: &SystemConfig, count: usize, stream: &mut RandomStream) -> Result<Self> {
        config.validate()?;
        let values = (0..count).map(|_| sample_margin(config, stream)).collect();
        Ok(AlphaSamples {
            psk_order: config.psk_order,
            values,
        })
    }

    /// Draws `count` samples split over chunked substreams of `seed`, so the
    /// result does not depend on how chunks are scheduled.
    pub fn draw_seeded(config: &SystemConfig, count: usize, seed: u64) -> Result<Self> {
        const CHUNK: usize = 1 << 16;
        config.validate()?;
        let mut values = Vec::with_capacity(count);
        let mut chunk = 0u64;
        while values.len() < count {
            let mut stream = RandomStream::tagged(seed, crate::rng::tag::ALPHA_SAMPLES, chunk);
            let take = CHUNK.min(count - values.len());
            values.extend((0..take).map(|_| sample_margin(config, &mut stream)));
            chunk += 1;
        }
        Ok(AlphaSamples {
            psk_order: config.psk_order,
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bounds_at(&self, snr_db: f64) -> Result<SemiAnalyticBounds> {
        if self.values.len() < 2 {
            return Err(Error::InsufficientData(alloc::format!(
                "need at least 2 safety-margin samples, have {}",
                self.values.len()
            )));
        }
        let scale = SQRT_2 * sin_pi_over(self.psk_order) / libm::sqrt(sigma2_from_snr_db(snr_db));
        let n = self.values.len() as f64;
        // Welford keeps the variance accurate when Q values are tiny.
        let (mut mean, mut m2) = (0.0f64, 0.0f64);
        for (k, &a) in self.values.iter().enumerate() {
            let q = q_function(scale * a);
            let d = q - mean;
            mean += d / (k + 1) as f64;
            m2 += d * (q - mean);
        }
        let std_error = libm::sqrt(m2 / (n - 1.0) / n);
        Ok(SemiAnalyticBounds {
            bounds: SepBounds::from_lower(mean),
            std_error,
            samples: self.values.len(),
        })
    }
}

/// Averages the fixed-gain lower bound over sampled safety margins.
pub fn sep_bounds_semi_analytic(
    config: &SystemConfig,
    snr_db: f64,
    alpha_samples: usize,
    stream: &mut RandomStream,
) -> Result<SemiAnalyticBounds> {
    AlphaSamples::draw(config, alpha_samples, stream)?.bounds_at(snr_db)
}

/// `cos(π/L) - sin(π/L) cot(π/M)`: the worst-case per-antenna margin factor.
/// Positive exactly when `L > M`; 1 in the CE limit.
pub fn c0(m: u32, levels: QuantLevels) -> f64 {
    match levels {
        QuantLevels::Infinite => 1.0,
        QuantLevels::Finite(l) => {
            let t = PI / l as f64;
            libm::cos(t) - libm::sin(t) * cot_pi_over(m)
        }
    }
}

fn require_full_order(config: &SystemConfig) -> Result<()> {
    if config.quant_levels.cmp_order(config.psk_order) == Ordering::Greater {
        Ok(())
    } else {
        Err(Error::Domain("closed-form L > M bound needs more levels than PSK points"))
    }
}

/// Chernoff-type upper bound `(1 + sin²(π/M) c0² ρ/N)^{-N}`, valid for `L > M`.
pub fn closed_form_upper_lgtm(config: &SystemConfig, snr_db: f64) -> Result<f64> {
    require_full_order(config)?;
    Ok(closed_form_upper_at_rho(config, config.total_power * rho_from_snr_db(snr_db)))
}

pub(crate) fn closed_form_upper_at_rho(config: &SystemConfig, rho: f64) -> f64 {
    let n = config.n_antennas as f64;
    let s = sin_pi_over(config.psk_order);
    let c = c0(config.psk_order, config.quant_levels);
    libm::pow(1.0 + s * s * c * c * rho / n, -n)
}

/// Lower bound `(1 + sin²(π/M) ρ)^{-N} / (2 sqrt(π (N + 1/2)))`, valid for `L > M`.
pub fn closed_form_lower_lgtm(config: &SystemConfig, snr_db: f64) -> Result<f64> {
    require_full_order(config)?;
    Ok(closed_form_lower_at_rho(config, config.total_power * rho_from_snr_db(snr_db)))
}

pub(crate) fn closed_form_lower_at_rho(config: &SystemConfig, rho: f64) -> f64 {
    let n = config.n_antennas as f64;
    let s = sin_pi_over(config.psk_order);
    libm::pow(1.0 + s * s * rho, -n) / (2.0 * libm::sqrt(PI * (n + 0.5)))
}

/// SEP floor `(1 - L/M)^N / 2` for `L < M`, valid at every SNR.
pub fn ser_floor_lltm(config: &SystemConfig) -> Result<f64> {
    match config.quant_levels {
        QuantLevels::Finite(l) if l < config.psk_order => {
            let p = 1.0 - l as f64 / config.psk_order as f64;
            Ok(0.5 * libm::pow(p, config.n_antennas as f64))
        }
        _ => Err(Error::Domain("error floor bound needs fewer levels than PSK points")),
    }
}

/// `E[exp(t ||h||²)] = (1 - t)^{-n}` for `h ~ CN(0, I_n)`.
pub fn mgf_chisq_norm(t: f64, n: u32) -> Result<f64> {
    if t.is_nan() || t >= 1.0 {
        return Err(Error::Domain("MGF of ||h||² exists only for t < 1"));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1"));
    }
    Ok(libm::pow(1.0 - t, -(n as f64)))
}

/// A nonnegative rational `num/den` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DiversityOrder {
    pub num: u32,
    pub den: u32,
}

impl DiversityOrder {
    pub fn new(num: u32, den: u32) -> Self {
        let g = gcd(num, den).max(1);
        DiversityOrder {
            num: num / g,
            den: den / g,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for DiversityOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Diversity order of the `L`-level quantized MF precoder: `N`, `N/2` or 0
/// for `L > M`, `L = M`, `L < M`.
pub fn predicted_diversity(config: &SystemConfig) -> DiversityOrder {
    let n = config.n_antennas;
    match config.quant_levels.cmp_order(config.psk_order) {
        Ordering::Greater => DiversityOrder::new(n, 1),
        Ordering::Equal => DiversityOrder::new(n, 2),
        Ordering::Less => DiversityOrder::new(0, 1),
    }
}
