//! Quantized matched-filter precoding `x = q_L(s h^*)` and its effective
//! scalar channel `h^T x = β s`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{wrap_phase, ComplexSample, QceAlphabet, QuantLevels, ZERO_MAGNITUDE};
use crate::rng::ChannelVector;

#[derive(Clone, Debug, PartialEq)]
pub struct PrecodeResult {
    /// Per-antenna transmit samples.
    pub transmit: Vec<ComplexSample>,
    /// Quantization error angles `arg(h_i x_i s^*)`, each within `[-π/L, π/L]`.
    pub theta: Vec<f64>,
    /// Effective gain with `h^T x = β s`.
    pub beta: ComplexSample,
}

fn check_channel(h: &ChannelVector) -> Result<()> {
    match h.entries.iter().position(|hi| hi.norm() < ZERO_MAGNITUDE) {
        Some(index) => Err(Error::ZeroChannelEntry { index }),
        None => Ok(()),
    }
}

/// Quantized MF precoder with `L = alphabet.levels()`.
pub fn quantized_mf(
    h: &ChannelVector,
    s: ComplexSample,
    alphabet: &QceAlphabet,
) -> Result<PrecodeResult> {
    check_channel(h)?;
    let n = h.len();
    let mut transmit = Vec::with_capacity(n);
    let mut theta = Vec::with_capacity(n);
    let mut sum = ComplexSample::new(0.0, 0.0);
    for hi in &h.entries {
        let target = (s * hi.conj()).arg();
        let (index, err) = alphabet.nearest(target);
        transmit.push(alphabet.points()[index]);
        let t = -err;
        theta.push(t);
        sum += ComplexSample::from_polar(hi.norm(), t);
    }
    Ok(PrecodeResult {
        transmit,
        theta,
        beta: sum * alphabet.amplitude(),
    })
}

/// Unquantized constant-envelope MF precoder (the `L = ∞` limit):
/// `x_i = sqrt(P_T/N) e^{-j arg h_i} s`, giving the real gain
/// `β = sqrt(P_T/N) ||h||_1`.
pub fn ce_mf(h: &ChannelVector, s: ComplexSample, total_power: f64) -> Result<PrecodeResult> {
    check_channel(h)?;
    let amplitude = libm::sqrt(total_power / h.len() as f64);
    let transmit = h
        .entries
        .iter()
        .map(|hi| ComplexSample::from_polar(amplitude, -hi.arg()) * s)
        .collect();
    Ok(PrecodeResult {
        transmit,
        theta: alloc::vec![0.0; h.len()],
        beta: ComplexSample::new(amplitude * h.norm_l1(), 0.0),
    })
}

/// Precoder for a fixed `(N, L, P_T)`, with an allocation-free path for the
/// Monte Carlo loop.
#[derive(Clone, Debug)]
pub struct Precoder {
    alphabet: Option<QceAlphabet>,
    amplitude: f64,
    total_power: f64,
}

impl Precoder {
    pub fn new(levels: QuantLevels, n_antennas: u32, total_power: f64) -> Result<Self> {
        let alphabet = match levels {
            QuantLevels::Finite(l) => Some(QceAlphabet::new(l, n_antennas, total_power)?),
            QuantLevels::Infinite => None,
        };
        if n_antennas == 0 {
            return Err(Error::InvalidArgument("precoder needs at least one antenna"));
        }
        Ok(Precoder {
            alphabet,
            amplitude: libm::sqrt(total_power / n_antennas as f64),
            total_power,
        })
    }

    pub fn alphabet(&self) -> Option<&QceAlphabet> {
        self.alphabet.as_ref()
    }

    pub fn precode(&self, h: &ChannelVector, s: ComplexSample) -> Result<PrecodeResult> {
        match &self.alphabet {
            Some(a) => quantized_mf(h, s, a),
            None => ce_mf(h, s, self.total_power),
        }
    }

    /// Noise-free received sample `h^T x` for symbol `s`.
    pub fn received(&self, h: &[ComplexSample], s: ComplexSample) -> Result<ComplexSample> {
        let mut y = ComplexSample::new(0.0, 0.0);
        match &self.alphabet {
            Some(a) => {
                for (index, hi) in h.iter().enumerate() {
                    if hi.norm() < ZERO_MAGNITUDE {
                        return Err(Error::ZeroChannelEntry { index });
                    }
                    let (k, _) = a.nearest((s * hi.conj()).arg());
                    y += hi * a.points()[k];
                }
            }
            None => {
                for (index, hi) in h.iter().enumerate() {
                    let r = hi.norm();
                    if r < ZERO_MAGNITUDE {
                        return Err(Error::ZeroChannelEntry { index });
                    }
                    y += ComplexSample::new(r * self.amplitude, 0.0) * s;
                }
            }
        }
        Ok(y)
    }
}

/// `β` rebuilt from the angles: `sqrt(P_T/N) Σ |h_i| e^{jθ_i}`.
pub fn beta_from_angles(h: &ChannelVector, theta: &[f64], total_power: f64) -> ComplexSample {
    let amplitude = libm::sqrt(total_power / h.len() as f64);
    h.entries
        .iter()
        .zip(theta)
        .map(|(hi, &t)| ComplexSample::from_polar(hi.norm(), wrap_phase(t)))
        .sum::<ComplexSample>()
        * amplitude
}
