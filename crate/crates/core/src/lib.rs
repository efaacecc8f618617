//! Quantized constant-envelope (QCE) transmission over a Rayleigh-fading
//! MISO downlink with M-PSK: the quantized matched-filter precoder, SEP
//! bounds built on the safety margin, the distributions behind them, a
//! reproducible Monte Carlo SER kernel and diversity-order fitting.
//!
//! The crate is `no_std` and needs only `alloc`. Parallel execution, file
//! formats and the command-line driver live in `qce-lab`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analytics;
pub mod distributions;
pub mod diversity;
pub mod engine;
pub mod error;
pub mod model;
pub mod precoding;
pub mod rng;

pub use analytics::{DiversityOrder, SafetyMargin, SepBounds};
pub use engine::{run_ser, SerCurve, SerPoint};
pub use error::{Error, Result};
pub use model::{ComplexSample, PskConstellation, QceAlphabet, QuantLevels, SystemConfig};
pub use rng::{ChannelVector, RandomStream};
