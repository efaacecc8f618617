//! Monte Carlo SER estimation of `y = h^T q_L(s h^*) + n` with nearest-PSK
//! decoding.
//!
//! Trials are grouped into blocks of [`BLOCK_SIZE`]. Block `b` always draws
//! from stream `(seed, SER_BLOCK | b)`, at every SNR point, and blocks are
//! folded in index order. Any executor that computes blocks and hands the
//! tallies to [`PointAccumulator`] in order reproduces the sequential
//! result exactly.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::analytics::{
    closed_form_lower_lgtm, closed_form_upper_lgtm, ser_floor_lltm, AlphaSamples,
};
use crate::error::{Error, Result};
use crate::model::{
    nearest_psk_decode, sigma2_from_snr_db, ComplexSample, PskConstellation, SystemConfig,
};
use crate::precoding::Precoder;
use crate::rng::{fill_channel, tag, RandomStream};

pub const BLOCK_SIZE: u64 = 65_536;
/// Early stopping never triggers before this many trials.
pub const MIN_TRIALS_BEFORE_STOP: u64 = 10_000;
pub const MIN_RUN_TRIALS: u64 = 1_000;
const Z_95: f64 = 1.96;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BlockTally {
    pub trials: u64,
    pub errors: u64,
    pub degenerate: u64,
}

impl core::ops::AddAssign for BlockTally {
    fn add_assign(&mut self, rhs: Self) {
        self.trials += rhs.trials;
        self.errors += rhs.errors;
        self.degenerate += rhs.degenerate;
    }
}

/// Analytic columns attached to a simulated point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BoundColumns {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub up1: Option<f64>,
    pub lb1: Option<f64>,
    pub floor: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub ser: f64,
    /// 95% normal-approximation half width.
    pub ci_half_width: f64,
    /// Decisions made on an exactly-zero received sample.
    pub degenerate_decodes: u64,
    pub bounds: BoundColumns,
}

impl SerPoint {
    pub fn from_counts(snr_db: f64, trials: u64, errors: u64) -> Self {
        let ser = if trials == 0 { 0.0 } else { errors as f64 / trials as f64 };
        let ci_half_width = if trials == 0 {
            0.0
        } else {
            Z_95 * libm::sqrt(ser * (1.0 - ser) / trials as f64)
        };
        SerPoint {
            snr_db,
            trials,
            errors,
            ser,
            ci_half_width,
            degenerate_decodes: 0,
            bounds: BoundColumns::default(),
        }
    }

    /// Binomial standard error of `ser`.
    pub fn std_error(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            libm::sqrt(self.ser * (1.0 - self.ser) / self.trials as f64)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SerCurve {
    pub config: SystemConfig,
    pub points: Vec<SerPoint>,
}

/// Folds block tallies in index order and decides when a point is done.
#[derive(Clone, Debug)]
pub struct PointAccumulator {
    total: BlockTally,
    min_errors: Option<u64>,
    target_trials: u64,
    done: bool,
}

impl PointAccumulator {
    pub fn new(config: &SystemConfig) -> Self {
        PointAccumulator {
            total: BlockTally::default(),
            min_errors: config.min_errors,
            target_trials: config.trials,
            done: false,
        }
    }

    /// Adds the next block. Returns `true` once no more blocks are wanted;
    /// later pushes are ignored.
    pub fn push(&mut self, tally: BlockTally) -> bool {
        if self.done {
            return true;
        }
        self.total += tally;
        let stop_early = self.min_errors.is_some_and(|target| {
            self.total.errors >= target && self.total.trials >= MIN_TRIALS_BEFORE_STOP
        });
        self.done = stop_early || self.total.trials >= self.target_trials;
        self.done
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn finish(&self, snr_db: f64) -> SerPoint {
        let mut p = SerPoint::from_counts(snr_db, self.total.trials, self.total.errors);
        p.degenerate_decodes = self.total.degenerate;
        p
    }
}

/// Per-configuration simulation state shared by all blocks.
#[derive(Clone, Debug)]
pub struct Simulator {
    config: SystemConfig,
    constellation: PskConstellation,
    precoder: Precoder,
}

impl Simulator {
    pub fn new(config: &SystemConfig) -> Result<Self> {
        config.validate()?;
        if config.trials < MIN_RUN_TRIALS {
            return Err(Error::config(
                "trials",
                alloc::format!("need at least {MIN_RUN_TRIALS} trials per point"),
            ));
        }
        Ok(Simulator {
            config: config.clone(),
            constellation: config.constellation()?,
            precoder: Precoder::new(config.quant_levels, config.n_antennas, config.total_power)?,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    /// Number of blocks covering the full trial budget.
    pub fn block_count(&self) -> u64 {
        self.config.trials.div_ceil(BLOCK_SIZE)
    }

    fn block_len(&self, block: u64) -> u64 {
        let start = block * BLOCK_SIZE;
        BLOCK_SIZE.min(self.config.trials.saturating_sub(start))
    }

    pub fn run_block(&self, snr_db: f64, block: u64) -> Result<BlockTally> {
        let n = self.config.n_antennas as usize;
        let m = self.config.psk_order;
        let sigma = libm::sqrt(sigma2_from_snr_db(snr_db));
        let mut stream = RandomStream::tagged(self.config.seed, tag::SER_BLOCK, block);
        let mut h: Vec<ComplexSample> = Vec::with_capacity(n);
        let mut tally = BlockTally::default();
        for _ in 0..self.block_len(block) {
            fill_channel(&mut h, n, &mut stream);
            let sent = stream.index(m);
            let s = self.constellation.point(sent);
            let y = self.precoder.received(&h, s)? + stream.complex_normal() * sigma;
            let decision = nearest_psk_decode(y, &self.constellation);
            tally.trials += 1;
            tally.errors += u64::from(decision.index != sent);
            tally.degenerate += u64::from(decision.degenerate);
        }
        Ok(tally)
    }

    pub fn run_point(&self, snr_db: f64) -> Result<SerPoint> {
        let mut acc = PointAccumulator::new(&self.config);
        for block in 0..self.block_count() {
            if acc.push(self.run_block(snr_db, block)?) {
                break;
            }
        }
        Ok(acc.finish(snr_db))
    }
}

/// Single-threaded SER sweep over the configured SNR grid.
pub fn run_ser(config: &SystemConfig) -> Result<SerCurve> {
    let sim = Simulator::new(config)?;
    let points = config
        .snr_grid_db
        .iter()
        .map(|&snr| sim.run_point(snr))
        .collect::<Result<Vec<_>>>()?;
    Ok(SerCurve {
        config: config.clone(),
        points,
    })
}

/// Adds the averaged sandwich columns (from `alpha_samples` safety-margin
/// draws) and whichever closed-form columns apply to this `(L, M)`.
pub fn attach_bounds(curve: &SerCurve, alpha_samples: usize) -> Result<SerCurve> {
    let samples = AlphaSamples::draw_seeded(&curve.config, alpha_samples, curve.config.seed)?;
    attach_bounds_with(curve, &samples)
}

pub fn attach_bounds_with(curve: &SerCurve, samples: &AlphaSamples) -> Result<SerCurve> {
    if curve.points.is_empty() {
        return Err(Error::InsufficientData("curve has no points".into()));
    }
    let config = &curve.config;
    let order = config.quant_levels.cmp_order(config.psk_order);
    let mut out = curve.clone();
    for p in &mut out.points {
        let sa = samples.bounds_at(p.snr_db)?;
        p.bounds = BoundColumns {
            lower: Some(sa.bounds.lower),
            upper: Some(sa.bounds.upper),
            up1: None,
            lb1: None,
            floor: None,
        };
        match order {
            Ordering::Greater => {
                p.bounds.up1 = Some(closed_form_upper_lgtm(config, p.snr_db)?.min(1.0));
                p.bounds.lb1 = Some(closed_form_lower_lgtm(config, p.snr_db)?);
            }
            Ordering::Less => p.bounds.floor = Some(ser_floor_lltm(config)?),
            Ordering::Equal => {}
        }
    }
    Ok(out)
}
