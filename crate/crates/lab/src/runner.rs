//! Multi-threaded SER sweeps.
//!
//! Blocks are computed in waves on a rayon pool and folded in block order,
//! so the output is identical to [`qce_core::run_ser`] for any worker count.

use rayon::prelude::*;
use rayon::ThreadPool;

use qce_core::engine::{BlockTally, PointAccumulator, Simulator};
use qce_core::{SerCurve, SerPoint, SystemConfig};

use crate::error::Result;

/// Blocks dispatched per worker in each wave.
const BLOCKS_PER_WORKER: usize = 2;

pub fn build_pool(workers: Option<usize>) -> Result<ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    Ok(builder.build()?)
}

/// Runs the configured sweep with `workers` threads (all cores when `None`).
pub fn run_ser_parallel(config: &SystemConfig, workers: Option<usize>) -> Result<SerCurve> {
    let pool = build_pool(workers)?;
    run_ser_in(&pool, config)
}

pub fn run_ser_in(pool: &ThreadPool, config: &SystemConfig) -> Result<SerCurve> {
    let sim = Simulator::new(config)?;
    let points = config
        .snr_grid_db
        .iter()
        .map(|&snr| run_point(pool, &sim, snr))
        .collect::<Result<Vec<_>>>()?;
    Ok(SerCurve {
        config: config.clone(),
        points,
    })
}

fn run_point(pool: &ThreadPool, sim: &Simulator, snr_db: f64) -> Result<SerPoint> {
    let wave = (pool.current_num_threads() * BLOCKS_PER_WORKER) as u64;
    let total = sim.block_count();
    let mut acc = PointAccumulator::new(sim.config());
    let mut next = 0;
    while next < total && !acc.is_done() {
        let end = (next + wave).min(total);
        let tallies: Vec<BlockTally> = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map(|b| sim.run_block(snr_db, b))
                .collect::<Result<Vec<_>, _>>()
        })?;
        for t in tallies {
            if acc.push(t) {
                break;
            }
        }
        next = end;
    }
    Ok(acc.finish(snr_db))
}
