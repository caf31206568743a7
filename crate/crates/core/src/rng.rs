//! Per-chain random streams.
//!
//! Every chain draws from its own ChaCha8 stream keyed by `(seed, chain)`;
//! the step index is the stream's word position. Results therefore do not
//! depend on how chains are scheduled across worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type ChainRng = ChaCha8Rng;

pub fn chain_rng(seed: u64, chain: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

/// Runs `f` once per chain in parallel and returns the results in chain order.
pub fn par_chains<R, F>(chains: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..chains).into_par_iter().map(f).collect()
}

/// Chains are processed in fixed-size blocks so that per-block accumulators
/// can be merged in block order; block boundaries never depend on the pool.
pub const BLOCK: usize = 64;

pub fn par_blocks<R, F>(chains: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(std::ops::Range<usize>) -> R + Sync + Send,
{
    let blocks = chains.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| f(b * BLOCK..((b + 1) * BLOCK).min(chains)))
        .collect()
}
