//! Reproducible random streams.
//!
//! Every sampler is driven by a 64-bit master seed. Independent streams are
//! obtained with a counter-based split: the ChaCha8 generator keyed by the
//! master seed is moved to stream number `index`, so replica `i` always sees
//! the same numbers no matter which worker runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for stream `index` under `master`.
pub fn stream(master: u64, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Derive a child master seed, e.g. one per grid point of an experiment.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Number of replicas handled by one stream in batched Monte Carlo.
///
/// Fixed independently of the worker count so that block boundaries, and
/// therefore results, never depend on parallelism.
pub const BLOCK: usize = 4096;

/// Run `n` replicas split into fixed blocks, each block on its own stream,
/// and return the per-block outputs in block order.
pub fn blocked<T, F>(master: u64, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Rng, std::ops::Range<usize>) -> T + Sync,
{
    use rayon::prelude::*;
    let blocks = n.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(master, b as u64);
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(n);
            f(&mut rng, lo..hi)
        })
        .collect()
}
